// Copyright 2026 The ghzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "gtest/gtest.h"

#include "ghzsim/error.h"
#include "ghzsim/experiments.h"

using namespace ghzsim;

namespace {

CalibrationSettings quick(double hidden, double hidden_d = 0.0) {
    CalibrationSettings c;
    c.trials = 200000;
    c.hidden_offset_ns = hidden;
    c.hidden_d_offset_ns = hidden_d;
    return c;
}

SimSettings bright() {
    SimSettings s;
    s.spdc.mu_per_mw = 2e-3;
    return s;
}

}  // namespace

TEST(calibration, recovers_planted_offset) {
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
    double step = TriggerChain{}.dg535_step_ns;
    for (double hidden : {0.0, 0.35, 3.7, 9.215}) {
        CalibrationResult r = delay_calibration(bright(), pump, quick(hidden), 11);
        EXPECT_NEAR(r.recovered_offset_ns, hidden, step + 1e-9) << hidden;
        EXPECT_NEAR(r.recovered_offset_ch2_ns, hidden, step + 1e-9) << hidden;
        EXPECT_NO_THROW(r.chain.validate());
    }
}

TEST(calibration, calibrated_chain_matches_ideal) {
    SimSettings s = bright();
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
    CalibrationResult r = delay_calibration(s, pump, quick(0.0), 12);
    auto dets = s.detectors;
    PortTiming timing = s.timing();
    align_herald_detectors(dets, timing);
    TriggerChain ideal = matched_chain(s.chain, dets, timing);
    EXPECT_NEAR(r.chain.dg535_ch1_ns, ideal.dg535_ch1_ns, ideal.dg535_step_ns + 1e-9);
    EXPECT_NEAR(r.chain.dg535_ch2_ns, ideal.dg535_ch2_ns, ideal.dg535_step_ns + 1e-9);
    EXPECT_NEAR(r.detectors.at(Path::kD).internal_delay_ns, dets.at(Path::kD).internal_delay_ns,
                ideal.dg535_step_ns + 1e-9);
    EXPECT_EQ(r.chain.source, s.chain.source);
    EXPECT_EQ(r.scans.size(), 6u);
}

TEST(calibration, recovers_planted_detector_offset) {
    SimSettings s = bright();
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
    auto dets = s.detectors;
    align_herald_detectors(dets, s.timing());
    for (double hidden_d : {0.2, 0.45}) {
        CalibrationResult r = delay_calibration(s, pump, quick(0.0, hidden_d), 13);
        EXPECT_NEAR(r.detectors.at(Path::kD).internal_delay_ns, dets.at(Path::kD).internal_delay_ns - hidden_d,
                    s.chain.dg535_step_ns + 1e-9)
            << hidden_d;
    }
    // Large offsets clip the usable delay range at zero; the photon must still sit inside the gate.
    double arrival = s.timing().arrival_offset(Path::kD);
    double gate = dets.at(Path::kD).gate_ns;
    for (double hidden_d : {1.1, 2.0}) {
        CalibrationResult r = delay_calibration(s, pump, quick(0.0, hidden_d), 14);
        double open = r.detectors.at(Path::kD).internal_delay_ns + hidden_d;
        EXPECT_GE(arrival, open) << hidden_d;
        EXPECT_LE(arrival, open + gate) << hidden_d;
    }
}

TEST(calibration, deterministic_in_seed) {
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
    CalibrationResult a = delay_calibration(bright(), pump, quick(2.0), 5);
    CalibrationResult b = delay_calibration(bright(), pump, quick(2.0), 5);
    ASSERT_EQ(a.scans.size(), b.scans.size());
    for (std::size_t k = 0; k < a.scans.size(); k++) {
        EXPECT_EQ(a.scans[k].counts, b.scans[k].counts);
    }
}

TEST(calibration, blocked_paths_fail) {
    EXPECT_THROW(delay_calibration(bright(), PumpConfig::balanced({}, 100.0), quick(0.0), 1), SimulationError);
    CalibrationSettings zero = quick(0.0);
    zero.trials = 0;
    EXPECT_THROW(delay_calibration(bright(), PumpConfig::four_beam(22.5, 22.5, 100.0), zero, 1), ConfigError);
}

TEST(calibration, hom_calibration_round_trip) {
    SimSettings truth;
    truth.hwp_error_deg = 1.7;
    truth.spdc.mu_per_mw = 2.2e-4;
    double low = hom_minimum_exact(truth, 25.0);
    double high = hom_minimum_exact(truth, 100.0);
    HomCalibration c = calibrate_hom(SimSettings{}, {25.0, low}, {100.0, high}, 50.0);
    EXPECT_NEAR(c.hwp_error_deg, 1.7, 1e-3);
    EXPECT_NEAR(c.mu_per_mw / 2.2e-4, 1.0, 1e-3);
    EXPECT_NEAR(c.predicted_min, hom_minimum_exact(truth, 50.0), 1e-5);
    EXPECT_NEAR(c.fitted_low, low, 1e-6);
    EXPECT_NEAR(c.fitted_high, high, 1e-6);

    EXPECT_THROW(calibrate_hom(SimSettings{}, {100.0, 0.05}, {25.0, 0.07}, 50.0), ConfigError);
    EXPECT_THROW(calibrate_hom(SimSettings{}, {25.0, 0.07}, {100.0, 0.05}, 50.0), ConfigError);
}
