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

#ifndef GHZSIM_SOURCE_H
#define GHZSIM_SOURCE_H

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "ghzsim/fock.h"

namespace ghzsim {

struct PumpPath {
    bool pumped = false;
    Complex amplitude = 0.0;
    /// Arrival of the pump pulse at the crystal relative to the reference, ps.
    double arrival_ps = 0.0;
};

/// Pump settings. Path amplitudes are normalized over pumped paths and set
/// how `power_mw` is shared between beams (power fraction = |amplitude|^2).
struct PumpConfig {
    double power_mw = 25.0;
    double rep_rate_mhz = 76.0;
    std::array<PumpPath, 4> paths{};
    /// Plates before the first and second pump displacers, degrees. NaN when
    /// the amplitudes were set directly.
    double hwp_bd1_deg = 22.5;
    double hwp_bd2_deg = 22.5;

    void validate() const;
    double path_power_mw(int beam) const;
    /// Sets a beam's amplitude to zero and renormalizes the rest.
    PumpConfig &block(int beam);
    /// Sets the four arrival offsets (ps) for beams 1..4.
    PumpConfig &with_arrivals(const std::array<double, 4> &arrival_ps);

    /// Equal-power pumping of the listed beams.
    static PumpConfig balanced(const std::vector<int> &beams, double power_mw);
    /// Two-beam source: a plate at theta before the splitting displacer sends
    /// cos(2 theta) to beam 1 and sin(2 theta) to beam 2.
    static PumpConfig two_beam(double hwp_deg, double power_mw);
    /// Four-beam source: plate before BD1 splits into beam pairs (1,3) and
    /// (2,4); plate before BD2 splits each pair.
    static PumpConfig four_beam(double hwp_bd1_deg, double hwp_bd2_deg, double power_mw);
};

enum class PairStatistics : std::uint8_t { kThermal, kPoisson };

struct SPDCConfig {
    /// Mean pairs per pulse per path per mW of that path's pump power.
    double mu_per_mw = 2e-3;
    PairStatistics statistics = PairStatistics::kThermal;
    /// Maximum total pairs per pulse.
    int truncation = 2;

    void validate() const;
};

double mean_pairs(const PumpConfig &pump, const SPDCConfig &spdc, int beam);
/// Untruncated single-path pair-number distribution P(n).
double pair_number_pmf(double mu, PairStatistics stats, int n);

/// Per-pulse emitted state: product over pumped paths of the pair-number
/// superposition, truncated at spdc.truncation pairs in total and normalized.
/// Signal is H and idler V on each beam path, at the pump arrival time.
FockState emit_pulse_state(const PumpConfig &pump, const SPDCConfig &spdc, int fock_truncation = kDefaultTruncation);

/// Probability of k pairs in total, k = 0..spdc.truncation, under the
/// truncated joint distribution.
std::vector<double> pair_sector_weights(const PumpConfig &pump, const SPDCConfig &spdc);

/// Normalized k-pair component of emit_pulse_state.
FockState pair_sector_state(const PumpConfig &pump, const SPDCConfig &spdc, int pairs);

struct PulseDraw {
    std::array<int, 4> pairs{};
    Occupation occupation;
};

PulseDraw sample_pulse(const PumpConfig &pump, const SPDCConfig &spdc, std::mt19937_64 &rng);
PulseDraw sample_pulse(const PumpConfig &pump, const SPDCConfig &spdc, std::uint64_t seed);

double pulse_period_ns(double rep_rate_mhz);
std::vector<double> pulse_train_times(double rep_rate_mhz, std::size_t n_pulses);

}  // namespace ghzsim

#endif
