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
#include <random>

#include "gtest/gtest.h"

#include "ghzsim/error.h"
#include "ghzsim/source.h"

using namespace ghzsim;

namespace {

// Sum of k iid geometric variables: negative binomial.
double negbin(int n, int k, double mu) {
    double p = mu / (1.0 + mu);
    return std::exp(std::lgamma(n + k) - std::lgamma(n + 1.0) - std::lgamma(k)) * std::pow(p, n) *
           std::pow(1.0 - p, k);
}

}  // namespace

TEST(source, thermal_pmf) {
    double mu = 0.1;
    EXPECT_NEAR(pair_number_pmf(mu, PairStatistics::kThermal, 0), 1.0 / 1.1, 1e-15);
    EXPECT_NEAR(pair_number_pmf(mu, PairStatistics::kThermal, 1), 0.1 / (1.1 * 1.1), 1e-15);
    EXPECT_NEAR(pair_number_pmf(mu, PairStatistics::kThermal, 2), 0.01 / (1.1 * 1.1 * 1.1), 1e-15);
    double total = 0.0;
    double mean = 0.0;
    for (int n = 0; n < 400; n++) {
        double p = pair_number_pmf(mu, PairStatistics::kThermal, n);
        total += p;
        mean += n * p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(mean, mu, 1e-12);
    EXPECT_EQ(pair_number_pmf(0.0, PairStatistics::kThermal, 0), 1.0);
    EXPECT_EQ(pair_number_pmf(0.0, PairStatistics::kThermal, 1), 0.0);
    EXPECT_EQ(pair_number_pmf(mu, PairStatistics::kThermal, -1), 0.0);
}

TEST(source, poisson_pmf) {
    double mu = 0.3;
    EXPECT_NEAR(pair_number_pmf(mu, PairStatistics::kPoisson, 2), std::exp(-mu) * mu * mu / 2.0, 1e-15);
}

TEST(source, mean_pairs_linear_in_power) {
    SPDCConfig spdc;
    spdc.mu_per_mw = 1.7e-4;
    for (double p : {0.0, 25.0, 50.0, 100.0}) {
        PumpConfig pump = PumpConfig::balanced({1}, p);
        EXPECT_NEAR(mean_pairs(pump, spdc, 1), 1.7e-4 * p, 1e-15);
        EXPECT_EQ(mean_pairs(pump, spdc, 2), 0.0);
    }
    PumpConfig four = PumpConfig::four_beam(22.5, 22.5, 100.0);
    for (int b = 1; b <= 4; b++) {
        EXPECT_NEAR(four.path_power_mw(b), 25.0, 1e-12);
        EXPECT_NEAR(std::abs(four.paths[b - 1].amplitude), 0.5, 1e-12);
    }
}

TEST(source, pump_configs) {
    PumpConfig two = PumpConfig::two_beam(22.5, 10.0);
    EXPECT_NEAR(std::norm(two.paths[0].amplitude), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(two.paths[1].amplitude), 0.5, 1e-12);
    EXPECT_FALSE(two.paths[2].pumped);

    PumpConfig only1 = PumpConfig::two_beam(0.0, 10.0);
    EXPECT_FALSE(only1.paths[1].pumped);
    EXPECT_NEAR(only1.path_power_mw(1), 10.0, 1e-12);

    PumpConfig blocked = PumpConfig::four_beam(22.5, 22.5, 100.0);
    blocked.block(2).block(4);
    EXPECT_NEAR(blocked.path_power_mw(1), 50.0, 1e-12);
    EXPECT_NEAR(blocked.path_power_mw(3), 50.0, 1e-12);
    EXPECT_EQ(blocked.path_power_mw(2), 0.0);
    EXPECT_NO_THROW(blocked.validate());

    PumpConfig bad;
    bad.power_mw = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    PumpConfig unnorm;
    unnorm.paths[0] = {true, 0.5, 0.0};
    EXPECT_THROW(unnorm.validate(), ConfigError);
    EXPECT_THROW(PumpConfig::balanced({5}, 1.0), ConfigError);
}

TEST(source, emitted_state_amplitudes) {
    SPDCConfig spdc{0.01, PairStatistics::kThermal, 2};
    PumpConfig pump = PumpConfig::balanced({1}, 10.0);
    FockState s = emit_pulse_state(pump, spdc, 4);
    double mu = 0.1;
    double norm = 0.0;
    for (int n = 0; n <= 2; n++) {
        norm += pair_number_pmf(mu, PairStatistics::kThermal, n);
    }
    for (int n = 0; n <= 2; n++) {
        Occupation occ;
        if (n > 0) {
            occ = Occupation{{Mode{Path::k1, Pol::kH}, n}, {Mode{Path::k1, Pol::kV}, n}};
        }
        EXPECT_NEAR(std::norm(s.amplitude(occ)), pair_number_pmf(mu, PairStatistics::kThermal, n) / norm, 1e-12);
    }
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    EXPECT_THROW(emit_pulse_state(pump, spdc, 3), ConfigError);
}

TEST(source, sector_weights_negative_binomial) {
    for (double mu : {1e-3, 0.05, 0.4}) {
        SPDCConfig spdc{mu / 25.0, PairStatistics::kThermal, 3};
        PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
        auto w = pair_sector_weights(pump, spdc);
        ASSERT_EQ(w.size(), 4u);
        double norm = 0.0;
        for (int n = 0; n <= 3; n++) {
            norm += negbin(n, 4, mu);
        }
        for (int n = 0; n <= 3; n++) {
            EXPECT_NEAR(w[n], negbin(n, 4, mu) / norm, 1e-12) << mu << " " << n;
        }
    }
}

TEST(source, two_pair_sector_quadratic_in_power) {
    SPDCConfig spdc{1.7e-4, PairStatistics::kThermal, 3};
    double prev = 0.0;
    for (double p : {5.0, 10.0, 20.0}) {
        auto w = pair_sector_weights(PumpConfig::four_beam(22.5, 22.5, p), spdc);
        if (prev > 0.0) {
            EXPECT_NEAR(w[2] / prev, 4.0, 0.02);
        }
        prev = w[2];
    }
}

TEST(source, sector_state_is_normalized_and_selected) {
    SPDCConfig spdc{2e-3, PairStatistics::kThermal, 3};
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 50.0);
    FockState two = pair_sector_state(pump, spdc, 2);
    EXPECT_NEAR(two.norm_squared(), 1.0, 1e-12);
    for (const auto &[occ, a] : two.terms()) {
        EXPECT_EQ(occ.total(), 4);
    }
    // Equal pumping: 4 double-emission terms and 6 cross terms, thermal weight equal per pair pattern.
    EXPECT_EQ(two.terms().size(), 10u);
    EXPECT_THROW(pair_sector_state(pump, spdc, 4), ConfigError);
}

TEST(source, sampled_pairs_match_sector_weights) {
    SPDCConfig spdc{0.05 / 25.0, PairStatistics::kThermal, 3};
    PumpConfig pump = PumpConfig::four_beam(22.5, 22.5, 100.0);
    auto w = pair_sector_weights(pump, spdc);
    std::mt19937_64 rng(99);
    const int n = 200000;
    std::vector<double> hist(4, 0.0);
    for (int i = 0; i < n; i++) {
        PulseDraw d = sample_pulse(pump, spdc, rng);
        int total = d.pairs[0] + d.pairs[1] + d.pairs[2] + d.pairs[3];
        ASSERT_LE(total, 3);
        EXPECT_EQ(d.occupation.total(), 2 * total);
        hist[total] += 1.0;
    }
    for (int k = 0; k <= 2; k++) {
        double sd = std::sqrt(w[k] * (1 - w[k]) / n);
        EXPECT_NEAR(hist[k] / n, w[k], 5 * sd + 1e-6) << k;
    }
    PulseDraw a = sample_pulse(pump, spdc, std::uint64_t{7});
    PulseDraw b = sample_pulse(pump, spdc, std::uint64_t{7});
    EXPECT_EQ(a.pairs, b.pairs);
}

TEST(source, pulse_train) {
    auto t = pulse_train_times(76.0, 3);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_NEAR(t[1], 13.157894736842104, 1e-12);
    EXPECT_NEAR(t[2], 2 * 13.157894736842104, 1e-12);
    EXPECT_THROW(pulse_train_times(76.0, 0), ConfigError);
    EXPECT_THROW(pulse_period_ns(0.0), ConfigError);
}
