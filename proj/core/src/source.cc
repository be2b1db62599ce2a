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

#include "ghzsim/source.h"

#include <cmath>
#include <numbers>

#include "ghzsim/error.h"

namespace ghzsim {

namespace {

Mode signal_mode(const PumpConfig &pump, int beam) {
    return {beam_path(beam), Pol::kH, pump.paths[beam - 1].arrival_ps};
}

Mode idler_mode(const PumpConfig &pump, int beam) {
    return {beam_path(beam), Pol::kV, pump.paths[beam - 1].arrival_ps};
}

void renormalize(PumpConfig &pump) {
    double total = 0.0;
    for (auto &p : pump.paths) {
        if (std::abs(p.amplitude) < 1e-15) {
            p.pumped = false;
            p.amplitude = 0.0;
        }
        if (p.pumped) {
            total += std::norm(p.amplitude);
        }
    }
    if (total == 0.0) {
        return;
    }
    for (auto &p : pump.paths) {
        p.amplitude /= std::sqrt(total);
    }
}

double radians(double deg) {
    return deg * std::numbers::pi / 180.0;
}

}  // namespace

void PumpConfig::validate() const {
    if (!(power_mw >= 0.0) || !std::isfinite(power_mw)) {
        throw ConfigError("pump power must be nonnegative");
    }
    if (!(rep_rate_mhz > 0.0)) {
        throw ConfigError("pump repetition rate must be positive");
    }
    double total = 0.0;
    bool any = false;
    for (const auto &p : paths) {
        if (!std::isfinite(p.arrival_ps)) {
            throw ConfigError("pump arrival offsets must be finite");
        }
        if (p.pumped) {
            any = true;
            total += std::norm(p.amplitude);
        }
    }
    if (any && std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("pump path amplitudes must be normalized over pumped paths");
    }
}

double PumpConfig::path_power_mw(int beam) const {
    const auto &p = paths.at(static_cast<size_t>(beam - 1));
    return p.pumped ? power_mw * std::norm(p.amplitude) : 0.0;
}

PumpConfig &PumpConfig::block(int beam) {
    beam_path(beam);
    paths[beam - 1].pumped = false;
    paths[beam - 1].amplitude = 0.0;
    renormalize(*this);
    return *this;
}

PumpConfig &PumpConfig::with_arrivals(const std::array<double, 4> &arrival_ps) {
    for (size_t k = 0; k < 4; k++) {
        paths[k].arrival_ps = arrival_ps[k];
    }
    return *this;
}

PumpConfig PumpConfig::balanced(const std::vector<int> &beams, double power_mw) {
    PumpConfig pump;
    pump.power_mw = power_mw;
    pump.hwp_bd1_deg = std::nan("");
    pump.hwp_bd2_deg = std::nan("");
    if (beams.empty()) {
        return pump;
    }
    for (int b : beams) {
        beam_path(b);
        pump.paths[b - 1].pumped = true;
        pump.paths[b - 1].amplitude = 1.0;
    }
    renormalize(pump);
    return pump;
}

PumpConfig PumpConfig::two_beam(double hwp_deg, double power_mw) {
    PumpConfig pump;
    pump.power_mw = power_mw;
    pump.hwp_bd1_deg = hwp_deg;
    pump.hwp_bd2_deg = std::nan("");
    double c = std::cos(2.0 * radians(hwp_deg));
    double s = std::sin(2.0 * radians(hwp_deg));
    pump.paths[0] = {true, c, 0.0};
    pump.paths[1] = {true, s, 0.0};
    renormalize(pump);
    return pump;
}

PumpConfig PumpConfig::four_beam(double hwp_bd1_deg, double hwp_bd2_deg, double power_mw) {
    PumpConfig pump;
    pump.power_mw = power_mw;
    pump.hwp_bd1_deg = hwp_bd1_deg;
    pump.hwp_bd2_deg = hwp_bd2_deg;
    double c1 = std::cos(2.0 * radians(hwp_bd1_deg));
    double s1 = std::sin(2.0 * radians(hwp_bd1_deg));
    double c2 = std::cos(2.0 * radians(hwp_bd2_deg));
    double s2 = std::sin(2.0 * radians(hwp_bd2_deg));
    pump.paths[0] = {true, c1 * c2, 0.0};
    pump.paths[2] = {true, c1 * s2, 0.0};
    pump.paths[1] = {true, s1 * c2, 0.0};
    pump.paths[3] = {true, s1 * s2, 0.0};
    renormalize(pump);
    return pump;
}

void SPDCConfig::validate() const {
    if (!(mu_per_mw >= 0.0) || !std::isfinite(mu_per_mw)) {
        throw ConfigError("mu_per_mw must be nonnegative");
    }
    if (truncation < 1) {
        throw ConfigError("pair truncation must be at least 1");
    }
}

double mean_pairs(const PumpConfig &pump, const SPDCConfig &spdc, int beam) {
    return spdc.mu_per_mw * pump.path_power_mw(beam);
}

double pair_number_pmf(double mu, PairStatistics stats, int n) {
    if (n < 0) {
        return 0.0;
    }
    if (mu == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    if (stats == PairStatistics::kThermal) {
        return std::exp(n * std::log(mu) - (n + 1) * std::log1p(mu));
    }
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

FockState emit_pulse_state(const PumpConfig &pump, const SPDCConfig &spdc, int fock_truncation) {
    pump.validate();
    spdc.validate();
    if (2 * spdc.truncation > fock_truncation) {
        throw ConfigError(
            "pair truncation " + std::to_string(spdc.truncation) + " needs a Fock truncation of at least " +
            std::to_string(2 * spdc.truncation) + " photons");
    }
    FockState state(2 * spdc.truncation);
    state.accumulate(Occupation{}, 1.0);
    for (int beam = 1; beam <= 4; beam++) {
        const auto &path = pump.paths[beam - 1];
        double mu = mean_pairs(pump, spdc, beam);
        if (!path.pumped || mu == 0.0) {
            continue;
        }
        Complex phase = path.amplitude / std::abs(path.amplitude);
        // sum_n sqrt(P(n)) phase^n (a^dag_s a^dag_i)^n / n! |0>, i.e. sqrt(P(n)) on |n, n>.
        FockState accumulated(state.truncation());
        FockState power = state;
        double n_factorial = 1.0;
        Complex phase_n = 1.0;
        for (int n = 0; n <= spdc.truncation; n++) {
            if (n > 0) {
                power = apply_pair_creation(power, signal_mode(pump, beam), idler_mode(pump, beam), 1.0);
                n_factorial *= n;
                phase_n *= phase;
            }
            Complex c = std::sqrt(pair_number_pmf(mu, spdc.statistics, n)) * phase_n / n_factorial;
            for (const auto &[occ, a] : power.terms()) {
                accumulated.accumulate(occ, c * a);
            }
        }
        accumulated.prune();
        state = std::move(accumulated);
    }
    FockState out = normalize(state);
    out.set_discarded(0.0);
    if (fock_truncation != out.truncation()) {
        FockState widened(fock_truncation);
        for (const auto &[occ, a] : out.terms()) {
            widened.accumulate(occ, a);
        }
        return widened;
    }
    return out;
}

std::vector<double> pair_sector_weights(const PumpConfig &pump, const SPDCConfig &spdc) {
    pump.validate();
    spdc.validate();
    std::vector<double> sector(static_cast<size_t>(spdc.truncation) + 1, 0.0);
    sector[0] = 1.0;
    for (int beam = 1; beam <= 4; beam++) {
        if (!pump.paths[beam - 1].pumped) {
            continue;
        }
        double mu = mean_pairs(pump, spdc, beam);
        std::vector<double> next(sector.size(), 0.0);
        for (size_t k = 0; k < sector.size(); k++) {
            for (size_t n = 0; k + n < sector.size(); n++) {
                next[k + n] += sector[k] * pair_number_pmf(mu, spdc.statistics, static_cast<int>(n));
            }
        }
        sector = std::move(next);
    }
    double total = 0.0;
    for (double w : sector) {
        total += w;
    }
    for (double &w : sector) {
        w /= total;
    }
    return sector;
}

FockState pair_sector_state(const PumpConfig &pump, const SPDCConfig &spdc, int pairs) {
    if (pairs < 0 || pairs > spdc.truncation) {
        throw ConfigError("pair sector out of range");
    }
    FockState full = emit_pulse_state(pump, spdc, 2 * spdc.truncation);
    FockState out(2 * spdc.truncation);
    for (const auto &[occ, a] : full.terms()) {
        if (occ.total() == 2 * pairs) {
            out.accumulate(occ, a);
        }
    }
    if (out.norm_squared() == 0.0) {
        throw ConfigError("pair sector " + std::to_string(pairs) + " has zero weight");
    }
    return normalize(out);
}

PulseDraw sample_pulse(const PumpConfig &pump, const SPDCConfig &spdc, std::mt19937_64 &rng) {
    pump.validate();
    spdc.validate();
    while (true) {
        PulseDraw draw;
        int total = 0;
        for (int beam = 1; beam <= 4; beam++) {
            double mu = mean_pairs(pump, spdc, beam);
            int n = 0;
            if (pump.paths[beam - 1].pumped && mu > 0.0) {
                if (spdc.statistics == PairStatistics::kThermal) {
                    n = std::geometric_distribution<int>(1.0 / (1.0 + mu))(rng);
                } else {
                    n = std::poisson_distribution<int>(mu)(rng);
                }
            }
            draw.pairs[beam - 1] = n;
            total += n;
        }
        if (total > spdc.truncation) {
            continue;
        }
        for (int beam = 1; beam <= 4; beam++) {
            int n = draw.pairs[beam - 1];
            if (n > 0) {
                draw.occupation.add(ModeKey::of(signal_mode(pump, beam)), n);
                draw.occupation.add(ModeKey::of(idler_mode(pump, beam)), n);
            }
        }
        return draw;
    }
}

PulseDraw sample_pulse(const PumpConfig &pump, const SPDCConfig &spdc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_pulse(pump, spdc, rng);
}

double pulse_period_ns(double rep_rate_mhz) {
    if (!(rep_rate_mhz > 0.0)) {
        throw ConfigError("repetition rate must be positive");
    }
    return 1e3 / rep_rate_mhz;
}

std::vector<double> pulse_train_times(double rep_rate_mhz, std::size_t n_pulses) {
    if (n_pulses < 1) {
        throw ConfigError("pulse train needs at least one pulse");
    }
    double period = pulse_period_ns(rep_rate_mhz);
    std::vector<double> t(n_pulses);
    for (size_t k = 0; k < n_pulses; k++) {
        t[k] = static_cast<double>(k) * period;
    }
    return t;
}

}  // namespace ghzsim
