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

#include <algorithm>
#include <cmath>

#include "ghzsim/error.h"
#include "ghzsim/experiments.h"
#include "ghzsim/parallel.h"

namespace ghzsim {

HomCalibration calibrate_hom(SimSettings settings, std::pair<double, double> low, std::pair<double, double> high,
                             double predict_mw) {
    settings.validate();
    if (!(low.first > 0.0) || !(high.first > low.first)) {
        throw ConfigError("calibration powers must be positive and distinct (low < high)");
    }
    if (!(high.second > low.second)) {
        throw ConfigError("the high-power minimum must exceed the low-power minimum");
    }
    auto minimum = [&](double eps, double mu, double power) {
        SimSettings s = settings;
        s.hwp_error_deg = eps;
        s.spdc.mu_per_mw = mu;
        return hom_minimum_exact(s, power);
    };
    // Plate error reproducing the low-power minimum at a given mu.
    auto solve_eps = [&](double mu) {
        double lo = 0.0;
        double hi = 10.0;
        if (minimum(lo, mu, low.first) >= low.second) {
            return 0.0;
        }
        if (minimum(hi, mu, low.first) < low.second) {
            throw SimulationError("plate error needed to reach the low-power minimum exceeds 10 degrees");
        }
        for (int it = 0; it < 40; it++) {
            double mid = 0.5 * (lo + hi);
            (minimum(mid, mu, low.first) < low.second ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto excess = [&](double mu) { return minimum(solve_eps(mu), mu, high.first) - high.second; };

    double mu_lo = 0.0;
    double mu_hi = 1e-4;
    while (excess(mu_hi) < 0.0) {
        mu_lo = mu_hi;
        mu_hi *= 2.0;
        if (mu_hi > 0.1) {
            throw SimulationError("no pair rate reproduces the high-power minimum");
        }
    }
    for (int it = 0; it < 40; it++) {
        double mid = 0.5 * (mu_lo + mu_hi);
        (excess(mid) < 0.0 ? mu_lo : mu_hi) = mid;
    }
    HomCalibration cal;
    cal.mu_per_mw = 0.5 * (mu_lo + mu_hi);
    cal.hwp_error_deg = solve_eps(cal.mu_per_mw);
    cal.sigma_t_ps = settings.overlap.sigma_t_ps;
    cal.fitted_low = minimum(cal.hwp_error_deg, cal.mu_per_mw, low.first);
    cal.fitted_high = minimum(cal.hwp_error_deg, cal.mu_per_mw, high.first);
    cal.predicted_min = minimum(cal.hwp_error_deg, cal.mu_per_mw, predict_mw);
    return cal;
}

namespace {

struct ScanModel {
    /// Coincidence probability per trial with the scanned gate on / off the photon.
    double p_on = 0.0;
    double p_off = 0.0;
};

/// `herald` triggers, `partner` is the gated port. Herald clicks from photons
/// fire at the photon arrival; dark-only triggers are counted with a dark
/// partner.
ScanModel scan_model(const SimSettings &settings, const std::map<Path, DetectorModel> &detectors,
                     const PumpConfig &pump, int beam, Path herald, Path partner, bool herald_in_gate) {
    ScanModel m;
    if (!pump.paths[static_cast<size_t>(beam - 1)].pumped || pump.path_power_mw(beam) <= 0.0) {
        return m;
    }
    PumpConfig single = PumpConfig::balanced({beam}, pump.path_power_mw(beam));
    single.with_arrivals(settings.geometry.pump_arrivals());
    SectorModel model(ghz_circuit(settings.geometry), single, settings.spdc, settings.overlap, 1);
    const DetectorModel &h = detectors.at(herald);
    const DetectorModel &g = detectors.at(partner);
    double hd = h.dark_probability();
    double gd = g.dark_probability();
    double w = model.conditioning_weight();
    auto photon_click = [](const DetectorModel &d, int n) { return 1.0 - std::pow(1.0 - d.efficiency, n); };
    m.p_on = w * model.expectation([&](const PortCounts &c) {
        double ph = herald_in_gate ? photon_click(h, c[index_of(herald)]) : 0.0;
        double pg = 1.0 - (1.0 - photon_click(g, c[index_of(partner)])) * (1.0 - gd);
        return ph * pg + (1.0 - ph) * hd * gd;
    });
    m.p_off = w * model.expectation([&](const PortCounts &c) {
        double ph = herald_in_gate ? photon_click(h, c[index_of(herald)]) : 0.0;
        return ph * gd + (1.0 - ph) * hd * gd;
    });
    return m;
}

/// Scans `settings` values, drawing binomial counts; returns the midpoint of
/// the half-maximum run around the best setting.
double find_peak(CalibrationScan &scan, const std::vector<double> &values, std::uint64_t trials,
                 const std::function<double(double)> &probability, std::mt19937_64 &rng, bool check_floor) {
    std::vector<std::uint64_t> counts;
    for (double v : values) {
        double p = std::clamp(probability(v), 0.0, 1.0);
        std::uint64_t k = std::binomial_distribution<std::uint64_t>(trials, p)(rng);
        counts.push_back(k);
        scan.counts.emplace_back(v, k);
    }
    auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    std::vector<std::uint64_t> sorted = counts;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    double floor = static_cast<double>(sorted[sorted.size() / 2]);
    double peak = static_cast<double>(counts[best]);
    if (check_floor && peak <= floor + 5.0 * std::sqrt(floor + 1.0)) {
        throw SimulationError("calibration failed: no coincidence peak above the dark floor in scan '" + scan.name +
                              "'");
    }
    double half = 0.5 * (peak + (check_floor ? floor : 0.0));
    std::size_t lo = best;
    std::size_t hi = best;
    while (lo > 0 && static_cast<double>(counts[lo - 1]) > half) {
        lo--;
    }
    while (hi + 1 < counts.size() && static_cast<double>(counts[hi + 1]) > half) {
        hi++;
    }
    return 0.5 * (values[lo] + values[hi]);
}

std::vector<double> grid(double from, double to, double step) {
    std::vector<double> out;
    auto n = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9));
    for (std::int64_t k = 0; k <= n; k++) {
        out.push_back(from + static_cast<double>(k) * step);
    }
    return out;
}

}  // namespace

CalibrationResult delay_calibration(const SimSettings &settings, const PumpConfig &pump,
                                    const CalibrationSettings &cal, std::uint64_t seed) {
    settings.validate();
    pump.validate();
    if (cal.trials < 1) {
        throw ConfigError("calibration needs at least one trial per setting");
    }
    if (!(cal.coarse_step_ns > 0.0) || !(cal.range_ns > 0.0) || !(cal.fine_half_width_ns > 0.0)) {
        throw ConfigError("calibration scan ranges must be positive");
    }
    CalibrationResult result;
    result.detectors = settings.detectors;
    PortTiming timing = settings.timing();
    align_herald_detectors(result.detectors, timing);
    TriggerChain chain = settings.chain;
    double step = chain.dg535_step_ns;
    double true_latency = chain.latency_ns + cal.hidden_offset_ns;
    std::mt19937_64 rng(seed);

    // Trigger from a herald photon at its arrival; partner gated trigger + delay.
    auto channel_scan = [&](const std::string &name, int beam, Path herald, Path partner) {
        ScanModel m = scan_model(settings, result.detectors, pump, beam, herald, partner, true);
        double trigger = timing.arrival_offset(herald) + true_latency;
        double arrival = timing.arrival_offset(partner);
        double gate = result.detectors.at(partner).gate_ns;
        auto probability = [&](double delay) {
            double open = trigger + delay;
            return (arrival >= open && arrival <= open + gate) ? m.p_on : m.p_off;
        };
        CalibrationScan coarse{name + " (coarse)", {}, 0.0};
        double c = find_peak(coarse, grid(0.0, cal.range_ns, cal.coarse_step_ns), cal.trials, probability, rng, true);
        coarse.peak = c;
        CalibrationScan fine{name + " (fine)", {}, 0.0};
        double lo = chain.quantize(std::max(0.0, c - cal.fine_half_width_ns));
        double f = find_peak(fine, grid(lo, lo + 2.0 * cal.fine_half_width_ns, step), cal.trials, probability, rng,
                             true);
        fine.peak = chain.quantize(f);
        result.scans.push_back(coarse);
        result.scans.push_back(fine);
        return fine.peak;
    };

    chain.source = TriggerSource::kSingleC;
    chain.dg535_ch1_ns = channel_scan("ch1: beam 1, B.C", 1, Path::kC, Path::kB);
    chain.dg535_ch2_ns = channel_scan("ch2: beam 2, A.C", 2, Path::kC, Path::kA);

    // D's gate must cover the photon: scan its internal delay against A.
    int beam = pump.paths[2].pumped && pump.path_power_mw(3) > 0.0 ? 3 : 4;
    Path d_partner = beam == 3 ? Path::kA : Path::kB;
    DetectorModel &d = result.detectors.at(Path::kD);
    ScanModel on = scan_model(settings, result.detectors, pump, beam, Path::kD, d_partner, true);
    ScanModel off = scan_model(settings, result.detectors, pump, beam, Path::kD, d_partner, false);
    double arrival_d = timing.arrival_offset(Path::kD);
    auto probability = [&](double delay) {
        double open = delay + cal.hidden_d_offset_ns;
        return (arrival_d >= open && arrival_d <= open + d.gate_ns) ? on.p_on : off.p_on;
    };
    double d_range = std::max(4.0 * d.gate_ns, arrival_d + d.gate_ns + std::abs(cal.hidden_d_offset_ns));
    CalibrationScan coarse{"D internal delay (coarse)", {}, 0.0};
    double c = find_peak(coarse, grid(0.0, d_range, cal.coarse_step_ns), cal.trials, probability, rng, true);
    coarse.peak = c;
    CalibrationScan fine{"D internal delay (fine)", {}, 0.0};
    double lo = chain.quantize(std::max(0.0, c - cal.fine_half_width_ns - d.gate_ns / 2.0));
    double hi = lo + 2.0 * cal.fine_half_width_ns + d.gate_ns;
    fine.peak = chain.quantize(find_peak(fine, grid(lo, hi, step), cal.trials, probability, rng, true));
    d.internal_delay_ns = fine.peak;
    result.scans.push_back(coarse);
    result.scans.push_back(fine);

    chain.source = settings.chain.source;
    result.chain = chain;
    TriggerChain ideal = matched_chain(settings.chain, result.detectors, timing);
    result.recovered_offset_ns = ideal.dg535_ch1_ns - chain.dg535_ch1_ns;
    result.recovered_offset_ch2_ns = ideal.dg535_ch2_ns - chain.dg535_ch2_ns;
    return result;
}

}  // namespace ghzsim
