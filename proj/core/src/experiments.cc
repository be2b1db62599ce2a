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

#include "ghzsim/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ghzsim/error.h"

namespace ghzsim {

PortCounts port_counts(const CoarseOccupation &occ) {
    PortCounts c{};
    for (const auto &[slot, n] : occ) {
        c[index_of(slot.path)] = static_cast<std::uint8_t>(c[index_of(slot.path)] + n);
    }
    return c;
}

SectorModel::SectorModel(
    const Circuit &circuit, const PumpConfig &pump, const SPDCConfig &spdc, const OverlapModel &overlap, int min_pairs)
    : min_pairs_(min_pairs) {
    if (min_pairs < 0 || min_pairs > spdc.truncation) {
        throw ConfigError("conditioning pair number must lie in [0, truncation]");
    }
    overlap.validate();
    auto weights = pair_sector_weights(pump, spdc);
    for (int k = 0; k <= spdc.truncation; k++) {
        double w = weights[static_cast<size_t>(k)];
        if (w < 1e-20) {
            continue;
        }
        FockState out = run_circuit(circuit, pair_sector_state(pump, spdc, k));
        CoarseDistribution dist = coarse_distribution(out, overlap);
        for (const auto &[occ, p] : dist) {
            full_[occ] += w * p;
        }
        if (k < min_pairs) {
            continue;
        }
        Sector s;
        for (const auto &[occ, p] : dist) {
            if (p <= 0.0) {
                continue;
            }
            s.counts.push_back(port_counts(occ));
            s.probs.push_back(p);
        }
        if (s.counts.empty()) {
            continue;
        }
        double total = std::accumulate(s.probs.begin(), s.probs.end(), 0.0);
        for (double &p : s.probs) {
            p /= total;
        }
        s.pick = std::discrete_distribution<std::size_t>(s.probs.begin(), s.probs.end());
        sectors_.push_back(std::move(s));
        sector_probs_.push_back(w);
        conditioning_weight_ += w;
    }
    if (conditioning_weight_ > 0.0) {
        for (double &w : sector_probs_) {
            w /= conditioning_weight_;
        }
        pick_sector_ = std::discrete_distribution<std::size_t>(sector_probs_.begin(), sector_probs_.end());
    }
}

const PortCounts &SectorModel::sample(std::mt19937_64 &rng) const {
    if (sectors_.empty()) {
        throw SimulationError("no pair sector above the conditioning threshold has weight");
    }
    const Sector &s = sectors_[pick_sector_(rng)];
    return s.counts[s.pick(rng)];
}

ClickTable::ClickTable(const std::map<Path, DetectorModel> &detectors, const std::vector<Path> &ports)
    : ports_(ports) {
    for (Path p : ports) {
        auto it = detectors.find(p);
        if (it == detectors.end()) {
            throw ConfigError("no detector configured on port '" + std::string(path_name(p)) + "'");
        }
        it->second.validate();
        std::array<double, 16> row{};
        double dark = it->second.dark_probability();
        for (int n = 0; n < 16; n++) {
            row[static_cast<size_t>(n)] = 1.0 - std::pow(1.0 - it->second.efficiency, n) * (1.0 - dark);
        }
        table_.push_back(row);
    }
}

double ClickTable::p(std::size_t port_index, int photons) const {
    return table_[port_index][static_cast<size_t>(std::min(photons, 15))];
}

double ClickTable::p(Path port, const PortCounts &counts) const {
    for (std::size_t k = 0; k < ports_.size(); k++) {
        if (ports_[k] == port) {
            return p(k, counts[index_of(port)]);
        }
    }
    throw ConfigError("port '" + std::string(path_name(port)) + "' is not in the click table");
}

void SimSettings::validate() const {
    spdc.validate();
    overlap.validate();
    geometry.validate();
    chain.validate();
    for (const auto &[p, d] : detectors) {
        d.validate();
    }
    if (!(slip_delay_ps >= 0.0)) {
        throw ConfigError("slip delay must be nonnegative");
    }
    if (!(rep_rate_mhz > 0.0)) {
        throw ConfigError("repetition rate must be positive");
    }
    if (threads < 1) {
        throw ConfigError("thread count must be at least 1");
    }
}

const ScanPoint &ScanResult::minimum() const {
    if (points.empty()) {
        throw SimulationError("empty scan");
    }
    return *std::min_element(points.begin(), points.end(), [](const ScanPoint &a, const ScanPoint &b) {
        return a.normalized_rate < b.normalized_rate;
    });
}

void write_scan_csv(std::ostream &out, const ScanResult &result) {
    out << "setting,normalized_rate,raw,singles_a,singles_b,stderr\n";
    char buf[256];
    for (const auto &p : result.points) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g\n", p.setting, p.normalized_rate, p.raw,
                      p.singles_a, p.singles_b, p.stderr_rate);
        out << buf;
    }
}

ScanResult read_scan_csv(std::istream &in) {
    ScanResult r;
    std::string line;
    if (!std::getline(in, line) || line != "setting,normalized_rate,raw,singles_a,singles_b,stderr") {
        throw ConfigError("scan CSV has an unexpected header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ScanPoint p;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &p.setting, &p.normalized_rate, &p.raw,
                        &p.singles_a, &p.singles_b, &p.stderr_rate) != 6) {
            throw ConfigError("malformed scan row: " + line);
        }
        r.points.push_back(p);
    }
    return r;
}

DipFit fit_dip_floor(const std::vector<std::pair<double, double>> &minima) {
    if (minima.size() < 2) {
        throw ConfigError("dip-floor fit needs at least two minima");
    }
    double n = static_cast<double>(minima.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto &[x, y] : minima) {
        mx += x / n;
        my += y / n;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto &[x, y] : minima) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx <= 0.0) {
        throw ConfigError("dip-floor fit is degenerate: all minima share one pump power");
    }
    DipFit fit;
    fit.floor_slope_per_mw = sxy / sxx;
    fit.floor_intercept = my - fit.floor_slope_per_mw * mx;
    fit.visibility = 1.0 - fit.floor_intercept;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

FockState first_order_state(const PumpConfig &pump, int truncation) {
    pump.validate();
    FockState out(truncation);
    FockState vac = create_vacuum(truncation);
    for (int beam = 1; beam <= 4; beam++) {
        const auto &pp = pump.paths[static_cast<size_t>(beam - 1)];
        if (!pp.pumped || std::abs(pp.amplitude) == 0.0) {
            continue;
        }
        Mode s{beam_path(beam), Pol::kH, pp.arrival_ps};
        Mode i{beam_path(beam), Pol::kV, pp.arrival_ps};
        FockState pair = apply_pair_creation(vac, s, i, pp.amplitude);
        for (const auto &[occ, a] : pair.terms()) {
            out.accumulate(occ, a);
        }
    }
    return out;
}

namespace {

struct PostselectedTerm {
    std::string key;
    Complex amp;
    std::vector<double> taus;
};

std::vector<PostselectedTerm> postselect(const FockState &state, const std::vector<Path> &ports) {
    std::vector<PostselectedTerm> out;
    for (const auto &[occ, amp] : state.terms()) {
        if (occ.total() != static_cast<int>(ports.size())) {
            continue;
        }
        PostselectedTerm t{std::string(ports.size(), '?'), amp, std::vector<double>(ports.size(), 0.0)};
        bool ok = true;
        for (const auto &[key, n] : occ.entries()) {
            auto it = std::find(ports.begin(), ports.end(), key.path);
            if (it == ports.end() || n != 1) {
                ok = false;
                break;
            }
            auto k = static_cast<size_t>(it - ports.begin());
            if (t.key[k] != '?') {
                ok = false;
                break;
            }
            t.key[k] = pol_name(key.pol);
            t.taus[k] = key.tau_ps();
        }
        if (ok) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace

StateCheck compare_postselected(
    const FockState &state,
    const std::vector<Path> &ports,
    const std::map<std::string, Complex> &target,
    const OverlapModel &overlap) {
    overlap.validate();
    auto terms = postselect(state, ports);
    StateCheck check;
    std::map<std::string, std::vector<double>> taus;
    double p = 0.0;
    for (const auto &t : terms) {
        check.amplitudes[t.key] += t.amp;
        taus.emplace(t.key, t.taus);
        p += std::norm(t.amp);
    }
    if (p <= 0.0) {
        throw SimulationError("no term survives the post-selection");
    }
    check.postselection_probability = p;
    double amp_norm = 0.0;
    for (const auto &[k, a] : check.amplitudes) {
        amp_norm += std::norm(a);
    }
    for (auto &[k, a] : check.amplitudes) {
        a /= std::sqrt(amp_norm);
    }
    double target_norm = 0.0;
    for (const auto &[k, a] : target) {
        if (k.size() != ports.size()) {
            throw ConfigError("target pattern '" + k + "' does not match the number of ports");
        }
        target_norm += std::norm(a);
    }
    if (target_norm <= 0.0) {
        throw ConfigError("target state has zero norm");
    }
    for (const auto &[k, a] : target) {
        check.target[k] = a / std::sqrt(target_norm);
    }
    Complex inner = 0.0;
    for (const auto &[k, t] : check.target) {
        auto it = check.amplitudes.find(k);
        if (it != check.amplitudes.end()) {
            inner += std::conj(t) * it->second;
        }
    }
    check.fidelity = std::norm(inner);
    Complex phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : Complex{1.0, 0.0};
    std::map<std::string, Complex> keys = check.target;
    for (const auto &[k, a] : check.amplitudes) {
        keys.emplace(k, 0.0);
    }
    for (const auto &[k, unused] : keys) {
        Complex a = check.amplitudes.contains(k) ? check.amplitudes.at(k) / phase : Complex{0.0, 0.0};
        Complex t = check.target.contains(k) ? check.target.at(k) : Complex{0.0, 0.0};
        check.max_deviation = std::max(check.max_deviation, std::abs(a - t));
        if (std::abs(t) == 0.0) {
            check.other_patterns += std::norm(a);
        }
    }
    // Arrival-time overlap between the two leading target terms.
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto &[k, t] : check.target) {
        ranked.emplace_back(std::abs(t), k);
    }
    std::sort(ranked.rbegin(), ranked.rend());
    if (ranked.size() >= 2 && taus.contains(ranked[0].second) && taus.contains(ranked[1].second)) {
        const auto &t0 = taus.at(ranked[0].second);
        const auto &t1 = taus.at(ranked[1].second);
        for (size_t k = 0; k < ports.size(); k++) {
            check.temporal_coherence *= mode_overlap(t0[k], t1[k], overlap);
        }
    }
    return check;
}

StateCheck bell_check(const PumpConfig &pump) {
    Circuit c = bell_circuit();
    FockState out = run_circuit(c, first_order_state(pump));
    double r = 1.0 / std::sqrt(2.0);
    return compare_postselected(out, {Path::kA, Path::kB}, {{"HV", r}, {"VH", r}});
}

namespace {

FockState double_pair(const std::array<double, 4> &arrivals, int a, int b, Complex amp) {
    FockState s = create_vacuum();
    s = apply_pair_creation(s, Mode{beam_path(a), Pol::kH, arrivals[static_cast<size_t>(a - 1)]},
                            Mode{beam_path(a), Pol::kV, arrivals[static_cast<size_t>(a - 1)]}, amp);
    s = apply_pair_creation(s, Mode{beam_path(b), Pol::kH, arrivals[static_cast<size_t>(b - 1)]},
                            Mode{beam_path(b), Pol::kV, arrivals[static_cast<size_t>(b - 1)]}, 1.0);
    return s;
}

Circuit ghz_circuit_with_slips(const BdGeometry &geometry, const std::map<Path, int> &slips, double slip_delay_ps) {
    Circuit c = ghz_circuit(geometry);
    std::vector<Element> slabs;
    for (const auto &[p, n] : slips) {
        if (n < 0) {
            throw ConfigError("number of cover slips must be nonnegative");
        }
        if (n > 0) {
            slabs.push_back(DelaySlab{p, n * slip_delay_ps});
        }
    }
    c.elements.insert(c.elements.begin() + 4, slabs.begin(), slabs.end());
    return c;
}

}  // namespace

StateCheck ghz_check(const BdGeometry &geometry, const std::map<Path, int> &slips, double slip_delay_ps,
                     const OverlapModel &overlap) {
    Circuit c = ghz_circuit_with_slips(geometry, slips, slip_delay_ps);
    auto arrivals = geometry.pump_arrivals();
    double r = 1.0 / std::sqrt(2.0);
    FockState in(4);
    for (const auto &[a, b] : {std::pair{1, 3}, std::pair{2, 4}}) {
        FockState term = double_pair(arrivals, a, b, r);
        for (const auto &[occ, amp] : term.terms()) {
            in.accumulate(occ, amp);
        }
    }
    FockState out = run_circuit(c, in);
    // Written with the unnormalized 1/2 prefactor; the comparison normalizes it.
    return compare_postselected(out, {Path::kA, Path::kB, Path::kC, Path::kD}, {{"HHVV", 0.5}, {"VVHH", 0.5}},
                                overlap);
}

double four_port_probability(const BdGeometry &geometry, int beam_a, int beam_b) {
    if (beam_a == beam_b) {
        throw ConfigError("four-port check needs two distinct beams");
    }
    FockState out = run_circuit(ghz_circuit(geometry), double_pair(geometry.pump_arrivals(), beam_a, beam_b, 1.0));
    double p = 0.0;
    for (const auto &t : postselect(out, {Path::kA, Path::kB, Path::kC, Path::kD})) {
        p += std::norm(t.amp);
    }
    return p;
}

}  // namespace ghzsim
