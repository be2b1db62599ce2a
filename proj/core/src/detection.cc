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

#include "ghzsim/detection.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "ghzsim/error.h"

namespace ghzsim {

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw ConfigError("detector efficiency must lie in [0, 1]");
    }
    if (!(gate_ns >= 0.0) || !(dark_hz >= 0.0) || !(max_trigger_mhz >= 0.0) || !(internal_delay_ns >= 0.0)) {
        throw ConfigError("detector parameters must be nonnegative");
    }
}

double DetectorModel::dark_probability() const {
    return -std::expm1(-dark_hz * gate_ns * 1e-9);
}

DetectorModel DetectorModel::id200() {
    return {0.10, 2.5, 150.0, 5.0, 0.0};
}

DetectorModel DetectorModel::pga600() {
    return {0.10, 1.0, 100.0, 10.0, 0.0};
}

void TriggerChain::validate() const {
    if (divide_by < 1) {
        throw ConfigError("trigger divide_by must be at least 1");
    }
    if (!(dg535_step_ns > 0.0)) {
        throw ConfigError("delay generator step must be positive");
    }
    if (!(dg535_ch1_ns >= 0.0) || !(dg535_ch2_ns >= 0.0) || !(fiber_delay_ns >= 0.0) ||
        !(coincidence_window_ns >= 0.0) || !(latency_ns >= 0.0)) {
        throw ConfigError("trigger chain delays must be nonnegative");
    }
    for (double v : {dg535_ch1_ns, dg535_ch2_ns}) {
        double steps = v / dg535_step_ns;
        if (std::abs(steps - std::round(steps)) > 1e-6) {
            throw ConfigError("delay generator settings must be whole multiples of its step");
        }
    }
}

double TriggerChain::quantize(double v) const {
    return std::max(0.0, std::round(v / dg535_step_ns) * dg535_step_ns);
}

double fiber_delay_ns(double length_m, double group_index) {
    if (!(length_m >= 0.0)) {
        throw ConfigError("fiber length must be nonnegative");
    }
    if (!(group_index >= 1.0)) {
        throw ConfigError("group index must be at least 1");
    }
    return length_m * group_index / kSpeedOfLightMPerNs;
}

std::optional<EventRecord> detect(
    Path port,
    const std::vector<double> &photon_times_ns,
    const DetectorModel &detector,
    double gate_open_ns,
    std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double gate_close = gate_open_ns + detector.gate_ns;
    std::optional<double> photon_click;
    for (double t : photon_times_ns) {
        if (t < gate_open_ns || t > gate_close) {
            continue;
        }
        if (unit(rng) < detector.efficiency) {
            if (!photon_click || t < *photon_click) {
                photon_click = t;
            }
        }
    }
    double dark_u = unit(rng);
    double dark_at = gate_open_ns + detector.gate_ns * unit(rng);
    bool dark = dark_u < detector.dark_probability();
    if (photon_click && (!dark || *photon_click <= dark_at)) {
        return EventRecord{port, std::max(0.0, *photon_click), EventOrigin::kPhoton};
    }
    if (dark) {
        return EventRecord{port, std::max(0.0, dark_at), EventOrigin::kDark};
    }
    return std::nullopt;
}

double PortTiming::arrival_offset(Path port) const {
    if (port == Path::kA || port == Path::kB) {
        return free_space_ns + fiber_ns;
    }
    return free_space_ns;
}

HeraldGate::HeraldGate(TriggerChain chain, std::map<Path, DetectorModel> detectors)
    : chain_(chain), detectors_(std::move(detectors)) {
    chain_.validate();
    for (Path p : {Path::kA, Path::kB, Path::kC, Path::kD}) {
        if (!detectors_.contains(p)) {
            throw ConfigError("heralding needs detectors on A, B, C and D");
        }
        detectors_.at(p).validate();
    }
}

std::vector<EventRecord> HeraldGate::process(
    std::uint64_t pulse_index, const PulsePhotons &pulse, std::mt19937_64 &rng) {
    std::vector<EventRecord> out;
    if (pulse_index % static_cast<std::uint64_t>(chain_.divide_by) != 0) {
        return out;
    }
    gated_++;
    auto photons_at = [&](Path p) -> const std::vector<double> & {
        static const std::vector<double> kNone;
        auto it = pulse.arrivals_ns.find(p);
        return it == pulse.arrivals_ns.end() ? kNone : it->second;
    };
    std::optional<EventRecord> c;
    std::optional<EventRecord> d;
    if (chain_.source != TriggerSource::kSingleD) {
        const auto &det = detectors_.at(Path::kC);
        c = detect(Path::kC, photons_at(Path::kC), det, pulse.pulse_time_ns + det.internal_delay_ns, rng);
    }
    if (chain_.source != TriggerSource::kSingleC) {
        const auto &det = detectors_.at(Path::kD);
        d = detect(Path::kD, photons_at(Path::kD), det, pulse.pulse_time_ns + det.internal_delay_ns, rng);
    }
    if (c) {
        out.push_back(*c);
    }
    if (d) {
        out.push_back(*d);
    }

    std::optional<double> trigger_from;
    switch (chain_.source) {
        case TriggerSource::kCoincidenceCD:
            if (c && d && std::abs(c->time_ns - d->time_ns) <= chain_.coincidence_window_ns / 2.0) {
                trigger_from = std::max(c->time_ns, d->time_ns);
            }
            break;
        case TriggerSource::kSingleC:
            if (c) {
                trigger_from = c->time_ns;
            }
            break;
        case TriggerSource::kSingleD:
            if (d) {
                trigger_from = d->time_ns;
            }
            break;
    }
    if (!trigger_from) {
        return out;
    }
    triggers_++;
    double trigger_ns = *trigger_from + chain_.latency_ns;
    for (auto [port, delay] : {std::pair{Path::kB, chain_.dg535_ch1_ns}, std::pair{Path::kA, chain_.dg535_ch2_ns}}) {
        const auto &det = detectors_.at(port);
        double open = trigger_ns + delay;
        auto last = last_gate_ns_.find(port);
        double min_spacing = det.max_trigger_mhz > 0.0 ? 1e3 / det.max_trigger_mhz : 0.0;
        if (last != last_gate_ns_.end() && open - last->second < min_spacing) {
            dropped_++;
            continue;
        }
        last_gate_ns_[port] = open;
        if (auto e = detect(port, photons_at(port), det, open, rng)) {
            out.push_back(*e);
        }
    }
    return out;
}

std::vector<EventRecord> herald_and_gate(
    const std::vector<PulsePhotons> &pulses,
    const TriggerChain &chain,
    const std::map<Path, DetectorModel> &detectors,
    std::mt19937_64 &rng) {
    HeraldGate gate(chain, detectors);
    std::vector<EventRecord> out;
    for (size_t k = 0; k < pulses.size(); k++) {
        auto ev = gate.process(k, pulses[k], rng);
        out.insert(out.end(), ev.begin(), ev.end());
    }
    return out;
}

std::uint64_t count_coincidences(std::vector<EventRecord> events, std::pair<Path, Path> ports, double window_ns) {
    std::vector<double> first;
    std::vector<double> second;
    for (const auto &e : events) {
        if (e.detector == ports.first) {
            first.push_back(e.time_ns);
        } else if (e.detector == ports.second) {
            second.push_back(e.time_ns);
        }
    }
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    double half = window_ns / 2.0;
    std::uint64_t count = 0;
    size_t j = 0;
    for (double t : first) {
        while (j < second.size() && second[j] <= t - half) {
            j++;
        }
        if (j < second.size() && second[j] < t + half) {
            count++;
            j++;
        }
    }
    return count;
}

std::uint64_t singles(const std::vector<EventRecord> &events, Path port) {
    return static_cast<std::uint64_t>(std::count_if(events.begin(), events.end(), [&](const EventRecord &e) {
        return e.detector == port;
    }));
}

void write_events_csv(std::ostream &out, const std::vector<EventRecord> &events) {
    out << "detector,time_ns,origin\n";
    char buf[64];
    for (const auto &e : events) {
        std::snprintf(buf, sizeof(buf), "%.6f", e.time_ns);
        out << path_name(e.detector) << ',' << buf << ',' << (e.origin == EventOrigin::kPhoton ? "photon" : "dark")
            << '\n';
    }
}

std::vector<EventRecord> read_events_csv(std::istream &in) {
    std::vector<EventRecord> out;
    std::string line;
    if (!std::getline(in, line) || line != "detector,time_ns,origin") {
        throw ConfigError("event CSV must start with the header 'detector,time_ns,origin'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string det;
        std::string time;
        std::string origin;
        if (!std::getline(row, det, ',') || !std::getline(row, time, ',') || !std::getline(row, origin)) {
            throw ConfigError("malformed event row: " + line);
        }
        if (origin != "photon" && origin != "dark") {
            throw ConfigError("unknown event origin: " + origin);
        }
        double t = std::stod(time);
        if (t < 0.0) {
            throw ConfigError("event times must be nonnegative");
        }
        out.push_back({parse_path(det), t, origin == "photon" ? EventOrigin::kPhoton : EventOrigin::kDark});
    }
    return out;
}

ClickModel::ClickModel(std::map<Path, DetectorModel> detectors) : detectors_(std::move(detectors)) {
    for (const auto &[p, d] : detectors_) {
        d.validate();
    }
}

const DetectorModel &ClickModel::detector(Path p) const {
    auto it = detectors_.find(p);
    if (it == detectors_.end()) {
        throw ConfigError("no detector on port '" + std::string(path_name(p)) + "'");
    }
    return it->second;
}

double ClickModel::none_click(const CoarseDistribution &dist, const std::vector<Path> &ports) const {
    double dark_factor = 1.0;
    std::vector<double> miss(ports.size());
    for (size_t k = 0; k < ports.size(); k++) {
        const auto &d = detector(ports[k]);
        dark_factor *= 1.0 - d.dark_probability();
        miss[k] = 1.0 - d.efficiency;
    }
    double total = 0.0;
    for (const auto &[occ, p] : dist) {
        double f = p;
        for (size_t k = 0; k < ports.size() && f != 0.0; k++) {
            int n = path_count(occ, ports[k]);
            if (n > 0) {
                f *= std::pow(miss[k], n);
            }
        }
        total += f;
    }
    return total * dark_factor;
}

double ClickModel::all_click(const CoarseDistribution &dist, const std::vector<Path> &ports) const {
    // Inclusion-exclusion over the subsets that stay dark.
    double total = 0.0;
    size_t n = ports.size();
    for (std::uint32_t mask = 0; mask < (1u << n); mask++) {
        std::vector<Path> subset;
        for (size_t k = 0; k < n; k++) {
            if (mask & (1u << k)) {
                subset.push_back(ports[k]);
            }
        }
        double term = subset.empty() ? 0.0 : none_click(dist, subset);
        if (subset.empty()) {
            for (const auto &[occ, p] : dist) {
                term += p;
            }
        }
        total += (subset.size() % 2 == 0 ? 1.0 : -1.0) * term;
    }
    return std::max(0.0, total);
}

}  // namespace ghzsim
