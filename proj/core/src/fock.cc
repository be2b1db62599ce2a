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

#include "ghzsim/fock.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ghzsim/error.h"

namespace ghzsim {

namespace {

constexpr std::array<std::string_view, kNumPaths> kPathNames = {
    "1", "2", "3", "4", "R1", "R2", "R3", "R4", "A", "B", "C", "D", "alpha", "beta", "discard"};

double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; k++) {
        r *= k;
    }
    return r;
}

// Permanent of a small real matrix by direct expansion over permutations.
double permanent(const std::vector<std::vector<double>> &m) {
    size_t n = m.size();
    if (n == 0) {
        return 1.0;
    }
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        double p = 1.0;
        for (size_t i = 0; i < n && p != 0.0; i++) {
            p *= m[i][perm[i]];
        }
        total += p;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

CoarseOccupation coarse_of(const Occupation &occ) {
    CoarseOccupation out;
    for (const auto &[key, n] : occ.entries()) {
        Slot s = key.slot();
        if (!out.empty() && out.back().first == s) {
            out.back().second += n;
        } else {
            out.emplace_back(s, n);
        }
    }
    return out;
}

// Photon arrival times per slot, with multiplicity, in slot order.
std::vector<std::vector<double>> slot_taus(const Occupation &occ) {
    std::vector<std::vector<double>> out;
    bool first = true;
    Slot prev{};
    for (const auto &[key, n] : occ.entries()) {
        if (first || key.slot() != prev) {
            out.emplace_back();
            prev = key.slot();
            first = false;
        }
        for (int k = 0; k < n; k++) {
            out.back().push_back(key.tau_ps());
        }
    }
    return out;
}

double multiplicity_norm(const Occupation &occ) {
    double r = 1.0;
    for (const auto &[key, n] : occ.entries()) {
        r *= factorial(n);
    }
    return r;
}

// <j|k> for two occupations sharing the same coarse occupation.
double physical_overlap(const Occupation &j, const Occupation &k, const OverlapModel &model) {
    if (j == k) {
        bool single_tau_per_slot = true;
        const auto &e = j.entries();
        for (size_t i = 1; i < e.size(); i++) {
            if (e[i].first.slot() == e[i - 1].first.slot()) {
                single_tau_per_slot = false;
                break;
            }
        }
        if (single_tau_per_slot) {
            return 1.0;
        }
    }
    auto tj = slot_taus(j);
    auto tk = slot_taus(k);
    double w = 1.0;
    for (size_t s = 0; s < tj.size(); s++) {
        size_t n = tj[s].size();
        std::vector<std::vector<double>> g(n, std::vector<double>(n));
        for (size_t a = 0; a < n; a++) {
            for (size_t b = 0; b < n; b++) {
                g[a][b] = mode_overlap(tj[s][a], tk[s][b], model);
            }
        }
        w *= permanent(g);
        if (w == 0.0) {
            return 0.0;
        }
    }
    return w / std::sqrt(multiplicity_norm(j) * multiplicity_norm(k));
}

}  // namespace

std::string_view path_name(Path p) {
    return kPathNames[index_of(p)];
}

Path parse_path(std::string_view name) {
    for (size_t k = 0; k < kNumPaths; k++) {
        if (kPathNames[k] == name) {
            return static_cast<Path>(k);
        }
    }
    if (name == "α") {
        return Path::kAlpha;
    }
    if (name == "β") {
        return Path::kBeta;
    }
    throw ConfigError("unknown path label '" + std::string(name) + "'");
}

PathSet all_paths() {
    PathSet s;
    s.set();
    return s;
}

Path beam_path(int beam) {
    if (beam < 1 || beam > 4) {
        throw ConfigError("beam number must be in 1..4, got " + std::to_string(beam));
    }
    return static_cast<Path>(beam - 1);
}

Path reflected_path(int beam) {
    if (beam < 1 || beam > 4) {
        throw ConfigError("beam number must be in 1..4, got " + std::to_string(beam));
    }
    return static_cast<Path>(index_of(Path::kR1) + beam - 1);
}

char pol_name(Pol p) {
    return p == Pol::kH ? 'H' : 'V';
}

std::string Mode::str() const {
    std::ostringstream out;
    out << pol_name(pol) << '_' << path_name(path);
    if (tau_ps != 0.0) {
        out << '@' << tau_ps;
    }
    return out.str();
}

ModeKey ModeKey::of(const Mode &m) {
    if (!std::isfinite(m.tau_ps)) {
        throw ConfigError("mode arrival time must be finite");
    }
    return {m.path, m.pol, static_cast<std::int64_t>(std::llround(m.tau_ps / kTauQuantumPs))};
}

Mode ModeKey::mode() const {
    return {path, pol, tau_ps()};
}

bool operator==(const Mode &a, const Mode &b) {
    return ModeKey::of(a) == ModeKey::of(b);
}

Occupation::Occupation(std::initializer_list<std::pair<Mode, int>> entries) {
    for (const auto &[m, n] : entries) {
        add(ModeKey::of(m), n);
    }
}

int Occupation::count(const ModeKey &key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, [](const auto &e, const ModeKey &k) {
        return e.first < k;
    });
    if (it != entries_.end() && it->first == key) {
        return it->second;
    }
    return 0;
}

void Occupation::add(const ModeKey &key, int n) {
    if (n == 0) {
        return;
    }
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, [](const auto &e, const ModeKey &k) {
        return e.first < k;
    });
    if (it != entries_.end() && it->first == key) {
        it->second += n;
        if (it->second < 0) {
            throw std::logic_error("negative occupation");
        }
        if (it->second == 0) {
            entries_.erase(it);
        }
        return;
    }
    if (n < 0) {
        throw std::logic_error("negative occupation");
    }
    entries_.insert(it, {key, n});
}

int Occupation::total() const {
    int t = 0;
    for (const auto &e : entries_) {
        t += e.second;
    }
    return t;
}

std::string Occupation::str() const {
    if (entries_.empty()) {
        return "|vac>";
    }
    std::ostringstream out;
    out << '|';
    bool first = true;
    for (const auto &[key, n] : entries_) {
        if (!first) {
            out << ',';
        }
        first = false;
        out << key.mode().str();
        if (n != 1) {
            out << '^' << n;
        }
    }
    out << '>';
    return out.str();
}

FockState::FockState(int truncation) : truncation_(truncation) {
    if (truncation < 0) {
        throw ConfigError("truncation must be nonnegative");
    }
}

double FockState::norm_squared() const {
    double t = 0.0;
    for (const auto &[occ, amp] : terms_) {
        t += std::norm(amp);
    }
    return t;
}

Complex FockState::amplitude(const Occupation &occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

void FockState::accumulate(const Occupation &occ, Complex amp) {
    if (occ.total() > truncation_) {
        discarded_ += std::norm(amp);
        return;
    }
    terms_[occ] += amp;
}

void FockState::prune() {
    std::erase_if(terms_, [](const auto &kv) {
        return std::abs(kv.second) < kAmpEpsilon;
    });
}

void FockState::scale(Complex factor) {
    for (auto &[occ, amp] : terms_) {
        amp *= factor;
    }
}

void OverlapModel::validate() const {
    if (!(sigma_t_ps > 0.0) || !std::isfinite(sigma_t_ps)) {
        throw ConfigError("overlap sigma_t must be positive and finite");
    }
}

FockState create_vacuum(int truncation) {
    FockState s(truncation);
    s.accumulate(Occupation{}, 1.0);
    return s;
}

FockState apply_pair_creation(const FockState &state, const Mode &signal, const Mode &idler, Complex amp) {
    ModeKey ks = ModeKey::of(signal);
    ModeKey ki = ModeKey::of(idler);
    if (ks == ki) {
        throw ConfigError("pair creation needs distinct signal and idler modes, got " + signal.str() + " twice");
    }
    if (state.truncation() < 2) {
        throw ConfigError("pair creation needs truncation >= 2");
    }
    FockState out(state.truncation());
    out.set_discarded(state.discarded_weight());
    for (const auto &[occ, a] : state.terms()) {
        Occupation next = occ;
        double factor = std::sqrt(static_cast<double>(occ.count(ks) + 1)) *
                        std::sqrt(static_cast<double>(occ.count(ki) + 1));
        next.add(ks, 1);
        next.add(ki, 1);
        out.accumulate(next, amp * factor * a);
    }
    out.prune();
    return out;
}

FockState apply_pair_emission(const FockState &state, const Mode &signal, const Mode &idler, Complex amp) {
    FockState created = apply_pair_creation(state, signal, idler, amp);
    FockState out = state;
    out.set_discarded(created.discarded_weight());
    for (const auto &[occ, a] : created.terms()) {
        out.accumulate(occ, a);
    }
    out.prune();
    return out;
}

double mode_overlap(double tau_a_ps, double tau_b_ps, const OverlapModel &model) {
    model.validate();
    double x = (tau_a_ps - tau_b_ps) / model.sigma_t_ps;
    switch (model.kernel) {
        case OverlapKernel::kGaussian:
            return std::exp(-0.5 * x * x);
        case OverlapKernel::kLorentzian:
            return 1.0 / (1.0 + x * x);
    }
    return 0.0;
}

CoarseDistribution coarse_distribution(const FockState &state, const OverlapModel &model) {
    model.validate();
    std::map<CoarseOccupation, std::vector<const std::pair<const Occupation, Complex> *>> groups;
    for (const auto &term : state.terms()) {
        groups[coarse_of(term.first)].push_back(&term);
    }
    CoarseDistribution out;
    for (const auto &[coarse, members] : groups) {
        double p = 0.0;
        for (size_t a = 0; a < members.size(); a++) {
            p += std::norm(members[a]->second) * physical_overlap(members[a]->first, members[a]->first, model);
            for (size_t b = a + 1; b < members.size(); b++) {
                double w = physical_overlap(members[a]->first, members[b]->first, model);
                if (w != 0.0) {
                    p += 2.0 * w * std::real(members[a]->second * std::conj(members[b]->second));
                }
            }
        }
        if (p > 0.0) {
            out[coarse] = p;
        }
    }
    return out;
}

int slot_count(const CoarseOccupation &occ, Slot s) {
    for (const auto &[slot, n] : occ) {
        if (slot == s) {
            return n;
        }
    }
    return 0;
}

int path_count(const CoarseOccupation &occ, Path p) {
    int n = 0;
    for (const auto &[slot, k] : occ) {
        if (slot.path == p) {
            n += k;
        }
    }
    return n;
}

double project(const CoarseDistribution &dist, const Pattern &pattern) {
    double total = 0.0;
    for (const auto &[occ, p] : dist) {
        bool match = true;
        for (const auto &[slot, n] : pattern) {
            if (slot_count(occ, slot) != n) {
                match = false;
                break;
            }
        }
        if (match) {
            total += p;
        }
    }
    return total;
}

double project(const FockState &state, const Pattern &pattern, const OverlapModel &model, const PathSet &declared) {
    for (const auto &[slot, n] : pattern) {
        if (!declared.test(index_of(slot.path))) {
            throw ConfigError("pattern references undeclared path '" + std::string(path_name(slot.path)) + "'");
        }
        if (n < 0) {
            throw ConfigError("pattern counts must be nonnegative");
        }
    }
    return project(coarse_distribution(state, model), pattern);
}

FockState normalize(const FockState &state) {
    double n2 = state.norm_squared();
    if (!(n2 > 0.0)) {
        throw ConfigError("cannot normalize a zero-norm state");
    }
    FockState out = state;
    out.scale(1.0 / std::sqrt(n2));
    return out;
}

int total_photons(const FockState &state) {
    int best = 0;
    for (const auto &[occ, amp] : state.terms()) {
        best = std::max(best, occ.total());
    }
    return best;
}

double discarded_weight(const FockState &state) {
    return state.discarded_weight();
}

}  // namespace ghzsim
