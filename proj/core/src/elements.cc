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

#include "ghzsim/elements.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "ghzsim/error.h"

namespace ghzsim {

namespace {

using ModeImage = std::vector<std::pair<ModeKey, Complex>>;
using ModeMap = std::function<ModeImage(const ModeKey &)>;

double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; k++) {
        r *= k;
    }
    return r;
}

bool is_identity(const ModeImage &img, const ModeKey &key) {
    return img.size() == 1 && img[0].first == key && img[0].second == Complex{1.0, 0.0};
}

// Applies the single-photon linear map a^dag_m -> sum_m' U(m', m) a^dag_m' to every photon.
FockState transform_modes(const FockState &state, const ModeMap &map) {
    FockState out(state.truncation());
    out.set_discarded(state.discarded_weight());
    std::map<ModeKey, ModeImage> cache;
    auto image_of = [&](const ModeKey &k) -> const ModeImage & {
        auto it = cache.find(k);
        if (it == cache.end()) {
            it = cache.emplace(k, map(k)).first;
        }
        return it->second;
    };

    for (const auto &[occ, amp] : state.terms()) {
        // Untouched photons are carried as-is; moving photons are expanded as a polynomial.
        Occupation fixed;
        std::vector<ModeKey> moving;
        Complex coeff = amp;
        for (const auto &[key, n] : occ.entries()) {
            coeff /= std::sqrt(factorial(n));
            if (is_identity(image_of(key), key)) {
                fixed.add(key, n);
            } else {
                for (int k = 0; k < n; k++) {
                    moving.push_back(key);
                }
            }
        }
        std::map<std::vector<ModeKey>, Complex> poly{{{}, coeff}};
        for (const auto &src : moving) {
            std::map<std::vector<ModeKey>, Complex> next;
            for (const auto &[mono, c] : poly) {
                for (const auto &[dst, u] : image_of(src)) {
                    auto m = mono;
                    m.insert(std::upper_bound(m.begin(), m.end(), dst), dst);
                    next[std::move(m)] += c * u;
                }
            }
            poly = std::move(next);
        }
        for (const auto &[mono, c] : poly) {
            Occupation result = fixed;
            for (const auto &k : mono) {
                result.add(k, 1);
            }
            double f = 1.0;
            for (const auto &[key, n] : result.entries()) {
                f *= factorial(n);
            }
            out.accumulate(result, c * std::sqrt(f));
        }
    }
    out.prune();
    return out;
}

void require_declared(Path p, const PathSet &declared) {
    if (!declared.test(index_of(p))) {
        throw ConfigError("element references undeclared path '" + std::string(path_name(p)) + "'");
    }
}

}  // namespace

std::vector<Path> referenced_paths(const Element &e) {
    return std::visit(
        [](const auto &el) -> std::vector<Path> {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Hwp>) {
                return {el.path};
            } else if constexpr (std::is_same_v<T, Pbs>) {
                return {el.in, el.transmit, el.reflect};
            } else if constexpr (std::is_same_v<T, BeamDisplacer>) {
                std::vector<Path> out;
                for (const auto &b : el.branches) {
                    out.push_back(b.from);
                    out.push_back(b.to);
                }
                return out;
            } else if constexpr (std::is_same_v<T, DelaySlab>) {
                return {el.path};
            } else {
                return {el.path, Path::kDiscard};
            }
        },
        e);
}

void validate_element(const Element &e) {
    std::visit(
        [](const auto &el) {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Hwp>) {
                if (!(el.theta_deg >= 0.0 && el.theta_deg < 180.0)) {
                    throw ConfigError("half-wave plate angle must lie in [0, 180) degrees");
                }
            } else if constexpr (std::is_same_v<T, BeamDisplacer>) {
                std::vector<std::pair<Path, Pol>> inputs;
                std::vector<std::pair<Path, Pol>> outputs;
                for (const auto &b : el.branches) {
                    if (!std::isfinite(b.delay_ps)) {
                        throw ConfigError("beam displacer delay must be finite");
                    }
                    inputs.emplace_back(b.from, b.pol);
                    outputs.emplace_back(b.to, b.pol);
                }
                std::sort(inputs.begin(), inputs.end());
                std::sort(outputs.begin(), outputs.end());
                if (std::adjacent_find(inputs.begin(), inputs.end()) != inputs.end()) {
                    throw ConfigError("beam displacer maps the same input twice");
                }
                if (std::adjacent_find(outputs.begin(), outputs.end()) != outputs.end()) {
                    throw ConfigError("beam displacer merges two inputs into the same output mode");
                }
            } else if constexpr (std::is_same_v<T, DelaySlab>) {
                if (!std::isfinite(el.delay_ps)) {
                    throw ConfigError("delay slab delay must be finite");
                }
            } else if constexpr (std::is_same_v<T, Coupler>) {
                if (!(el.eta >= 0.0 && el.eta <= 1.0)) {
                    throw ConfigError("coupler transmission must lie in [0, 1]");
                }
            }
        },
        e);
}

void Circuit::validate() const {
    for (const auto &e : elements) {
        validate_element(e);
        for (Path p : referenced_paths(e)) {
            require_declared(p, paths);
        }
    }
    for (const auto &[port, det] : detectors) {
        require_declared(port, paths);
        det.validate();
    }
}

FockState apply_hwp(const FockState &state, Path path, double theta_deg, const PathSet &declared) {
    require_declared(path, declared);
    validate_element(Hwp{path, theta_deg});
    double two_theta = 2.0 * theta_deg * std::numbers::pi / 180.0;
    double c = std::cos(two_theta);
    double s = std::sin(two_theta);
    return transform_modes(state, [&](const ModeKey &k) -> ModeImage {
        if (k.path != path) {
            return {{k, 1.0}};
        }
        ModeKey h{k.path, Pol::kH, k.tau_ticks};
        ModeKey v{k.path, Pol::kV, k.tau_ticks};
        if (k.pol == Pol::kH) {
            return {{h, c}, {v, s}};
        }
        return {{h, s}, {v, -c}};
    });
}

FockState apply_pbs(const FockState &state, Path in_path, Path t_path, Path r_path, const PathSet &declared) {
    require_declared(in_path, declared);
    require_declared(t_path, declared);
    require_declared(r_path, declared);
    return transform_modes(state, [&](const ModeKey &k) -> ModeImage {
        if (k.path != in_path) {
            return {{k, 1.0}};
        }
        if (k.pol == Pol::kH) {
            return {{ModeKey{t_path, Pol::kH, k.tau_ticks}, 1.0}};
        }
        return {{ModeKey{r_path, Pol::kV, k.tau_ticks}, Complex{0.0, 1.0}}};
    });
}

FockState apply_beam_displacer(const FockState &state, const BeamDisplacer &bd, const PathSet &declared) {
    validate_element(bd);
    for (const auto &b : bd.branches) {
        require_declared(b.from, declared);
        require_declared(b.to, declared);
    }
    if (!bd.pass_through) {
        for (const auto &[occ, amp] : state.terms()) {
            for (const auto &[key, n] : occ.entries()) {
                bool covered = std::any_of(bd.branches.begin(), bd.branches.end(), [&](const DisplacerBranch &b) {
                    return b.from == key.path && b.pol == key.pol;
                });
                if (!covered) {
                    throw ConfigError("beam displacer does not cover occupied mode " + key.mode().str());
                }
            }
        }
    }
    return transform_modes(state, [&](const ModeKey &k) -> ModeImage {
        for (const auto &b : bd.branches) {
            if (b.from == k.path && b.pol == k.pol) {
                return {{ModeKey::of(Mode{b.to, k.pol, k.tau_ps() + b.delay_ps}), 1.0}};
            }
        }
        return {{k, 1.0}};
    });
}

FockState apply_delay(const FockState &state, Path path, double delay_ps) {
    validate_element(DelaySlab{path, delay_ps});
    if (delay_ps == 0.0) {
        return state;
    }
    return transform_modes(state, [&](const ModeKey &k) -> ModeImage {
        if (k.path != path) {
            return {{k, 1.0}};
        }
        return {{ModeKey::of(Mode{k.path, k.pol, k.tau_ps() + delay_ps}), 1.0}};
    });
}

FockState apply_delay_slab(const FockState &state, Path path, int n_slips, double slip_delay_ps) {
    if (n_slips < 0) {
        throw ConfigError("number of cover slips must be nonnegative");
    }
    return apply_delay(state, path, n_slips * slip_delay_ps);
}

FockState apply_coupler(const FockState &state, Path path, double eta) {
    validate_element(Coupler{path, eta});
    if (eta == 1.0) {
        return state;
    }
    double keep = std::sqrt(eta);
    double lose = std::sqrt(1.0 - eta);
    return transform_modes(state, [&](const ModeKey &k) -> ModeImage {
        if (k.path != path) {
            return {{k, 1.0}};
        }
        ModeImage img;
        if (keep > 0.0) {
            img.emplace_back(k, keep);
        }
        if (lose > 0.0) {
            img.emplace_back(ModeKey{Path::kDiscard, k.pol, k.tau_ticks}, lose);
        }
        return img;
    });
}

FockState apply_element(const FockState &state, const Element &e, const PathSet &declared) {
    return std::visit(
        [&](const auto &el) -> FockState {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Hwp>) {
                return apply_hwp(state, el.path, el.theta_deg, declared);
            } else if constexpr (std::is_same_v<T, Pbs>) {
                return apply_pbs(state, el.in, el.transmit, el.reflect, declared);
            } else if constexpr (std::is_same_v<T, BeamDisplacer>) {
                return apply_beam_displacer(state, el, declared);
            } else if constexpr (std::is_same_v<T, DelaySlab>) {
                require_declared(el.path, declared);
                return apply_delay(state, el.path, el.delay_ps);
            } else {
                require_declared(el.path, declared);
                return apply_coupler(state, el.path, el.eta);
            }
        },
        e);
}

FockState run_circuit(const Circuit &circuit, const FockState &input) {
    circuit.validate();
    FockState s = input;
    for (const auto &e : circuit.elements) {
        s = apply_element(s, e, circuit.paths);
    }
    return s;
}

Occupation thin_photons(const Occupation &occ, Path path, double eta, std::mt19937_64 &rng) {
    validate_element(Coupler{path, eta});
    Occupation out;
    std::bernoulli_distribution survive(eta);
    for (const auto &[key, n] : occ.entries()) {
        if (key.path != path) {
            out.add(key, n);
            continue;
        }
        for (int k = 0; k < n; k++) {
            if (survive(rng)) {
                out.add(key, 1);
            } else {
                out.add(ModeKey{Path::kDiscard, key.pol, key.tau_ticks}, 1);
            }
        }
    }
    return out;
}

}  // namespace ghzsim
