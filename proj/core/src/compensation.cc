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
#include <functional>
#include <set>

#include "ghzsim/error.h"
#include "ghzsim/experiments.h"

namespace ghzsim {

OplGeometry ghz_opl_geometry(const BdGeometry &geometry) {
    geometry.validate();
    return {ghz_arm_arrivals(geometry), ghz_interfering_arms()};
}

SlipPlan opl_compensation(const OplGeometry &geometry, double slip_delay_ps, int max_slips) {
    if (!(slip_delay_ps > 0.0)) {
        throw ConfigError("slip delay must be positive");
    }
    if (max_slips < 0) {
        throw ConfigError("maximum slip count must be nonnegative");
    }
    for (const auto &[a, b] : geometry.interfering) {
        if (!geometry.arrival_ps.contains(a) || !geometry.arrival_ps.contains(b)) {
            throw ConfigError("interfering pair references a path with no path length");
        }
        if (a == b) {
            throw ConfigError("a path cannot interfere with itself");
        }
    }
    for (const auto &[p, t] : geometry.arrival_ps) {
        if (!std::isfinite(t)) {
            throw ConfigError("path lengths must be finite");
        }
    }

    // Paths linked by interfering pairs are solved together.
    std::map<Path, Path> parent;
    std::function<Path(Path)> find = [&](Path p) {
        auto it = parent.find(p);
        if (it == parent.end() || it->second == p) {
            return p;
        }
        return it->second = find(it->second);
    };
    for (const auto &[a, b] : geometry.interfering) {
        parent.emplace(a, a);
        parent.emplace(b, b);
        parent[find(a)] = find(b);
    }
    std::map<Path, std::vector<Path>> components;
    for (const auto &[p, unused] : parent) {
        components[find(p)].push_back(p);
    }

    SlipPlan plan;
    for (const auto &[p, t] : geometry.arrival_ps) {
        plan.slips[p] = 0;
    }
    double total_residual = 0.0;
    for (const auto &[root, paths] : components) {
        std::vector<std::pair<Path, Path>> pairs;
        for (const auto &pr : geometry.interfering) {
            if (find(pr.first) == root) {
                pairs.push_back(pr);
            }
        }
        double combos = std::pow(max_slips + 1.0, static_cast<double>(paths.size()));
        if (combos > 5e7) {
            throw ConfigError("slip search space too large; lower max_slips or split the geometry");
        }
        std::map<Path, int> current;
        for (Path p : paths) {
            current[p] = 0;
        }
        std::map<Path, int> best = current;
        double best_cost = INFINITY;
        int best_total = 0;
        auto evaluate = [&] {
            double cost = 0.0;
            for (const auto &[a, b] : pairs) {
                double ta = geometry.arrival_ps.at(a) + current[a] * slip_delay_ps;
                double tb = geometry.arrival_ps.at(b) + current[b] * slip_delay_ps;
                cost = std::max(cost, std::abs(ta - tb));
            }
            int total = 0;
            for (const auto &[p, n] : current) {
                total += n;
            }
            if (cost < best_cost - 1e-9 || (std::abs(cost - best_cost) <= 1e-9 && total < best_total)) {
                best_cost = cost;
                best_total = total;
                best = current;
            }
        };
        std::function<void(std::size_t)> search = [&](std::size_t k) {
            if (k == paths.size()) {
                evaluate();
                return;
            }
            for (int n = 0; n <= max_slips; n++) {
                current[paths[k]] = n;
                search(k + 1);
            }
            current[paths[k]] = 0;
        };
        search(0);
        for (const auto &[p, n] : best) {
            plan.slips[p] = n;
            plan.total_slips += n;
        }
        total_residual = std::max(total_residual, best_cost);
    }
    plan.residual_ps = total_residual;
    return plan;
}

}  // namespace ghzsim
