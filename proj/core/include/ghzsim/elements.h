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

#ifndef GHZSIM_ELEMENTS_H
#define GHZSIM_ELEMENTS_H

#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "ghzsim/detection.h"
#include "ghzsim/fock.h"

namespace ghzsim {

/// Half-wave plate, fast axis at theta degrees from H.
struct Hwp {
    Path path;
    double theta_deg;
};

/// Polarizing beam splitter: H transmitted, V reflected with phase i.
struct Pbs {
    Path in;
    Path transmit;
    Path reflect;
};

struct DisplacerBranch {
    Path from;
    Pol pol;
    Path to;
    double delay_ps = 0.0;
};

/// Calcite beam displacer: relabels (path, pol) inputs and adds the branch's
/// optical delay. Unmapped occupied modes are an error unless pass_through.
struct BeamDisplacer {
    std::vector<DisplacerBranch> branches;
    bool pass_through = true;
};

/// Glass slab (e.g. stacked cover slips) adding a fixed delay on one path.
struct DelaySlab {
    Path path;
    double delay_ps;
};

/// Collection loss: amplitude sqrt(eta) survives, the rest goes to kDiscard.
struct Coupler {
    Path path;
    double eta;
};

using Element = std::variant<Hwp, Pbs, BeamDisplacer, DelaySlab, Coupler>;

std::vector<Path> referenced_paths(const Element &e);
void validate_element(const Element &e);

struct Circuit {
    std::string name;
    std::vector<Element> elements;
    PathSet paths;
    std::map<Path, DetectorModel> detectors;

    void validate() const;
};

FockState apply_hwp(const FockState &state, Path path, double theta_deg, const PathSet &declared = all_paths());
FockState apply_pbs(
    const FockState &state, Path in_path, Path t_path, Path r_path, const PathSet &declared = all_paths());
FockState apply_beam_displacer(const FockState &state, const BeamDisplacer &bd, const PathSet &declared = all_paths());
FockState apply_delay_slab(const FockState &state, Path path, int n_slips, double slip_delay_ps);
FockState apply_delay(const FockState &state, Path path, double delay_ps);
FockState apply_coupler(const FockState &state, Path path, double eta);
FockState apply_element(const FockState &state, const Element &e, const PathSet &declared = all_paths());

FockState run_circuit(const Circuit &circuit, const FockState &input);

/// Monte Carlo counterpart of apply_coupler: each photon on `path` survives
/// with probability eta, otherwise it moves to kDiscard.
Occupation thin_photons(const Occupation &occ, Path path, double eta, std::mt19937_64 &rng);

}  // namespace ghzsim

#endif
