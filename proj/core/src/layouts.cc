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

#include "ghzsim/layouts.h"

#include <cmath>

#include "ghzsim/error.h"

namespace ghzsim {

void BdGeometry::validate() const {
    for (double v : {pump_extra_34_ps, bd3_extra_24_ps, bd4_extra_12_ps}) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ConfigError(
                "displacer geometry must make beams 3,4 late at the crystal and the walk-off branches late at "
                "BD3/BD4 (all offsets > 0)");
        }
    }
}

std::array<double, 4> BdGeometry::pump_arrivals() const {
    return {0.0, 0.0, pump_extra_34_ps, pump_extra_34_ps};
}

std::string_view layout_name(LayoutKind kind) {
    switch (kind) {
        case LayoutKind::kFig1:
            return "fig1";
        case LayoutKind::kFig2:
            return "fig2";
        case LayoutKind::kFig4Hom:
            return "fig4-hom";
        case LayoutKind::kFig6G2:
            return "fig6-g2";
    }
    return "?";
}

LayoutKind parse_layout(std::string_view name) {
    for (auto k : {LayoutKind::kFig1, LayoutKind::kFig2, LayoutKind::kFig4Hom, LayoutKind::kFig6G2}) {
        if (layout_name(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown layout '" + std::string(name) + "'");
}

DetectorModel default_detector(Path port) {
    if (port == Path::kC || port == Path::kD) {
        return DetectorModel::id200();
    }
    return DetectorModel::pga600();
}

std::map<Path, DetectorModel> default_detectors(const std::vector<Path> &ports) {
    std::map<Path, DetectorModel> out;
    for (Path p : ports) {
        out[p] = default_detector(p);
    }
    return out;
}

namespace {

PathSet paths_of(std::initializer_list<Path> ps) {
    PathSet s;
    for (Path p : ps) {
        s.set(index_of(p));
    }
    return s;
}

}  // namespace

Circuit bell_circuit() {
    Circuit c;
    c.name = "fig1";
    c.paths = paths_of({Path::k1, Path::k2, Path::kR1, Path::kR2, Path::kA, Path::kB});
    c.elements.push_back(Pbs{Path::k1, Path::k1, Path::kR1});
    c.elements.push_back(Pbs{Path::k2, Path::k2, Path::kR2});
    c.elements.push_back(BeamDisplacer{{
        {Path::k1, Pol::kH, Path::kA, 0.0},
        {Path::kR2, Pol::kV, Path::kA, 0.0},
        {Path::k2, Pol::kH, Path::kB, 0.0},
        {Path::kR1, Pol::kV, Path::kB, 0.0},
    }});
    c.detectors = default_detectors({Path::kA, Path::kB});
    c.detectors[Path::kA] = DetectorModel::id200();
    c.detectors[Path::kB] = DetectorModel::id200();
    return c;
}

Circuit ghz_circuit(const BdGeometry &geometry) {
    geometry.validate();
    Circuit c;
    c.name = "fig2";
    c.paths = paths_of({Path::k1, Path::k2, Path::k3, Path::k4, Path::kR1, Path::kR2, Path::kR3, Path::kR4, Path::kA,
                        Path::kB, Path::kC, Path::kD});
    for (int b = 1; b <= 4; b++) {
        c.elements.push_back(Pbs{beam_path(b), beam_path(b), reflected_path(b)});
    }
    double d3 = geometry.bd3_extra_24_ps;
    double d4 = geometry.bd4_extra_12_ps;
    // BD3 builds ports C and D.
    c.elements.push_back(BeamDisplacer{{
        {Path::kR1, Pol::kV, Path::kC, 0.0},
        {Path::k2, Pol::kH, Path::kC, d3},
        {Path::kR3, Pol::kV, Path::kD, 0.0},
        {Path::k4, Pol::kH, Path::kD, d3},
    }});
    // BD4 builds ports A and B.
    c.elements.push_back(BeamDisplacer{{
        {Path::k3, Pol::kH, Path::kA, 0.0},
        {Path::kR2, Pol::kV, Path::kA, d4},
        {Path::k1, Pol::kH, Path::kB, d4},
        {Path::kR4, Pol::kV, Path::kB, 0.0},
    }});
    c.detectors = default_detectors({Path::kA, Path::kB, Path::kC, Path::kD});
    return c;
}

Circuit hom_circuit(const BdGeometry &geometry, const HomOptions &options) {
    geometry.validate();
    if (options.n_slips < 0) {
        throw ConfigError("number of cover slips must be nonnegative");
    }
    if (!(options.slip_delay_ps >= 0.0)) {
        throw ConfigError("slip delay must be nonnegative");
    }
    Circuit c;
    c.name = "fig4-hom";
    c.paths = paths_of({Path::k1, Path::k3, Path::kR1, Path::kR3, Path::kB, Path::kC, Path::kD, Path::kAlpha,
                        Path::kBeta});
    double slab = options.n_slips * options.slip_delay_ps + options.extra_delay_ps;
    if (slab != 0.0) {
        c.elements.push_back(DelaySlab{Path::k3, slab});
    }
    c.elements.push_back(Pbs{Path::k1, Path::k1, Path::kR1});
    c.elements.push_back(Pbs{Path::k3, Path::k3, Path::kR3});
    c.elements.push_back(Hwp{Path::kR3, 45.0});
    c.elements.push_back(BeamDisplacer{{
        {Path::k1, Pol::kH, Path::kC, 0.0},
        {Path::k3, Pol::kH, Path::kD, 0.0},
        {Path::kR1, Pol::kV, Path::kB, geometry.bd4_extra_12_ps},
        {Path::kR3, Pol::kH, Path::kB, 0.0},
    }});
    c.elements.push_back(Hwp{Path::kB, 22.5 + options.hwp_error_deg});
    c.elements.push_back(Pbs{Path::kB, Path::kAlpha, Path::kBeta});
    c.detectors = default_detectors({Path::kC, Path::kD, Path::kAlpha, Path::kBeta});
    return c;
}

Circuit g2_circuit(const BdGeometry &geometry, double hwp_error_deg) {
    HomOptions options;
    options.hwp_error_deg = hwp_error_deg;
    Circuit c = hom_circuit(geometry, options);
    c.name = "fig6-g2";
    return c;
}

double hom_mismatch_ps(const BdGeometry &geometry, const HomOptions &options) {
    double idler1 = geometry.bd4_extra_12_ps;
    double idler3 = geometry.pump_extra_34_ps + options.n_slips * options.slip_delay_ps + options.extra_delay_ps;
    return idler1 - idler3;
}

std::map<Path, double> ghz_arm_arrivals(const BdGeometry &geometry) {
    geometry.validate();
    double e = geometry.pump_extra_34_ps;
    double d3 = geometry.bd3_extra_24_ps;
    double d4 = geometry.bd4_extra_12_ps;
    return {
        {Path::k1, d4},
        {Path::kR1, 0.0},
        {Path::k2, d3},
        {Path::kR2, d4},
        {Path::k3, e},
        {Path::kR3, e},
        {Path::k4, e + d3},
        {Path::kR4, e},
    };
}

std::vector<std::pair<Path, Path>> ghz_interfering_arms() {
    return {
        {Path::k3, Path::kR2},  // A
        {Path::k1, Path::kR4},  // B
        {Path::kR1, Path::k2},  // C
        {Path::kR3, Path::k4},  // D
    };
}

TriggerChain matched_chain(TriggerChain chain, const std::map<Path, DetectorModel> &detectors, const PortTiming &timing) {
    double trigger = timing.arrival_offset(Path::kC) + chain.latency_ns;
    auto gate_for = [&](Path port) {
        auto it = detectors.find(port);
        double gate = it == detectors.end() ? default_detector(port).gate_ns : it->second.gate_ns;
        return chain.quantize(timing.arrival_offset(port) - trigger - gate / 2.0);
    };
    chain.dg535_ch1_ns = gate_for(Path::kB);
    chain.dg535_ch2_ns = gate_for(Path::kA);
    return chain;
}

void align_herald_detectors(std::map<Path, DetectorModel> &detectors, const PortTiming &timing) {
    for (Path p : {Path::kC, Path::kD}) {
        auto it = detectors.find(p);
        if (it != detectors.end()) {
            it->second.internal_delay_ns = std::max(0.0, timing.arrival_offset(p) - it->second.gate_ns / 2.0);
        }
    }
}

}  // namespace ghzsim
