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

#ifndef GHZSIM_LAYOUTS_H
#define GHZSIM_LAYOUTS_H

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ghzsim/elements.h"

namespace ghzsim {

/// Optical path-length offsets of the four-beam source, in ps of arrival time.
///
/// Beams 3 and 4 cross an extra displacer length before the crystal, so their
/// pump pulses (and hence their photons) arrive late. In the output displacers
/// the branch coming from beams 2/4 (BD3) or 1/2 (BD4) walks off and picks up
/// extra delay.
struct BdGeometry {
    double pump_extra_34_ps = 1.0;
    double bd3_extra_24_ps = 1.464;
    double bd4_extra_12_ps = 2.22;

    /// Every offset must be positive: that is the ordering the hardware imposes.
    void validate() const;
    /// Pump arrival offsets for beams 1..4.
    std::array<double, 4> pump_arrivals() const;
};

enum class LayoutKind : std::uint8_t { kFig1, kFig2, kFig4Hom, kFig6G2 };

std::string_view layout_name(LayoutKind kind);
LayoutKind parse_layout(std::string_view name);

/// Default detector complement: Id200 on C and D, PGA-600 elsewhere.
DetectorModel default_detector(Path port);
std::map<Path, DetectorModel> default_detectors(const std::vector<Path> &ports);

/// Two-beam Bell source: beams 1 and 2 split by PBSs and recombined in one
/// displacer into ports A and B.
Circuit bell_circuit();

/// Four-beam source. Ports: beam 1 -> B(H), C(V); beam 2 -> C(H), A(V);
/// beam 3 -> A(H), D(V); beam 4 -> D(H), B(V).
Circuit ghz_circuit(const BdGeometry &geometry);

struct HomOptions {
    int n_slips = 0;
    double slip_delay_ps = 0.244;
    /// Continuous extra delay on path 3; used by property tests.
    double extra_delay_ps = 0.0;
    /// Error on the 22.5 degree plate in front of the alpha/beta splitter.
    double hwp_error_deg = 0.0;
};

/// Beams 1 and 3 pumped; signals go to C and D, idlers are merged into B
/// (idler 3 rotated to H) and split by a 22.5 degree plate and PBS into
/// alpha (transmitted) and beta (reflected). Cover slips sit on path 3.
Circuit hom_circuit(const BdGeometry &geometry, const HomOptions &options);

/// Same optics as hom_circuit; the g2 measurement pumps beam 3 only and
/// heralds on D.
Circuit g2_circuit(const BdGeometry &geometry, double hwp_error_deg);

/// Arrival-time mismatch at B between idler 1 and idler 3, ps.
double hom_mismatch_ps(const BdGeometry &geometry, const HomOptions &options);

/// Arrival time (ps) at the output port for each PBS arm k1..k4, R1..R4 of the
/// four-beam circuit, including pump offsets.
std::map<Path, double> ghz_arm_arrivals(const BdGeometry &geometry);

/// Arms that feed the same output port in the four-beam circuit; their
/// arrival times must agree for the two GHZ terms to interfere.
std::vector<std::pair<Path, Path>> ghz_interfering_arms();

/// Matched A/B gate delays for a trigger chain: the photon's flight
/// (free space + fiber) minus trigger latency, centered in the gate.
TriggerChain matched_chain(TriggerChain chain, const std::map<Path, DetectorModel> &detectors, const PortTiming &timing);

/// Sets the internal delay of the C and D detectors so their gates are
/// centered on the photon arrival.
void align_herald_detectors(std::map<Path, DetectorModel> &detectors, const PortTiming &timing);

}  // namespace ghzsim

#endif
