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

#ifndef GHZSIM_DETECTION_H
#define GHZSIM_DETECTION_H

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ghzsim/fock.h"

namespace ghzsim {

/// Speed of light in vacuum, m/ns.
inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

/// Gated single-photon counting module. Clicks are binary.
struct DetectorModel {
    double efficiency = 0.1;
    double gate_ns = 2.5;
    double dark_hz = 150.0;
    double max_trigger_mhz = 5.0;
    double internal_delay_ns = 0.0;

    void validate() const;
    /// Probability of a dark count within one gate.
    double dark_probability() const;

    /// IdQuantique Id200 datasheet values.
    static DetectorModel id200();
    /// Princeton Lightwave PGA-600 (and the IBM module it replaced).
    static DetectorModel pga600();
};

enum class TriggerSource : std::uint8_t { kCoincidenceCD, kSingleC, kSingleD };

/// Heralding electronics: divided pump clock for C/D, coincidence unit, and a
/// two-channel delay generator gating A (channel 2) and B (channel 1).
struct TriggerChain {
    int divide_by = 16;
    double dg535_ch1_ns = 0.0;
    double dg535_ch2_ns = 0.0;
    double dg535_step_ns = 0.005;
    double fiber_delay_ns = 489.6;
    double coincidence_window_ns = 2.0;
    /// Detection + coincidence registration + trigger-out.
    double latency_ns = 450.0;
    TriggerSource source = TriggerSource::kCoincidenceCD;

    void validate() const;
    /// Rounds v to the delay-generator step.
    double quantize(double v) const;
};

enum class EventOrigin : std::uint8_t { kPhoton, kDark };

struct EventRecord {
    Path detector;
    double time_ns;
    EventOrigin origin;

    bool operator==(const EventRecord &) const = default;
};

double fiber_delay_ns(double length_m, double group_index);

/// Single gate of a detector. `photon_times_ns` are arrival times at the port.
/// Returns the click time (photon arrival or a dark count inside the gate).
std::optional<EventRecord> detect(
    Path port,
    const std::vector<double> &photon_times_ns,
    const DetectorModel &detector,
    double gate_open_ns,
    std::mt19937_64 &rng);

/// Photon arrival times of one pump pulse, per port.
struct PulsePhotons {
    double pulse_time_ns = 0.0;
    std::map<Path, std::vector<double>> arrivals_ns;
};

/// Free-space and fiber flight times from crystal to each port.
struct PortTiming {
    double free_space_ns = 3.0;
    /// Added on ports A and B only (the heralding fiber spools).
    double fiber_ns = 489.6;

    double arrival_offset(Path port) const;
};

/// Herald-and-gate state machine over a time-ordered pulse sequence. Only
/// pulses on the divided clock gate C and D. A/B gates that would exceed the
/// detector trigger rate are dropped.
class HeraldGate {
   public:
    HeraldGate(TriggerChain chain, std::map<Path, DetectorModel> detectors);

    /// Processes one pump pulse. Returns every click produced (C, D and, when
    /// heralded, A and B). `pulse_index` selects divided-clock pulses.
    std::vector<EventRecord> process(std::uint64_t pulse_index, const PulsePhotons &pulse, std::mt19937_64 &rng);

    std::uint64_t triggers() const {
        return triggers_;
    }
    std::uint64_t dropped_gates() const {
        return dropped_;
    }
    std::uint64_t gated_pulses() const {
        return gated_;
    }
    const TriggerChain &chain() const {
        return chain_;
    }

   private:
    TriggerChain chain_;
    std::map<Path, DetectorModel> detectors_;
    std::map<Path, double> last_gate_ns_;
    std::uint64_t triggers_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t gated_ = 0;
};

/// Convenience wrapper over HeraldGate for a batch of pulses.
std::vector<EventRecord> herald_and_gate(
    const std::vector<PulsePhotons> &pulses,
    const TriggerChain &chain,
    const std::map<Path, DetectorModel> &detectors,
    std::mt19937_64 &rng);

/// Greedy earliest-match pairing, |dt| strictly inside half the window.
std::uint64_t count_coincidences(std::vector<EventRecord> events, std::pair<Path, Path> ports, double window_ns);
std::uint64_t singles(const std::vector<EventRecord> &events, Path port);

void write_events_csv(std::ostream &out, const std::vector<EventRecord> &events);
std::vector<EventRecord> read_events_csv(std::istream &in);

/// Exact click statistics of threshold detectors fed by a detection-level
/// photon distribution. Detectors see both polarizations of their path.
class ClickModel {
   public:
    explicit ClickModel(std::map<Path, DetectorModel> detectors);

    /// P(every port in `ports` clicks).
    double all_click(const CoarseDistribution &dist, const std::vector<Path> &ports) const;
    /// P(no port in `ports` clicks).
    double none_click(const CoarseDistribution &dist, const std::vector<Path> &ports) const;

    const DetectorModel &detector(Path p) const;

   private:
    std::map<Path, DetectorModel> detectors_;
};

}  // namespace ghzsim

#endif
