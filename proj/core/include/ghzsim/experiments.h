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

#ifndef GHZSIM_EXPERIMENTS_H
#define GHZSIM_EXPERIMENTS_H

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ghzsim/detection.h"
#include "ghzsim/elements.h"
#include "ghzsim/layouts.h"
#include "ghzsim/source.h"

namespace ghzsim {

/// Photon count per path for one coarse occupation.
using PortCounts = std::array<std::uint8_t, kNumPaths>;

/// Output distribution of a circuit, split by number of emitted pairs.
///
/// Each pair-number sector is propagated exactly; Monte Carlo draws a sector
/// (conditioned on at least `min_pairs`) and then an output occupation.
class SectorModel {
   public:
    SectorModel(
        const Circuit &circuit,
        const PumpConfig &pump,
        const SPDCConfig &spdc,
        const OverlapModel &overlap,
        int min_pairs);

    /// Probability that a pulse carries at least min_pairs pairs.
    double conditioning_weight() const {
        return conditioning_weight_;
    }
    int min_pairs() const {
        return min_pairs_;
    }
    /// Draws an output occupation conditioned on >= min_pairs pairs.
    const PortCounts &sample(std::mt19937_64 &rng) const;
    /// Exact conditional expectation of f over the output occupations.
    template <typename F>
    double expectation(F &&f) const {
        double total = 0.0;
        for (std::size_t s = 0; s < sectors_.size(); s++) {
            double inner = 0.0;
            for (std::size_t j = 0; j < sectors_[s].counts.size(); j++) {
                inner += sectors_[s].probs[j] * f(sectors_[s].counts[j]);
            }
            total += sector_probs_[s] * inner;
        }
        return total;
    }
    /// Unconditional output distribution over all sectors (including those
    /// below min_pairs), for oracle comparisons.
    const CoarseDistribution &full_distribution() const {
        return full_;
    }

   private:
    struct Sector {
        std::vector<PortCounts> counts;
        std::vector<double> probs;
        mutable std::discrete_distribution<std::size_t> pick;
    };
    std::vector<Sector> sectors_;
    std::vector<double> sector_probs_;
    mutable std::discrete_distribution<std::size_t> pick_sector_;
    double conditioning_weight_ = 0.0;
    int min_pairs_ = 0;
    CoarseDistribution full_;
};

PortCounts port_counts(const CoarseOccupation &occ);

/// Click probability per port for a given photon number, with dark counts.
class ClickTable {
   public:
    ClickTable(const std::map<Path, DetectorModel> &detectors, const std::vector<Path> &ports);
    double p(std::size_t port_index, int photons) const;
    double p(Path port, const PortCounts &counts) const;

   private:
    std::vector<Path> ports_;
    std::vector<std::array<double, 16>> table_;
};

/// Everything a protocol needs besides the pump.
struct SimSettings {
    SPDCConfig spdc{2e-3, PairStatistics::kThermal, 3};
    OverlapModel overlap;
    BdGeometry geometry;
    double slip_delay_ps = 0.244;
    double hwp_error_deg = 0.0;
    std::map<Path, DetectorModel> detectors = default_detectors({Path::kA, Path::kB, Path::kC, Path::kD,
                                                                 Path::kAlpha, Path::kBeta});
    TriggerChain chain;
    double rep_rate_mhz = 76.0;
    int threads = 1;

    void validate() const;
    PortTiming timing() const {
        return PortTiming{3.0, chain.fiber_delay_ns};
    }
};

struct ScanPoint {
    double setting = 0.0;
    double normalized_rate = 0.0;
    /// Expected counts over the simulated gated frames.
    double raw = 0.0;
    double singles_a = 0.0;
    double singles_b = 0.0;
    double stderr_rate = 0.0;
};

struct ScanResult {
    std::string label;
    std::vector<ScanPoint> points;
    std::string normalization;
    /// Divisor that mapped raw / (singles_a * singles_b) onto the plateau.
    double plateau = 1.0;

    const ScanPoint &minimum() const;
};

void write_scan_csv(std::ostream &out, const ScanResult &result);
ScanResult read_scan_csv(std::istream &in);

struct DipFit {
    double visibility = 0.0;
    double floor_intercept = 0.0;
    double floor_slope_per_mw = 0.0;
    double min_location_ps = 0.0;
    double r_squared = 1.0;
};

/// Least-squares line min(P) = intercept + slope * P.
DipFit fit_dip_floor(const std::vector<std::pair<double, double>> &minima);

/// Largest |amplitude - target| over the post-selected basis, after removing
/// the global phase. Amplitudes are normalized within the post-selection.
struct StateCheck {
    std::map<std::string, Complex> amplitudes;
    std::map<std::string, Complex> target;
    double max_deviation = 0.0;
    double fidelity = 0.0;
    /// Probability (of the normalized post-selected state) outside the target
    /// support.
    double other_patterns = 0.0;
    /// Product of wave-packet overlaps between the interfering terms.
    double temporal_coherence = 1.0;
    double postselection_probability = 0.0;
    bool pass(double tol) const {
        return max_deviation < tol && other_patterns < tol;
    }
};

/// Sum over pumped paths of amp * a^dag_H a^dag_V on the vacuum.
FockState first_order_state(const PumpConfig &pump, int truncation = kDefaultTruncation);

/// Post-selects one photon on each of `ports` and compares to `target`
/// (keys like "HV" listing the polarization on each port in order).
StateCheck compare_postselected(
    const FockState &state,
    const std::vector<Path> &ports,
    const std::map<std::string, Complex> &target,
    const OverlapModel &overlap = {});

StateCheck bell_check(const PumpConfig &pump);

/// Pairs in beams 1&3 and 2&4 with equal weight, through the four-beam
/// circuit; `slips` optionally adds cover slips per arm.
StateCheck ghz_check(const BdGeometry &geometry, const std::map<Path, int> &slips = {}, double slip_delay_ps = 0.244,
                     const OverlapModel &overlap = {});

/// Probability of one photon per port A..D when pairs are created in beams
/// `beam_a` and `beam_b` of the four-beam circuit.
double four_port_probability(const BdGeometry &geometry, int beam_a, int beam_b);

struct FourfoldReport {
    StateCheck ghz;
    std::uint64_t frames = 0;
    double probability_per_frame = 0.0;
    double stderr_per_frame = 0.0;
    double rate_per_s = 0.0;
    double stderr_per_s = 0.0;
    /// Event-level run through the trigger chain (when requested).
    std::uint64_t event_fourfolds = 0;
    std::uint64_t event_triggers = 0;
    std::vector<EventRecord> events;
};

/// Four-fold A.B.C.D click rate. `frames` counts gated (divided) pulses.
FourfoldReport fourfold_run(const SimSettings &settings, const PumpConfig &pump, std::uint64_t frames,
                            std::uint64_t seed);

/// Same quantity from a pulse-by-pulse timing simulation through HeraldGate.
FourfoldReport fourfold_events(const SimSettings &settings, const PumpConfig &pump, std::uint64_t frames,
                               std::uint64_t seed, bool keep_events = false);

/// HOM scan over cover-slip counts (or, when `delays_ps` is given, over a
/// continuous extra delay on path 3) at one pump power.
ScanResult hom_scan(const SimSettings &settings, double power_mw, const std::vector<int> &slips,
                    std::uint64_t frames, std::uint64_t seed);
ScanResult hom_scan_delays(const SimSettings &settings, double power_mw, const std::vector<double> &delays_ps,
                           std::uint64_t frames, std::uint64_t seed);

/// Exact normalized HOM rate for a given mismatch (no sampling); plateau is
/// evaluated at complete distinguishability.
double hom_normalized_exact(const SimSettings &settings, double power_mw, double extra_delay_ps, int n_slips);

/// Normalized HOM minimum at zero mismatch.
double hom_minimum_exact(const SimSettings &settings, double power_mw);

struct HomCalibration {
    double hwp_error_deg = 0.0;
    double mu_per_mw = 0.0;
    double sigma_t_ps = 0.0;
    double predicted_min = 0.0;
    double fitted_low = 0.0;
    double fitted_high = 0.0;
};

/// Fits the plate error and mu_per_mw so the exact minima at two powers
/// match the targets, then predicts the minimum at `predict_mw`.
HomCalibration calibrate_hom(SimSettings settings, std::pair<double, double> low, std::pair<double, double> high,
                             double predict_mw);

struct G2Result {
    ScanResult histogram;
    double zero_delay_ratio = 0.0;
    double zero_delay_stderr = 0.0;
    double peak_spacing_ns = 0.0;
    int peaks = 0;
    std::vector<double> peak_heights;
};

/// Heralded second-order correlation: herald D, alpha fixed, beta delay
/// scanned over [-span/2, span/2].
G2Result g2_scan(const SimSettings &settings, double power_mw, double span_ns, double step_ns, std::uint64_t frames,
                 std::uint64_t seed);

/// Exact heralded g2 (zero-delay ratio) for the single-beam layout.
double g2_ratio_exact(const SimSettings &settings, double power_mw);

struct RateReport {
    double detected_per_s = 0.0;
    double generated_per_s = 0.0;
    double linear_per_mw = 0.0;
    double quadratic_per_mw2 = 0.0;
    double claimed_per_mw = 13600.0;
    bool consistent_with_claim = false;
    std::string notes;
};

RateReport rate_extrapolation(double detected_per_min, double power_mw, double eta);

struct OplGeometry {
    std::map<Path, double> arrival_ps;
    std::vector<std::pair<Path, Path>> interfering;
};

OplGeometry ghz_opl_geometry(const BdGeometry &geometry);

struct SlipPlan {
    std::map<Path, int> slips;
    double residual_ps = 0.0;
    int total_slips = 0;
};

SlipPlan opl_compensation(const OplGeometry &geometry, double slip_delay_ps, int max_slips);

struct CalibrationSettings {
    /// Counting trials per scan setting.
    std::uint64_t trials = 2000000;
    double coarse_step_ns = 0.5;
    double range_ns = 120.0;
    double fine_half_width_ns = 1.5;
    /// Planted error on the electronics latency (the true latency is
    /// chain.latency_ns + hidden_offset_ns).
    double hidden_offset_ns = 0.0;
    /// Planted error on D's internal delay.
    double hidden_d_offset_ns = 0.0;
};

struct CalibrationScan {
    std::string name;
    std::vector<std::pair<double, std::uint64_t>> counts;
    double peak = 0.0;
};

struct CalibrationResult {
    TriggerChain chain;
    std::map<Path, DetectorModel> detectors;
    std::vector<CalibrationScan> scans;
    /// ch1 offset relative to the matched setting for the nominal latency.
    double recovered_offset_ns = 0.0;
    double recovered_offset_ch2_ns = 0.0;
};

/// Three sequential scans on the four-beam rig (beam 1 for ch1, beam 2 for
/// ch2, beam 3 for D's internal delay). Throws SimulationError when a scan
/// shows no peak above the dark floor.
CalibrationResult delay_calibration(const SimSettings &settings, const PumpConfig &pump,
                                    const CalibrationSettings &cal, std::uint64_t seed);

}  // namespace ghzsim

#endif
