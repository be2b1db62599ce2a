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

#ifndef GHZSIM_FOCK_H
#define GHZSIM_FOCK_H

#include <bitset>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ghzsim {

using Complex = std::complex<double>;

/// Spatial path labels. Beams 1-4 leave the crystal on k1..k4; kR1..kR4 are the
/// reflected arms of the per-beam polarizing splitters; A-D, alpha, beta are
/// collection ports; kDiscard absorbs photons removed by lossy elements.
enum class Path : std::uint8_t {
    k1,
    k2,
    k3,
    k4,
    kR1,
    kR2,
    kR3,
    kR4,
    kA,
    kB,
    kC,
    kD,
    kAlpha,
    kBeta,
    kDiscard,
};
inline constexpr std::size_t kNumPaths = 15;
using PathSet = std::bitset<kNumPaths>;

std::string_view path_name(Path p);
/// Accepts the names produced by path_name ("1".."4", "R1".."R4", "A".."D",
/// "alpha", "beta", "discard"). Throws ConfigError otherwise.
Path parse_path(std::string_view name);
PathSet all_paths();
inline std::size_t index_of(Path p) {
    return static_cast<std::size_t>(p);
}
/// Beam path for beam number 1..4.
Path beam_path(int beam);
/// Reflected arm for beam number 1..4.
Path reflected_path(int beam);

enum class Pol : std::uint8_t { kH, kV };
char pol_name(Pol p);

/// Tolerance below which two temporal offsets denote the same mode.
inline constexpr double kTauQuantumPs = 1e-6;
/// Amplitudes with smaller modulus are pruned.
inline constexpr double kAmpEpsilon = 1e-12;
inline constexpr int kDefaultTruncation = 4;

/// Detector-resolvable part of a mode.
struct Slot {
    Path path;
    Pol pol;
    auto operator<=>(const Slot &) const = default;
};

/// A single-photon mode. Modes closer than kTauQuantumPs in time are equal.
struct Mode {
    Path path;
    Pol pol;
    double tau_ps = 0.0;

    Slot slot() const {
        return {path, pol};
    }
    std::string str() const;
};

/// Quantized mode key used for map storage.
struct ModeKey {
    Path path;
    Pol pol;
    std::int64_t tau_ticks;

    static ModeKey of(const Mode &m);
    Mode mode() const;
    double tau_ps() const {
        return static_cast<double>(tau_ticks) * kTauQuantumPs;
    }
    Slot slot() const {
        return {path, pol};
    }
    auto operator<=>(const ModeKey &) const = default;
};

bool operator==(const Mode &a, const Mode &b);

/// Sorted occupation vector (mode -> count > 0).
class Occupation {
   public:
    Occupation() = default;
    Occupation(std::initializer_list<std::pair<Mode, int>> entries);

    int count(const ModeKey &key) const;
    int count(const Mode &m) const {
        return count(ModeKey::of(m));
    }
    void add(const ModeKey &key, int n);
    int total() const;
    bool empty() const {
        return entries_.empty();
    }
    const std::vector<std::pair<ModeKey, int>> &entries() const {
        return entries_;
    }
    std::string str() const;

    auto operator<=>(const Occupation &) const = default;

   private:
    std::vector<std::pair<ModeKey, int>> entries_;
};

/// Detector-level occupation: photon counts per (path, pol) slot.
using CoarseOccupation = std::vector<std::pair<Slot, int>>;
using CoarseDistribution = std::map<CoarseOccupation, double>;

/// Sparse multimode bosonic state: occupation -> complex amplitude, where each
/// occupation stands for the normalized Fock state prod_m (a_m^dag)^n_m / sqrt(n_m!) |0>.
class FockState {
   public:
    explicit FockState(int truncation = kDefaultTruncation);

    const std::map<Occupation, Complex> &terms() const {
        return terms_;
    }
    int truncation() const {
        return truncation_;
    }
    double discarded_weight() const {
        return discarded_;
    }
    double norm_squared() const;
    Complex amplitude(const Occupation &occ) const;

    /// Adds amp to the term for occ. Terms above truncation go to discarded weight.
    void accumulate(const Occupation &occ, Complex amp);
    void add_discarded(double w) {
        discarded_ += w;
    }
    void set_discarded(double w) {
        discarded_ = w;
    }
    /// Drops terms whose modulus is below kAmpEpsilon.
    void prune();
    void scale(Complex factor);

   private:
    std::map<Occupation, Complex> terms_;
    int truncation_;
    double discarded_ = 0.0;
};

enum class OverlapKernel : std::uint8_t { kGaussian, kLorentzian };

/// Temporal wave-packet overlap model. The kernel value is the amplitude inner
/// product of two wave packets whose centers differ by the argument.
struct OverlapModel {
    double sigma_t_ps = 0.045;
    OverlapKernel kernel = OverlapKernel::kGaussian;

    void validate() const;
};

FockState create_vacuum(int truncation = kDefaultTruncation);

/// amp * a^dag_signal a^dag_idler applied to state.
FockState apply_pair_creation(const FockState &state, const Mode &signal, const Mode &idler, Complex amp);

/// (1 + amp * a^dag_signal a^dag_idler) applied to state; one first-order emission step.
FockState apply_pair_emission(const FockState &state, const Mode &signal, const Mode &idler, Complex amp);

double mode_overlap(double tau_a_ps, double tau_b_ps, const OverlapModel &model);

/// Detection-level probabilities. Terms that differ only in arrival times on
/// the same slots interfere, weighted by the wave-packet overlaps.
CoarseDistribution coarse_distribution(const FockState &state, const OverlapModel &model = {});

using Pattern = std::vector<std::pair<Slot, int>>;

/// Probability that the slots listed in pattern hold exactly the given counts;
/// unlisted slots are marginalized. Throws ConfigError if the pattern references
/// a path outside `declared`.
double project(
    const FockState &state, const Pattern &pattern, const OverlapModel &model = {}, const PathSet &declared = all_paths());
double project(const CoarseDistribution &dist, const Pattern &pattern);

FockState normalize(const FockState &state);
int total_photons(const FockState &state);
double discarded_weight(const FockState &state);

/// Occupation restricted to the slots of `slots`, as a coarse occupation.
int slot_count(const CoarseOccupation &occ, Slot s);
/// Total photon count on a path summed over polarizations.
int path_count(const CoarseOccupation &occ, Path p);

}  // namespace ghzsim

#endif
