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

#include <cmath>
#include <random>

#include "gtest/gtest.h"

#include "ghzsim/elements.h"
#include "ghzsim/error.h"
#include "ghzsim/fock.h"

using namespace ghzsim;

namespace {

Mode H(Path p, double tau = 0.0) {
    return {p, Pol::kH, tau};
}
Mode V(Path p, double tau = 0.0) {
    return {p, Pol::kV, tau};
}

}  // namespace

TEST(fock, vacuum) {
    FockState v = create_vacuum();
    ASSERT_EQ(v.terms().size(), 1u);
    EXPECT_EQ(v.amplitude(Occupation{}), Complex(1.0, 0.0));
    EXPECT_DOUBLE_EQ(v.norm_squared(), 1.0);
    EXPECT_EQ(total_photons(v), 0);
    EXPECT_EQ(discarded_weight(v), 0.0);
    EXPECT_EQ(project(v, {{{Path::kA, Pol::kH}, 1}}), 0.0);
}

TEST(fock, pair_creation_ladder) {
    Mode s = H(Path::k1);
    Mode i = V(Path::k1);
    FockState one = apply_pair_creation(create_vacuum(), s, i, 1.0);
    ASSERT_EQ(one.terms().size(), 1u);
    EXPECT_NEAR(std::abs(one.amplitude(Occupation{{s, 1}, {i, 1}}) - 1.0), 0.0, 1e-15);

    FockState two = apply_pair_creation(one, s, i, 1.0);
    ASSERT_EQ(two.terms().size(), 1u);
    EXPECT_NEAR(std::abs(two.amplitude(Occupation{{s, 2}, {i, 2}}) - 2.0), 0.0, 1e-15);
}

TEST(fock, pair_creation_rejects_identical_modes) {
    EXPECT_THROW(apply_pair_creation(create_vacuum(), H(Path::k1), H(Path::k1), 1.0), ConfigError);
    EXPECT_THROW(apply_pair_creation(create_vacuum(1), H(Path::k1), V(Path::k1), 1.0), ConfigError);
}

TEST(fock, double_emission_product_term) {
    // (1 + a1 P1)(1 + a2 P2)|0> has a1 a2 on the four-mode term.
    Complex a1(0.3, 0.1);
    Complex a2(-0.2, 0.4);
    FockState s = apply_pair_emission(create_vacuum(), H(Path::k1), V(Path::k1), a1);
    s = apply_pair_emission(s, H(Path::k2), V(Path::k2), a2);
    Occupation both{{H(Path::k1), 1}, {V(Path::k1), 1}, {H(Path::k2), 1}, {V(Path::k2), 1}};
    EXPECT_NEAR(std::abs(s.amplitude(both) - a1 * a2), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(Occupation{}) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(Occupation{{H(Path::k1), 1}, {V(Path::k1), 1}}) - a1), 0.0, 1e-15);

    FockState direct = apply_pair_creation(create_vacuum(), H(Path::k1), V(Path::k1), a1);
    direct = apply_pair_creation(direct, H(Path::k2), V(Path::k2), a2);
    EXPECT_NEAR(std::abs(direct.amplitude(both) - a1 * a2), 0.0, 1e-15);
}

TEST(fock, pair_creation_commutes) {
    FockState base = apply_pair_emission(create_vacuum(6), H(Path::k1), V(Path::k1), 0.4);
    FockState ab = apply_pair_creation(apply_pair_creation(base, H(Path::k1), V(Path::k1), 0.7), H(Path::k3),
                                       V(Path::k3), Complex(0.1, 0.2));
    FockState ba = apply_pair_creation(apply_pair_creation(base, H(Path::k3), V(Path::k3), Complex(0.1, 0.2)),
                                       H(Path::k1), V(Path::k1), 0.7);
    ASSERT_EQ(ab.terms().size(), ba.terms().size());
    for (const auto &[occ, a] : ab.terms()) {
        EXPECT_NEAR(std::abs(a - ba.amplitude(occ)), 0.0, 1e-12);
    }
}

TEST(fock, truncation_moves_weight_to_discard) {
    FockState s = apply_pair_creation(create_vacuum(2), H(Path::k1), V(Path::k1), 1.0);
    FockState t = apply_pair_creation(s, H(Path::k2), V(Path::k2), 0.5);
    EXPECT_TRUE(t.terms().empty());
    EXPECT_NEAR(t.discarded_weight(), 0.25, 1e-15);
    for (const auto &[occ, a] : s.terms()) {
        EXPECT_LE(occ.total(), s.truncation());
    }
}

TEST(fock, overlap_kernel) {
    OverlapModel m{1.0, OverlapKernel::kGaussian};
    EXPECT_DOUBLE_EQ(mode_overlap(0.0, 0.0, m), 1.0);
    EXPECT_LT(mode_overlap(1e6, 0.0, m), 1e-12);
    EXPECT_NEAR(mode_overlap(1.0, 0.0, m), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(mode_overlap(1.0, 0.0, m), 0.60653, 1e-5);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (auto kernel : {OverlapKernel::kGaussian, OverlapKernel::kLorentzian}) {
        OverlapModel k{0.7, kernel};
        EXPECT_DOUBLE_EQ(mode_overlap(2.0, 2.0, k), 1.0);
        for (int t = 0; t < 1000; t++) {
            double a = u(rng);
            double b = u(rng);
            double o = mode_overlap(a, b, k);
            EXPECT_GE(o, 0.0);
            EXPECT_LE(o, 1.0);
            EXPECT_DOUBLE_EQ(o, mode_overlap(b, a, k));
        }
    }
    EXPECT_THROW((OverlapModel{0.0, OverlapKernel::kGaussian}.validate()), ConfigError);
}

TEST(fock, modes_merge_within_tau_quantum) {
    EXPECT_TRUE(H(Path::kA, 1.0) == H(Path::kA, 1.0 + 1e-8));
    EXPECT_FALSE(H(Path::kA, 1.0) == H(Path::kA, 1.0 + 1e-5));
    EXPECT_FALSE(H(Path::kA) == V(Path::kA));
}

TEST(fock, project_bell_and_ghz) {
    double r = 1.0 / std::sqrt(2.0);
    FockState bell(2);
    bell.accumulate(Occupation{{H(Path::k1), 1}, {V(Path::k2), 1}}, r);
    bell.accumulate(Occupation{{V(Path::k1), 1}, {H(Path::k2), 1}}, r);
    EXPECT_NEAR(project(bell, {{{Path::k1, Pol::kH}, 1}, {{Path::k2, Pol::kV}, 1}}), 0.5, 1e-15);

    // Written with the literal 1/2 prefactor on each term.
    FockState ghz(4);
    ghz.accumulate(Occupation{{H(Path::kA), 1}, {H(Path::kB), 1}, {V(Path::kC), 1}, {V(Path::kD), 1}}, 0.5);
    ghz.accumulate(Occupation{{V(Path::kA), 1}, {V(Path::kB), 1}, {H(Path::kC), 1}, {H(Path::kD), 1}}, 0.5);
    Pattern hhvv = {{{Path::kA, Pol::kH}, 1}, {{Path::kB, Pol::kH}, 1}, {{Path::kC, Pol::kV}, 1},
                    {{Path::kD, Pol::kV}, 1}};
    EXPECT_NEAR(project(ghz, hhvv), 0.25, 1e-15);
    EXPECT_EQ(total_photons(ghz), 4);

    PathSet declared;
    declared.set(index_of(Path::kA));
    EXPECT_THROW(project(ghz, hhvv, {}, declared), ConfigError);
}

TEST(fock, hom_interference_follows_overlap) {
    // H and V photons on one path; a 22.5 deg plate plus PBS acts as a balanced
    // splitter, so one-in-each-output goes as (1 - k^2)/2.
    OverlapModel m{1.0, OverlapKernel::kGaussian};
    for (double d : {0.0, 0.3, 1.0, 2.0, 10.0}) {
        FockState in(2);
        in.accumulate(Occupation{{H(Path::kB, 0.0), 1}, {V(Path::kB, d), 1}}, 1.0);
        FockState out = apply_pbs(apply_hwp(in, Path::kB, 22.5), Path::kB, Path::kAlpha, Path::kBeta);
        double k = std::exp(-0.5 * d * d);
        double coinc = project(out, {{{Path::kAlpha, Pol::kH}, 1}, {{Path::kBeta, Pol::kV}, 1}}, m);
        EXPECT_NEAR(coinc, 0.5 * (1.0 - k * k), 1e-12) << d;
        double bunched = project(out, {{{Path::kAlpha, Pol::kH}, 2}}, m);
        EXPECT_NEAR(bunched, 0.25 * (1.0 + k * k), 1e-12) << d;
    }
}

TEST(fock, normalize_and_errors) {
    FockState s(2);
    s.accumulate(Occupation{}, 0.5);
    FockState n = normalize(s);
    EXPECT_NEAR(std::abs(n.amplitude(Occupation{}) - 1.0), 0.0, 1e-15);
    EXPECT_THROW(normalize(FockState(2)), ConfigError);
}

TEST(fock, projection_completeness) {
    // Random lossless circuit on a two-pair state: all output patterns sum to 1.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0.0, 180.0);
    for (int trial = 0; trial < 20; trial++) {
        FockState s = apply_pair_creation(create_vacuum(), H(Path::k1), V(Path::k1), 1.0);
        s = apply_pair_creation(s, H(Path::k3, 0.1 * trial), V(Path::k3, 0.1 * trial), 1.0);
        s = normalize(s);
        s = apply_hwp(s, Path::k1, angle(rng));
        s = apply_pbs(s, Path::k1, Path::kA, Path::kB);
        s = apply_hwp(s, Path::k3, angle(rng));
        s = apply_pbs(s, Path::k3, Path::kB, Path::kC);
        s = apply_hwp(s, Path::kB, angle(rng));
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
        double total = 0.0;
        for (const auto &[occ, p] : coarse_distribution(s, OverlapModel{0.3, OverlapKernel::kGaussian})) {
            total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}
