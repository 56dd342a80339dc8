// Copyright 2026 The memkernel Authors
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

#include <gtest/gtest.h>

#include <random>

#include "memkernel/pauli_channel.hpp"

namespace mk = memkernel;

namespace {

// Written out by hand from the sign pattern of the Hadamard matrix.
std::array<double, 4> probabilities_oracle(double l1, double l2, double l3) {
    return {(1 + l1 + l2 + l3) / 4, (1 + l1 - l2 - l3) / 4, (1 - l1 + l2 - l3) / 4, (1 - l1 - l2 + l3) / 4};
}

void expect_probabilities(const mk::ProbabilityVector &p, std::array<double, 4> want) {
    for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(p[a], want[a], 1e-15) << "a=" << a;
}

}  // namespace

TEST(Hadamard, SquaresToFourTimesIdentity) {
    constexpr auto H = mk::hadamard4();
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(H[0][i], 1);
        EXPECT_EQ(H[i][0], 1);
        for (int j = 0; j < 4; ++j) {
            int acc = 0;
            for (int k = 0; k < 4; ++k) acc += H[i][k] * H[k][j];
            EXPECT_EQ(acc, i == j ? 4 : 0);
        }
    }
}

TEST(Probabilities, KnownChannels) {
    expect_probabilities(mk::probabilities_from_eigenvalues(mk::PauliEigenvalues::identity()), {1, 0, 0, 0});
    expect_probabilities(mk::probabilities_from_eigenvalues(mk::PauliEigenvalues::from_axes(-1, -1, 1)), {0, 0, 0, 1});
    expect_probabilities(mk::probabilities_from_eigenvalues(mk::PauliEigenvalues::from_axes(0, 0, 0)),
                         {0.25, 0.25, 0.25, 0.25});
}

TEST(Probabilities, RejectsLambdaZeroOtherThanOne) {
    mk::PauliEigenvalues ev;
    ev.lambda[0] = 0.9;
    EXPECT_THROW(mk::probabilities_from_eigenvalues(ev), std::invalid_argument);
    EXPECT_THROW(mk::cptp_check(ev), std::invalid_argument);
}

TEST(Eigenvalues, KnownChannels) {
    auto ev = mk::eigenvalues_from_probabilities({{1, 0, 0, 0}});
    EXPECT_EQ(ev.lambda, (std::array<double, 4>{1, 1, 1, 1}));
    ev = mk::eigenvalues_from_probabilities({{0.5, 0, 0, 0.5}});
    EXPECT_EQ(ev.lambda, (std::array<double, 4>{1, 0, 0, 1}));
    ev = mk::eigenvalues_from_probabilities({{0.25, 0.25, 0.25, 0.25}});
    EXPECT_EQ(ev.lambda, (std::array<double, 4>{1, 0, 0, 0}));
    EXPECT_THROW(mk::eigenvalues_from_probabilities({{0.5, 0.5, 0.5, 0}}), std::invalid_argument);
}

TEST(Probabilities, MatchHandWrittenOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 500; ++trial) {
        const double l1 = u(rng), l2 = u(rng), l3 = u(rng);
        expect_probabilities(mk::probabilities_from_eigenvalues(mk::PauliEigenvalues::from_axes(l1, l2, l3)),
                             probabilities_oracle(l1, l2, l3));
    }
}

TEST(Probabilities, RoundTripIsIdentity) {
    std::mt19937_64 rng(7);
    std::gamma_distribution<double> g(1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<double, 4> w{g(rng), g(rng), g(rng), g(rng)};
        const double total = w[0] + w[1] + w[2] + w[3];
        mk::ProbabilityVector p;
        for (std::size_t a = 0; a < 4; ++a) p.p[a] = w[a] / total;
        p.p[0] = 1.0 - p.p[1] - p.p[2] - p.p[3];
        const auto back = mk::probabilities_from_eigenvalues(mk::eigenvalues_from_probabilities(p));
        for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(back[a], p[a], 1e-14);
    }
}

TEST(Cptp, KnownCases) {
    auto v = mk::cptp_check(mk::PauliEigenvalues::identity());
    EXPECT_TRUE(v.passed);
    EXPECT_DOUBLE_EQ(v.margin("sum"), 4.0);
    EXPECT_DOUBLE_EQ(v.margin("pair1"), 0.0);
    EXPECT_DOUBLE_EQ(v.margin("pair2"), 0.0);
    EXPECT_DOUBLE_EQ(v.margin("pair3"), 0.0);

    v = mk::cptp_check(mk::PauliEigenvalues::from_axes(0.9, 0.9, 0.5));
    EXPECT_FALSE(v.passed);
    EXPECT_NEAR(v.margin("pair3"), -0.3, 1e-15);

    v = mk::cptp_check(mk::PauliEigenvalues::from_axes(-1, -1, 1));
    EXPECT_TRUE(v.passed);
    EXPECT_DOUBLE_EQ(v.margin("sum"), 0.0);
}

TEST(Cptp, PassImpliesBoundedEigenvaluesAndNonnegativeProbabilities) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    int passes = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        const auto ev = mk::PauliEigenvalues::from_axes(u(rng), u(rng), u(rng));
        const auto v = mk::cptp_check(ev);
        const auto p = mk::probabilities_from_eigenvalues(ev);
        bool nonneg = true;
        for (std::size_t a = 0; a < 4; ++a) nonneg = nonneg && p[a] >= -1e-10;
        EXPECT_EQ(v.passed, nonneg);
        if (!v.passed) continue;
        ++passes;
        for (std::size_t k = 1; k < 4; ++k) EXPECT_LE(std::abs(ev[k]), 1.0 + 1e-10);
    }
    EXPECT_GT(passes, 1000);
}

TEST(ApplyMap, KnownCases) {
    auto x = mk::apply_map(mk::PauliEigenvalues::identity(), {{0.3, 0.4, 0.5}});
    EXPECT_EQ(x.v, (std::array<double, 3>{0.3, 0.4, 0.5}));
    x = mk::apply_map(mk::PauliEigenvalues::from_axes(0, 0, 0), {{0.1, -0.7, 0.2}});
    EXPECT_EQ(x.norm(), 0.0);
    x = mk::apply_map(mk::PauliEigenvalues::from_axes(0.5, 0.5, 1), {{1, 0, 0}});
    EXPECT_EQ(x.v, (std::array<double, 3>{0.5, 0, 0}));
}

TEST(TraceDistance, KnownCases) {
    EXPECT_DOUBLE_EQ(mk::trace_distance(mk::PauliEigenvalues::identity(), {{1, 0, 0}}), 1.0);
    EXPECT_DOUBLE_EQ(mk::trace_distance(mk::PauliEigenvalues::from_axes(0, 0, 0), {{0.6, 0.8, 0}}), 0.0);
    EXPECT_NEAR(mk::trace_distance(mk::PauliEigenvalues::from_axes(0.5, 0.5, 1), {{0.6, 0.8, 0}}), 0.5, 1e-15);
}

TEST(TraceDistance, IdentityPreservesNorm) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const mk::BlochVector v{{n(rng), n(rng), n(rng)}};
        EXPECT_DOUBLE_EQ(mk::trace_distance(mk::PauliEigenvalues::identity(), v), v.norm());
    }
}
