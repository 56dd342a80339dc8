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

// Algebra of qubit Pauli-diagonal (random unitary) channels
//
//   Lambda[rho] = sum_a p_a sigma_a rho sigma_a,   Lambda[sigma_a] = lambda_a sigma_a.
//
// The probabilities and the eigenvalues are related by the 4x4 Hadamard
// matrix: p = H lambda / 4 and lambda = H p.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "memkernel/common.hpp"

namespace memkernel {

using HadamardMatrix4 = std::array<std::array<int, 4>, 4>;

constexpr HadamardMatrix4 hadamard4() {
    return {{{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}}};
}

struct PauliEigenvalues {
    std::array<double, 4> lambda{1.0, 1.0, 1.0, 1.0};

    static PauliEigenvalues from_axes(double l1, double l2, double l3) { return {{1.0, l1, l2, l3}}; }
    static PauliEigenvalues identity() { return {}; }

    double operator[](std::size_t k) const { return lambda[k]; }
};

struct ProbabilityVector {
    std::array<double, 4> p{1.0, 0.0, 0.0, 0.0};

    double operator[](std::size_t k) const { return p[k]; }
    double sum() const { return p[0] + p[1] + p[2] + p[3]; }
};

struct BlochVector {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    double operator[](std::size_t k) const { return v[k]; }
    double norm() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
};

inline ProbabilityVector probabilities_from_eigenvalues(const PauliEigenvalues &ev) {
    if (ev.lambda[0] != 1.0) {
        throw std::invalid_argument(detail::cat("eigenvalue lambda_0 must equal 1, got ", ev.lambda[0]));
    }
    constexpr auto H = hadamard4();
    ProbabilityVector out;
    for (std::size_t a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < 4; ++b) acc += H[a][b] * ev.lambda[b];
        out.p[a] = 0.25 * acc;
    }
    return out;
}

inline PauliEigenvalues eigenvalues_from_probabilities(const ProbabilityVector &pv) {
    if (std::abs(pv.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument(detail::cat("probabilities must sum to 1, got ", pv.sum()));
    }
    constexpr auto H = hadamard4();
    PauliEigenvalues out;
    for (std::size_t a = 1; a < 4; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < 4; ++b) acc += H[a][b] * pv.p[b];
        out.lambda[a] = acc;
    }
    out.lambda[0] = 1.0;
    return out;
}

/// Complete positivity of a Pauli-diagonal map. Margins:
///   "sum"  = 1 + l1 + l2 + l3
///   "pair3" = 1 + l3 - l1 - l2, and cyclic "pair1", "pair2".
/// Each margin is 4 p_a, so the check is equivalent to p_a >= -tol.
inline Verdict cptp_check(const PauliEigenvalues &ev) {
    if (ev.lambda[0] != 1.0) {
        throw std::invalid_argument(detail::cat("eigenvalue lambda_0 must equal 1, got ", ev.lambda[0]));
    }
    const double l1 = ev.lambda[1], l2 = ev.lambda[2], l3 = ev.lambda[3];
    Verdict v;
    v.check = "cptp";
    v.margins = {{"sum", 1.0 + l1 + l2 + l3},
                 {"pair1", 1.0 + l1 - l2 - l3},
                 {"pair2", 1.0 + l2 - l3 - l1},
                 {"pair3", 1.0 + l3 - l1 - l2}};
    const double tol = positivity_tolerance();
    for (const auto &m : v.margins) {
        if (!(m.value >= -tol)) v.passed = false;
    }
    return v;
}

inline BlochVector apply_map(const PauliEigenvalues &ev, const BlochVector &x) {
    return {{ev.lambda[1] * x.v[0], ev.lambda[2] * x.v[1], ev.lambda[3] * x.v[2]}};
}

/// Half the trace norm of Lambda[X] for the traceless X = sum_k diff_k sigma_k
/// (X = rho1 - rho2 written in the Pauli basis).
inline double trace_distance(const PauliEigenvalues &ev, const BlochVector &diff) {
    return apply_map(ev, diff).norm();
}

}  // namespace memkernel
