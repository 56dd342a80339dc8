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

// Trajectories lambda_k(t), p_a(t) of the memory-kernel equation
//
//   d/dt lambda_k(t) = int_0^t kappa_k(t - tau) lambda_k(tau) d tau,  lambda_k(0) = 1,
//
// by three independent routes: the closed form 1 - F(t)/a_k, direct
// integration of the Volterra equation, and numerical inversion of
// lambda~_k(s) = 1 / (s - kappa~_k(s)).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <string>
#include <vector>

#include "memkernel/common.hpp"
#include "memkernel/kernel_families.hpp"
#include "memkernel/laplace_tools.hpp"
#include "memkernel/pauli_channel.hpp"
#include "memkernel/time_grid.hpp"

namespace memkernel {

struct TrajectorySet {
    TimeGrid grid;
    std::array<std::vector<double>, 4> lambda;  // lambda[0] is identically 1
    std::array<std::vector<double>, 4> p;
    std::vector<double> F;  // empty when the route has no waiting function
    std::string provenance;

    explicit TrajectorySet(const TimeGrid &g, std::string prov = {}) : grid(g), provenance(std::move(prov)) {
        for (auto &row : lambda) row.assign(g.size(), 1.0);
        for (auto &row : p) row.assign(g.size(), 0.0);
        p[0].assign(g.size(), 1.0);
    }

    std::size_t size() const { return grid.size(); }
    PauliEigenvalues eigenvalues(std::size_t i) const {
        return PauliEigenvalues::from_axes(lambda[1][i], lambda[2][i], lambda[3][i]);
    }

    /// Recomputes p from lambda through the Hadamard relation.
    void update_probabilities() {
        for (std::size_t i = 0; i < size(); ++i) {
            const ProbabilityVector pv = probabilities_from_eigenvalues(eigenvalues(i));
            for (std::size_t a = 0; a < 4; ++a) p[a][i] = pv.p[a];
        }
    }
};

/// Largest |difference| between the lambda rows of two trajectories.
inline double max_lambda_difference(const TrajectorySet &x, const TrajectorySet &y) {
    if (x.size() != y.size()) throw std::invalid_argument("trajectories on different grids");
    double worst = 0.0;
    for (std::size_t k = 1; k < 4; ++k)
        for (std::size_t i = 0; i < x.size(); ++i)
            worst = std::max(worst, std::abs(x.lambda[k][i] - y.lambda[k][i]));
    return worst;
}

// ---------------------------------------------------------------------------
// Closed form
// ---------------------------------------------------------------------------

/// lambda_k = 1 - F/a_k, p_k = (1/a_i + 1/a_j - 1/a_k) F / 4, p_0 = 1 - sum p_k.
inline TrajectorySet closed_form_lambdas(const KernelSpec &spec, const TimeGrid &grid) {
    TrajectorySet out(grid, "closed_form");
    const auto r = spec.aniso.reciprocals();
    out.F.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double F = spec.waiting.F(grid[i]);
        out.F[i] = F;
        double rest = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            out.lambda[k + 1][i] = 1.0 - F * r[k];
            const double pk = 0.25 * (r[(k + 1) % 3] + r[(k + 2) % 3] - r[k]) * F;
            out.p[k + 1][i] = pk;
            rest += pk;
        }
        out.p[0][i] = 1.0 - rest;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Volterra integration
// ---------------------------------------------------------------------------

struct VolterraOptions {
    double blowup_threshold = 1e6;
};

/// One axis of d/dt lambda = d lambda(t) + int_0^t r(t - tau) lambda(tau) d tau.
/// Trapezoidal convolution quadrature plus trapezoidal time stepping,
/// implicit in the newest sample (one scalar linear solve per step).
inline std::vector<double> volterra_solve_axis(const DeltaPlusRegular &kernel, const TimeGrid &grid, int axis = 0,
                                               const VolterraOptions &opt = {}) {
    const std::size_t n = grid.n_steps();
    const double h = grid.step();
    if (kernel.regular.domain_end() < grid.t_max() * (1.0 - 1e-12)) {
        throw std::invalid_argument(detail::cat("kernel regular part defined only up to t = ",
                                                kernel.regular.domain_end(), " < t_max = ", grid.t_max()));
    }
    const double d = kernel.delta_weight;
    if (!std::isfinite(d)) throw std::invalid_argument("kernel delta weight must be finite");

    // reversed kernel samples: rev[m] = r(t_{n - m}), so r(t_{k+1-j}) = rev[n - k - 1 + j]
    std::vector<double> rev(n + 1);
    for (std::size_t m = 0; m <= n; ++m) rev[m] = kernel.regular(grid[n - m]);
    const double r0 = rev[n];

    std::vector<double> lam(n + 1, 0.0);
    lam[0] = 1.0;
    double g = d * lam[0];
    const double denom = 1.0 - 0.5 * h * (d + 0.5 * h * r0);
    for (std::size_t k = 0; k < n; ++k) {
        // history part of the convolution at t_{k+1}
        const double *rp = rev.data() + (n - k - 1);
        double acc = 0.5 * rp[0] * lam[0];
        for (std::size_t j = 1; j <= k; ++j) acc += rp[j] * lam[j];
        const double history = h * acc;
        const double next = (lam[k] + 0.5 * h * (g + history)) / denom;
        if (!std::isfinite(next) || std::abs(next) > opt.blowup_threshold) {
            throw SolverBlowUp(detail::cat("Volterra solution exceeded ", opt.blowup_threshold, " on axis ", axis + 1,
                                           " at t = ", grid[k + 1],
                                           " (inadmissible kernel or grid too coarse)"),
                               grid[k + 1], axis + 1);
        }
        lam[k + 1] = next;
        g = d * next + history + 0.5 * h * r0 * next;
    }
    return lam;
}

/// Solves the three axes independently (in parallel).
inline TrajectorySet volterra_solve(const std::array<DeltaPlusRegular, 3> &kappa, const TimeGrid &grid,
                                    const VolterraOptions &opt = {}) {
    TrajectorySet out(grid, "volterra");
    std::array<std::future<std::vector<double>>, 3> jobs;
    for (int k = 0; k < 3; ++k) {
        jobs[std::size_t(k)] = std::async(std::launch::async, [&kappa, &grid, &opt, k] {
            return volterra_solve_axis(kappa[std::size_t(k)], grid, k, opt);
        });
    }
    for (std::size_t k = 0; k < 3; ++k) out.lambda[k + 1] = jobs[k].get();
    out.update_probabilities();
    return out;
}

// ---------------------------------------------------------------------------
// Laplace-domain solve
// ---------------------------------------------------------------------------

enum class InversionMethod { gaver_stehfest, talbot };

struct LaplaceSolveOptions {
    // Talbot needs the transform analytic left of the contour; tabulated
    // inputs (with e^{-s t_j} factors) use the real-axis method instead.
    InversionMethod method = InversionMethod::talbot;
    int stehfest_order = 16;
    int talbot_order = 32;
    double talbot_reach = 0.0;  // largest |Im| of a transform singularity, when known
};

struct InversionFailure {
    int axis;
    double t;
};

struct LaplaceSolveResult {
    TrajectorySet trajectory;
    std::vector<InversionFailure> failures;
    std::size_t degraded_samples = 0;  // order cross-check failed (oscillatory target)
};

namespace detail {
inline const std::array<cplx, 4> kZeroProbes{cplx(0.37, 0.0), cplx(1.9, 0.0), cplx(6.1, 2.3), cplx(0.8, -5.7)};
}  // namespace detail

/// lambda_k(t) by inverting lambda~_k(s) = 1 / (s - kappa~_k(s)); lambda_k(0) = 1.
inline LaplaceSolveResult laplace_domain_solve(const std::array<AnalyticFunction, 3> &kappa_tilde,
                                               const TimeGrid &grid, const LaplaceSolveOptions &opt = {}) {
    LaplaceSolveResult out{TrajectorySet(grid, "laplace_inversion"), {}, 0};
    for (std::size_t k = 0; k < 3; ++k) {
        const AnalyticFunction &kt = kappa_tilde[k];
        const AnalyticFunction lt = [&kt](cplx s) { return 1.0 / (s - kt(s)); };
        const RealFunction lt_real = [&lt](double s) { return lt(cplx(s, 0.0)).real(); };
        auto &row = out.trajectory.lambda[k + 1];
        // a transform that vanishes exactly at the probe points is taken as
        // kappa == 0 (disabled axis or zero waiting function): lambda == 1
        const bool vanishes = std::all_of(detail::kZeroProbes.begin(), detail::kZeroProbes.end(), [&kt](cplx s) { return kt(s) == 0.0; });
        if (vanishes) continue;
        row[0] = 1.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const InversionResult r = opt.method == InversionMethod::talbot
                                          ? inverse_laplace_talbot_checked(lt, grid[i], opt.talbot_order, opt.talbot_reach)
                                          : inverse_laplace_checked(lt_real, grid[i], opt.stehfest_order);
            if (r.degraded) ++out.degraded_samples;
            if (!std::isfinite(r.value)) out.failures.push_back({int(k) + 1, grid[i]});
            row[i] = r.value;
        }
    }
    if (out.failures.empty()) out.trajectory.update_probabilities();
    return out;
}

/// Laplace evaluators of a KernelSpec, in the form laplace_domain_solve takes.
inline std::array<AnalyticFunction, 3> kappa_tilde_evaluators(const KernelSpec &spec) {
    auto kl = std::make_shared<KernelLaplace>(spec);
    std::array<AnalyticFunction, 3> out;
    for (std::size_t k = 0; k < 3; ++k) out[k] = [kl, k](cplx s) { return kl->kappa_tilde(k, s); };
    return out;
}

// ---------------------------------------------------------------------------
// Markovian semigroups
// ---------------------------------------------------------------------------

struct SemigroupResult {
    TrajectorySet trajectory;
    std::array<double, 3> relaxation_times{};  // T_1 = 1/(gamma_2 + gamma_3), cyclic
    Verdict relaxation_conditions;             // 1/T_i + 1/T_j >= 1/T_k
};

/// L[rho] = sum_k gamma_k (sigma_k rho sigma_k - rho) with constant gamma_k >= 0:
/// lambda_1 = exp(-2 (gamma_2 + gamma_3) t) and cyclic.
inline SemigroupResult markovian_semigroup(const std::array<double, 3> &gamma, const TimeGrid &grid) {
    for (double g : gamma) {
        if (!(g >= 0.0) || !std::isfinite(g))
            throw std::invalid_argument(detail::cat("semigroup rates must be finite and >= 0, got ", g));
    }
    SemigroupResult out{TrajectorySet(grid, "semigroup"), {}, {}};
    for (std::size_t k = 0; k < 3; ++k) {
        const double rate = gamma[(k + 1) % 3] + gamma[(k + 2) % 3];
        out.relaxation_times[k] = rate == 0.0 ? kInf : 1.0 / rate;
        for (std::size_t i = 0; i < grid.size(); ++i) out.trajectory.lambda[k + 1][i] = std::exp(-2.0 * rate * grid[i]);
    }
    out.trajectory.update_probabilities();
    Verdict &v = out.relaxation_conditions;
    v.check = "relaxation_times";
    std::array<double, 3> inv{};
    for (std::size_t k = 0; k < 3; ++k) inv[k] = reciprocal(out.relaxation_times[k]);
    for (std::size_t k = 0; k < 3; ++k) {
        const double m = inv[(k + 1) % 3] + inv[(k + 2) % 3] - inv[k];
        v.margins.push_back({detail::cat("T", k + 1), m});
        v.passed = v.passed && m >= -positivity_tolerance();
    }
    return out;
}

/// (e^{t L_1} + e^{t L_2}) / 2 with L_k = c (sigma_k rho sigma_k - rho):
/// lambda_1 = lambda_2 = (1 + e^{-2ct}) / 2, lambda_3 = e^{-2ct}.
inline TrajectorySet convex_semigroup_mixture(double c, const TimeGrid &grid) {
    if (!(c > 0.0)) throw std::invalid_argument(detail::cat("mixture rate c must be > 0, got ", c));
    const SemigroupResult first = markovian_semigroup({c, 0.0, 0.0}, grid);
    const SemigroupResult second = markovian_semigroup({0.0, c, 0.0}, grid);
    TrajectorySet out(grid, "semigroup_mixture");
    for (std::size_t k = 1; k < 4; ++k) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            out.lambda[k][i] = 0.5 * (first.trajectory.lambda[k][i] + second.trajectory.lambda[k][i]);
    }
    out.update_probabilities();
    return out;
}

// ---------------------------------------------------------------------------
// Pointwise complete positivity
// ---------------------------------------------------------------------------

struct CptpScan {
    Verdict verdict;
    std::array<std::vector<double>, 4> margins;  // sum, pair1, pair2, pair3
};

inline CptpScan trajectory_cptp_scan(const TrajectorySet &traj) {
    CptpScan out;
    out.verdict.check = "trajectory_cptp";
    for (auto &row : out.margins) row.resize(traj.size());
    std::array<double, 4> worst{kInf, kInf, kInf, kInf};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Verdict v = cptp_check(traj.eigenvalues(i));
        for (std::size_t m = 0; m < 4; ++m) {
            out.margins[m][i] = v.margins[m].value;
            worst[m] = std::min(worst[m], v.margins[m].value);
        }
        if (!v.passed && !out.verdict.first_violation_index) {
            out.verdict.passed = false;
            out.verdict.first_violation_index = i;
            out.verdict.first_violation_time = traj.grid[i];
        }
    }
    out.verdict.margins = {{"sum", worst[0]}, {"pair1", worst[1]}, {"pair2", worst[2]}, {"pair3", worst[3]}};
    return out;
}

}  // namespace memkernel
