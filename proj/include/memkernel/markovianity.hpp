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

// Classification of Pauli-diagonal dynamics: time-local decoherence rates,
// CP-divisibility and the BLP (trace-distance) non-Markovianity measure.
//
// For this class the BLP condition coincides with P-divisibility of the
// propagator, so the BLP verdict doubles as the P-divisibility verdict.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "memkernel/common.hpp"
#include "memkernel/evolution_solver.hpp"
#include "memkernel/kernel_families.hpp"
#include "memkernel/pauli_channel.hpp"
#include "memkernel/time_grid.hpp"

namespace memkernel {

inline constexpr std::uint64_t kDefaultProbeSeed = 0x6d656d6b65726e31ULL;

/// gamma_k(t_i) of the time-local generator
/// L_t[rho] = sum_k gamma_k(t) (sigma_k rho sigma_k - rho). Masked samples are NaN.
struct LocalRates {
    TimeGrid grid;
    std::array<std::vector<double>, 3> gamma;
    std::vector<double> singular_times;
    std::vector<std::size_t> masked_indices;

    explicit LocalRates(const TimeGrid &g) : grid(g) {
        for (auto &row : gamma) row.assign(g.size(), 0.0);
    }
    bool masked(std::size_t i) const { return std::isnan(gamma[0][i]); }
};

namespace detail {

inline void mask_index(LocalRates &rates, std::size_t i) {
    if (rates.masked(i)) return;
    for (auto &row : rates.gamma) row[i] = kNaN;
    rates.masked_indices.push_back(i);
}

}  // namespace detail

/// gamma_1 = (f/4) (-1/(a_1 - F) + 1/(a_2 - F) + 1/(a_3 - F)) and cyclic.
/// Samples within 1e-6 a_k of a_k = F(t), and the sample nearest to each
/// sign change of a_k - F(t), are masked.
inline LocalRates local_rates_from_f(const KernelSpec &spec, const TimeGrid &grid) {
    LocalRates out(grid);
    std::array<double, 3> prev_gap{kNaN, kNaN, kNaN};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i], f = spec.waiting.f(t), F = spec.waiting.F(t);
        std::array<double, 3> inv{};
        bool singular = false;
        for (std::size_t k = 0; k < 3; ++k) {
            const double a = spec.aniso[k];
            if (std::isinf(a)) continue;
            const double gap = a - F;
            if (std::abs(gap) <= 1e-6 * a) {
                singular = true;
                out.singular_times.push_back(t);
            } else if (i > 0 && !std::isnan(prev_gap[k]) && (gap > 0.0) != (prev_gap[k] > 0.0)) {
                const double w = prev_gap[k] / (prev_gap[k] - gap);
                out.singular_times.push_back(grid[i - 1] + w * grid.step());
                detail::mask_index(out, w < 0.5 ? i - 1 : i);
            }
            prev_gap[k] = gap;
            inv[k] = 1.0 / gap;
        }
        if (singular) {
            detail::mask_index(out, i);
            continue;
        }
        if (out.masked(i)) continue;
        for (std::size_t k = 0; k < 3; ++k) {
            out.gamma[k][i] = 0.25 * f * (inv[(k + 1) % 3] + inv[(k + 2) % 3] - inv[k]);
        }
    }
    std::sort(out.masked_indices.begin(), out.masked_indices.end());
    return out;
}

/// mu_k = -(1/2) d/dt ln lambda_k by second-order differences, then
/// gamma_1 = (mu_2 + mu_3 - mu_1) / 2 and cyclic. Samples whose stencil touches
/// lambda_k <= 0 are masked.
inline LocalRates local_rates_from_lambdas(const TrajectorySet &traj) {
    const TimeGrid &grid = traj.grid;
    const std::size_t n = grid.size();
    const double h = grid.step();
    LocalRates out(grid);
    std::array<std::vector<double>, 3> logs;
    std::vector<bool> bad(n, false);
    for (std::size_t k = 0; k < 3; ++k) {
        logs[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double l = traj.lambda[k + 1][i];
            if (!(l > 0.0)) {
                bad[i] = true;
                logs[k][i] = kNaN;
            } else {
                logs[k][i] = std::log(l);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo, hi;
        if (i == 0) {
            lo = 0, hi = 2;
        } else if (i == n - 1) {
            lo = n - 3, hi = n - 1;
        } else {
            lo = i - 1, hi = i + 1;
        }
        bool touched = false;
        for (std::size_t j = lo; j <= hi; ++j) touched = touched || bad[j];
        if (touched) {
            detail::mask_index(out, i);
            continue;
        }
        std::array<double, 3> mu{};
        for (std::size_t k = 0; k < 3; ++k) {
            const auto &y = logs[k];
            double dy;
            if (i == 0) {
                dy = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
            } else if (i == n - 1) {
                dy = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
            } else {
                dy = (y[i + 1] - y[i - 1]) / (2.0 * h);
            }
            mu[k] = -0.5 * dy;
        }
        for (std::size_t k = 0; k < 3; ++k) out.gamma[k][i] = 0.5 * (mu[(k + 1) % 3] + mu[(k + 2) % 3] - mu[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CP-divisibility
// ---------------------------------------------------------------------------

struct CPDivisibilityResult {
    Verdict verdict;
    double bound = kNaN;  // a_1 - sqrt((a_2 - a_1)(a_3 - a_1)) with a sorted ascending
    std::optional<double> bound_break_time;
    std::optional<double> rates_break_time;
    bool routes_agree = true;  // break times within one grid step
};

inline double cp_divisibility_bound(const AnisotropyParameters &aniso) {
    std::array<double, 3> a = aniso.a;
    std::sort(a.begin(), a.end());
    if (std::isinf(a[0])) return kInf;
    const double d2 = a[1] - a[0], d3 = a[2] - a[0];
    const double prod = (d2 == 0.0 || d3 == 0.0) ? 0.0 : d2 * d3;
    return a[0] - std::sqrt(prod);
}

/// Divisibility holds iff F(t) <= a_1 - sqrt((a_2 - a_1)(a_3 - a_1)) (for
/// f >= 0); the direct scan gamma_k(t) >= 0 runs alongside and must agree.
/// A waiting function with negative values falls back to the direct scan.
inline CPDivisibilityResult cp_divisibility_check(const KernelSpec &spec, const TimeGrid &grid) {
    CPDivisibilityResult out;
    out.verdict.check = "cp_divisibility";
    out.bound = cp_divisibility_bound(spec.aniso);
    const double tol = positivity_tolerance();
    const bool f_nonneg = spec.waiting.nonnegative();

    double max_F = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double F = spec.waiting.F(grid[i]);
        max_F = std::max(max_F, F);
        if (!out.bound_break_time && F > out.bound + tol && spec.waiting.f(grid[i]) > 0.0) {
            out.bound_break_time = grid[i];
        }
    }

    const LocalRates rates = local_rates_from_f(spec, grid);
    std::optional<std::size_t> rates_index;
    for (std::size_t i = 0; i < grid.size() && !rates_index; ++i) {
        if (rates.masked(i)) continue;
        for (const auto &row : rates.gamma) {
            if (row[i] < -tol) {
                rates_index = i;
                break;
            }
        }
    }
    if (rates_index) out.rates_break_time = grid[*rates_index];

    if (out.bound_break_time.has_value() != out.rates_break_time.has_value()) {
        out.routes_agree = false;
    } else if (out.bound_break_time) {
        out.routes_agree = std::abs(*out.bound_break_time - *out.rates_break_time) <= grid.step() * (1.0 + 1e-9);
    }

    out.verdict.margins = {{"bound_minus_max_F", out.bound - max_F}};
    if (f_nonneg) {
        out.verdict.passed = !out.bound_break_time.has_value();
        out.verdict.first_violation_time = out.bound_break_time;
        if (!out.routes_agree) {
            out.verdict.notes.push_back(detail::cat("bound form and rate scan disagree on the first break time"));
        }
    } else {
        out.verdict.notes.push_back("waiting function takes negative values; verdict from the direct rate scan");
        out.verdict.passed = !out.rates_break_time.has_value();
        out.verdict.first_violation_time = out.rates_break_time;
    }
    if (out.verdict.first_violation_time) {
        out.verdict.first_violation_index = std::size_t(std::llround(*out.verdict.first_violation_time / grid.step()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// BLP measure
// ---------------------------------------------------------------------------

struct ProbeGrowth {
    std::size_t probe = 0;
    BlochVector direction;
    double measure = 0.0;
    std::vector<std::pair<double, double>> intervals;
};

struct BLPResult {
    double measure = 0.0;       // supremum over probes
    double axis_measure = 0.0;  // supremum over the three coordinate axes
    std::vector<ProbeGrowth> growth;  // probes with a positive contribution
    std::vector<BlochVector> probes;
    std::uint64_t seed = kDefaultProbeSeed;
};

/// Probe directions: the three coordinate axes followed by uniform samples
/// on the unit sphere.
inline std::vector<BlochVector> blp_probe_directions(std::size_t n_probes, std::uint64_t seed) {
    if (n_probes == 0) throw std::invalid_argument("blp_measure needs at least one probe");
    std::vector<BlochVector> out;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, n_probes); ++k) {
        BlochVector v;
        v.v[k] = 1.0;
        out.push_back(v);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    while (out.size() < n_probes) {
        BlochVector v{{normal(rng), normal(rng), normal(rng)}};
        const double norm = v.norm();
        if (norm < 1e-12) continue;
        for (auto &c : v.v) c /= norm;
        out.push_back(v);
    }
    return out;
}

/// Sum of positive increments of D(t) = |Lambda_t[v]| (increments at or below
/// 1e-12 count as zero), maximized over the probes.
inline BLPResult blp_measure(const TrajectorySet &traj, std::size_t n_probes = 512,
                             std::uint64_t seed = kDefaultProbeSeed) {
    constexpr double kIncrementFloor = 1e-12;
    BLPResult out;
    out.seed = seed;
    out.probes = blp_probe_directions(n_probes, seed);
    std::vector<double> D(traj.size());
    for (std::size_t p = 0; p < out.probes.size(); ++p) {
        const BlochVector &v = out.probes[p];
        for (std::size_t i = 0; i < traj.size(); ++i) D[i] = trace_distance(traj.eigenvalues(i), v);
        ProbeGrowth g{p, v, 0.0, {}};
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            const double inc = D[i + 1] - D[i];
            if (!(inc > kIncrementFloor)) continue;
            g.measure += inc;
            if (!g.intervals.empty() && g.intervals.back().second == traj.grid[i]) {
                g.intervals.back().second = traj.grid[i + 1];
            } else {
                g.intervals.emplace_back(traj.grid[i], traj.grid[i + 1]);
            }
        }
        out.measure = std::max(out.measure, g.measure);
        if (p < 3) out.axis_measure = std::max(out.axis_measure, g.measure);
        if (g.measure > 0.0) out.growth.push_back(std::move(g));
    }
    return out;
}

/// With all lambda_k >= 0 the BLP condition is d/dt lambda_k <= 0 for each k;
/// otherwise the probe-based measure decides.
inline Verdict blp_condition_check(const TrajectorySet &traj, std::size_t n_probes = 512,
                                   std::uint64_t seed = kDefaultProbeSeed) {
    Verdict v;
    v.check = "blp_condition";
    const double tol = positivity_tolerance();
    double min_lambda = kInf;
    for (std::size_t k = 1; k < 4; ++k)
        for (double l : traj.lambda[k]) min_lambda = std::min(min_lambda, l);
    v.margins.push_back({"min_lambda", min_lambda});
    if (min_lambda >= -tol) {
        double max_increase = -kInf;
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            for (std::size_t k = 1; k < 4; ++k) {
                const double inc = traj.lambda[k][i + 1] - traj.lambda[k][i];
                max_increase = std::max(max_increase, inc);
                if (inc > tol && !v.first_violation_index) {
                    v.passed = false;
                    v.first_violation_index = i;
                    v.first_violation_time = traj.grid[i];
                }
            }
        }
        v.margins.push_back({"monotonicity", -max_increase});
        return v;
    }
    v.notes.push_back("negative eigenvalues present; decided by the BLP measure");
    const BLPResult blp = blp_measure(traj, n_probes, seed);
    v.margins.push_back({"blp_measure", -blp.measure});
    v.passed = blp.measure == 0.0;
    if (!v.passed && !blp.growth.empty() && !blp.growth.front().intervals.empty()) {
        v.first_violation_time = blp.growth.front().intervals.front().first;
    }
    return v;
}

}  // namespace memkernel
