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

// Memory kernels for Pauli-diagonal qubit dynamics parameterized by a waiting
// function f and three anisotropy constants a_k:
//
//   kappa~_k(s) = -s f~(s) / (a_k - f~(s)),   lambda_k(t) = 1 - F(t) / a_k.
//
// The kernel is admissible (yields a CPTP map) when the reciprocals 1/a_k obey
// triangle inequalities and (1/a_1 + 1/a_2 + 1/a_3) F(t) <= 4 for all t.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "memkernel/common.hpp"
#include "memkernel/exp_sum.hpp"
#include "memkernel/laplace_tools.hpp"
#include "memkernel/polynomial.hpp"
#include "memkernel/tabulated.hpp"
#include "memkernel/time_grid.hpp"
#include "memkernel/waiting_function.hpp"

namespace memkernel {

/// a_1, a_2, a_3 > 0; +inf is allowed and disables the axis (reciprocal 0).
struct AnisotropyParameters {
    std::array<double, 3> a{1.0, 1.0, 1.0};

    AnisotropyParameters() = default;
    AnisotropyParameters(double a1, double a2, double a3) : a{a1, a2, a3} { validate(); }

    void validate() const {
        for (double v : a) {
            if (!(v > 0.0)) throw std::invalid_argument(detail::cat("anisotropy parameters must be > 0, got ", v));
        }
    }
    double operator[](std::size_t k) const { return a[k]; }
    std::array<double, 3> reciprocals() const { return {reciprocal(a[0]), reciprocal(a[1]), reciprocal(a[2])}; }
    double reciprocal_sum() const {
        const auto r = reciprocals();
        return r[0] + r[1] + r[2];
    }
    double min() const { return std::min({a[0], a[1], a[2]}); }
};

struct BRates {
    std::array<double, 3> b{};
    double operator[](std::size_t k) const { return b[k]; }
};

struct KernelSpec {
    WaitingFunction waiting;
    AnisotropyParameters aniso;
};

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

/// 1/a_i + 1/a_j >= 1/a_k for the three cyclic assignments. Margin "k" is
/// the slack of the inequality whose right-hand side is 1/a_k.
inline Verdict triangle_check(const AnisotropyParameters &aniso) {
    aniso.validate();
    const auto r = aniso.reciprocals();
    Verdict v;
    v.check = "triangle";
    v.margins = {{"axis1", r[1] + r[2] - r[0]}, {"axis2", r[2] + r[0] - r[1]}, {"axis3", r[0] + r[1] - r[2]}};
    const double tol = positivity_tolerance();
    for (const auto &m : v.margins) v.passed = v.passed && m.value >= -tol;
    return v;
}

/// (1/a_1 + 1/a_2 + 1/a_3) F(t) <= 4 and F(t) >= 0 at every grid point.
inline Verdict integral_bound_check(const KernelSpec &spec, const TimeGrid &grid) {
    const double rsum = spec.aniso.reciprocal_sum();
    const double tol = positivity_tolerance();
    Verdict v;
    v.check = "integral_bound";
    double bound_margin = kInf, positivity_margin = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double F = spec.waiting.F(grid[i]);
        const double bm = 4.0 - rsum * F;
        bound_margin = std::min(bound_margin, bm);
        positivity_margin = std::min(positivity_margin, F);
        if ((bm < -tol || F < -tol) && !v.first_violation_index) {
            v.passed = false;
            v.first_violation_index = i;
            v.first_violation_time = grid[i];
        }
    }
    v.margins = {{"bound", bound_margin}, {"F_nonnegative", positivity_margin}};
    return v;
}

/// Solves 1/(2 a_1) = 1/b_2 + 1/b_3 (and cyclic): 1/b_k = (1/a_i + 1/a_j - 1/a_k) / 4.
/// A zero triangle margin yields b_k = +inf.
inline BRates b_from_a(const AnisotropyParameters &aniso) {
    const Verdict tri = triangle_check(aniso);
    if (!tri.passed) throw std::invalid_argument("b_from_a needs anisotropy parameters satisfying the triangle inequalities");
    const auto r = aniso.reciprocals();
    BRates out;
    for (std::size_t k = 0; k < 3; ++k) {
        const double beta = 0.25 * (r[(k + 1) % 3] + r[(k + 2) % 3] - r[k]);
        out.b[k] = beta <= 0.0 ? kInf : 1.0 / beta;
    }
    return out;
}

inline AnisotropyParameters a_from_b(const BRates &rates) {
    for (double b : rates.b) {
        if (!(b > 0.0)) throw std::invalid_argument(detail::cat("b rates must be > 0, got ", b));
    }
    AnisotropyParameters out;
    for (std::size_t k = 0; k < 3; ++k) {
        const double rho = 2.0 * (reciprocal(rates.b[(k + 1) % 3]) + reciprocal(rates.b[(k + 2) % 3]));
        out.a[k] = rho == 0.0 ? kInf : 1.0 / rho;
    }
    return out;
}

struct PolynomialAdmissibility {
    Verdict admissible;  // triangle and prod z >= (1/a_1 + 1/a_2 + 1/a_3) / 4
    Verdict blp_zero;    // prod z >= 1/a_k for every k
};

inline PolynomialAdmissibility polynomial_admissibility_check(std::span<const double> roots,
                                                              const AnisotropyParameters &aniso) {
    if (roots.empty()) throw std::invalid_argument("polynomial_admissibility_check needs at least one root");
    double prod = 1.0;
    for (double z : roots) {
        if (!(z > 0.0)) throw std::invalid_argument(detail::cat("polynomial roots must be > 0, got ", z));
        prod *= z;
    }
    const double tol = positivity_tolerance();
    PolynomialAdmissibility out;
    const Verdict tri = triangle_check(aniso);
    out.admissible.check = "polynomial";
    out.admissible.margins = tri.margins;
    out.admissible.margins.push_back({"product", prod - 0.25 * aniso.reciprocal_sum()});
    out.admissible.passed = tri.passed && out.admissible.margins.back().value >= -tol;

    out.blp_zero.check = "polynomial_blp_zero";
    const auto r = aniso.reciprocals();
    for (std::size_t k = 0; k < 3; ++k) {
        out.blp_zero.margins.push_back({detail::cat("axis", k + 1), prod - r[k]});
        out.blp_zero.passed = out.blp_zero.passed && prod - r[k] >= -tol;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Laplace-domain kernel eigenvalues
// ---------------------------------------------------------------------------

/// Evaluators for kappa~_k(s) and lambda~_k(s) = 1 / (s - kappa~_k(s)).
class KernelLaplace {
   public:
    explicit KernelLaplace(KernelSpec spec) : spec_(std::move(spec)) { spec_.aniso.validate(); }

    const KernelSpec &spec() const { return spec_; }

    /// axis in {0,1,2}. Identically zero for a_k = +inf; at a pole
    /// (a_k == f~(s)) the result is non-finite, see try_kappa_tilde.
    template <typename T>
    T kappa_tilde(std::size_t axis, const T &s) const {
        const double a = spec_.aniso[axis];
        if (std::isinf(a)) return T(0.0);
        const T ft = spec_.waiting.laplace(s);
        return -s * ft / (T(a) - ft);
    }

    std::optional<double> try_kappa_tilde(std::size_t axis, double s) const {
        const double a = spec_.aniso[axis];
        if (std::isinf(a)) return 0.0;
        const double ft = spec_.waiting.laplace(s);
        if (std::abs(a - ft) <= 1e-14 * a) return std::nullopt;
        return -s * ft / (a - ft);
    }

    template <typename T>
    T lambda_tilde(std::size_t axis, const T &s) const {
        return T(1.0) / (s - kappa_tilde(axis, s));
    }

   private:
    KernelSpec spec_;
};

inline KernelLaplace kernel_eigenvalues_laplace(const KernelSpec &spec) { return KernelLaplace(spec); }

// ---------------------------------------------------------------------------
// Time-domain kernels
// ---------------------------------------------------------------------------

/// Regular (non-distributional) part of a kernel eigenvalue.
class RegularPart {
   public:
    RegularPart() = default;
    RegularPart(ExpSum sum) : rep_(std::move(sum)) {}
    RegularPart(TabulatedSeries table) : rep_(std::move(table)) {}

    bool is_exp_sum() const { return std::holds_alternative<ExpSum>(rep_); }
    const ExpSum &exp_sum() const { return std::get<ExpSum>(rep_); }
    const TabulatedSeries &table() const { return std::get<TabulatedSeries>(rep_); }

    /// Largest time at which the part is defined.
    double domain_end() const { return is_exp_sum() ? kInf : table().t_end(); }

    double operator()(double t) const {
        return std::visit([t](const auto &r) { return r(t); }, rep_);
    }

    template <typename T>
    T laplace(const T &s) const {
        return std::visit([&s](const auto &r) { return r.template laplace<T>(s); }, rep_);
    }

   private:
    std::variant<ExpSum, TabulatedSeries> rep_;
};

/// kappa(t) = delta_weight * delta(t) + regular(t). In the convolution
/// int_0^t kappa(t - tau) lambda(tau) d tau the delta contributes
/// delta_weight * lambda(t).
struct DeltaPlusRegular {
    double delta_weight = 0.0;
    RegularPart regular;

    double regular_at(double t) const { return regular(t); }

    template <typename T>
    T laplace(const T &s) const {
        return T(delta_weight) + regular.laplace(s);
    }
};

/// sum_j c_j * parts_j. Exponential sums combine exactly; any tabulated input
/// turns the result into a table on the union of sample times.
inline DeltaPlusRegular linear_combination(std::span<const double> coeffs, std::span<const DeltaPlusRegular> parts) {
    if (coeffs.size() != parts.size()) throw std::invalid_argument("linear_combination size mismatch");
    DeltaPlusRegular out;
    bool all_exp = true;
    for (std::size_t j = 0; j < parts.size(); ++j) {
        out.delta_weight += coeffs[j] * parts[j].delta_weight;
        all_exp = all_exp && parts[j].regular.is_exp_sum();
    }
    if (all_exp) {
        ExpSum sum;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            if (coeffs[j] != 0.0) sum = sum + parts[j].regular.exp_sum().scaled(coeffs[j]);
        }
        out.regular = RegularPart(std::move(sum));
        return out;
    }
    std::vector<double> times;
    double end = kInf;
    for (const auto &p : parts) {
        if (!p.regular.is_exp_sum()) {
            const auto &tt = p.regular.table().times();
            times.insert(times.end(), tt.begin(), tt.end());
            end = std::min(end, p.regular.table().t_end());
        }
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.erase(std::remove_if(times.begin(), times.end(), [end](double t) { return t > end; }), times.end());
    std::vector<double> values(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = 0; j < parts.size(); ++j) values[i] += coeffs[j] * parts[j].regular(times[i]);
    }
    out.regular = RegularPart(TabulatedSeries(std::move(times), std::move(values)));
    return out;
}

/// Inverts kappa~_k(s) = -s / (a_k W(s) - 1) exactly: the roots of
/// a_k W(s) - 1 are found numerically and the proper part is expanded in
/// partial fractions. Sinusoidal waiting functions use the closed
/// cos / cosh forms. Tabulated waiting functions are rejected.
inline std::array<DeltaPlusRegular, 3> kernel_time_domain(const KernelSpec &spec) {
    if (spec.waiting.is_tabulated())
        throw std::invalid_argument("kernel_time_domain needs a closed waiting-function family, not a table");
    std::array<DeltaPlusRegular, 3> out;
    for (std::size_t k = 0; k < 3; ++k) {
        const double a = spec.aniso[k];
        if (std::isinf(a)) continue;
        if (const auto *sin = std::get_if<family::Sinusoidal>(&spec.waiting.family())) {
            // kappa~ = -(g/a) s / (s^2 + w^2 - g/a), g the scale
            const double amp = spec.waiting.scale() / a;
            const double detuning = sin->omega * sin->omega - amp;
            ExpSum reg;
            if (detuning > 0.0) {
                reg.add({cplx(-amp, 0.0), cplx(0.0, std::sqrt(detuning)), 0});  // -amp cos(mu t)
            } else if (detuning < 0.0) {
                const double mu = std::sqrt(-detuning);
                reg.add({cplx(-0.5 * amp, 0.0), cplx(mu, 0.0), 0});  // -amp cosh(mu t)
                reg.add({cplx(-0.5 * amp, 0.0), cplx(-mu, 0.0), 0});
            } else {
                reg.add({cplx(-amp, 0.0), cplx(0.0, 0.0), 0});
            }
            out[k] = {0.0, RegularPart(std::move(reg))};
            continue;
        }
        const Polynomial den = a * *spec.waiting.w_polynomial() - Polynomial::constant(1.0);
        const Polynomial num({0.0, -1.0});
        const PolynomialDivision div = divide(num, den);
        const double direct = div.quotient[0];
        const PartialFractionExpansion pfe = partial_fraction_decompose(div.remainder, den);
        out[k] = {direct, RegularPart(pfe.time_domain())};
    }
    return out;
}

/// Coefficients k_i(t) of K_t[rho] = sum_i k_i(t) (sigma_i rho sigma_i - rho).
struct PauliKernelRates {
    std::array<DeltaPlusRegular, 3> k;
};

/// k_1 = (kappa_1 - kappa_2 - kappa_3) / 4 and cyclic.
inline PauliKernelRates kernel_rates_from_eigenvalues(const std::array<DeltaPlusRegular, 3> &kappa) {
    PauliKernelRates out;
    for (std::size_t i = 0; i < 3; ++i) {
        std::array<double, 3> c{};
        c[i] = 0.25;
        c[(i + 1) % 3] = -0.25;
        c[(i + 2) % 3] = -0.25;
        out.k[i] = linear_combination(c, kappa);
    }
    return out;
}

/// kappa_1 = -2 (k_2 + k_3) and cyclic.
inline std::array<DeltaPlusRegular, 3> kernel_eigenvalues_from_rates(const PauliKernelRates &rates) {
    std::array<DeltaPlusRegular, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        std::array<double, 3> c{};
        c[(i + 1) % 3] = -2.0;
        c[(i + 2) % 3] = -2.0;
        out[i] = linear_combination(c, rates.k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Semi-Markov special case
// ---------------------------------------------------------------------------

/// K_t[rho] = k_3(t) (sigma_3 rho sigma_3 - rho) with k~_3(s) = s f~ / (1 - f~),
/// for f >= 0 with int f <= 1. The eigenvalues are kappa_1 = kappa_2 = -2 k_3,
/// kappa_3 = 0, and lambda~ follows from lambda~ = 1 / (s - kappa~).
class SemiMarkovKernel {
   public:
    explicit SemiMarkovKernel(WaitingFunction f) : f_(std::move(f)) {}

    const WaitingFunction &waiting() const { return f_; }

    template <typename T>
    T k3_tilde(const T &s) const {
        const T ft = f_.laplace(s);
        return s * ft / (T(1.0) - ft);
    }

    template <typename T>
    T kappa_tilde(std::size_t axis, const T &s) const {
        return axis == 2 ? T(0.0) : T(-2.0) * k3_tilde(s);
    }

    template <typename T>
    T lambda_tilde(std::size_t axis, const T &s) const {
        return T(1.0) / (s - kappa_tilde(axis, s));
    }

   private:
    WaitingFunction f_;
};

inline SemiMarkovKernel semi_markov_kernel(const WaitingFunction &f) {
    if (!f.nonnegative()) throw std::invalid_argument("semi-Markov kernel needs a nonnegative waiting function");
    const double total = f.total_integral();
    if (total > 1.0 + 1e-12)
        throw std::invalid_argument(detail::cat("semi-Markov kernel needs int f <= 1, got ", total));
    return SemiMarkovKernel(f);
}

// ---------------------------------------------------------------------------
// Complete monotonicity of the waiting-function transform
// ---------------------------------------------------------------------------

/// CM falsification of f~(s) (multiplier_power = 0) or f~(s)/s
/// (multiplier_power = 1). Closed families use exact rational derivatives,
/// tables the Cauchy-integral route.
inline CMVerdict waiting_transform_cm_check(const WaitingFunction &w, int multiplier_power,
                                            const CMOptions &opt = {}) {
    if (auto poly = w.w_polynomial()) {
        Polynomial den = *poly;
        if (multiplier_power == 1) den = den * Polynomial({0.0, 1.0});
        return cm_check_rational(Polynomial::constant(1.0), den, opt);
    }
    return cm_check_analytic(
        [&w, multiplier_power](cplx s) {
            const cplx v = w.laplace(s);
            return multiplier_power == 1 ? v / s : v;
        },
        opt);
}

/// Sufficient condition for a vanishing BLP measure: F(t) <= min_k a_k on
/// the grid and f~ completely monotone.
inline Verdict blp_sufficient_check(const KernelSpec &spec, const TimeGrid &grid) {
    Verdict v;
    v.check = "blp_sufficient";
    const double amin = spec.aniso.min();
    const double tol = positivity_tolerance();
    double margin = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = amin - spec.waiting.F(grid[i]);
        margin = std::min(margin, m);
        if (m < -tol && !v.first_violation_index) {
            v.passed = false;
            v.first_violation_index = i;
            v.first_violation_time = grid[i];
        }
    }
    const CMVerdict cm = waiting_transform_cm_check(spec.waiting, 0);
    v.margins = {{"F_below_amin", margin}, {"cm", cm.passed ? 0.0 : cm.violation->value}};
    v.notes.push_back("cm: " + cm.status());
    v.passed = v.passed && cm.passed;
    return v;
}

}  // namespace memkernel
