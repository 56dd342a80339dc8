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

// Numerical Laplace-domain tools: forward transform by adaptive quadrature,
// real-axis (Gaver-Stehfest) and contour (fixed Talbot) inversion, a
// finite-order complete-monotonicity falsifier, and partial fractions.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "memkernel/common.hpp"
#include "memkernel/exp_sum.hpp"
#include "memkernel/polynomial.hpp"

namespace memkernel {

using RealFunction = std::function<double(double)>;
using AnalyticFunction = std::function<cplx(cplx)>;

// ---------------------------------------------------------------------------
// Forward transform
// ---------------------------------------------------------------------------

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int evaluations = 0;
};

struct LaplaceQuadratureOptions {
    double rel_tol = 1e-10;
    double tail_cutoff = 1e-14;  // stop once exp(-s t) falls below this
    int max_panels = 4096;
    int max_subdivisions = 256;  // per panel
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <typename Fn>
Segment gauss_kronrod15(const Fn &fn, double a, double b, int &evals) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = fn(c);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[std::size_t(j)];
        const double f1 = fn(c - dx), f2 = fn(c + dx);
        kronrod += kKronrodWeights[std::size_t(j)] * (f1 + f2);
        if (j % 2 == 1) gauss += kGaussWeights[std::size_t(j / 2)] * (f1 + f2);
    }
    evals += 15;
    return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <typename Fn>
QuadratureResult adaptive_panel(const Fn &fn, double a, double b, double abs_tol, double rel_tol,
                                int max_subdivisions) {
    QuadratureResult out;
    std::priority_queue<Segment> queue;
    Segment first = gauss_kronrod15(fn, a, b, out.evaluations);
    queue.push(first);
    double total = first.value, error = first.error;
    int splits = 0;
    while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (splits >= max_subdivisions) {
            out.converged = false;
            break;
        }
        Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Segment left = gauss_kronrod15(fn, worst.a, mid, out.evaluations);
        Segment right = gauss_kronrod15(fn, mid, worst.b, out.evaluations);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++splits;
    }
    out.value = total;
    out.error_estimate = error;
    return out;
}

}  // namespace detail

/// int_0^inf exp(-s t) f(t) dt by adaptive Gauss-Kronrod quadrature on
/// consecutive panels of width 1/s. A non-converged result still carries the
/// partial estimate.
inline QuadratureResult numeric_laplace(const RealFunction &f, double s,
                                        const LaplaceQuadratureOptions &opt = {}) {
    if (!(s > 0.0)) throw std::invalid_argument(detail::cat("numeric_laplace needs s > 0, got ", s));
    auto integrand = [&](double t) { return std::exp(-s * t) * f(t); };
    const double width = 1.0 / s;
    QuadratureResult out;
    int quiet_panels = 0;
    for (int panel = 0; panel < opt.max_panels; ++panel) {
        const double a = panel * width, b = (panel + 1) * width;
        const double abs_tol = 1e-3 * opt.rel_tol * std::abs(out.value) + 1e-300;
        QuadratureResult part = detail::adaptive_panel(integrand, a, b, abs_tol, opt.rel_tol, opt.max_subdivisions);
        out.value += part.value;
        out.error_estimate += part.error_estimate;
        out.evaluations += part.evaluations;
        out.converged = out.converged && part.converged;
        if (!std::isfinite(out.value)) {
            out.converged = false;
            return out;
        }
        const bool small = std::abs(part.value) <= 1e-16 * std::abs(out.value) || part.value == 0.0;
        quiet_panels = small ? quiet_panels + 1 : 0;
        if (std::exp(-s * b) < opt.tail_cutoff && quiet_panels >= 3) return out;
    }
    out.converged = false;
    return out;
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Gaver-Stehfest weights V_1..V_M (M even), computed in extended precision.
inline std::vector<long double> stehfest_weights(int order) {
    if (order < 2 || order % 2 != 0) throw std::invalid_argument("Stehfest order must be even and >= 2");
    const int half = order / 2;
    auto fact = [](int n) {
        long double r = 1.0L;
        for (int k = 2; k <= n; ++k) r *= k;
        return r;
    };
    std::vector<long double> v(std::size_t(order) + 1, 0.0L);
    for (int k = 1; k <= order; ++k) {
        long double acc = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            acc += std::pow(static_cast<long double>(j), half) * fact(2 * j) /
                   (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        v[std::size_t(k)] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * acc;
    }
    return v;
}

/// Gaver-Stehfest inversion of a transform that is real on the positive axis.
/// The abscissa step ln2/t is rounded to 45 significant bits so that every
/// sample point k*c is exact in double precision; the value returned is the
/// inversion at t' = ln2/c, within a relative 1e-13 of t.
inline double inverse_laplace(const RealFunction &transform, double t, int order = 16) {
    if (!(t > 0.0)) throw std::invalid_argument(detail::cat("inverse_laplace needs t > 0, got ", t));
    const auto weights = stehfest_weights(order);
    int exponent = 0;
    const double mantissa = std::frexp(std::numbers::ln2 / t, &exponent);
    const double c = std::ldexp(std::round(std::ldexp(mantissa, 45)), exponent - 45);
    long double acc = 0.0L;
    for (int k = 1; k <= order; ++k) {
        acc += weights[std::size_t(k)] * static_cast<long double>(transform(k * c));
    }
    return double(acc * static_cast<long double>(c));
}

/// Fixed-Talbot inversion (Abate-Valko contour). Handles oscillatory targets
/// whose transforms have poles off the real axis, provided the contour
/// (crossing the imaginary axis at +-i*pi*M/(5t)) encloses them.
inline double inverse_laplace_talbot(const AnalyticFunction &transform, double t, int order = 32) {
    if (!(t > 0.0)) throw std::invalid_argument(detail::cat("inverse_laplace_talbot needs t > 0, got ", t));
    const double r = 2.0 * order / (5.0 * t);
    double acc = 0.5 * std::real(transform(cplx(r, 0.0))) * std::exp(r * t);
    for (int k = 1; k < order; ++k) {
        const double theta = k * std::numbers::pi / order;
        const double cot = std::cos(theta) / std::sin(theta);
        const cplx s = r * theta * cplx(cot, 1.0);
        const double sigma = theta + (theta * cot - 1.0) * cot;
        acc += std::real(std::exp(t * s) * transform(s) * cplx(1.0, sigma));
    }
    return acc * r / order;
}

struct InversionResult {
    double value = kNaN;
    bool degraded = false;  // the order cross-check disagrees: likely oscillatory target
    double spread = 0.0;
    int order = 0;
};

/// Gaver-Stehfest at `order` cross-checked against order-2; a spread above
/// 1e-4 * max(1, |value|) flags the sample as degraded.
inline InversionResult inverse_laplace_checked(const RealFunction &transform, double t, int order = 16) {
    InversionResult out;
    out.order = order;
    out.value = inverse_laplace(transform, t, order);
    const double lower = inverse_laplace(transform, t, order - 2);
    out.spread = std::abs(out.value - lower);
    out.degraded = !std::isfinite(out.value) || out.spread > 1e-4 * std::max(1.0, std::abs(out.value));
    return out;
}

/// Fixed Talbot cross-checked between orders M and M+8. The contour crosses
/// the imaginary axis at height M*pi/(5t), so M starts high enough to clear
/// `reach` (the largest known |Im| of a singularity) with a 1.5x margin, then
/// rises in steps of 16 while the spread exceeds 1e-8 * max(1, |value|).
/// Rounding grows like e^{0.4 M}, so the order is capped at max_order; the
/// level with the smallest spread is returned. A sample is degraded when the
/// cap keeps the contour below `reach` or the best spread is above 1e-4.
inline InversionResult inverse_laplace_talbot_checked(const AnalyticFunction &transform, double t, int order = 32,
                                                      double reach = 0.0, int max_order = 64) {
    const double needed = 7.5 * reach * t / std::numbers::pi;
    int start = order;
    while (start < needed && start < max_order) start += 8;
    InversionResult best;
    best.spread = kInf;
    for (int m = start; m <= max_order || m == start; m += 16) {
        const double v = inverse_laplace_talbot(transform, t, m);
        const double w = inverse_laplace_talbot(transform, t, m + 8);
        const double spread = std::isfinite(v) && std::isfinite(w) ? std::abs(v - w) : kInf;
        if (spread < best.spread || !std::isfinite(best.value)) best = {v, false, spread, m};
        if (spread <= 1e-8 * std::max(1.0, std::abs(v))) break;
    }
    best.degraded = !(best.spread <= 1e-4 * std::max(1.0, std::abs(best.value))) || best.order < needed;
    return best;
}

// ---------------------------------------------------------------------------
// Complete monotonicity
// ---------------------------------------------------------------------------

struct CMViolation {
    int order = 0;
    double s = 0.0;
    double value = 0.0;  // normalized (-1)^n f^(n)(s) s^n / n!
};

/// Finite-order falsification result. `passed` means no violation was found
/// for orders 0..orders_tested on the grid; it is not a proof.
struct CMVerdict {
    bool passed = true;
    int orders_tested = 0;
    std::optional<CMViolation> violation;
    std::vector<double> grid;
    std::vector<double> skipped_points;
    double tolerance = 0.0;

    std::string status() const {
        if (passed) return detail::cat("passed_up_to_order(", orders_tested, ")");
        return detail::cat("violated(order ", violation->order, ", s ", violation->s, ", value ", violation->value,
                           ")");
    }
};

struct CMOptions {
    int max_order = 8;
    std::vector<double> grid;  // empty: 64 log-spaced points on [1e-3, 1e3]
    double tolerance = 1e-7;   // relative to |f(s)|; rational inputs use 1e-12
};

inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : double(i) / double(n - 1);
        out[std::size_t(i)] = std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
    }
    return out;
}

namespace detail {

inline std::vector<double> cm_grid(const CMOptions &opt) {
    return opt.grid.empty() ? log_spaced(1e-3, 1e3, 64) : opt.grid;
}

// Scans orders 0..N at each grid point. `coeffs(s)` returns the normalized
// values (-1)^n f^(n)(s) s^n / n! for n = 0..N, or nullopt on failure.
template <typename CoeffFn>
CMVerdict cm_scan(const CoeffFn &coeffs, const CMOptions &opt, double tol) {
    CMVerdict out;
    out.grid = cm_grid(opt);
    out.orders_tested = opt.max_order;
    out.tolerance = tol;
    for (double s : out.grid) {
        const std::optional<std::vector<double>> q = coeffs(s);
        if (!q) {
            out.skipped_points.push_back(s);
            continue;
        }
        const double scale = std::abs((*q)[0]);
        for (int n = 0; n <= opt.max_order; ++n) {
            const double v = (*q)[std::size_t(n)];
            if (v < -tol * scale || (n == 0 && v < 0.0)) {
                out.passed = false;
                out.violation = CMViolation{n, s, v};
                return out;
            }
        }
    }
    return out;
}

}  // namespace detail

/// Central finite differences of order n with step s/n (stencil inside
/// [s/2, 3s/2]). Plain central differences of a CM function keep the
/// alternating sign exactly, so this path does not raise false alarms on
/// genuine CM inputs.
inline std::optional<std::vector<double>> cm_normalized_derivatives_fd(const RealFunction &f, double s,
                                                                       int max_order) {
    std::vector<double> q(std::size_t(max_order) + 1);
    const double f0 = f(s);
    if (!std::isfinite(f0)) return std::nullopt;
    q[0] = f0;
    for (int n = 1; n <= max_order; ++n) {
        const double h = s / n;
        // n-th central difference: sum_k (-1)^k C(n,k) f(s + (n/2 - k) h)
        double acc = 0.0, binom = 1.0, nn_over_fact = 1.0;
        for (int k = 0; k <= n; ++k) {
            const double x = s + (0.5 * n - k) * h;
            const double fx = f(x);
            if (!std::isfinite(fx)) return std::nullopt;
            acc += (k % 2 == 0 ? 1.0 : -1.0) * binom * fx;
            binom = binom * (n - k) / (k + 1);
        }
        for (int k = 1; k <= n; ++k) nn_over_fact *= double(n) / k;  // (s/h)^n / n! = n^n / n!
        q[std::size_t(n)] = (n % 2 == 0 ? 1.0 : -1.0) * acc * nn_over_fact;
    }
    return q;
}

/// Taylor coefficients from the Cauchy integral on the circle |z - s| = s/2,
/// which stays inside the right half-plane where every Laplace transform is
/// analytic.
inline std::optional<std::vector<double>> cm_normalized_derivatives_cauchy(const AnalyticFunction &f, double s,
                                                                           int max_order, int nodes = 64) {
    const double radius = 0.5 * s;
    std::vector<cplx> samples(static_cast<std::size_t>(nodes));
    for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * std::numbers::pi * k / nodes;
        samples[std::size_t(k)] = f(s + radius * std::polar(1.0, th));
        if (!std::isfinite(samples[std::size_t(k)].real()) || !std::isfinite(samples[std::size_t(k)].imag()))
            return std::nullopt;
    }
    std::vector<double> q(std::size_t(max_order) + 1);
    const cplx centre = f(cplx(s, 0.0));
    if (!std::isfinite(centre.real())) return std::nullopt;
    q[0] = centre.real();
    for (int n = 1; n <= max_order; ++n) {
        cplx acc(0.0, 0.0);
        for (int k = 0; k < nodes; ++k) {
            acc += samples[std::size_t(k)] * std::polar(1.0, -2.0 * std::numbers::pi * n * k / nodes);
        }
        // acc/nodes = c_n radius^n; normalized value uses s^n = 2^n radius^n.
        q[std::size_t(n)] = (n % 2 == 0 ? 1.0 : -1.0) * (acc.real() / nodes) * std::pow(2.0, n);
    }
    return q;
}

/// CM falsifier for a real-axis function (finite differences).
inline CMVerdict cm_check(const RealFunction &f, const CMOptions &opt = {}) {
    return detail::cm_scan([&](double s) { return cm_normalized_derivatives_fd(f, s, opt.max_order); }, opt,
                           opt.tolerance);
}

/// CM falsifier for a transform that can be evaluated off the real axis.
inline CMVerdict cm_check_analytic(const AnalyticFunction &f, const CMOptions &opt = {}) {
    return detail::cm_scan([&](double s) { return cm_normalized_derivatives_cauchy(f, s, opt.max_order); }, opt,
                           opt.tolerance);
}

/// Exact derivatives of num/den via Taylor-series division.
inline std::optional<std::vector<double>> cm_normalized_derivatives_rational(const Polynomial &num,
                                                                             const Polynomial &den, double s,
                                                                             int max_order) {
    const auto a = num.taylor_at(s);
    const auto b = den.taylor_at(s);
    if (b[0] == 0.0) return std::nullopt;
    std::vector<double> c(std::size_t(max_order) + 1, 0.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
        double acc = n < a.size() ? a[n] : 0.0;
        for (std::size_t k = 1; k <= n && k < b.size(); ++k) acc -= b[k] * c[n - k];
        c[n] = acc / b[0];
    }
    std::vector<double> q(c.size());
    double sn = 1.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        q[n] = (n % 2 == 0 ? 1.0 : -1.0) * c[n] * sn;
        sn *= s;
    }
    return q;
}

inline CMVerdict cm_check_rational(const Polynomial &num, const Polynomial &den, CMOptions opt = {}) {
    opt.tolerance = std::min(opt.tolerance, 1e-12);
    return detail::cm_scan(
        [&](double s) { return cm_normalized_derivatives_rational(num, den, s, opt.max_order); }, opt,
        opt.tolerance);
}

// ---------------------------------------------------------------------------
// Partial fractions
// ---------------------------------------------------------------------------

struct PartialFractionPole {
    cplx location;
    int multiplicity = 1;
    std::vector<cplx> residues;  // residues[j-1] multiplies 1/(s - p)^j
};

/// num/den = direct_term + sum_poles sum_j residues[j-1] / (s - p)^j.
struct PartialFractionExpansion {
    std::vector<PartialFractionPole> poles;
    double direct_term = 0.0;
    double recombination_error = 0.0;

    cplx evaluate(cplx s) const {
        cplx acc(direct_term, 0.0);
        for (const auto &pole : poles) {
            cplx base = 1.0 / (s - pole.location), power = base;
            for (const auto &r : pole.residues) {
                acc += r * power;
                power *= base;
            }
        }
        return acc;
    }

    /// Inverse transform of the strictly proper part; conjugate pole pairs
    /// fold into one real trigonometric-exponential term.
    ExpSum time_domain() const {
        ExpSum out;
        for (const auto &pole : poles) {
            if (pole.location.imag() < 0.0) continue;
            const double weight = pole.location.imag() > 0.0 ? 2.0 : 1.0;
            double fact = 1.0;
            for (std::size_t j = 1; j <= pole.residues.size(); ++j) {
                if (j > 1) fact *= double(j - 1);
                out.add({weight * pole.residues[j - 1] / fact, pole.location, int(j) - 1});
            }
        }
        return out;
    }
};

namespace detail {

inline PartialFractionExpansion residues_from_roots(const Polynomial &num, double leading,
                                                    const std::vector<Root> &roots) {
    PartialFractionExpansion out;
    const ComplexPolynomial cnum = to_complex(num);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const cplx p = roots[i].location;
        const int m = roots[i].multiplicity;
        ComplexPolynomial rest = ComplexPolynomial::constant(cplx(leading, 0.0));
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j == i) continue;
            for (int k = 0; k < roots[j].multiplicity; ++k)
                rest = rest * ComplexPolynomial({-roots[j].location, cplx(1.0, 0.0)});
        }
        const auto a = cnum.taylor_at(p);
        const auto b = rest.taylor_at(p);
        std::vector<cplx> c(std::size_t(m), cplx(0.0, 0.0));
        for (std::size_t n = 0; n < c.size(); ++n) {
            cplx acc = n < a.size() ? a[n] : cplx(0.0, 0.0);
            for (std::size_t k = 1; k <= n && k < b.size(); ++k) acc -= b[k] * c[n - k];
            c[n] = acc / b[0];
        }
        PartialFractionPole pole{p, m, std::vector<cplx>(std::size_t(m))};
        for (int j = 1; j <= m; ++j) pole.residues[std::size_t(j - 1)] = c[std::size_t(m - j)];
        out.poles.push_back(std::move(pole));
    }
    return out;
}

inline double recombination_error(const PartialFractionExpansion &pfe, const Polynomial &num,
                                  const Polynomial &den, int probes = 50) {
    double scale = 1.0;
    for (const auto &pole : pfe.poles) scale = std::max(scale, std::abs(pole.location));
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), radius(0.3, 2.0);
    double worst = 0.0;
    for (int k = 0; k < probes; ++k) {
        const cplx s = std::polar(scale * (1.0 + radius(rng)), angle(rng));
        const cplx exact = num(s) / den(s);
        const cplx approx = pfe.evaluate(s);
        worst = std::max(worst, std::abs(exact - approx) / std::max(std::abs(exact), 1e-300));
    }
    return worst;
}

}  // namespace detail

/// Strictly proper num/den only; the denominator is factored with
/// polynomial_roots (repeated-root threshold 1e-8).
inline PartialFractionExpansion partial_fraction_decompose(const Polynomial &num, const Polynomial &den) {
    if (den.is_zero()) throw std::invalid_argument("denominator is the zero polynomial");
    if (!num.is_zero() && num.degree() >= den.degree()) {
        throw std::invalid_argument(detail::cat("partial_fraction_decompose needs deg(num) < deg(den), got ",
                                                num.degree(), " >= ", den.degree()));
    }
    PartialFractionExpansion out = detail::residues_from_roots(num, den.leading(), polynomial_roots(den));
    out.recombination_error = detail::recombination_error(out, num, den);
    return out;
}

/// Same, with the denominator given in factored form leading * prod (s - r)^m.
inline PartialFractionExpansion partial_fraction_decompose(const Polynomial &num, double leading,
                                                           const std::vector<Root> &roots) {
    int degree = 0;
    std::vector<cplx> flat;
    for (const auto &r : roots) {
        degree += r.multiplicity;
        for (int k = 0; k < r.multiplicity; ++k) flat.push_back(r.location);
    }
    if (!num.is_zero() && int(num.degree()) >= degree)
        throw std::invalid_argument("partial_fraction_decompose needs deg(num) < deg(den)");
    PartialFractionExpansion out = detail::residues_from_roots(num, leading, roots);
    const ComplexPolynomial cden = leading * ComplexPolynomial::from_roots(flat);
    std::vector<double> real_coeffs;
    for (const auto &c : cden.coefficients()) real_coeffs.push_back(c.real());
    out.recombination_error = detail::recombination_error(out, num, Polynomial(real_coeffs));
    return out;
}

// ---------------------------------------------------------------------------
// Telescoping decomposition of 1 / (s prod (s + z_i))
// ---------------------------------------------------------------------------

struct LemmaIdentityResult {
    Verdict verdict;
    double max_fraction_error = 0.0;    // relative, fraction form
    double max_polynomial_error = 0.0;  // relative to prod(s + z_i), polynomial form
};

/// Checks 1/(s prod(s+z_i)) = A (1/s - sum_i prod_{j<i} z_j / prod_{j<=i}(s+z_j))
/// with A = 1/prod z_i, and the equivalent polynomial identity
/// prod z_i = prod(s+z_i) - s sum_i prod_{j<i} z_j prod_{j>i} (s+z_j),
/// both evaluated in extended precision at each probe.
inline LemmaIdentityResult lemma_identity_check(std::span<const double> z, std::span<const double> probes,
                                                double tol = 1e-10) {
    for (double zi : z) {
        if (!(zi > 0.0)) throw std::invalid_argument("lemma_identity_check needs positive roots");
    }
    LemmaIdentityResult out;
    out.verdict.check = "lemma_identity";
    using R = long double;
    const std::size_t n = z.size();
    R prod_z = 1.0L;
    for (double zi : z) prod_z *= zi;
    for (double sd : probes) {
        const R s = sd;
        R prod_sz = 1.0L;
        for (double zi : z) prod_sz *= (s + zi);
        const R lhs = 1.0L / (s * prod_sz);
        R sum = 0.0L, zpre = 1.0L, spre = 1.0L;
        for (std::size_t i = 0; i < n; ++i) {
            spre *= (s + z[i]);
            sum += zpre / spre;
            zpre *= z[i];
        }
        const R rhs = (1.0L / prod_z) * (1.0L / s - sum);
        out.max_fraction_error = std::max(out.max_fraction_error, double(std::abs(lhs - rhs) / std::abs(lhs)));

        R bracket = 0.0L;
        zpre = 1.0L;
        for (std::size_t i = 0; i < n; ++i) {
            R post = 1.0L;
            for (std::size_t j = i + 1; j < n; ++j) post *= (s + z[j]);
            bracket += zpre * post;
            zpre *= z[i];
        }
        const R poly_rhs = prod_sz - s * bracket;
        out.max_polynomial_error =
            std::max(out.max_polynomial_error, double(std::abs(poly_rhs - prod_z) / std::max(prod_sz, prod_z)));
    }
    out.verdict.margins = {{"fraction_form", tol - out.max_fraction_error},
                           {"polynomial_form", tol - out.max_polynomial_error}};
    out.verdict.passed = out.max_fraction_error <= tol && out.max_polynomial_error <= tol;
    return out;
}

// ---------------------------------------------------------------------------
// Initial value theorem: lim_{t->0} f(t) = lim_{s->inf} s f~(s)
// ---------------------------------------------------------------------------

struct InitialValueResult {
    Verdict verdict;
    double extrapolated_limit = kNaN;
    std::vector<double> samples;  // s f~(s) at s = 1e3 .. 1e6
};

inline InitialValueResult initial_value_check(const RealFunction &transform, double expected, double tol = 1e-4) {
    InitialValueResult out;
    out.verdict.check = "initial_value";
    const std::array<double, 4> points = {1e3, 1e4, 1e5, 1e6};
    for (double s : points) out.samples.push_back(s * transform(s));
    for (double v : out.samples) {
        if (!std::isfinite(v)) {
            out.verdict.passed = false;
            out.verdict.notes.push_back("non-finite s*f(s) sample");
            return out;
        }
    }
    // Fit g(s) = L + c/s through the last two samples.
    out.extrapolated_limit = (10.0 * out.samples[3] - out.samples[2]) / 9.0;
    const double d1 = std::abs(out.samples[1] - out.samples[0]);
    const double d2 = std::abs(out.samples[2] - out.samples[1]);
    const double d3 = std::abs(out.samples[3] - out.samples[2]);
    const double floor = 1e-9 * std::max(1.0, std::abs(out.samples[3]));
    const bool converging = (d3 <= d2 + floor) && (d2 <= d1 + floor);
    if (!converging) {
        out.verdict.notes.push_back(detail::cat("sequence not converging: increments ", d1, ", ", d2, ", ", d3));
    }
    const double err = std::abs(out.extrapolated_limit - expected);
    out.verdict.margins = {{"limit", tol - err}};
    out.verdict.passed = converging && err <= tol;
    return out;
}

}  // namespace memkernel
