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

#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "memkernel/common.hpp"

namespace memkernel {

using cplx = std::complex<double>;

/// Dense polynomial with coefficients in ascending order:
/// p(s) = c[0] + c[1] s + ... + c[n] s^n.
template <typename Scalar>
class BasicPolynomial {
   public:
    BasicPolynomial() : coeffs_{Scalar(0)} {}
    explicit BasicPolynomial(std::vector<Scalar> ascending) : coeffs_(std::move(ascending)) {
        if (coeffs_.empty()) coeffs_.push_back(Scalar(0));
        trim();
    }

    static BasicPolynomial constant(Scalar c) { return BasicPolynomial({c}); }
    static BasicPolynomial monomial(std::size_t degree, Scalar c = Scalar(1)) {
        std::vector<Scalar> v(degree + 1, Scalar(0));
        v[degree] = c;
        return BasicPolynomial(std::move(v));
    }
    /// prod_i (s - r_i)
    static BasicPolynomial from_roots(std::span<const Scalar> roots) {
        BasicPolynomial out = constant(Scalar(1));
        for (const auto &r : roots) out = out * BasicPolynomial({-r, Scalar(1)});
        return out;
    }

    std::size_t degree() const { return coeffs_.size() - 1; }
    const std::vector<Scalar> &coefficients() const { return coeffs_; }
    Scalar operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Scalar(0); }
    Scalar leading() const { return coeffs_.back(); }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == Scalar(0); }

    template <typename T>
    auto operator()(const T &s) const {
        using R = decltype(Scalar(0) * s);
        R acc = R(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + R(*it);
        return acc;
    }

    BasicPolynomial derivative() const {
        if (coeffs_.size() == 1) return {};
        std::vector<Scalar> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * Scalar(double(k));
        return BasicPolynomial(std::move(d));
    }

    /// Coefficients of p(s0 + h) as a polynomial in h (Taylor coefficients at s0).
    template <typename T>
    std::vector<T> taylor_at(const T &s0) const {
        std::vector<T> c(coeffs_.begin(), coeffs_.end());
        const std::size_t n = c.size();
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = n - 1; j > k; --j) c[j - 1] += s0 * c[j];
        }
        return c;
    }

    friend BasicPolynomial operator*(const BasicPolynomial &a, const BasicPolynomial &b) {
        std::vector<Scalar> out(a.coeffs_.size() + b.coeffs_.size() - 1, Scalar(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return BasicPolynomial(std::move(out));
    }
    friend BasicPolynomial operator+(const BasicPolynomial &a, const BasicPolynomial &b) {
        std::vector<Scalar> out(std::max(a.coeffs_.size(), b.coeffs_.size()), Scalar(0));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
        return BasicPolynomial(std::move(out));
    }
    friend BasicPolynomial operator-(const BasicPolynomial &a, const BasicPolynomial &b) {
        return a + b * constant(Scalar(-1));
    }
    friend BasicPolynomial operator*(Scalar c, const BasicPolynomial &p) { return constant(c) * p; }

   private:
    void trim() {
        while (coeffs_.size() > 1 && coeffs_.back() == Scalar(0)) coeffs_.pop_back();
    }
    std::vector<Scalar> coeffs_;
};

using Polynomial = BasicPolynomial<double>;
using ComplexPolynomial = BasicPolynomial<cplx>;

inline ComplexPolynomial to_complex(const Polynomial &p) {
    std::vector<cplx> c(p.coefficients().begin(), p.coefficients().end());
    return ComplexPolynomial(std::move(c));
}

/// Polynomial long division: num = quotient * den + remainder.
struct PolynomialDivision {
    Polynomial quotient;
    Polynomial remainder;
};

inline PolynomialDivision divide(const Polynomial &num, const Polynomial &den) {
    if (den.is_zero()) throw std::invalid_argument("polynomial division by zero");
    std::vector<double> rem = num.coefficients();
    const std::size_t dn = den.degree();
    if (num.degree() < dn) return {Polynomial(), num};
    std::vector<double> q(num.degree() - dn + 1, 0.0);
    for (std::size_t k = q.size(); k-- > 0;) {
        const double c = rem[k + dn] / den.leading();
        q[k] = c;
        for (std::size_t j = 0; j <= dn; ++j) rem[k + j] -= c * den[j];
        rem[k + dn] = 0.0;
    }
    rem.resize(std::max<std::size_t>(dn, 1));
    return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
}

struct Root {
    cplx location;
    int multiplicity = 1;
};

/// All roots of a real polynomial: eigenvalues of the companion matrix,
/// polished with a few Newton steps, then clustered into multiple roots when
/// closer than `cluster_threshold` (or, within sqrt(cluster_threshold), when
/// the merged point is confirmed as a multiple root).
inline std::vector<Root> polynomial_roots(const Polynomial &p, double cluster_threshold = 1e-8) {
    const std::size_t n = p.degree();
    if (n == 0) return {};
    std::vector<cplx> raw;
    if (n == 1) {
        raw.push_back(cplx(-p[0] / p[1], 0.0));
    } else {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
        for (std::size_t i = 1; i < n; ++i) companion(Eigen::Index(i), Eigen::Index(i - 1)) = 1.0;
        for (std::size_t i = 0; i < n; ++i) companion(Eigen::Index(i), Eigen::Index(n - 1)) = -p[i] / p.leading();
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigenvalue solve failed");
        for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) raw.push_back(solver.eigenvalues()[i]);
        const Polynomial dp = p.derivative();
        for (auto &r : raw) {
            for (int it = 0; it < 3; ++it) {
                const cplx d = dp(r);
                if (std::abs(d) < 1e-300) break;
                const cplx step = p(r) / d;
                const cplx next = r - step;
                if (!(std::abs(p(next)) < std::abs(p(r)))) break;
                r = next;
            }
        }
    }

    // Clustering: greedy single-linkage on the raw roots.
    std::vector<Root> out;
    std::vector<bool> used(raw.size(), false);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (used[i]) continue;
        std::vector<cplx> members{raw[i]};
        used[i] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t j = 0; j < raw.size(); ++j) {
                if (used[j]) continue;
                for (const auto &m : members) {
                    const double scale = std::max(1.0, std::abs(m));
                    if (std::abs(raw[j] - m) <= cluster_threshold * scale) {
                        members.push_back(raw[j]);
                        used[j] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        cplx mean(0.0, 0.0);
        for (const auto &m : members) mean += m;
        mean /= double(members.size());
        out.push_back({mean, int(members.size())});
    }

    // A multiple root splits by roughly eps^(1/m) in the companion
    // eigenvalues. Clusters that are close, but not within the threshold,
    // merge when the derivatives of p vanish at the merged location.
    auto vanishing_derivatives = [&p](cplx m, int multiplicity) {
        Polynomial d = p;
        for (int k = 1; k < multiplicity; ++k) {
            d = d.derivative();
            double scale = 0.0;
            for (std::size_t j = 0; j <= d.degree(); ++j) scale += std::abs(d[j]) * std::pow(std::abs(m), double(j));
            if (std::abs(d(m)) > 1e-7 * scale) return false;
        }
        return true;
    };
    const double merge_radius = std::sqrt(cluster_threshold);
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i < out.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < out.size() && !merged; ++j) {
                const double scale = std::max(1.0, std::abs(out[i].location));
                if (std::abs(out[i].location - out[j].location) > merge_radius * scale) continue;
                const int mult = out[i].multiplicity + out[j].multiplicity;
                const cplx m = (double(out[i].multiplicity) * out[i].location +
                                double(out[j].multiplicity) * out[j].location) / double(mult);
                if (!vanishing_derivatives(m, mult)) continue;
                out[i] = {m, mult};
                out.erase(out.begin() + std::ptrdiff_t(j));
                merged = true;
            }
        }
    }

    // Snap near-real roots to the real axis so conjugate pairing is exact.
    for (auto &r : out) {
        if (std::abs(r.location.imag()) <= 1e-12 * std::max(1.0, std::abs(r.location))) {
            r.location = cplx(r.location.real(), 0.0);
        }
    }
    std::sort(out.begin(), out.end(), [](const Root &a, const Root &b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return out;
}

}  // namespace memkernel
