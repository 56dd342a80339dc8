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

// Waiting functions f(t) with cumulative F(t) = int_0^t f and transform
// f~(s) = 1 / W(s). Every family carries an overall positive scale factor
// (default 1) multiplying f.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "memkernel/common.hpp"
#include "memkernel/exp_sum.hpp"
#include "memkernel/laplace_tools.hpp"
#include "memkernel/polynomial.hpp"
#include "memkernel/tabulated.hpp"

namespace memkernel {

namespace detail {

/// Divided difference of x -> exp(t x) over the nodes: the bottom-left entry
/// of exp(t A), A lower bidiagonal with the nodes on the diagonal and ones
/// below it. Stays accurate for clustered and repeated nodes.
inline double exp_divided_difference(const std::vector<double> &nodes, double t) {
    const Eigen::Index m = Eigen::Index(nodes.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        a(i, i) = t * nodes[std::size_t(i)];
        if (i > 0) a(i, i - 1) = t;
    }
    return a.exp()(m - 1, 0);
}

}  // namespace detail

namespace family {

/// f = exp(-z t), W(s) = s + z
struct Exponential {
    double z;
};
/// W(s) = (s + c1)(s + c2), c2 > c1 > 0
struct BiExponential {
    double c1, c2;
};
/// f = sin(w t) / w, W(s) = s^2 + w^2
struct Sinusoidal {
    double omega;
};
/// W(s) = prod (s + z_i), z_i > 0
struct PolynomialW {
    std::vector<double> roots;
};
struct Tabulated {
    std::vector<double> times, values;
};

}  // namespace family

class WaitingFunction {
   public:
    using Family = std::variant<family::Exponential, family::BiExponential, family::Sinusoidal,
                                family::PolynomialW, family::Tabulated>;

    static WaitingFunction exponential(double z, double scale = 1.0) {
        if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument(detail::cat("exponential rate z must be > 0, got ", z));
        return WaitingFunction(family::Exponential{z}, scale);
    }
    static WaitingFunction biexponential(double c1, double c2, double scale = 1.0) {
        if (!(c1 > 0.0) || !(c2 > c1) || !std::isfinite(c2))
            throw std::invalid_argument(detail::cat("biexponential needs c2 > c1 > 0, got c1=", c1, " c2=", c2));
        return WaitingFunction(family::BiExponential{c1, c2}, scale);
    }
    static WaitingFunction sinusoidal(double omega, double scale = 1.0) {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw std::invalid_argument(detail::cat("sinusoidal omega must be > 0, got ", omega));
        return WaitingFunction(family::Sinusoidal{omega}, scale);
    }
    static WaitingFunction polynomial(std::vector<double> roots, double scale = 1.0) {
        if (roots.empty()) throw std::invalid_argument("polynomial W needs at least one root");
        for (double z : roots) {
            if (!(z > 0.0) || !std::isfinite(z))
                throw std::invalid_argument(detail::cat("polynomial W roots must be > 0, got ", z));
        }
        return WaitingFunction(family::PolynomialW{std::move(roots)}, scale);
    }
    static WaitingFunction tabulated(std::vector<double> times, std::vector<double> values, double scale = 1.0) {
        return WaitingFunction(family::Tabulated{std::move(times), std::move(values)}, scale);
    }

    const Family &family() const { return family_; }
    double scale() const { return scale_; }

    std::string family_name() const {
        return std::visit(
            [](const auto &fam) -> std::string {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, family::Exponential>) return "exponential";
                if constexpr (std::is_same_v<T, family::BiExponential>) return "biexponential";
                if constexpr (std::is_same_v<T, family::Sinusoidal>) return "sinusoidal";
                if constexpr (std::is_same_v<T, family::PolynomialW>) return "polynomial";
                if constexpr (std::is_same_v<T, family::Tabulated>) return "tabulated";
            },
            family_);
    }

    bool is_tabulated() const { return std::holds_alternative<family::Tabulated>(family_); }

    double f(double t) const {
        if (t < 0.0) return 0.0;
        if (auto *s = std::get_if<family::Sinusoidal>(&family_)) return scale_ * std::sin(s->omega * t) / s->omega;
        if (auto *e = std::get_if<family::Exponential>(&family_)) return scale_ * std::exp(-e->z * t);
        if (table_) return scale_ * (*table_)(t);
        if (!dd_nodes_.empty()) return scale_ * detail::exp_divided_difference(dd_nodes_, t);
        return scale_ * density_(t);
    }

    /// F(t) = int_0^t f
    double F(double t) const {
        if (t <= 0.0) return 0.0;
        if (auto *s = std::get_if<family::Sinusoidal>(&family_)) {
            const double w = s->omega;
            return scale_ * 2.0 * std::pow(std::sin(0.5 * w * t), 2) / (w * w);  // (1 - cos w t) / w^2
        }
        if (auto *e = std::get_if<family::Exponential>(&family_)) return scale_ * -std::expm1(-e->z * t) / e->z;
        if (auto *b = std::get_if<family::BiExponential>(&family_)) {
            const double c1 = b->c1, c2 = b->c2;
            return scale_ * (-std::expm1(-c1 * t) / c1 + std::expm1(-c2 * t) / c2) / (c2 - c1);
        }
        if (table_) return scale_ * table_->integral(t);
        if (!dd_nodes_.empty()) {
            std::vector<double> nodes{0.0};
            nodes.insert(nodes.end(), dd_nodes_.begin(), dd_nodes_.end());
            return scale_ * detail::exp_divided_difference(nodes, t);
        }
        return scale_ * density_.integral(t);
    }

    /// f~(s), valid for Re s > 0 (real or complex argument).
    template <typename T>
    T laplace(const T &s) const {
        if (table_) return T(scale_) * table_->laplace(s);
        return T(scale_) / w_unscaled_(s);
    }

    /// W(s) = 1/f~(s) when it is a polynomial (every closed family).
    std::optional<Polynomial> w_polynomial() const {
        if (table_) return std::nullopt;
        return Polynomial(w_unscaled_.coefficients()) * Polynomial::constant(1.0 / scale_);
    }

    /// Largest |Im| over the poles of f~; the eigenvalue transforms share them.
    double oscillation_reach() const {
        if (auto *s = std::get_if<family::Sinusoidal>(&family_)) return s->omega;
        return 0.0;
    }

    /// int_0^inf f = f~(0+).
    double total_integral() const {
        if (table_) return scale_ * table_->total_integral();
        return scale_ / w_unscaled_(0.0);
    }

    /// f >= 0 everywhere: analytic for closed families, sample-wise for tables.
    bool nonnegative() const {
        if (std::holds_alternative<family::Sinusoidal>(family_)) return false;
        if (table_) {
            return std::all_of(table_->values().begin(), table_->values().end(), [](double v) { return v >= 0.0; });
        }
        return true;
    }

    /// f as an exponential sum (closed families except Sinusoidal, which is
    /// also expressible: sin(w t)/w = Re[-i e^{i w t}] / w).
    std::optional<ExpSum> density_exp_sum() const {
        if (table_) return std::nullopt;
        return density_.scaled(scale_);
    }

   private:
    WaitingFunction(Family fam, double scale) : family_(std::move(fam)), scale_(scale) {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw std::invalid_argument(detail::cat("waiting function scale must be > 0, got ", scale));
        std::visit([this](const auto &fm) { build(fm); }, family_);
    }

    void build(const family::Exponential &e) {
        w_unscaled_ = Polynomial({e.z, 1.0});
        density_ = ExpSum({{cplx(1.0, 0.0), cplx(-e.z, 0.0), 0}});
    }
    void build(const family::BiExponential &b) {
        w_unscaled_ = Polynomial({b.c1 * b.c2, b.c1 + b.c2, 1.0});
        const double d = b.c2 - b.c1;
        density_ = ExpSum({{cplx(1.0 / d, 0.0), cplx(-b.c1, 0.0), 0}, {cplx(-1.0 / d, 0.0), cplx(-b.c2, 0.0), 0}});
    }
    void build(const family::Sinusoidal &s) {
        w_unscaled_ = Polynomial({s.omega * s.omega, 0.0, 1.0});
        density_ = ExpSum({{cplx(0.0, -1.0 / s.omega), cplx(0.0, s.omega), 0}});
    }
    void build(const family::PolynomialW &p) {
        std::vector<double> sorted = p.roots;
        std::sort(sorted.begin(), sorted.end());
        std::vector<Root> poles;
        for (double z : sorted) {
            if (!poles.empty() && std::abs(-z - poles.back().location.real()) <= 1e-8 * std::max(1.0, z)) {
                ++poles.back().multiplicity;
            } else {
                poles.push_back({cplx(-z, 0.0), 1});
            }
        }
        Polynomial w = Polynomial::constant(1.0);
        for (double z : p.roots) w = w * Polynomial({z, 1.0});
        w_unscaled_ = w;
        density_ = partial_fraction_decompose(Polynomial::constant(1.0), 1.0, poles).time_domain();
        // The residues grow like 1/gap for nearby roots and the sum cancels
        // down to O(t^n); past a rounding budget of about 1e-14 evaluate
        // through divided differences instead.
        double weight = 0.0;
        bool confluent = false;
        for (const auto &term : density_.terms()) {
            weight += std::abs(term.coeff) * std::max(1.0, 1.0 / std::abs(term.rate));
            confluent = confluent || term.power > 0;
        }
        if (confluent || weight > 64.0) {
            for (double z : sorted) dd_nodes_.push_back(-z);
        }
    }
    void build(const family::Tabulated &t) { table_ = TabulatedSeries(t.times, t.values); }

    Family family_;
    double scale_ = 1.0;
    Polynomial w_unscaled_;
    ExpSum density_;
    std::vector<double> dd_nodes_;  // set when the exponential sum is ill-conditioned
    std::optional<TabulatedSeries> table_;
};

}  // namespace memkernel
