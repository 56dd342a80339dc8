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

#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "memkernel/common.hpp"
#include "memkernel/polynomial.hpp"

namespace memkernel {

/// One term Re[coeff * t^power * exp(rate * t)]. A complex-conjugate pair of
/// exponentials is stored as a single term with doubled coefficient.
struct ExpTerm {
    cplx coeff{0.0, 0.0};
    cplx rate{0.0, 0.0};
    int power = 0;
};

/// Real function of time given as a finite sum of (polynomial x exponential)
/// terms. Closed under linear combination; its Laplace transform and running
/// integral are exact.
class ExpSum {
   public:
    ExpSum() = default;
    explicit ExpSum(std::vector<ExpTerm> terms) : terms_(std::move(terms)) {}

    const std::vector<ExpTerm> &terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add(const ExpTerm &term) { terms_.push_back(term); }

    double operator()(double t) const {
        double acc = 0.0;
        for (const auto &term : terms_) {
            const cplx e = term.coeff * std::exp(term.rate * t);
            acc += std::real(e) * std::pow(t, term.power);
        }
        return acc;
    }

    /// int_0^t of the sum.
    double integral(double t) const {
        double acc = 0.0;
        for (const auto &term : terms_) acc += std::real(term.coeff * power_exp_integral(term.power, term.rate, t));
        return acc;
    }

    /// Laplace transform; valid for Re s larger than every Re(rate).
    template <typename T>
    T laplace(const T &s) const {
        const cplx z(s);
        cplx acc(0.0, 0.0);
        for (const auto &term : terms_) {
            double fact = 1.0;
            for (int k = 2; k <= term.power; ++k) fact *= k;
            const cplx a = term.coeff * fact / std::pow(z - term.rate, term.power + 1);
            const cplx b = std::conj(term.coeff) * fact / std::pow(z - std::conj(term.rate), term.power + 1);
            acc += 0.5 * (a + b);
        }
        if constexpr (std::is_same_v<T, double>) {
            return acc.real();
        } else {
            return T(acc);
        }
    }

    ExpSum scaled(double c) const {
        ExpSum out = *this;
        for (auto &term : out.terms_) term.coeff *= c;
        return out;
    }

    friend ExpSum operator+(const ExpSum &a, const ExpSum &b) {
        ExpSum out = a;
        out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
        return out;
    }

   private:
    // int_0^t tau^p e^{r tau} d tau by upward recursion.
    static cplx power_exp_integral(int p, cplx r, double t) {
        if (std::abs(r) * std::max(t, 1.0) < 1e-12) return std::pow(t, p + 1) / double(p + 1);
        const cplx ert = std::exp(r * t);
        cplx acc = (ert - 1.0) / r;
        double tp = 1.0;
        for (int k = 1; k <= p; ++k) {
            tp *= t;
            acc = (tp * ert - double(k) * acc) / r;
        }
        return acc;
    }

    std::vector<ExpTerm> terms_;
};

}  // namespace memkernel
