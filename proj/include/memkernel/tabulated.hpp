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

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "memkernel/common.hpp"

namespace memkernel {

/// Piecewise-linear function through (t_i, v_i), starting at t = 0 and zero
/// after the last sample. Running integral and Laplace transform are exact
/// for the interpolant.
class TabulatedSeries {
   public:
    TabulatedSeries() = default;
    TabulatedSeries(std::vector<double> times, std::vector<double> values)
        : t_(std::move(times)), v_(std::move(values)) {
        if (t_.size() != v_.size()) throw std::invalid_argument("tabulated times/values length mismatch");
        if (t_.size() < 2) throw std::invalid_argument("tabulated function needs at least two samples");
        if (t_.front() != 0.0) throw std::invalid_argument("tabulated samples must start at t = 0");
        for (std::size_t i = 0; i < t_.size(); ++i) {
            if (!std::isfinite(t_[i]) || !std::isfinite(v_[i]))
                throw std::invalid_argument("tabulated samples must be finite");
            if (i > 0 && !(t_[i] > t_[i - 1]))
                throw std::invalid_argument("tabulated sample times must be strictly increasing");
        }
        cumulative_.assign(t_.size(), 0.0);
        for (std::size_t i = 1; i < t_.size(); ++i)
            cumulative_[i] = cumulative_[i - 1] + 0.5 * (v_[i] + v_[i - 1]) * (t_[i] - t_[i - 1]);
    }

    const std::vector<double> &times() const { return t_; }
    const std::vector<double> &values() const { return v_; }
    double t_end() const { return t_.back(); }

    double operator()(double t) const {
        if (t < 0.0 || t > t_.back()) return 0.0;
        const std::size_t i = segment(t);
        const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
        return v_[i] + w * (v_[i + 1] - v_[i]);
    }

    /// int_0^t
    double integral(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= t_.back()) return cumulative_.back();
        const std::size_t i = segment(t);
        return cumulative_[i] + 0.5 * ((*this)(t) + v_[i]) * (t - t_[i]);
    }

    double total_integral() const { return cumulative_.back(); }

    template <typename T>
    T laplace(const T &s) const {
        using C = std::complex<double>;
        const C z(s);
        C acc(0.0, 0.0);
        for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
            const double len = t_[i + 1] - t_[i];
            const double slope = (v_[i + 1] - v_[i]) / len;
            const C x = z * len;
            C e0, e1;  // int_0^L e^{-s u} du, int_0^L u e^{-s u} du
            if (std::abs(x) < 1e-3) {
                e0 = len * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
                e1 = len * len * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
            } else {
                const C emx = std::exp(-x);
                e0 = (1.0 - emx) / z;
                e1 = (e0 - len * emx) / z;
            }
            acc += std::exp(-z * t_[i]) * (v_[i] * e0 + slope * e1);
        }
        if constexpr (std::is_same_v<T, double>) {
            return acc.real();
        } else {
            return T(acc);
        }
    }

   private:
    std::size_t segment(double t) const {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = it == t_.begin() ? 0 : std::size_t(it - t_.begin()) - 1;
        return std::min(i, t_.size() - 2);
    }

    std::vector<double> t_, v_, cumulative_;
};

}  // namespace memkernel
