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
#include <cstddef>
#include <stdexcept>

#include "memkernel/common.hpp"

namespace memkernel {

/// Uniform grid t_i = i h, i = 0..n_steps, h = t_max / n_steps.
class TimeGrid {
   public:
    TimeGrid(double t_max, std::size_t n_steps) : t_max_(t_max), n_steps_(n_steps) {
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            throw std::invalid_argument(detail::cat("grid t_max must be positive and finite, got ", t_max));
        if (n_steps < 2) throw std::invalid_argument(detail::cat("grid needs n_steps >= 2, got ", n_steps));
    }

    double t_max() const { return t_max_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t size() const { return n_steps_ + 1; }
    double step() const { return t_max_ / double(n_steps_); }
    double operator[](std::size_t i) const { return i == n_steps_ ? t_max_ : double(i) * step(); }

   private:
    double t_max_;
    std::size_t n_steps_;
};

}  // namespace memkernel
