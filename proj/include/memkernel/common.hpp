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
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memkernel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Absolute tolerance used by every linear positivity / normalization test.
/// One process-wide knob; defaults to 1e-10.
inline double &positivity_tolerance() {
    static double tol = 1e-10;
    return tol;
}

/// Reciprocal that maps +inf to 0 (a disabled anisotropy axis).
inline double reciprocal(double a) { return std::isinf(a) ? 0.0 : 1.0 / a; }

struct Margin {
    std::string name;
    double value = 0.0;
};

/// Result of a check. Failure is data: checks never throw on a negative
/// outcome, only on malformed input.
struct Verdict {
    std::string check;
    bool passed = true;
    std::vector<Margin> margins;
    std::optional<double> first_violation_time;
    std::optional<std::size_t> first_violation_index;
    std::vector<std::string> notes;

    double margin(const std::string &name) const {
        for (const auto &m : margins) {
            if (m.name == name) return m.value;
        }
        throw std::out_of_range("Verdict '" + check + "' has no margin named '" + name + "'");
    }

    double min_margin() const {
        double out = kInf;
        for (const auto &m : margins) out = std::min(out, m.value);
        return out;
    }
};

/// Thrown when an integrator detects divergence (|value| above a threshold).
class SolverBlowUp : public std::runtime_error {
   public:
    SolverBlowUp(const std::string &what, double time, int axis)
        : std::runtime_error(what), time_(time), axis_(axis) {}
    double time() const { return time_; }
    int axis() const { return axis_; }

   private:
    double time_;
    int axis_;
};

namespace detail {

template <typename... Args>
std::string cat(const Args &...args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

}  // namespace detail

}  // namespace memkernel
