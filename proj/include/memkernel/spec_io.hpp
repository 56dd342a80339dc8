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

// Kernel-spec files, trajectory CSV/JSON and verdict serialization.
//
// A spec file is a JSON object:
//
//   {
//     "family":  "exponential" | "biexponential" | "sinusoidal" | "polynomial" | "tabulated",
//     "params":  {"z": 1.0}                 exponential
//                {"c1": 1.0, "c2": 2.0}     biexponential
//                {"omega": 1.0}             sinusoidal
//                {"z1": 1.0, "z2": 3.0}     polynomial, roots z1..zn
//                {}                         tabulated
//                every family also accepts an optional "scale"
//     "a":       [1.0, 1.0, "inf"],
//     "grid":    {"t_max": 20.0, "n_steps": 20000},          optional
//     "outputs": ["lambdas", "probs", "rates", "verdicts"],  optional
//     "samples": {"t": [...], "f": [...]}                    tabulated only
//   }

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "memkernel/common.hpp"
#include "memkernel/evolution_solver.hpp"
#include "memkernel/kernel_families.hpp"
#include "memkernel/laplace_tools.hpp"
#include "memkernel/markovianity.hpp"
#include "memkernel/time_grid.hpp"

namespace memkernel {

using json = nlohmann::ordered_json;

inline constexpr double kDefaultTMax = 20.0;
inline constexpr std::size_t kDefaultSteps = 20000;

/// Schema violation; what() joins the field-level messages.
class SpecError : public std::runtime_error {
   public:
    explicit SpecError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string> &issues() const { return issues_; }

   private:
    static std::string join(const std::vector<std::string> &issues) {
        std::string out;
        for (const auto &m : issues) out += (out.empty() ? "" : "\n") + m;
        return out;
    }
    std::vector<std::string> issues_;
};

struct KernelSpecFile {
    std::string family;
    std::map<std::string, double> params;
    std::array<double, 3> a{};
    double t_max = kDefaultTMax;
    std::size_t n_steps = kDefaultSteps;
    std::set<std::string> outputs{"lambdas", "probs", "rates", "verdicts"};
    std::vector<double> sample_t, sample_f;

    bool wants(const std::string &what) const { return outputs.count(what) > 0; }
    TimeGrid grid() const { return TimeGrid(t_max, n_steps); }
    KernelSpec kernel() const;
    json to_json() const;
};

namespace detail {

inline json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

inline std::optional<double> read_number(const json &v, bool allow_inf) {
    if (v.is_number()) return v.get<double>();
    if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return kInf;
    return std::nullopt;
}

inline std::vector<double> read_number_array(const json &v, const std::string &field,
                                             std::vector<std::string> &issues) {
    std::vector<double> out;
    if (!v.is_array()) {
        issues.push_back(field + ": expected an array of numbers");
        return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto x = read_number(v[i], false);
        if (!x) {
            issues.push_back(cat(field, "[", i, "]: expected a number"));
        } else {
            out.push_back(*x);
        }
    }
    return out;
}

inline const std::map<std::string, std::vector<std::string>> &family_params() {
    static const std::map<std::string, std::vector<std::string>> table{
        {"exponential", {"z"}}, {"biexponential", {"c1", "c2"}}, {"sinusoidal", {"omega"}},
        {"polynomial", {}},     {"tabulated", {}}};
    return table;
}

}  // namespace detail

/// Parses and schema-validates a spec document. Unknown keys are rejected and
/// every problem found is reported, not just the first.
inline KernelSpecFile parse_spec(const json &doc) {
    std::vector<std::string> issues;
    KernelSpecFile spec;
    if (!doc.is_object()) throw SpecError({"spec: top level must be an object"});

    static const std::set<std::string> known{"family", "params", "a", "grid", "outputs", "samples"};
    for (const auto &[key, _] : doc.items()) {
        if (!known.count(key)) issues.push_back("spec: unknown key '" + key + "'");
    }

    if (!doc.contains("family") || !doc["family"].is_string()) {
        issues.push_back("family: required string");
    } else {
        spec.family = doc["family"].get<std::string>();
        if (!detail::family_params().count(spec.family)) {
            issues.push_back("family: unknown family '" + spec.family +
                             "' (exponential, biexponential, sinusoidal, polynomial, tabulated)");
        }
    }

    if (doc.contains("params")) {
        const json &p = doc["params"];
        if (!p.is_object()) {
            issues.push_back("params: expected an object of name -> number");
        } else {
            for (const auto &[key, v] : p.items()) {
                auto x = detail::read_number(v, false);
                if (!x) {
                    issues.push_back("params." + key + ": expected a number");
                } else {
                    spec.params[key] = *x;
                }
            }
        }
    }
    if (auto it = detail::family_params().find(spec.family); it != detail::family_params().end()) {
        std::set<std::string> allowed(it->second.begin(), it->second.end());
        allowed.insert("scale");
        for (const auto &name : it->second) {
            if (!spec.params.count(name)) issues.push_back("params." + name + ": required for family " + spec.family);
        }
        if (spec.family == "polynomial") {
            std::size_t n = 0;
            while (spec.params.count(detail::cat("z", n + 1))) allowed.insert(detail::cat("z", ++n));
            if (n == 0) issues.push_back("params.z1: polynomial family needs roots z1, z2, ...");
        }
        for (const auto &[key, _] : spec.params) {
            if (!allowed.count(key)) issues.push_back("params." + key + ": not a parameter of family " + spec.family);
        }
    }

    if (!doc.contains("a")) {
        issues.push_back("a: required array of 3 entries (number or \"inf\")");
    } else if (!doc["a"].is_array() || doc["a"].size() != 3) {
        issues.push_back("a: expected an array of exactly 3 entries");
    } else {
        for (std::size_t k = 0; k < 3; ++k) {
            auto x = detail::read_number(doc["a"][k], true);
            if (!x) {
                issues.push_back(detail::cat("a[", k, "]: expected a number or \"inf\""));
            } else if (!(*x > 0.0)) {
                issues.push_back(detail::cat("a[", k, "]: must be > 0, got ", *x));
            } else {
                spec.a[k] = *x;
            }
        }
    }

    if (doc.contains("grid")) {
        const json &g = doc["grid"];
        if (!g.is_object()) {
            issues.push_back("grid: expected {\"t_max\": number, \"n_steps\": integer}");
        } else {
            for (const auto &[key, _] : g.items()) {
                if (key != "t_max" && key != "n_steps") issues.push_back("grid: unknown key '" + key + "'");
            }
            if (g.contains("t_max")) {
                auto x = detail::read_number(g["t_max"], false);
                if (!x || !(*x > 0.0) || !std::isfinite(*x)) {
                    issues.push_back("grid.t_max: expected a positive number");
                } else {
                    spec.t_max = *x;
                }
            }
            if (g.contains("n_steps")) {
                const json &n = g["n_steps"];
                if (!n.is_number_integer() || n.get<long long>() < 2) {
                    issues.push_back("grid.n_steps: expected an integer >= 2");
                } else {
                    spec.n_steps = n.get<std::size_t>();
                }
            }
        }
    }

    if (doc.contains("outputs")) {
        static const std::set<std::string> allowed{"lambdas", "probs", "rates", "verdicts"};
        const json &o = doc["outputs"];
        if (!o.is_array()) {
            issues.push_back("outputs: expected an array of strings");
        } else {
            spec.outputs.clear();
            for (std::size_t i = 0; i < o.size(); ++i) {
                if (!o[i].is_string() || !allowed.count(o[i].get<std::string>())) {
                    issues.push_back(detail::cat("outputs[", i, "]: expected one of lambdas, probs, rates, verdicts"));
                } else {
                    spec.outputs.insert(o[i].get<std::string>());
                }
            }
        }
    }

    const bool tabulated = spec.family == "tabulated";
    if (doc.contains("samples")) {
        const json &s = doc["samples"];
        if (!tabulated) {
            issues.push_back("samples: only valid for family tabulated");
        } else if (!s.is_object() || !s.contains("t") || !s.contains("f") || s.size() != 2) {
            issues.push_back("samples: expected {\"t\": [...], \"f\": [...]}");
        } else {
            spec.sample_t = detail::read_number_array(s["t"], "samples.t", issues);
            spec.sample_f = detail::read_number_array(s["f"], "samples.f", issues);
            if (spec.sample_t.size() != spec.sample_f.size()) issues.push_back("samples: t and f lengths differ");
        }
    } else if (tabulated) {
        issues.push_back("samples: required for family tabulated");
    }

    if (issues.empty()) {
        // Construct once so that family-level parameter ranges surface as schema errors.
        try {
            (void)spec.kernel();
        } catch (const std::invalid_argument &e) {
            issues.push_back(std::string("params: ") + e.what());
        }
    }
    if (!issues.empty()) throw SpecError(std::move(issues));
    return spec;
}

inline KernelSpecFile load_spec(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw SpecError({"spec: cannot read " + path.string()});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw SpecError({std::string("spec: malformed JSON: ") + e.what()});
    }
    return parse_spec(doc);
}

inline KernelSpec KernelSpecFile::kernel() const {
    const double scale = params.count("scale") ? params.at("scale") : 1.0;
    auto waiting = [&]() {
        if (family == "exponential") return WaitingFunction::exponential(params.at("z"), scale);
        if (family == "biexponential") return WaitingFunction::biexponential(params.at("c1"), params.at("c2"), scale);
        if (family == "sinusoidal") return WaitingFunction::sinusoidal(params.at("omega"), scale);
        if (family == "polynomial") {
            std::vector<double> roots;
            for (std::size_t n = 1; params.count(detail::cat("z", n)); ++n) roots.push_back(params.at(detail::cat("z", n)));
            return WaitingFunction::polynomial(roots, scale);
        }
        return WaitingFunction::tabulated(sample_t, sample_f, scale);
    }();
    return KernelSpec{std::move(waiting), AnisotropyParameters(a[0], a[1], a[2])};
}

inline json KernelSpecFile::to_json() const {
    json doc;
    doc["family"] = family;
    doc["params"] = json::object();
    for (const auto &[k, v] : params) doc["params"][k] = v;
    doc["a"] = json::array({detail::number_or_inf(a[0]), detail::number_or_inf(a[1]), detail::number_or_inf(a[2])});
    doc["grid"] = {{"t_max", t_max}, {"n_steps", n_steps}};
    doc["outputs"] = json(std::vector<std::string>(outputs.begin(), outputs.end()));
    if (family == "tabulated") doc["samples"] = {{"t", sample_t}, {"f", sample_f}};
    return doc;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

/// Fixed column order: t, lambda1..3, p0..p3, F, then gamma1..3 when given
/// (masked samples are empty cells).
inline std::string trajectory_csv(const TrajectorySet &traj, const LocalRates *rates = nullptr) {
    std::ostringstream out;
    out << "t,lambda1,lambda2,lambda3,p0,p1,p2,p3,F";
    if (rates) out << ",gamma1,gamma2,gamma3";
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj.grid[i]);
        for (std::size_t k = 1; k < 4; ++k) out << ',' << format_double(traj.lambda[k][i]);
        for (std::size_t k = 0; k < 4; ++k) out << ',' << format_double(traj.p[k][i]);
        out << ',' << format_double(traj.F.empty() ? kNaN : traj.F[i]);
        if (rates) {
            for (std::size_t k = 0; k < 3; ++k) out << ',' << format_double(rates->gamma[k][i]);
        }
        out << '\n';
    }
    return out.str();
}

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json trajectory_json(const TrajectorySet &traj, const LocalRates *rates = nullptr) {
    json doc;
    doc["provenance"] = traj.provenance;
    std::vector<double> t(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) t[i] = traj.grid[i];
    doc["t"] = t;
    for (std::size_t k = 1; k < 4; ++k) doc[detail::cat("lambda", k)] = traj.lambda[k];
    for (std::size_t k = 0; k < 4; ++k) doc[detail::cat("p", k)] = traj.p[k];
    if (!traj.F.empty()) doc["F"] = traj.F;
    if (rates) {
        for (std::size_t k = 0; k < 3; ++k) {
            json col = json::array();
            for (double g : rates->gamma[k]) col.push_back(nullable(g));
            doc[detail::cat("gamma", k + 1)] = col;
        }
    }
    return doc;
}

inline json verdict_json(const Verdict &v) {
    json doc;
    doc["check"] = v.check;
    doc["passed"] = v.passed;
    json margins = json::object();
    for (const auto &m : v.margins) margins[m.name] = nullable(m.value);
    doc["margins"] = margins;
    doc["first_violation_time"] = v.first_violation_time ? json(*v.first_violation_time) : json(nullptr);
    doc["notes"] = v.notes;
    return doc;
}

inline json cm_verdict_json(const CMVerdict &v) {
    json doc;
    doc["check"] = "cm";
    doc["passed"] = v.passed;
    doc["status"] = v.status();
    doc["orders_tested"] = v.orders_tested;
    doc["tolerance"] = v.tolerance;
    if (v.violation) {
        doc["violation"] = {{"order", v.violation->order}, {"s", v.violation->s}, {"value", v.violation->value}};
    }
    return doc;
}

/// Whole-file atomic write: the content lands in a sibling temporary file
/// which is then renamed over the target.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace memkernel
