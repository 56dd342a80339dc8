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

// Subcommands of the memkernel tool. Exit codes:
//   0  ok / admissible
//   1  usage or schema error
//   2  inadmissible kernel
//   3  solver failure or golden-example mismatch

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memkernel/memkernel.hpp"
#include "memkernel/spec_io.hpp"

namespace memkernel::cli {

namespace fs = std::filesystem;

inline constexpr const char *kVersion = "1.0.0";
inline constexpr const char *kOutDirEnv = "MEMKERNEL_OUT_DIR";

enum ExitCode : int { kOk = 0, kUsage = 1, kInadmissible = 2, kSolverFailure = 3 };

struct Options {
    std::string spec_path;
    std::string grid;  // "t_max:n_steps"
    std::string route = "closed";
    std::size_t probes = 512;
    std::uint64_t seed = kDefaultProbeSeed;
    bool force = false;
    std::string out_dir;
    std::string format = "csv";
    int example = 0;
    std::vector<double> num, den, times;
};

struct Context {
    std::ostream &out;
    std::ostream &err;
};

inline fs::path output_dir(const Options &opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char *env = std::getenv(kOutDirEnv); env && *env) return env;
    return "memkernel_out";
}

inline std::pair<double, std::size_t> parse_grid_flag(const std::string &text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw SpecError({"--grid: expected t_max:n_steps, got '" + text + "'"});
    try {
        std::size_t used = 0;
        const double t_max = std::stod(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("t_max");
        const std::string steps = text.substr(colon + 1);
        const long long n = std::stoll(steps, &used);
        if (used != steps.size()) throw std::invalid_argument("n_steps");
        if (!(t_max > 0.0) || !std::isfinite(t_max) || n < 2) throw std::invalid_argument("range");
        return {t_max, std::size_t(n)};
    } catch (const std::exception &) {
        throw SpecError({"--grid: expected t_max > 0 and integer n_steps >= 2, got '" + text + "'"});
    }
}

inline void apply_grid_override(KernelSpecFile &spec, const Options &opt) {
    if (opt.grid.empty()) return;
    std::tie(spec.t_max, spec.n_steps) = parse_grid_flag(opt.grid);
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

inline json report_header(const std::string &command) {
    json r;
    r["tool"] = "memkernel";
    r["version"] = kVersion;
    r["command"] = command;
    return r;
}

inline void finish_report(json &report, std::chrono::steady_clock::time_point start) {
    report["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report["timestamp"] = utc_timestamp();
}

inline std::string spec_stem(const Options &opt) {
    const fs::path p(opt.spec_path);
    return p.stem().empty() ? std::string("spec") : p.stem().string();
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

struct Admissibility {
    Verdict triangle;
    Verdict integral_bound;
    std::optional<PolynomialAdmissibility> polynomial;
    CMVerdict cm;  // on 1/(s W(s)); sufficient for F >= 0, informational
    bool admissible = false;

    json to_json() const {
        json doc;
        doc["admissible"] = admissible;
        json checks = json::array();
        checks.push_back(verdict_json(triangle));
        checks.push_back(verdict_json(integral_bound));
        if (polynomial) {
            checks.push_back(verdict_json(polynomial->admissible));
            checks.push_back(verdict_json(polynomial->blp_zero));
        }
        checks.push_back(cm_verdict_json(cm));
        doc["checks"] = checks;
        return doc;
    }
};

inline std::optional<std::vector<double>> real_roots_of_w(const KernelSpecFile &spec) {
    if (spec.family == "exponential") return std::vector<double>{spec.params.at("z")};
    if (spec.family == "biexponential") return std::vector<double>{spec.params.at("c1"), spec.params.at("c2")};
    if (spec.family == "polynomial") {
        std::vector<double> roots;
        for (std::size_t n = 1; spec.params.count(detail::cat("z", n)); ++n) roots.push_back(spec.params.at(detail::cat("z", n)));
        return roots;
    }
    return std::nullopt;
}

/// Admissible means the triangle inequalities hold and
/// (1/a_1 + 1/a_2 + 1/a_3) F(t) <= 4 with F >= 0. The bound is scanned on the
/// grid; for f >= 0, F is monotone and its limit int f is checked as well.
inline Admissibility assess(const KernelSpecFile &file, const KernelSpec &spec, const TimeGrid &grid) {
    Admissibility out;
    out.triangle = triangle_check(spec.aniso);
    out.integral_bound = integral_bound_check(spec, grid);
    if (spec.waiting.nonnegative()) {
        const double limit = 4.0 - spec.aniso.reciprocal_sum() * spec.waiting.total_integral();
        out.integral_bound.margins.push_back({"bound_limit", limit});
        if (limit < -positivity_tolerance()) {
            out.integral_bound.passed = false;
            out.integral_bound.notes.push_back("bound violated in the limit t -> inf");
        }
    }
    const double scale = file.params.count("scale") ? file.params.at("scale") : 1.0;
    if (auto roots = real_roots_of_w(file); roots && scale == 1.0) {
        out.polynomial = polynomial_admissibility_check(*roots, spec.aniso);
    }
    out.cm = waiting_transform_cm_check(spec.waiting, 1);
    out.admissible = out.triangle.passed && out.integral_bound.passed;
    return out;
}

inline void print_verdict(std::ostream &os, const Verdict &v) {
    os << "  " << std::left << std::setw(20) << v.check << (v.passed ? "pass" : "FAIL");
    for (const auto &m : v.margins) os << "  " << m.name << "=" << m.value;
    if (v.first_violation_time) os << "  first_violation_t=" << *v.first_violation_time;
    os << '\n';
    for (const auto &n : v.notes) os << "    note: " << n << '\n';
}

inline void print_admissibility(std::ostream &os, const Admissibility &adm) {
    print_verdict(os, adm.triangle);
    print_verdict(os, adm.integral_bound);
    if (adm.polynomial) {
        print_verdict(os, adm.polynomial->admissible);
        print_verdict(os, adm.polynomial->blp_zero);
    }
    os << "  " << std::left << std::setw(20) << "cm(1/(sW))" << adm.cm.status() << '\n';
    os << "admissible: " << (adm.admissible ? "yes" : "no") << '\n';
}

// ---------------------------------------------------------------------------
// Trajectory routes
// ---------------------------------------------------------------------------

inline bool all_zero(const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

inline std::array<DeltaPlusRegular, 3> volterra_kernels(const KernelSpecFile &file, const KernelSpec &spec) {
    if (file.family == "tabulated") {
        if (all_zero(file.sample_f)) return {DeltaPlusRegular{0.0, RegularPart(ExpSum{})},
                                              DeltaPlusRegular{0.0, RegularPart(ExpSum{})},
                                              DeltaPlusRegular{0.0, RegularPart(ExpSum{})}};
        throw std::invalid_argument("the volterra route needs a closed-form waiting function; use closed or laplace");
    }
    return kernel_time_domain(spec);
}

inline void fill_F(TrajectorySet &traj, const KernelSpec &spec) {
    traj.F.resize(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) traj.F[i] = spec.waiting.F(traj.grid[i]);
}

struct RouteRun {
    std::string route;
    TrajectorySet trajectory;
    std::optional<LocalRates> rates;
    std::vector<std::string> notes;
};

inline RouteRun run_route(const std::string &route, const KernelSpecFile &file, const KernelSpec &spec,
                          const TimeGrid &grid) {
    if (route == "closed") {
        RouteRun r{route, closed_form_lambdas(spec, grid), std::nullopt, {}};
        if (file.wants("rates")) r.rates = local_rates_from_f(spec, grid);
        return r;
    }
    if (route == "volterra") {
        RouteRun r{route, volterra_solve(volterra_kernels(file, spec), grid), std::nullopt, {}};
        fill_F(r.trajectory, spec);
        if (file.wants("rates")) r.rates = local_rates_from_lambdas(r.trajectory);
        return r;
    }
    LaplaceSolveOptions lopt;
    lopt.talbot_reach = spec.waiting.oscillation_reach();
    if (spec.waiting.is_tabulated()) lopt.method = InversionMethod::gaver_stehfest;
    LaplaceSolveResult res = laplace_domain_solve(kappa_tilde_evaluators(spec), grid, lopt);
    if (!res.failures.empty()) {
        throw SolverBlowUp(detail::cat("laplace inversion produced non-finite values at ", res.failures.size(), " samples"),
                           res.failures.front().t, res.failures.front().axis);
    }
    RouteRun r{route, std::move(res.trajectory), std::nullopt, {}};
    if (res.degraded_samples > 0) {
        r.notes.push_back(detail::cat(res.degraded_samples, " samples flagged degraded by the Stehfest order check"));
    }
    fill_F(r.trajectory, spec);
    if (file.wants("rates")) r.rates = local_rates_from_lambdas(r.trajectory);
    return r;
}

inline fs::path write_trajectory(const fs::path &dir, const std::string &name, const RouteRun &run,
                                 const std::string &format) {
    const LocalRates *rates = run.rates ? &*run.rates : nullptr;
    if (format == "json") {
        const fs::path path = dir / (name + ".json");
        write_file_atomic(path, trajectory_json(run.trajectory, rates).dump(1) + "\n");
        return path;
    }
    const fs::path path = dir / (name + ".csv");
    write_file_atomic(path, trajectory_csv(run.trajectory, rates));
    return path;
}

inline void write_report(const fs::path &path, json &report, std::chrono::steady_clock::time_point start) {
    finish_report(report, start);
    write_file_atomic(path, report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

inline int cmd_validate(const Options &opt, Context ctx) {
    const auto start = std::chrono::steady_clock::now();
    KernelSpecFile file = load_spec(opt.spec_path);
    apply_grid_override(file, opt);
    const KernelSpec spec = file.kernel();
    const TimeGrid grid = file.grid();
    const Admissibility adm = assess(file, spec, grid);
    print_admissibility(ctx.out, adm);

    json report = report_header("validate");
    report["spec"] = file.to_json();
    report["admissibility"] = adm.to_json();
    const fs::path path = output_dir(opt) / (spec_stem(opt) + ".validate.json");
    write_report(path, report, start);
    ctx.out << "report: " << path.string() << '\n';
    return adm.admissible ? kOk : kInadmissible;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline int cmd_simulate(const Options &opt, Context ctx) {
    const auto start = std::chrono::steady_clock::now();
    KernelSpecFile file = load_spec(opt.spec_path);
    apply_grid_override(file, opt);
    const KernelSpec spec = file.kernel();
    const TimeGrid grid = file.grid();
    const Admissibility adm = assess(file, spec, grid);
    const fs::path dir = output_dir(opt);
    const std::string stem = spec_stem(opt);

    json report = report_header("simulate");
    report["spec"] = file.to_json();
    report["admissibility"] = adm.to_json();
    report["route"] = opt.route;
    const fs::path report_path = dir / (stem + ".simulate.json");

    if (!adm.admissible && !opt.force) {
        print_admissibility(ctx.err, adm);
        ctx.err << "kernel is inadmissible; rerun with --force to simulate anyway\n";
        write_report(report_path, report, start);
        return kInadmissible;
    }

    std::vector<std::string> routes{opt.route};
    if (opt.route == "all") routes = {"closed", "volterra", "laplace"};

    std::vector<RouteRun> runs;
    json traj_files = json::array();
    try {
        for (const auto &route : routes) {
            if (route == "volterra" && file.family == "tabulated" && !all_zero(file.sample_f) && opt.route == "all") {
                report["notes"].push_back("volterra route skipped: tabulated waiting function");
                continue;
            }
            runs.push_back(run_route(route, file, spec, grid));
            const fs::path path = write_trajectory(dir, stem + "_" + route, runs.back(), opt.format);
            json entry{{"route", route}, {"path", path.string()}};
            if (!runs.back().notes.empty()) entry["notes"] = runs.back().notes;
            if (file.wants("verdicts")) entry["cptp"] = verdict_json(trajectory_cptp_scan(runs.back().trajectory).verdict);
            traj_files.push_back(entry);
            ctx.out << route << ": " << path.string() << '\n';
        }
    } catch (const SolverBlowUp &e) {
        ctx.err << "solver failure: " << e.what() << '\n';
        report["trajectories"] = traj_files;
        report["solver_failure"] = {{"message", e.what()}, {"t", e.time()}, {"axis", e.axis()}};
        write_report(report_path, report, start);
        return kSolverFailure;
    }
    report["trajectories"] = traj_files;

    if (runs.size() > 1) {
        json pairs = json::object();
        double worst = 0.0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (std::size_t j = i + 1; j < runs.size(); ++j) {
                const double d = max_lambda_difference(runs[i].trajectory, runs[j].trajectory);
                pairs[runs[i].route + "-" + runs[j].route] = d;
                worst = std::max(worst, d);
                ctx.out << "max |lambda difference| " << runs[i].route << " vs " << runs[j].route << ": " << d << '\n';
            }
        }
        report["cross_route"] = {{"max_discrepancy", worst}, {"pairs", pairs}};
    }
    if (!runs.empty() && runs.front().rates) {
        report["masked_rate_samples"] = runs.front().rates->masked_indices.size();
        report["singular_times"] = runs.front().rates->singular_times;
    }
    write_report(report_path, report, start);
    ctx.out << "report: " << report_path.string() << '\n';
    if (!adm.admissible) {
        ctx.err << "warning: simulated an inadmissible kernel (--force)\n";
        return kInadmissible;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

struct Classification {
    CptpScan cptp;
    CPDivisibilityResult cp_divisibility;
    Verdict blp_condition;
    BLPResult blp;

    json to_json() const {
        json doc;
        doc["cptp"] = verdict_json(cptp.verdict);
        doc["cp_divisibility"] = verdict_json(cp_divisibility.verdict);
        doc["cp_divisibility"]["bound"] = nullable(cp_divisibility.bound);
        doc["cp_divisible_until"] =
            cp_divisibility.verdict.first_violation_time ? json(*cp_divisibility.verdict.first_violation_time) : json(nullptr);
        doc["blp_condition"] = verdict_json(blp_condition);
        doc["blp_measure"] = blp.measure;
        doc["blp_axis_measure"] = blp.axis_measure;
        doc["probes"] = blp.probes.size();
        doc["probe_seed"] = blp.seed;
        json growth = json::array();
        for (const auto &g : blp.growth) {
            if (growth.size() >= 8) break;
            json intervals = json::array();
            for (const auto &[a, b] : g.intervals) intervals.push_back({a, b});
            growth.push_back({{"probe", g.probe}, {"direction", g.direction.v}, {"measure", g.measure}, {"intervals", intervals}});
        }
        doc["blp_growth"] = growth;
        return doc;
    }
};

inline Classification classify(const KernelSpec &spec, const TimeGrid &grid, std::size_t probes, std::uint64_t seed) {
    const TrajectorySet traj = closed_form_lambdas(spec, grid);
    return Classification{trajectory_cptp_scan(traj), cp_divisibility_check(spec, grid),
                          blp_condition_check(traj, probes, seed), blp_measure(traj, probes, seed)};
}

inline int cmd_classify(const Options &opt, Context ctx) {
    const auto start = std::chrono::steady_clock::now();
    KernelSpecFile file = load_spec(opt.spec_path);
    apply_grid_override(file, opt);
    const KernelSpec spec = file.kernel();
    const TimeGrid grid = file.grid();
    const Admissibility adm = assess(file, spec, grid);
    const Classification cls = classify(spec, grid, opt.probes, opt.seed);

    const auto &cp = cls.cp_divisibility;
    ctx.out << "CPTP:          " << (cls.cptp.verdict.passed ? "yes" : "no");
    if (cls.cptp.verdict.first_violation_time) ctx.out << " (fails at t=" << *cls.cptp.verdict.first_violation_time << ")";
    ctx.out << '\n';
    ctx.out << "CP-divisible:  ";
    if (cp.verdict.passed) {
        ctx.out << "yes";
    } else {
        ctx.out << "breaks at t=" << *cp.verdict.first_violation_time;
    }
    ctx.out << " (bound " << cp.bound << ")\n";
    ctx.out << "BLP measure:   " << cls.blp.measure << " (P-divisible: " << (cls.blp_condition.passed ? "yes" : "no")
            << ", probes=" << cls.blp.probes.size() << ", seed=" << cls.blp.seed << ")\n";
    for (const auto &n : cp.verdict.notes) ctx.out << "note: " << n << '\n';
    if (!adm.admissible) ctx.out << "warning: kernel is inadmissible\n";

    json report = report_header("classify");
    report["spec"] = file.to_json();
    report["admissibility"] = adm.to_json();
    report["classification"] = cls.to_json();
    const fs::path path = output_dir(opt) / (spec_stem(opt) + ".classify.json");
    write_report(path, report, start);
    ctx.out << "report: " << path.string() << '\n';
    return adm.admissible ? kOk : kInadmissible;
}

// ---------------------------------------------------------------------------
// example
// ---------------------------------------------------------------------------

struct GoldenCheck {
    std::string name;
    double error;
    double tolerance;
    bool passed() const { return error <= tolerance; }
};

struct ExampleRun {
    KernelSpecFile spec;
    std::vector<RouteRun> runs;
    std::vector<GoldenCheck> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const GoldenCheck &c) { return c.passed(); });
    }
};

inline KernelSpecFile example_spec(int n) {
    json doc;
    switch (n) {
        case 1:
            doc = {{"family", "exponential"}, {"params", {{"z", 1.0}}}, {"a", {1.0, 1.0, 1.0}}};
            break;
        case 2:  // kappa_1,2 = -c delta + c^2 e^{-ct}, kappa_3 = -2c delta with c = 1
            doc = {{"family", "exponential"}, {"params", {{"z", 2.0}}}, {"a", {1.0, 1.0, 0.5}}};
            break;
        case 3:
            doc = {{"family", "biexponential"}, {"params", {{"c1", 1.0}, {"c2", 2.0}}}, {"a", {1.0, 1.0, 1.0}}};
            break;
        case 4:
            doc = {{"family", "sinusoidal"}, {"params", {{"omega", 1.0}}}, {"a", {1.0, 1.0, "inf"}}};
            break;
        default:
            throw SpecError({detail::cat("example: expected 1..4, got ", n)});
    }
    return parse_spec(doc);
}

template <typename Fn>
double max_abs_error(const TimeGrid &grid, const std::vector<double> &values, Fn &&exact) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(values[i] - exact(grid[i])));
    return worst;
}

template <typename Fn>
double max_abs_error_unmasked(const TimeGrid &grid, const std::vector<double> &values, Fn &&exact) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isnan(values[i])) worst = std::max(worst, std::abs(values[i] - exact(grid[i])));
    }
    return worst;
}

/// Regenerates one of the four worked examples and compares against the
/// printed closed forms (1e-6) and the numerical routes (1e-4).
inline ExampleRun run_example(int n, const std::optional<std::pair<double, std::size_t>> &grid_override = {}) {
    ExampleRun ex{example_spec(n), {}, {}};
    if (grid_override) std::tie(ex.spec.t_max, ex.spec.n_steps) = *grid_override;
    const KernelSpec spec = ex.spec.kernel();
    const TimeGrid grid = ex.spec.grid();
    RouteRun closed = run_route("closed", ex.spec, spec, grid);
    const TrajectorySet &c = closed.trajectory;
    const double golden = 1e-6, route_tol = 1e-4;
    auto add = [&ex](std::string name, double err, double tol) { ex.checks.push_back({std::move(name), err, tol}); };

    switch (n) {
        case 1: {
            const double z = 1.0, a = 1.0;
            auto lam = [&](double t) { return 1.0 - (1.0 - std::exp(-z * t)) / (z * a); };
            for (std::size_t k = 1; k < 4; ++k) add(detail::cat("lambda", k, " closed form"), max_abs_error(grid, c.lambda[k], lam), golden);
            add("p0 closed form", max_abs_error(grid, c.p[0], [&](double t) { return 1.0 - 0.75 * (1.0 - std::exp(-z * t)) / (z * a); }), golden);
            add("p0 asymptote 1 - 3/(4za)", std::abs(c.p[0].back() - (1.0 - 0.75 / (z * a))), std::max(golden, std::exp(-z * grid.t_max())));
            break;
        }
        case 2: {
            const double cc = 1.0;
            auto l12 = [&](double t) { return 0.5 * (1.0 + std::exp(-2.0 * cc * t)); };
            auto l3 = [&](double t) { return std::exp(-2.0 * cc * t); };
            add("lambda1 closed form", max_abs_error(grid, c.lambda[1], l12), golden);
            add("lambda2 closed form", max_abs_error(grid, c.lambda[2], l12), golden);
            add("lambda3 closed form", max_abs_error(grid, c.lambda[3], l3), golden);
            add("gamma1 = c/2", max_abs_error_unmasked(grid, closed.rates->gamma[0], [&](double) { return 0.5 * cc; }), golden);
            add("gamma2 = c/2", max_abs_error_unmasked(grid, closed.rates->gamma[1], [&](double) { return 0.5 * cc; }), golden);
            add("gamma3 = -(c/2) tanh(ct)", max_abs_error_unmasked(grid, closed.rates->gamma[2], [&](double t) { return -0.5 * cc * std::tanh(cc * t); }), golden);
            add("semigroup mixture", max_lambda_difference(c, convex_semigroup_mixture(cc, grid)), golden);

            // Volterra with the kernels written out directly.
            const DeltaPlusRegular k12{-cc, RegularPart(ExpSum({{cplx(cc * cc, 0.0), cplx(-cc, 0.0), 0}}))};
            const DeltaPlusRegular k3{-2.0 * cc, RegularPart(ExpSum{})};
            RouteRun v{"volterra", volterra_solve({k12, k12, k3}, grid), std::nullopt, {}};
            fill_F(v.trajectory, spec);
            v.rates = local_rates_from_lambdas(v.trajectory);
            add("volterra vs closed form", max_lambda_difference(c, v.trajectory), route_tol);
            add("gamma3 from volterra", max_abs_error_unmasked(grid, v.rates->gamma[2], [&](double t) { return -0.5 * cc * std::tanh(cc * t); }), 1e-3);
            ex.runs.push_back(std::move(closed));
            ex.runs.push_back(std::move(v));
            return ex;
        }
        case 3: {
            const double c1 = 1.0, c2 = 2.0, a = 1.0;
            auto F = [&](double t) { return ((1.0 - std::exp(-c1 * t)) / c1 - (1.0 - std::exp(-c2 * t)) / c2) / (c2 - c1); };
            for (std::size_t k = 1; k < 4; ++k)
                add(detail::cat("lambda", k, " closed form"), max_abs_error(grid, c.lambda[k], [&](double t) { return 1.0 - F(t) / a; }), golden);
            add("F closed form", max_abs_error(grid, c.F, F), golden);
            add("CPTP scan", trajectory_cptp_scan(c).verdict.passed ? 0.0 : 1.0, 0.0);
            break;
        }
        case 4: {
            const double w = 1.0;
            const std::array<double, 3> a{1.0, 1.0, kInf};
            for (std::size_t k = 1; k < 4; ++k) {
                add(detail::cat("lambda", k, " closed form"),
                    max_abs_error(grid, c.lambda[k], [&](double t) { return 1.0 + (std::cos(w * t) - 1.0) * reciprocal(a[k - 1]) / (w * w); }), golden);
            }
            add("p3 = (1 - cos wt)/2", max_abs_error(grid, c.p[3], [&](double t) { return 0.5 * (1.0 - std::cos(w * t)); }), golden);
            add("p0 = (1 + cos wt)/2", max_abs_error(grid, c.p[0], [&](double t) { return 0.5 * (1.0 + std::cos(w * t)); }), golden);
            add("singular rates masked", closed.rates->masked_indices.empty() ? 1.0 : 0.0, 0.0);
            break;
        }
    }
    RouteRun v = run_route("volterra", ex.spec, spec, grid);
    add("volterra vs closed form", max_lambda_difference(c, v.trajectory), route_tol);
    ex.runs.push_back(std::move(closed));
    ex.runs.push_back(std::move(v));
    return ex;
}

inline int cmd_example(const Options &opt, Context ctx) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<std::pair<double, std::size_t>> grid;
    if (!opt.grid.empty()) grid = parse_grid_flag(opt.grid);
    ExampleRun ex;
    try {
        ex = run_example(opt.example, grid);
    } catch (const SolverBlowUp &e) {
        ctx.err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    }
    const fs::path dir = output_dir(opt);
    const std::string stem = detail::cat("example", opt.example);
    json report = report_header("example");
    report["example"] = opt.example;
    report["spec"] = ex.spec.to_json();
    json files = json::array();
    for (const auto &run : ex.runs) {
        const fs::path path = write_trajectory(dir, stem + "_" + run.route, run, opt.format);
        files.push_back({{"route", run.route}, {"path", path.string()}});
    }
    report["trajectories"] = files;
    json checks = json::array();
    for (const auto &c : ex.checks) {
        ctx.out << (c.passed() ? "PASS " : "FAIL ") << c.name << "  error=" << c.error << "  tol=" << c.tolerance << '\n';
        checks.push_back({{"name", c.name}, {"error", c.error}, {"tolerance", c.tolerance}, {"passed", c.passed()}});
    }
    report["golden_checks"] = checks;
    report["passed"] = ex.passed();
    const fs::path path = dir / (stem + ".example.json");
    write_report(path, report, start);
    ctx.out << "report: " << path.string() << '\n';
    return ex.passed() ? kOk : kSolverFailure;
}

// ---------------------------------------------------------------------------
// invlaplace
// ---------------------------------------------------------------------------

/// Coefficients given highest power first.
inline Polynomial polynomial_from_descending(const std::vector<double> &desc, const std::string &flag) {
    if (desc.empty()) throw SpecError({flag + ": needs at least one coefficient"});
    for (double c : desc) {
        if (!std::isfinite(c)) throw SpecError({flag + ": coefficients must be finite"});
    }
    std::vector<double> asc(desc.rbegin(), desc.rend());
    while (asc.size() > 1 && asc.back() == 0.0) asc.pop_back();
    return Polynomial(asc);
}

inline int cmd_invlaplace(const Options &opt, Context ctx) {
    const Polynomial num = polynomial_from_descending(opt.num, "--num");
    const Polynomial den = polynomial_from_descending(opt.den, "--den");
    if (den.is_zero() || den.degree() == 0) throw SpecError({"--den: denominator must have degree >= 1"});
    if (!num.is_zero() && num.degree() >= den.degree()) {
        throw SpecError({"--num: numerator degree must be below the denominator degree"});
    }
    if (opt.times.empty()) throw SpecError({"--t: at least one time is required"});

    const PartialFractionExpansion pfe = partial_fraction_decompose(num, den);
    const ExpSum exact = pfe.time_domain();
    const RealFunction transform = [&num, &den](double s) { return num(s) / den(s); };

    json doc;
    json samples = json::array();
    for (double t : opt.times) {
        json row{{"t", t}, {"partial_fraction", exact(t)}};
        if (t > 0.0) {
            const InversionResult r = inverse_laplace_checked(transform, t);
            row["stehfest"] = r.value;
            row["degraded"] = r.degraded;
        }
        samples.push_back(row);
    }
    doc["samples"] = samples;
    json poles = json::array();
    for (const auto &p : pfe.poles) {
        json res = json::array();
        for (const auto &r : p.residues) res.push_back({r.real(), r.imag()});
        poles.push_back({{"location", {p.location.real(), p.location.imag()}}, {"multiplicity", p.multiplicity}, {"residues", res}});
    }
    doc["poles"] = poles;
    doc["recombination_error"] = pfe.recombination_error;

    if (opt.format == "json") {
        ctx.out << doc.dump(2) << '\n';
        return kOk;
    }
    ctx.out << std::setprecision(12);
    for (const auto &row : samples) {
        ctx.out << "t=" << row["t"].get<double>() << "  partial_fraction=" << row["partial_fraction"].get<double>();
        if (row.contains("stehfest")) {
            ctx.out << "  stehfest=" << row["stehfest"].get<double>() << (row["degraded"].get<bool>() ? "  (degraded)" : "");
        }
        ctx.out << '\n';
    }
    ctx.out << "partial fractions (recombination error " << pfe.recombination_error << "):\n";
    for (const auto &p : pfe.poles) {
        ctx.out << "  pole " << p.location.real() << (p.location.imag() < 0 ? "-" : "+") << std::abs(p.location.imag())
                << "i  multiplicity " << p.multiplicity << "  residues";
        for (const auto &r : p.residues) ctx.out << " (" << r.real() + 0.0 << "," << r.imag() + 0.0 << ")";
        ctx.out << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    CLI::App app{"memkernel: Pauli-channel memory kernels, admissibility and non-Markovianity"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App *sub) {
        sub->add_option("--grid", opt.grid, "Override the spec grid as t_max:n_steps");
        sub->add_option("--out", opt.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or ./memkernel_out)");
    };
    auto add_spec = [&opt](CLI::App *sub) { sub->add_option("spec", opt.spec_path, "Kernel spec file (JSON)")->required(); };

    CLI::App *validate = app.add_subcommand("validate", "Check the admissibility conditions of a kernel spec");
    add_spec(validate);
    add_common(validate);

    CLI::App *simulate = app.add_subcommand("simulate", "Compute eigenvalue and probability trajectories");
    add_spec(simulate);
    add_common(simulate);
    simulate->add_option("--route", opt.route, "Solver route")->check(CLI::IsMember({"closed", "volterra", "laplace", "all"}));
    simulate->add_flag("--force", opt.force, "Simulate even if the kernel is inadmissible");
    simulate->add_option("--format", opt.format, "Trajectory file format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App *classify_cmd = app.add_subcommand("classify", "CPTP, CP-divisibility and BLP classification");
    add_spec(classify_cmd);
    add_common(classify_cmd);
    classify_cmd->add_option("--probes", opt.probes, "Number of BLP probe directions")->check(CLI::PositiveNumber);
    classify_cmd->add_option("--seed", opt.seed, "Probe seed");

    CLI::App *example = app.add_subcommand("example", "Regenerate a worked example (1-4) and check it");
    example->add_option("n", opt.example, "Example number")->required()->check(CLI::Range(1, 4));
    add_common(example);
    example->add_option("--format", opt.format, "Trajectory file format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App *inv = app.add_subcommand("invlaplace", "Invert a rational transform num(s)/den(s)");
    inv->add_option("--num", opt.num, "Numerator coefficients, highest power first")->required()->delimiter(',');
    inv->add_option("--den", opt.den, "Denominator coefficients, highest power first")->required()->delimiter(',');
    inv->add_option("--t", opt.times, "Evaluation times")->required()->delimiter(',');
    inv->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const Context ctx{out, err};
    try {
        if (*validate) return cmd_validate(opt, ctx);
        if (*simulate) return cmd_simulate(opt, ctx);
        if (*classify_cmd) return cmd_classify(opt, ctx);
        if (*example) return cmd_example(opt, ctx);
        if (*inv) return cmd_invlaplace(opt, ctx);
    } catch (const SpecError &e) {
        for (const auto &issue : e.issues()) err << "error: " << issue << '\n';
        return kUsage;
    } catch (const SolverBlowUp &e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace memkernel::cli
