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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "memkernel/cli.hpp"

namespace mk = memkernel;
namespace fs = std::filesystem;
using mk::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

fs::path specs_dir() {
    if (const char *env = std::getenv("MEMKERNEL_SPECS_DIR"); env && *env) return env;
    return fs::path(__FILE__).parent_path().parent_path() / "specs";
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("memkernel_cli_" + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(std::vector<std::string> args, bool with_out = true) {
        args.insert(args.begin(), "memkernel");
        if (with_out && args.size() > 1 && args[1] != "invlaplace") {
            args.push_back("--out");
            args.push_back(out_dir().string());
        }
        std::vector<const char *> argv;
        for (const auto &a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = mk::cli::run(int(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

    fs::path write_spec(const std::string &name, const std::string &text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path out_dir() const { return dir_ / "out"; }

    static std::string read(const fs::path &p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
        std::vector<std::vector<std::string>> rows;
        std::ifstream in(p);
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (!line.empty() && line.back() == ',') cells.emplace_back();
            rows.push_back(cells);
        }
        return rows;
    }

    fs::path dir_;
};

std::string spec_path(const std::string &name) { return (specs_dir() / name).string(); }

}  // namespace

TEST_F(CliTest, ValidateExitCodes) {
    EXPECT_EQ(run({"validate", spec_path("example1.json")}).code, mk::cli::kOk);
    const Result bound = run({"validate", spec_path("exponential_bound_violation.json")});
    EXPECT_EQ(bound.code, mk::cli::kInadmissible);
    EXPECT_NE(bound.out.find("integral_bound"), std::string::npos);
    const Result tri = run({"validate", spec_path("triangle_violation.json")});
    EXPECT_EQ(tri.code, mk::cli::kInadmissible);
    EXPECT_NE(tri.out.find("triangle"), std::string::npos);
    EXPECT_TRUE(fs::exists(out_dir() / "example1.validate.json"));

    const json report = json::parse(read(out_dir() / "example1.validate.json"));
    EXPECT_EQ(report["command"], "validate");
    EXPECT_TRUE(report.contains("admissibility"));
    EXPECT_TRUE(report.contains("version"));
    EXPECT_TRUE(report.contains("wall_time_seconds"));
}

TEST_F(CliTest, SchemaErrorsAreUsageErrors) {
    const auto unknown = write_spec("unknown.json", R"({"family":"exponential","params":{"z":1},"a":[1,1,1],"colour":1})");
    const Result r = run({"validate", unknown.string()});
    EXPECT_EQ(r.code, mk::cli::kUsage);
    EXPECT_NE(r.err.find("colour"), std::string::npos);

    const auto missing = write_spec("missing.json", R"({"family":"exponential","params":{},"a":[1,1,1]})");
    const Result m = run({"validate", missing.string()});
    EXPECT_EQ(m.code, mk::cli::kUsage);
    EXPECT_NE(m.err.find("z"), std::string::npos);

    const auto bad_a = write_spec("bad_a.json", R"({"family":"exponential","params":{"z":1},"a":[1,"infinity",-1]})");
    const Result b = run({"validate", bad_a.string()});
    EXPECT_EQ(b.code, mk::cli::kUsage);

    const auto broken = write_spec("broken.json", "{ not json");
    EXPECT_EQ(run({"validate", broken.string()}).code, mk::cli::kUsage);
    EXPECT_EQ(run({"validate", (dir_ / "absent.json").string()}).code, mk::cli::kUsage);
    EXPECT_EQ(run({"simulate", spec_path("example1.json"), "--route", "sideways"}).code, mk::cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}, false).code, mk::cli::kUsage);
}

TEST_F(CliTest, SimulateExampleOneAllRoutes) {
    const Result r = run({"simulate", spec_path("example1.json"), "--route", "all"});
    ASSERT_EQ(r.code, mk::cli::kOk) << r.err;
    const json report = json::parse(read(out_dir() / "example1.simulate.json"));
    EXPECT_LE(report["cross_route"]["max_discrepancy"].get<double>(), 1e-4);
    EXPECT_EQ(report["trajectories"].size(), 3u);

    const auto rows = read_csv(out_dir() / "example1_closed.csv");
    ASSERT_EQ(rows.size(), 20002u);
    const std::vector<std::string> header{"t", "lambda1", "lambda2", "lambda3", "p0", "p1",
                                          "p2", "p3", "F", "gamma1", "gamma2", "gamma3"};
    EXPECT_EQ(rows[0], header);
    // numbers round-trip from the CSV
    const double t = std::stod(rows[1001][0]), l1 = std::stod(rows[1001][1]);
    EXPECT_NEAR(l1, 1.0 - (1.0 - std::exp(-t)), 1e-15);
}

TEST_F(CliTest, SimulateZeroWaitingFunctionGivesConstantColumns) {
    const Result r = run({"simulate", spec_path("tabulated_zero.json"), "--route", "all"});
    ASSERT_EQ(r.code, mk::cli::kOk) << r.err;
    for (const char *route : {"closed", "volterra", "laplace"}) {
        const auto rows = read_csv(out_dir() / (std::string("tabulated_zero_") + route + ".csv"));
        ASSERT_EQ(rows.size(), 52u) << route;
        const double tol = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            for (int c = 1; c <= 3; ++c) EXPECT_NEAR(std::stod(rows[i][std::size_t(c)]), 1.0, tol) << route;
            EXPECT_NEAR(std::stod(rows[i][4]), 1.0, tol) << route;
            for (int c = 5; c <= 7; ++c) EXPECT_NEAR(std::stod(rows[i][std::size_t(c)]), 0.0, tol) << route;
        }
    }
}

TEST_F(CliTest, SimulateOscillatorySpecMasksSingularRates) {
    const Result r = run({"simulate", spec_path("example4.json")});
    ASSERT_EQ(r.code, mk::cli::kOk) << r.err;
    auto masked_rows = [](const std::vector<std::vector<std::string>> &rows) {
        std::size_t n = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() == 12 && rows[i][9].empty()) ++n;
        }
        return n;
    };
    EXPECT_GT(masked_rows(read_csv(out_dir() / "example4_closed.csv")), 0u);

    // a_1 w^2 < 1 is inadmissible; --force still writes the trajectory and exits 2
    const auto forced = write_spec(
        "strong.json", R"({"family":"sinusoidal","params":{"omega":1},"a":[0.8,0.8,"inf"],"grid":{"t_max":10,"n_steps":1000}})");
    EXPECT_EQ(run({"simulate", forced.string()}).code, mk::cli::kInadmissible);
    EXPECT_FALSE(fs::exists(out_dir() / "strong_closed.csv"));
    const Result f = run({"simulate", forced.string(), "--force"});
    EXPECT_EQ(f.code, mk::cli::kInadmissible);
    EXPECT_GT(masked_rows(read_csv(out_dir() / "strong_closed.csv")), 0u);
}

TEST_F(CliTest, SimulateBlowUpExitsThree) {
    // a W - 1 = 0.1 (s + 1) - 1 has a root at s = 9: the kernel grows like e^{9t}
    const auto spec = write_spec(
        "blowup.json", R"({"family":"exponential","params":{"z":1},"a":[0.1,0.1,0.1],"grid":{"t_max":20,"n_steps":2000}})");
    const Result r = run({"simulate", spec.string(), "--route", "volterra", "--force"});
    EXPECT_EQ(r.code, mk::cli::kSolverFailure);
    EXPECT_NE(r.err.find("solver failure"), std::string::npos);
    const json report = json::parse(read(out_dir() / "blowup.simulate.json"));
    EXPECT_TRUE(report.contains("solver_failure"));
}

TEST_F(CliTest, SimulateJsonFormat) {
    ASSERT_EQ(run({"simulate", spec_path("example3.json"), "--grid", "5:50", "--format", "json"}).code, mk::cli::kOk);
    const json traj = json::parse(read(out_dir() / "example3_closed.json"));
    EXPECT_EQ(traj["t"].size(), 51u);
}

TEST_F(CliTest, ClassifyCases) {
    const Result ex1 = run({"classify", spec_path("example1.json"), "--probes", "64"});
    ASSERT_EQ(ex1.code, mk::cli::kOk) << ex1.err;
    const json r1 = json::parse(read(out_dir() / "example1.classify.json"))["classification"];
    EXPECT_TRUE(r1["cptp"]["passed"].get<bool>());
    EXPECT_EQ(r1["blp_measure"].get<double>(), 0.0);

    const Result osc = run({"classify", spec_path("oscillating_isotropic.json"), "--probes", "64"});
    ASSERT_EQ(osc.code, mk::cli::kOk) << osc.err;
    const json r2 = json::parse(read(out_dir() / "oscillating_isotropic.classify.json"))["classification"];
    EXPECT_TRUE(r2["cptp"]["passed"].get<bool>());
    EXPECT_GT(r2["blp_measure"].get<double>(), 0.0);
    EXPECT_EQ(r2["probe_seed"].get<std::uint64_t>(), mk::kDefaultProbeSeed);

    const Result brk = run({"classify", spec_path("cp_break_at_zero.json"), "--probes", "16"});
    EXPECT_EQ(brk.code, mk::cli::kInadmissible);  // the triangle fails for (1, 2, 3)
    const json r3 = json::parse(read(out_dir() / "cp_break_at_zero.classify.json"))["classification"];
    EXPECT_FALSE(r3["cp_divisibility"]["passed"].get<bool>());
    EXPECT_EQ(r3["cp_divisible_until"].get<double>(), 0.0);
    EXPECT_NE(brk.out.find("breaks at t=0"), std::string::npos);
}

TEST_F(CliTest, ExampleGoldensPass) {
    for (int n = 1; n <= 4; ++n) {
        const Result r = run({"example", std::to_string(n)});
        EXPECT_EQ(r.code, mk::cli::kOk) << "example " << n << "\n" << r.out << r.err;
        EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
        const json report = json::parse(read(out_dir() / ("example" + std::to_string(n) + ".example.json")));
        EXPECT_TRUE(report["passed"].get<bool>());
    }
    const json ex1 = json::parse(read(out_dir() / "example1.example.json"));
    EXPECT_FALSE(ex1["golden_checks"].empty());
    // p_0 tends to 1/4 at za = 1
    const auto rows = read_csv(out_dir() / "example1_closed.csv");
    EXPECT_NEAR(std::stod(rows.back()[4]), 0.25 + 0.75 * std::exp(-20.0), 1e-12);
    // default example 4: p_3 = (1 - cos t) / 2
    const auto rows4 = read_csv(out_dir() / "example4_closed.csv");
    for (std::size_t i = 1; i < rows4.size(); i += 1234) {
        const double t = std::stod(rows4[i][0]);
        EXPECT_NEAR(std::stod(rows4[i][7]), 0.5 * (1.0 - std::cos(t)), 1e-12);
        EXPECT_NEAR(std::stod(rows4[i][4]), 0.5 * (1.0 + std::cos(t)), 1e-12);
    }
}

TEST_F(CliTest, InvLaplaceValues) {
    const Result a = run({"invlaplace", "--num", "1", "--den", "1,1", "--t", "1", "--format", "json"});
    ASSERT_EQ(a.code, mk::cli::kOk) << a.err;
    const json ja = json::parse(a.out);
    EXPECT_NEAR(ja["samples"][0]["partial_fraction"].get<double>(), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(ja["samples"][0]["stehfest"].get<double>(), 0.367879, 1e-6);

    const Result b = run({"invlaplace", "--num", "1", "--den", "1,0", "--t", "5", "--format", "json"});
    ASSERT_EQ(b.code, mk::cli::kOk) << b.err;
    EXPECT_NEAR(json::parse(b.out)["samples"][0]["stehfest"].get<double>(), 1.0, 1e-7);

    // 1/(s (s+1) (s+2)) = s^3 + 3 s^2 + 2 s
    const Result c = run({"invlaplace", "--num", "1", "--den", "1,3,2,0", "--t", "0,1"});
    ASSERT_EQ(c.code, mk::cli::kOk) << c.err;
    EXPECT_NE(c.out.find("t=0  partial_fraction=0\n"), std::string::npos) << c.out;
    EXPECT_NE(c.out.find("multiplicity 1"), std::string::npos);

    EXPECT_EQ(run({"invlaplace", "--num", "1,0,0", "--den", "1,1", "--t", "1"}).code, mk::cli::kUsage);
    EXPECT_EQ(run({"invlaplace", "--num", "1", "--den", "0", "--t", "1"}).code, mk::cli::kUsage);
    EXPECT_EQ(run({"invlaplace", "--num", "1", "--den", "1,x", "--t", "1"}).code, mk::cli::kUsage);
}

TEST_F(CliTest, ReportsAreDeterministicApartFromTimes) {
    auto strip = [](json j) {
        j.erase("wall_time_seconds");
        j.erase("timestamp");
        return j.dump();
    };
    ASSERT_EQ(run({"classify", spec_path("oscillating_isotropic.json"), "--grid", "10:1000", "--probes", "32"}).code,
              mk::cli::kOk);
    const std::string first = strip(json::parse(read(out_dir() / "oscillating_isotropic.classify.json")));
    ASSERT_EQ(run({"classify", spec_path("oscillating_isotropic.json"), "--grid", "10:1000", "--probes", "32"}).code,
              mk::cli::kOk);
    EXPECT_EQ(strip(json::parse(read(out_dir() / "oscillating_isotropic.classify.json"))), first);

    ASSERT_EQ(run({"simulate", spec_path("example3.json"), "--grid", "5:500", "--route", "all"}).code, mk::cli::kOk);
    const std::string sim = strip(json::parse(read(out_dir() / "example3.simulate.json")));
    const std::string csv = read(out_dir() / "example3_volterra.csv");
    ASSERT_EQ(run({"simulate", spec_path("example3.json"), "--grid", "5:500", "--route", "all"}).code, mk::cli::kOk);
    EXPECT_EQ(strip(json::parse(read(out_dir() / "example3.simulate.json"))), sim);
    EXPECT_EQ(read(out_dir() / "example3_volterra.csv"), csv);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    const fs::path env_dir = dir_ / "from_env";
    ::setenv(mk::cli::kOutDirEnv, env_dir.string().c_str(), 1);
    const Result r = run({"validate", spec_path("example3.json")}, false);
    ::unsetenv(mk::cli::kOutDirEnv);
    EXPECT_EQ(r.code, mk::cli::kOk);
    EXPECT_TRUE(fs::exists(env_dir / "example3.validate.json"));
}

TEST(CliGrid, ParsesOverride) {
    const auto [t, n] = mk::cli::parse_grid_flag("12.5:250");
    EXPECT_DOUBLE_EQ(t, 12.5);
    EXPECT_EQ(n, 250u);
    EXPECT_THROW(mk::cli::parse_grid_flag("12.5"), mk::SpecError);
    EXPECT_THROW(mk::cli::parse_grid_flag("a:b"), mk::SpecError);
    EXPECT_THROW(mk::cli::parse_grid_flag("1:1"), mk::SpecError);
}
