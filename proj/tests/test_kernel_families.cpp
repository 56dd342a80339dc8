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
#include <random>

#include "memkernel/evolution_solver.hpp"
#include "memkernel/kernel_families.hpp"
#include "memkernel/laplace_tools.hpp"

namespace mk = memkernel;
using mk::cplx;
using mk::kInf;

namespace {

mk::KernelSpec spec(mk::WaitingFunction w, double a1, double a2, double a3) {
    return {std::move(w), mk::AnisotropyParameters(a1, a2, a3)};
}

// Largest real part among the regular-part exponents, so numeric transforms
// are only taken where they converge.
double growth_rate(const mk::DeltaPlusRegular &k) {
    double g = -kInf;
    for (const auto &term : k.regular.exp_sum().terms()) g = std::max(g, term.rate.real());
    return g;
}

// Random closed-family spec with the triangle satisfied.
mk::KernelSpec random_closed_spec(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.3, 3.0);
    std::uniform_int_distribution<int> fam(0, 3);
    mk::WaitingFunction w = mk::WaitingFunction::exponential(1.0);
    switch (fam(rng)) {
        case 0: w = mk::WaitingFunction::exponential(u(rng)); break;
        case 1: {
            const double c1 = u(rng);
            w = mk::WaitingFunction::biexponential(c1, c1 + u(rng));
            break;
        }
        case 2: w = mk::WaitingFunction::sinusoidal(u(rng)); break;
        default: w = mk::WaitingFunction::polynomial({u(rng), u(rng), u(rng)}); break;
    }
    for (;;) {
        mk::AnisotropyParameters a(u(rng), u(rng), u(rng));
        if (mk::triangle_check(a).passed) return {w, a};
    }
}

// Taylor series of the divided difference of exp(t x) over nodes:
// sum_k t^k / k! h_{k-m+1}(nodes), h the complete homogeneous symmetric
// polynomials, in long double.
double dd_series(const std::vector<double> &nodes, double t) {
    using R = long double;
    const std::size_t m = nodes.size();
    const int terms = 80;
    std::vector<R> h(std::size_t(terms), 0.0L);  // h_k over the nodes seen so far
    h[0] = 1.0L;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 1; k < h.size(); ++k) h[k] += R(nodes[j]) * h[k - 1];
    }
    R acc = 0.0L, tk = 1.0L;
    for (std::size_t k = 1; k < m; ++k) tk *= R(t) / R(k);
    for (std::size_t k = m - 1, i = 0; i < h.size(); ++k, ++i) {
        acc += tk * h[i];
        tk *= R(t) / R(k + 1);
    }
    return double(acc);
}

}  // namespace

TEST(TriangleCheck, KnownCases) {
    EXPECT_TRUE(mk::triangle_check({1, 1, 1}).passed);
    const mk::Verdict bad = mk::triangle_check({10, 10, 1});
    EXPECT_FALSE(bad.passed);
    EXPECT_NEAR(bad.margin("axis3"), 0.1 + 0.1 - 1.0, 1e-15);
    EXPECT_TRUE(mk::triangle_check({1, 1, kInf}).passed);
    EXPECT_THROW(mk::AnisotropyParameters(1, 0, 1), std::invalid_argument);
    EXPECT_THROW(mk::AnisotropyParameters(-1, 1, 1), std::invalid_argument);
}

TEST(IntegralBound, KnownCases) {
    const mk::TimeGrid grid(60.0, 6000);
    EXPECT_TRUE(mk::integral_bound_check(spec(mk::WaitingFunction::exponential(1.0), 1, 1, 1), grid).passed);
    const mk::Verdict over = mk::integral_bound_check(spec(mk::WaitingFunction::exponential(1.0), 0.5, 0.5, 0.5), grid);
    EXPECT_FALSE(over.passed);
    ASSERT_TRUE(over.first_violation_time);
    // 6 (1 - e^{-t}) crosses 4 at t = ln 3
    EXPECT_NEAR(*over.first_violation_time, std::log(3.0), grid.step());

    const mk::TimeGrid wave(2.0 * std::numbers::pi, 2000);
    EXPECT_FALSE(mk::integral_bound_check(spec(mk::WaitingFunction::sinusoidal(1.0), 1, 1, 1), wave).passed);
    // sup F = 2/w^2, so 3 * 2 / 1.5 = 4 sits exactly on the bound
    const mk::Verdict edge =
        mk::integral_bound_check(spec(mk::WaitingFunction::sinusoidal(std::sqrt(1.5)), 1, 1, 1), mk::TimeGrid(20.0, 20000));
    EXPECT_TRUE(edge.passed);
    EXPECT_NEAR(edge.margin("bound"), 0.0, 1e-6);
}

TEST(WaitingFunction, ClosedFormsAgreeWithQuadrature) {
    const std::vector<mk::WaitingFunction> ws{mk::WaitingFunction::exponential(1.3),
                                              mk::WaitingFunction::biexponential(0.5, 2.0),
                                              mk::WaitingFunction::sinusoidal(1.7),
                                              mk::WaitingFunction::polynomial({0.5, 1.0, 3.0})};
    for (const auto &w : ws) {
        // F against composite Simpson on f
        for (double t : {0.3, 1.0, 4.0}) {
            const int n = 2000;
            const double h = t / n;
            double acc = w.f(0.0) + w.f(t);
            for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * w.f(i * h);
            EXPECT_NEAR(w.F(t), acc * h / 3.0, 1e-10) << w.family_name() << " t=" << t;
        }
        // f~ against quadrature
        for (double s : {0.7, 2.0, 9.0}) {
            const double q = mk::numeric_laplace([&w](double t) { return w.f(t); }, s).value;
            EXPECT_NEAR(w.laplace(s), q, 1e-8 * std::max(1.0, std::abs(q))) << w.family_name() << " s=" << s;
        }
        EXPECT_LT(std::abs(w.laplace(1e8)), 1e-7) << w.family_name();
    }
}

TEST(WaitingFunction, ClusteredRootsStayAccurateNearZero) {
    const std::vector<std::vector<double>> cases{{1.998606, 2.020828, 2.996644, 1.999618},
                                                 {1.220667, 1.2218, 0.948514, 1.391674},
                                                 {1.5, 1.5, 1.5},
                                                 {0.7, 2.2}};
    for (const auto &roots : cases) {
        const mk::WaitingFunction w = mk::WaitingFunction::polynomial(roots);
        std::vector<double> nodes;
        for (double z : roots) nodes.push_back(-z);
        std::vector<double> with_zero{0.0};
        with_zero.insert(with_zero.end(), nodes.begin(), nodes.end());
        double prev = 0.0;
        for (double t : {1e-4, 2e-3, 0.05, 0.5, 1.0, 2.0}) {
            const double f = dd_series(nodes, t), F = dd_series(with_zero, t);
            EXPECT_NEAR(w.f(t), f, 1e-15 + 1e-12 * f) << roots.size() << " t=" << t;
            EXPECT_NEAR(w.F(t), F, 1e-15 + 1e-12 * F) << roots.size() << " t=" << t;
            EXPECT_GE(w.F(t), prev);
            prev = w.F(t);
        }
    }
}

TEST(BRates, KnownCasesAndRoundTrip) {
    const mk::BRates b = mk::b_from_a({1, 1, 1});
    for (double v : b.b) EXPECT_NEAR(v, 4.0, 1e-14);
    const mk::AnisotropyParameters a = mk::a_from_b({{4, 4, 4}});
    for (double v : a.a) EXPECT_NEAR(v, 1.0, 1e-14);

    // reciprocals (1, 1, 0): the first two margins vanish
    const mk::BRates deph = mk::b_from_a({1, 1, kInf});
    EXPECT_TRUE(std::isinf(deph[0]));
    EXPECT_TRUE(std::isinf(deph[1]));
    EXPECT_NEAR(deph[2], 2.0, 1e-14);
    const mk::AnisotropyParameters back = mk::a_from_b(deph);
    EXPECT_NEAR(back[0], 1.0, 1e-14);
    EXPECT_NEAR(back[1], 1.0, 1e-14);
    EXPECT_TRUE(std::isinf(back[2]));

    EXPECT_THROW(mk::b_from_a({10, 10, 1}), std::invalid_argument);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    const mk::WaitingFunction w = mk::WaitingFunction::exponential(1.1);
    const mk::TimeGrid grid(5.0, 50);
    for (int trial = 0; trial < 200; ++trial) {
        mk::AnisotropyParameters x(u(rng), u(rng), u(rng));
        if (!mk::triangle_check(x).passed) continue;
        const mk::BRates br = mk::b_from_a(x);
        const mk::AnisotropyParameters y = mk::a_from_b(br);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(y[k], x[k], 1e-12 * x[k]);
        const mk::TrajectorySet traj = mk::closed_form_lambdas({w, x}, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                const double pk = std::isinf(br[k]) ? 0.0 : traj.F[i] / br[k];
                EXPECT_NEAR(pk, traj.p[k + 1][i], 1e-12);
            }
        }
    }
}

TEST(PolynomialAdmissibility, KnownCases) {
    const std::vector<double> one{1.0};
    const auto a = mk::polynomial_admissibility_check(one, {1, 1, 1});
    EXPECT_TRUE(a.admissible.passed);
    EXPECT_NEAR(a.admissible.margin("product"), 0.25, 1e-15);
    EXPECT_TRUE(a.blp_zero.passed);
    EXPECT_NEAR(a.blp_zero.margin("axis1"), 0.0, 1e-15);

    const std::vector<double> two{1.0, 2.0};
    const auto b = mk::polynomial_admissibility_check(two, {0.2, 0.2, 0.2});
    EXPECT_FALSE(b.admissible.passed);
    EXPECT_NEAR(b.admissible.margin("product"), 2.0 - 3.75, 1e-12);

    // biexponential (c1, c2): 4 c1 c2 >= sum 1/a
    const std::vector<double> c{0.5, 1.5};
    EXPECT_TRUE(mk::polynomial_admissibility_check(c, {1, 1, 1}).admissible.passed);
    EXPECT_FALSE(mk::polynomial_admissibility_check(c, {0.99, 0.99, 0.99}).admissible.passed);

    const std::vector<double> neg{1.0, -1.0};
    EXPECT_THROW(mk::polynomial_admissibility_check(neg, {1, 1, 1}), std::invalid_argument);
}

TEST(KernelLaplace, KnownCases) {
    const double z = 1.7, a1 = 0.8;
    const mk::KernelLaplace lap(spec(mk::WaitingFunction::exponential(z), a1, 2.0, kInf));
    for (double s : {0.3, 1.0, 5.0}) {
        EXPECT_NEAR(lap.kappa_tilde(0, s), -s / (a1 * (s + z) - 1.0), 1e-14);
        EXPECT_EQ(lap.kappa_tilde(2, s), 0.0);
    }
    // a = f~(s) at s = 1/a - z
    const mk::KernelLaplace pole(spec(mk::WaitingFunction::exponential(0.5), 1.0, 1.0, 1.0));
    EXPECT_FALSE(pole.try_kappa_tilde(0, 0.5).has_value());
    EXPECT_TRUE(pole.try_kappa_tilde(0, 0.6).has_value());

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const mk::KernelLaplace l(random_closed_spec(rng));
        for (std::size_t k = 0; k < 3; ++k) {
            const double s = 1e7;
            EXPECT_NEAR(s * l.lambda_tilde(k, s), 1.0, 1e-5);
        }
    }
}

TEST(KernelTimeDomain, ExponentialFamily) {
    const double z = 1.7;
    const mk::KernelSpec sp = spec(mk::WaitingFunction::exponential(z), 0.8, 2.0, kInf);
    const auto kappa = mk::kernel_time_domain(sp);
    for (std::size_t k = 0; k < 2; ++k) {
        const double r = 1.0 / sp.aniso[k];
        EXPECT_NEAR(kappa[k].delta_weight, -r, 1e-12);
        for (double t : {0.0, 0.4, 2.5}) {
            const double want = r * (z - r) * std::exp(-(z - r) * t);
            EXPECT_NEAR(kappa[k].regular_at(t), want, 1e-12) << k << " t=" << t;
        }
    }
    EXPECT_EQ(kappa[2].delta_weight, 0.0);
    EXPECT_EQ(kappa[2].regular_at(1.0), 0.0);

    // z = 2c, a_1 = 1/c: kappa = -c delta + c^2 e^{-ct}
    const double c = 0.6;
    const auto ex2 = mk::kernel_time_domain(spec(mk::WaitingFunction::exponential(2 * c), 1 / c, 1 / c, 0.5 / c));
    EXPECT_NEAR(ex2[0].delta_weight, -c, 1e-12);
    EXPECT_NEAR(ex2[0].regular_at(1.3), c * c * std::exp(-c * 1.3), 1e-12);
    // a_3 = 1/(2c): kappa~_3 = -s/(s/(2c)) = -2c, a pure delta
    EXPECT_NEAR(ex2[2].delta_weight, -2 * c, 1e-12);
    EXPECT_NEAR(ex2[2].regular_at(0.7), 0.0, 1e-12);
}

TEST(KernelTimeDomain, SinusoidalBranches) {
    const double w = 1.3;
    // w^2 > 1/a, = 1/a, < 1/a on the three axes
    const double a_cos = 1.0, a_const = 1.0 / (w * w), a_cosh = 0.3;
    const auto kappa = mk::kernel_time_domain(spec(mk::WaitingFunction::sinusoidal(w), a_cos, a_const, a_cosh));
    for (double t : {0.0, 0.9, 3.1}) {
        EXPECT_NEAR(kappa[0].regular_at(t), -std::cos(std::sqrt(w * w - 1.0) * t), 1e-12);
        EXPECT_NEAR(kappa[1].regular_at(t), -w * w, 1e-12);
        EXPECT_NEAR(kappa[2].regular_at(t), -(1 / a_cosh) * std::cosh(std::sqrt(1 / a_cosh - w * w) * t), 1e-9);
    }
    for (const auto &k : kappa) EXPECT_EQ(k.delta_weight, 0.0);
}

TEST(KernelTimeDomain, TripleRootInWaitingPolynomial) {
    const mk::KernelSpec sp = spec(mk::WaitingFunction::polynomial({1.0, 1.0, 1.0}), 1.5, 2.0, 3.0);
    const auto kappa = mk::kernel_time_domain(sp);
    const mk::KernelLaplace lap(sp);
    for (std::size_t k = 0; k < 3; ++k) {
        const double g = growth_rate(kappa[k]);
        for (double s : {g + 0.5, g + 2.0, g + 10.0}) {
            if (s <= 0.0) continue;
            const double q = kappa[k].delta_weight +
                             mk::numeric_laplace([&](double t) { return kappa[k].regular_at(t); }, s).value;
            EXPECT_NEAR(q, lap.kappa_tilde(k, s), 1e-6 * std::max(1.0, std::abs(q)));
        }
    }
}

TEST(KernelTimeDomain, TransformsMatchLaplaceEvaluatorsForRandomSpecs) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const mk::KernelSpec sp = random_closed_spec(rng);
        const auto kappa = mk::kernel_time_domain(sp);
        const mk::KernelLaplace lap(sp);
        for (std::size_t k = 0; k < 3; ++k) {
            // delta weight equals lim kappa~ at s -> infinity
            const double far = lap.kappa_tilde(k, 1e6);
            EXPECT_NEAR(kappa[k].delta_weight, far, 1e-4 * std::max(1.0, std::abs(far)))
                << sp.waiting.family_name() << " axis " << k;
            const double g = std::max(0.1, growth_rate(kappa[k]) + 0.5);
            std::uniform_real_distribution<double> us(g, std::max(g + 1.0, 50.0));
            for (int j = 0; j < 20; ++j) {
                const double s = us(rng);
                mk::LaplaceQuadratureOptions opt;
                opt.rel_tol = 1e-12;
                const double q = kappa[k].delta_weight +
                                 mk::numeric_laplace([&](double t) { return kappa[k].regular_at(t); }, s, opt).value;
                const double want = lap.kappa_tilde(k, s);
                EXPECT_NEAR(q, want, 1e-6 * std::max(1.0, std::abs(want)))
                    << sp.waiting.family_name() << " axis " << k << " s=" << s;
            }
        }
    }
}

TEST(KernelTimeDomain, RejectsTables) {
    const mk::KernelSpec sp{mk::WaitingFunction::tabulated({0.0, 1.0}, {0.0, 0.0}), {}};
    EXPECT_THROW(mk::kernel_time_domain(sp), std::invalid_argument);
}

TEST(KernelRates, KnownCases) {
    // kappa_1 = kappa_2, kappa_3 = 0 leaves only k_3 = -kappa_1 / 2
    const double w = 1.1;
    const auto kappa = mk::kernel_time_domain(spec(mk::WaitingFunction::sinusoidal(w), 1 / (w * w), 1 / (w * w), kInf));
    const mk::PauliKernelRates r = mk::kernel_rates_from_eigenvalues(kappa);
    for (double t : {0.0, 1.0, 7.0}) {
        EXPECT_NEAR(r.k[0].regular_at(t), 0.0, 1e-14);
        EXPECT_NEAR(r.k[1].regular_at(t), 0.0, 1e-14);
        EXPECT_NEAR(r.k[2].regular_at(t), 0.5 * w * w, 1e-12);
    }
    const mk::PauliKernelRates zero = mk::kernel_rates_from_eigenvalues({});
    for (const auto &k : zero.k) {
        EXPECT_EQ(k.delta_weight, 0.0);
        EXPECT_EQ(k.regular_at(0.5), 0.0);
    }

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto kap = mk::kernel_time_domain(random_closed_spec(rng));
        const auto back = mk::kernel_eigenvalues_from_rates(mk::kernel_rates_from_eigenvalues(kap));
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(back[k].delta_weight, kap[k].delta_weight, 1e-12);
            for (double t : {0.0, 0.5, 2.0})
                EXPECT_NEAR(back[k].regular_at(t), kap[k].regular_at(t), 1e-10 * std::max(1.0, std::abs(kap[k].regular_at(t))));
        }
    }
}

TEST(SemiMarkov, ThinnedExponentialMatchesQuadrature) {
    const double z = 1.5, q = 0.6;
    const mk::SemiMarkovKernel k = mk::semi_markov_kernel(mk::WaitingFunction::exponential(z, q * z));
    for (double s : {0.2, 1.0, 6.0}) {
        const double ft = mk::numeric_laplace([&](double t) { return q * z * std::exp(-z * t); }, s).value;
        EXPECT_NEAR(k.k3_tilde(s), s * ft / (1.0 - ft), 1e-8);
        EXPECT_NEAR(k.k3_tilde(s), s * q * z / (s + z * (1.0 - q)), 1e-12);
    }
    EXPECT_THROW(mk::semi_markov_kernel(mk::WaitingFunction::exponential(1.0, 2.0)), std::invalid_argument);
    EXPECT_THROW(mk::semi_markov_kernel(mk::WaitingFunction::sinusoidal(1.0)), std::invalid_argument);
}

TEST(SemiMarkov, ZeroWaitingFunctionIsIdentity) {
    const mk::SemiMarkovKernel k = mk::semi_markov_kernel(mk::WaitingFunction::tabulated({0.0, 5.0}, {0.0, 0.0}));
    for (double s : {0.1, 1.0, 10.0}) {
        EXPECT_EQ(k.k3_tilde(s), 0.0);
        for (std::size_t axis = 0; axis < 3; ++axis) EXPECT_NEAR(s * k.lambda_tilde(axis, s), 1.0, 1e-15);
    }
}

TEST(SemiMarkov, HalfMassExponentialStaysInUnitInterval) {
    const mk::SemiMarkovKernel k = mk::semi_markov_kernel(mk::WaitingFunction::exponential(2.0));
    const mk::RealFunction lt = [&k](double s) { return k.lambda_tilde(0, s); };
    for (double t = 0.1; t <= 10.0; t += 0.3) {
        const double l = mk::inverse_laplace(lt, t);
        EXPECT_GE(l, -1e-6) << t;
        EXPECT_LE(l, 1.0 + 1e-6) << t;
    }
}

TEST(BlpSufficient, KnownCases) {
    const mk::TimeGrid grid(30.0, 3000);
    EXPECT_TRUE(mk::blp_sufficient_check(spec(mk::WaitingFunction::exponential(1.0), 1, 1, 1), grid).passed);
    const mk::Verdict wave = mk::blp_sufficient_check(spec(mk::WaitingFunction::sinusoidal(1.0), 1, 1, 1), grid);
    EXPECT_FALSE(wave.passed);
    EXPECT_LT(wave.margin("cm"), 0.0);
    EXPECT_TRUE(mk::blp_sufficient_check(spec(mk::WaitingFunction::exponential(2.0), 1, 2, 3), grid).passed);
    // F reaches 1/z = 2 > a_min = 1
    EXPECT_FALSE(mk::blp_sufficient_check(spec(mk::WaitingFunction::exponential(0.5), 1, 1, 1), grid).passed);
}

TEST(AdmissibleSpecs, ProbabilitiesSumToOneAndStayNonnegative) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ut(0.5, 40.0);
    std::uniform_int_distribution<int> un(2, 400);
    int used = 0;
    for (int trial = 0; used < 200 && trial < 5000; ++trial) {
        const mk::KernelSpec sp = random_closed_spec(rng);
        const mk::TimeGrid grid(ut(rng), std::size_t(un(rng)));
        if (!mk::integral_bound_check(sp, grid).passed) continue;
        ++used;
        const mk::TrajectorySet traj = mk::closed_form_lambdas(sp, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_NEAR(traj.p[0][i] + traj.p[1][i] + traj.p[2][i] + traj.p[3][i], 1.0, 1e-12);
            for (std::size_t a = 0; a < 4; ++a) EXPECT_GE(traj.p[a][i], -1e-10);
        }
    }
    EXPECT_EQ(used, 200);
}

TEST(AdmissibleSpecs, PolynomialCertificateImpliesCptpTrajectory) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::uniform_int_distribution<int> un(1, 4);
    int used = 0;
    for (int trial = 0; used < 50 && trial < 5000; ++trial) {
        std::vector<double> roots(std::size_t(un(rng)));
        for (double &z : roots) z = u(rng);
        const mk::AnisotropyParameters a(u(rng), u(rng), u(rng));
        if (!mk::polynomial_admissibility_check(roots, a).admissible.passed) continue;
        ++used;
        const mk::KernelSpec sp{mk::WaitingFunction::polynomial(roots), a};
        const mk::TrajectorySet traj = mk::closed_form_lambdas(sp, mk::TimeGrid(50.0, 500));
        EXPECT_TRUE(mk::trajectory_cptp_scan(traj).verdict.passed);
    }
    EXPECT_EQ(used, 50);
}
