#include <gtest/gtest.h>

#include <cmath>

#include "normnet/experiments/rademacher_run.hpp"
#include "normnet/normnet.hpp"

using namespace normnet;

TEST(Rademacher, ExactTwoFunctions) { EXPECT_DOUBLE_EQ(rademacher_exact({{1, 1}, {-1, 1}}), 1.0); }

TEST(Rademacher, ExactSingleSpike) {
    for (std::size_t n : {1u, 3u, 8u}) {
        std::vector<double> v(n, 0.0);
        v[0] = 1;
        EXPECT_DOUBLE_EQ(rademacher_exact({v}), 1.0 / static_cast<double>(n));
    }
}

TEST(Rademacher, ZeroFamily) {
    EXPECT_EQ(rademacher_exact({std::vector<double>(6, 0.0)}), 0.0);
    EXPECT_EQ(rademacher_mc({std::vector<double>(6, 0.0)}, 500, {1, 0}).mean, 0.0);
}

TEST(Rademacher, EmptyFamilyRejected) {
    EXPECT_THROW(rademacher_exact(std::vector<std::vector<double>>{}), PreconditionError);
    EXPECT_THROW(rademacher_mc(std::vector<std::vector<double>>{}, 1000, {}), PreconditionError);
    const auto panel = random_panel(4, 2, 1, {1, 0});
    EXPECT_THROW(family_values(FunctionFamily{}, panel), PreconditionError);
}

TEST(Rademacher, ExactRefusesLargeN) { EXPECT_THROW(rademacher_exact({std::vector<double>(21, 1.0)}), PreconditionError); }

TEST(Rademacher, ScalesWithConstant) {
    const std::vector<std::vector<double>> v{{0.3, -1.2, 0.5, 2.0}, {1.0, 0.1, -0.4, 0.0}};
    auto w = v;
    for (auto& r : w)
        for (auto& x : r) x *= -2.5;
    EXPECT_NEAR(rademacher_exact(w), 2.5 * rademacher_exact(v), 1e-14);
}

TEST(Rademacher, MonteCarloAgreesWithExact) {
    CounterRng g(3, 0);
    std::vector<std::vector<double>> v(4, std::vector<double>(10));
    for (auto& r : v)
        for (auto& x : r) x = g.uniform(-1, 1);
    const double exact = rademacher_exact(v);
    const auto mc = rademacher_mc(v, 20000, {4, 0});
    EXPECT_NEAR(mc.mean, exact, 4 * mc.stderr_);
    const auto mc4 = rademacher_mc(v, 80000, {4, 1});
    EXPECT_NEAR(mc.stderr_ / mc4.stderr_, 2.0, 0.1);
}

TEST(Rademacher, McDeterministic) {
    const std::vector<std::vector<double>> v{{1, 2, 3}, {-1, 0, 1}};
    EXPECT_EQ(rademacher_mc(v, 1000, {6, 2}).mean, rademacher_mc(v, 1000, {6, 2}).mean);
    EXPECT_THROW(rademacher_mc(v, 10, {}), PreconditionError);
}

TEST(Panel, StatisticAndRange) {
    const auto p = make_panel({{1, 0}, {-1, 0.5}}, 1);
    EXPECT_DOUBLE_EQ(p.s_stat, 1.0);
    EXPECT_THROW(make_panel({{2, 0}}, 1), PreconditionError);
    EXPECT_THROW(make_panel({{1, 0}, {1}}, 1), DimensionError);
    EXPECT_THROW(make_panel({}, 1), PreconditionError);
    const auto r = random_panel(16, 3, 2, {1, 0});
    for (const auto& x : r.points)
        for (double v : x) EXPECT_LE(std::abs(v), 2.0);
}

TEST(Bounds, ClosedForms) {
    EXPECT_NEAR(bound_upper(2, 3, 16, 2, 4), 4.442783432155961, 1e-12);
    EXPECT_NEAR(bound_lower_relu(1, 0, 1, 1), 0.35355339059327373, 1e-15);
    EXPECT_NEAR(bound_lower_relu(2, 0.5, 1, 4), 0.17677669529663687, 1e-15);
    EXPECT_THROW(bound_lower_relu(1, 1, 1, 1), PreconditionError);
    const auto g = bound_lower_general(1, 1, 1, 4, 0.5, 4);
    EXPECT_DOUBLE_EQ(g.c_star, 0.125);
    EXPECT_DOUBLE_EQ(g.value, 0.125 * 4 * 0.25 / 4);
    EXPECT_NEAR(g.eps_star, 0.5 / (2 * std::sqrt(2.0) * 2), 1e-15);
}

TEST(Bounds, LowerRateExample) {
    EXPECT_NEAR(thm1_lower_rate(2, 2, 4, 1), 0.35355339059327373, 1e-15);
    EXPECT_THROW(thm1_lower_rate(2, 2, 2, 1), PreconditionError);
    EXPECT_THROW(thm1_lower_rate(0.5, 2, 4, 1), PreconditionError);
}

TEST(Witness, ReluFamilyBetweenBounds) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto panel = random_panel(8, 3, 1, {s, 0});
        const auto fam = build_rad_witness_relu(2, 3);
        for (const auto& n : fam) EXPECT_TRUE(check_norm_constraint(n).ok);
        const double r = rademacher_exact(family_of(fam), panel);
        EXPECT_GE(r, bound_lower_relu(2, 0, panel.s_stat, 8));
        EXPECT_LE(r, bound_upper(1, 2, 8, 1, 3));
    }
}

TEST(Witness, LeakyFamily) {
    const auto fam = build_rad_witness_relu(2, 2, "leaky:0.2");
    const double x[2] = {0.5, -0.25};
    EXPECT_NEAR(fam[0].eval_scalar(x), 1.2 * 0.5, 1e-15);
    EXPECT_NEAR(fam[1].eval_scalar(x), -1.2 * 0.25, 1e-15);
    EXPECT_THROW(build_rad_witness_relu(2, 2, "silu"), PreconditionError);
}

TEST(Witness, GeneralFamilyAboveLowerBound) {
    const ActivationEntry& e = activation("tanh");
    const double M = linear_remainder_constant(e, 1.0);
    EXPECT_GT(M, 0.2);
    EXPECT_LT(M, 0.4);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto panel = random_panel(10, 2, 1, {s, 7});
        const auto g = bound_lower_general(1, M, 1, 3, panel.s_stat, 10);
        const auto fam = build_rad_witness_general(3, 2, g.eps_star, "tanh", 1, 1);
        EXPECT_GE(rademacher_exact(family_of(fam), panel), g.value);
    }
    EXPECT_THROW(build_rad_witness_general(3, 2, 2.0, "tanh", 1, 1), PreconditionError);
}

TEST(Witness, RandomLipschitzFamilyNorms) {
    const auto fam = random_lipschitz_family(4, 3, 5, 2, 2.5, {1, 0});
    for (const auto& n : fam) {
        const auto norms = n.layer_norms();
        EXPECT_NEAR(norms[0], 1, 1e-12);
        EXPECT_NEAR(norms[1], 1, 1e-12);
        EXPECT_NEAR(norms[2], 2.5, 1e-12);
        EXPECT_TRUE(check_norm_constraint(n).ok);
    }
}
