#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "normnet/normnet.hpp"

using namespace normnet;

TEST(Bernstein, SquareConstants) {
    TaylorSpec t;
    t.M = 1;
    t.a2 = 1;
    const auto c = lemma6_constants(100, 1, t);
    EXPECT_DOUBLE_EQ(c.eps0, 0.02);
    EXPECT_NEAR(c.var_bound, 1.0 / 3 + 4e-4, 1e-15);
    EXPECT_NEAR(c.C_or_B, 2 * c.var_bound + 2.0 / 3 * 1.06 * 1.06, 1e-12);
}

TEST(Bernstein, ProductConstantsSilu) {
    const auto c = lemma7_constants(100, 1, *activation("silu").taylor);
    EXPECT_NEAR(c.eps0, 0.01408, 1e-15);
}

TEST(Bernstein, GlueConstants) {
    const auto c = lemma9_constants(2, 1, 100, 1, *activation("silu").taylor);
    EXPECT_NEAR(c.F, std::exp(2.0), 1e-12);
    EXPECT_NEAR(c.G, std::exp(2.0) * (1 + 16 * 0.022 / 0.25), 1e-12);
    EXPECT_EQ(c.exponent, 3);
    EXPECT_EQ(lemma9_constants(1, 3, 100, 1, *activation("silu").taylor).exponent, 0);
}

TEST(Predict, SingleVacuousBelowEps0) {
    EXPECT_TRUE(predict_single(100, 0.01, 0.02, 1).vacuous);
    const auto a = predict_single(1000, 0.2, 0.02, 1), b = predict_single(1000, 0.3, 0.02, 1);
    EXPECT_FALSE(a.vacuous);
    EXPECT_LT(a.value, b.value);
    EXPECT_NEAR(a.value, 1 - 2 * std::exp(-1000 * 0.18 * 0.18), 1e-15);
}

TEST(Predict, ProductTreePower) {
    const auto c = lemma7_constants(1000, 1, *activation("silu").taylor);
    EXPECT_DOUBLE_EQ(predict_lemma8(1, 1000, 0.1, c).value, 1.0);
    const double base = predict_single(1000, 0.3 / 3, c.eps0, c.C_or_B).value;
    EXPECT_NEAR(predict_lemma8(4, 1000, 0.3, c).value, base * base, 1e-15);
    EXPECT_TRUE(predict_lemma8(4, 1000, 0.01, c).vacuous);
    EXPECT_EQ(predict_lemma8(4, 1000, 0.01, c).value, 0.0);
}

TEST(RandomSquare, Deterministic) {
    const auto a = build_random_square(64, 1, "silu", {7, 3});
    const auto b = build_random_square(64, 1, "silu", {7, 3});
    const auto c = build_random_square(64, 1, "silu", {7, 4});
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_NE(a.weights, c.weights);
    EXPECT_EQ(serialize(a.network), serialize(b.network));
}

TEST(RandomSquare, WeightsInRange) {
    const auto a = build_random_square(100, 1, "silu", {1, 0});
    ASSERT_EQ(a.weights.size(), 100u);
    for (double w : a.weights) {
        EXPECT_GE(w, 0.0);
        EXPECT_LT(w, 0.1);
    }
    EXPECT_EQ(a.network.cert().W, 200u);
}

TEST(RandomSquare, NormConstraintEveryDraw) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        EXPECT_TRUE(check_norm_constraint(build_random_square(50, 1, "silu", {s, 0}).network).ok);
        EXPECT_TRUE(check_norm_constraint(build_random_product2(50, 1, "gelu", {s, 1}).network).ok);
    }
}

TEST(RandomSquare, MeanMatchesSquare) {
    const double x[1] = {0.5};
    const int T = 400;
    const double k = 200;
    double sum = 0;
    for (int t = 0; t < T; ++t) sum += build_random_square(k, 1, "silu", {9, static_cast<std::uint64_t>(t)}).unclipped.eval_scalar(x);
    const auto c = lemma6_constants(k, 1, *activation("silu").taylor);
    // each estimate averages k draws with variance <= var_bound
    const double se = std::sqrt(c.var_bound / k / T);
    EXPECT_NEAR(sum / T, 0.25, c.eps0 + 5 * se);
}

TEST(RandomSquare, RejectsNonIntegerK) {
    EXPECT_THROW(build_random_square(10.5, 1, "silu", {}), PreconditionError);
    EXPECT_THROW(build_random_square(0, 1, "silu", {}), PreconditionError);
}

TEST(RandomProduct, ZeroAtOrigin) {
    const auto a = build_random_product2(64, 1, "silu", {3, 0});
    const double z[2] = {0, 0};
    EXPECT_EQ(a.network.eval_scalar(z), 0.0);
    EXPECT_EQ(a.network.cert().W, 256u);
}

TEST(RandomProduct, TypicalDrawIsAccurate) {
    const auto a = build_random_product2(2000, 1, "silu", {4, 0});
    const auto& c = a.constants;
    const double tol = c.eps0 + 4 * std::sqrt(c.C_or_B / 2000);
    const double p[2] = {0.6, -0.8};
    EXPECT_NEAR(a.unclipped.eval_scalar(p), -0.48, tol);
}

TEST(RandomProduct, TreeUsesIndependentBlocks) {
    const auto a = build_random_product_d(4, 64, 1, "silu", {5, 0});
    const auto b = build_random_product_d(4, 64, 1, "silu", {5, 0});
    EXPECT_EQ(serialize(a.network), serialize(b.network));
    const auto& A0 = a.network.layers()[0].weights;
    // the two first-level blocks draw different weights
    EXPECT_NE(A0.block(0, 0, 4, 2).cwiseAbs().sum(), A0.block(A0.rows() / 2, 2, 4, 2).cwiseAbs().sum());
    EXPECT_EQ(a.network.cert().L, 4u);
}

TEST(RandomLipr, ReproducibleAndBounded) {
    LiprBuildParams p;
    p.d = 2;
    p.m = 1;
    p.k = 32;
    const auto t = sinprod_target(2);
    const auto a = build_random_lipr(p, t, {8, 0});
    const auto b = build_random_lipr(p, t, {8, 0});
    const double x[2] = {0.3, 0.9};
    EXPECT_EQ(a.build.approx(x), b.build.approx(x));
    EXPECT_NEAR(a.build.approx(x), t.f(x), lemma9_threshold(32, 1, 0.5, a.constants));
}

TEST(Theorem2, ProbabilityLimits) {
    const auto big = theorem2_bound(1e6, 1e12, 2, 1, 1, 1, 10.0, "silu");
    EXPECT_DOUBLE_EQ(big.probability, 1.0);
    const auto small = theorem2_bound(1e6, 1e12, 2, 1, 1, 1, 1e-4, "silu");
    EXPECT_DOUBLE_EQ(small.probability, 0.0);
    EXPECT_LT(small.raw, 0.0);
    EXPECT_DOUBLE_EQ(theorem2_bound(1e4, 1e6, 1, 1, 1, 1, 0.1, "silu").probability, 1.0);
    EXPECT_THROW(theorem2_bound(1, 1, 2, 1, 1, 1, 0.1, "silu"), InfeasibleError);
}

TEST(Theorem2, MonotoneInEps) {
    double last = -1;
    for (double eps : {0.5, 1.0, 2.0, 4.0}) {
        const auto b = theorem2_bound(1e7, 1e14, 2, 1, 1, 1, eps, "silu");
        EXPECT_GE(b.raw, last);
        last = b.raw;
    }
}
