#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "../rng.hpp"
#include "lipr.hpp"

namespace normnet {

struct BernsteinConstants {
    double eps0 = 0;
    double C_or_B = 0;
    double F = 0;
    double G = 0;
    double var_bound = 0;  // bound on Var[Y_i]
    double M = 0;
    double a2 = 0;
};

struct RandomBuild {
    Network network;
    Network unclipped;
    BernsteinConstants constants;
    std::vector<double> weights;  // sampled w_i
};

namespace detail {

inline std::vector<double> sample_weights(double k, double alpha, std::size_t n, RngSpec rng) {
    CounterRng g(rng);
    const double scale = std::pow(k, -alpha / 2);
    std::vector<double> w(n);
    for (auto& v : w) v = scale * std::sqrt(g.uniform01());
    return w;
}

inline std::uint64_t substream(std::uint64_t stream, std::uint64_t level, std::uint64_t block) {
    return CounterRng::mix(stream * 0x9e3779b97f4a7c15ULL + CounterRng::mix(level * 1000003ULL + block + 1));
}

inline std::size_t neuron_count(double k) {
    const double r = std::round(k);
    if (r < 1 || std::abs(r - k) > 1e-9) throw PreconditionError("random builders need a positive integer k");
    return static_cast<std::size_t>(r);
}

}  // namespace detail

inline BernsteinConstants lemma6_constants(double k, double alpha, const TaylorSpec& t) {
    BernsteinConstants c;
    c.M = t.M;
    c.a2 = t.a2;
    const double ka = std::pow(k, -alpha), a = std::abs(t.a2);
    c.eps0 = 2 * t.M * ka / a;
    c.var_bound = 1.0 / 3 + std::pow(2 * t.M, 2) * ka * ka / (t.a2 * t.a2);
    c.C_or_B = 2 * c.var_bound + 2.0 / 3 * std::pow(1 + 6 * t.M * ka / a, 2);
    return c;
}

inline BernsteinConstants lemma7_constants(double k, double alpha, const TaylorSpec& t) {
    BernsteinConstants c;
    c.M = t.M;
    c.a2 = t.a2;
    const double ka = std::pow(k, -alpha), a = std::abs(t.a2);
    c.eps0 = 16 * t.M * ka / a;
    c.var_bound = 1.0 / 3 + 256 * t.M * t.M * ka * ka / (t.a2 * t.a2);
    c.C_or_B = 2 * c.var_bound + 2.0 / 3 * std::pow(1 + 48 * t.M * ka / a, 2);
    return c;
}

// x^2 on [0,1] with k random symmetric pairs, w_i = k^{-alpha/2} sqrt(U_i)
inline RandomBuild build_random_square(double k, double alpha, const std::string& activation_tag, RngSpec rng) {
    const ActivationEntry& e = activation(activation_tag);
    const TaylorSpec& t = require_taylor(e);
    if (!(alpha > 0)) throw PreconditionError("build_random_square: alpha must be positive");
    const double k0 = square_k0(t, alpha);
    if (k < k0) throw PreconditionError("build_random_square: k below k0 = " + std::to_string(k0));
    const std::size_t n = detail::neuron_count(k);
    auto w = detail::sample_weights(k, alpha, n, rng);
    const auto rows = static_cast<Eigen::Index>(2 * n);
    Matrix A0(rows, 1);
    for (std::size_t i = 0; i < n; ++i) {
        A0(static_cast<Eigen::Index>(2 * i), 0) = w[i];
        A0(static_cast<Eigen::Index>(2 * i + 1), 0) = -w[i];
    }
    const double c = 1.0 / (t.a2 * std::pow(k, 1 - alpha));
    const Matrix A1 = Matrix::Constant(1, rows, c);
    const double K = 2 * std::pow(k, alpha) / std::abs(t.a2);
    std::vector<Layer> clipped{make_layer(A0, Vector::Zero(rows), e.tag), make_layer(A1, Vector::Zero(1), "clip01"),
                               affine_layer(Matrix::Identity(1, 1), Vector::Zero(1))};
    std::vector<Layer> raw{make_layer(A0, Vector::Zero(rows), e.tag), affine_layer(A1, Vector::Zero(1))};
    auto cc = detail::fixed_cert(clipped, 2 * n, K);
    auto rc = detail::fixed_cert(raw, 2 * n, K);
    return RandomBuild{Network(1, std::move(clipped), cc), Network(1, std::move(raw), rc), lemma6_constants(k, alpha, t), std::move(w)};
}

// xy on [-1,1]^2 with k random 4-neuron bilinear blocks
inline RandomBuild build_random_product2(double k, double alpha, const std::string& activation_tag, RngSpec rng) {
    const ActivationEntry& e = activation(activation_tag);
    const TaylorSpec& t = require_taylor(e);
    if (!(alpha > 0)) throw PreconditionError("build_random_product2: alpha must be positive");
    const double k0 = product_k0(t, alpha);
    if (k < k0) throw PreconditionError("build_random_product2: k below k0 = " + std::to_string(k0));
    const std::size_t n = detail::neuron_count(k);
    auto w = detail::sample_weights(k, alpha, n, rng);
    const auto rows = static_cast<Eigen::Index>(4 * n);
    Matrix A0(rows, 2);
    Matrix A1(1, rows);
    const double c = 1.0 / (4 * t.a2 * std::pow(k, 1 - alpha));
    // sum over (e1, e2) of e2 sigma(e1 w x + e1 e2 w y)
    const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (std::size_t i = 0; i < n; ++i) {
        for (int q = 0; q < 4; ++q) {
            const auto r = static_cast<Eigen::Index>(4 * i + static_cast<std::size_t>(q));
            const int e1 = signs[q][0], e2 = signs[q][1];
            A0(r, 0) = e1 * w[i];
            A0(r, 1) = e1 * e2 * w[i];
            A1(0, r) = e2 * c;
        }
    }
    const double K = std::pow(k, alpha) / std::abs(t.a2);
    std::vector<Layer> clipped{make_layer(A0, Vector::Zero(rows), e.tag), make_layer(A1, Vector::Zero(1), "clip11"),
                               affine_layer(Matrix::Identity(1, 1), Vector::Zero(1))};
    std::vector<Layer> raw{make_layer(A0, Vector::Zero(rows), e.tag), affine_layer(A1, Vector::Zero(1))};
    auto cc = detail::fixed_cert(clipped, 4 * n, K);
    auto rc = detail::fixed_cert(raw, 4 * n, K);
    return RandomBuild{Network(2, std::move(clipped), cc), Network(2, std::move(raw), rc), lemma7_constants(k, alpha, t), std::move(w)};
}

// Product tree of independent random bilinear blocks; block (level, pair) uses its own substream.
inline RandomBuild build_random_product_d(std::size_t d, double k, double alpha, const std::string& activation_tag, RngSpec rng) {
    if (d == 0) throw PreconditionError("build_random_product_d: d must be >= 1");
    const TaylorSpec& t = require_taylor(activation(activation_tag));
    if (d == 1) {
        auto id = identity_network(1);
        return RandomBuild{id, id, lemma7_constants(k, alpha, t), {}};
    }
    std::vector<Network> levels;
    std::size_t n = d, level = 0;
    while (n > 1) {
        std::vector<Network> parts;
        for (std::size_t p = 0; p + 1 < n; p += 2) {
            auto block = build_random_product2(k, alpha, activation_tag, {rng.seed, detail::substream(rng.stream_id, level, p / 2)});
            parts.push_back(compose_affine(block.network, detail::selection(n, {p, p + 1}), Vector::Zero(2)));
        }
        if (n % 2 == 1) parts.push_back(compose_affine(detail::passthrough2(), detail::selection(n, {n - 1}), Vector::Zero(1)));
        Network lv = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) lv = concat(lv, parts[i]);
        levels.push_back(std::move(lv));
        n = (n + 1) / 2;
        ++level;
    }
    Network net = compose_levels(levels);
    const int D = ceil_log2(d);
    ArchitectureCert c = net.cert();
    const std::size_t kn = detail::neuron_count(k);
    c.W = std::max<std::size_t>(c.W, 4 * kn * ((d + 1) / 2));
    c.L = std::max<std::size_t>(c.L, 2 * static_cast<std::size_t>(D));
    c.K = std::max(c.K, std::pow(std::pow(k, alpha) / std::abs(t.a2), D));
    Network certified(d, net.layers(), c);
    return RandomBuild{certified, certified, lemma7_constants(k, alpha, t), {}};
}

struct Prediction {
    double value = 0;
    bool vacuous = false;
};

// 1 - 2 exp(-k (eps - eps0)^2 / C), vacuous when eps <= eps0
inline Prediction predict_single(double k, double eps, double eps0, double C) {
    Prediction p;
    if (eps <= eps0) {
        p.vacuous = true;
        p.value = -1;
        return p;
    }
    p.value = 1 - 2 * std::exp(-k * (eps - eps0) * (eps - eps0) / C);
    p.vacuous = p.value <= 0;
    return p;
}

inline Prediction predict_lemma6(double k, double eps, const BernsteinConstants& c) { return predict_single(k, eps, c.eps0, c.C_or_B); }
inline Prediction predict_lemma7(double k, double eps, const BernsteinConstants& c) { return predict_single(k, eps, c.eps0, c.C_or_B); }

// (1 - 2 exp(-k (eps_d - eps0)^2 / B))^D with eps_d = eps / (2^D - 1); base clamped at 0
inline Prediction predict_lemma8(std::size_t d, double k, double eps, const BernsteinConstants& c) {
    const int D = ceil_log2(d);
    Prediction p;
    if (D == 0) {
        p.value = 1;
        return p;
    }
    const double eps_d = eps / (std::pow(2.0, D) - 1);
    const Prediction base = predict_single(k, eps_d, c.eps0, c.C_or_B);
    p.vacuous = base.vacuous;
    p.value = std::pow(std::max(0.0, base.value), D);
    return p;
}

struct Lemma9Constants {
    BernsteinConstants bern;
    double F = 0;
    double G = 0;
    int exponent = 0;  // ceil(log2 d) * C(m+d, d)
};

inline Lemma9Constants lemma9_constants(std::size_t d, int m, double k, double alpha, const TaylorSpec& t) {
    Lemma9Constants c;
    c.bern = lemma7_constants(k, alpha, t);
    const int D = ceil_log2(d);
    const double ed = std::exp(static_cast<double>(d));
    c.F = (std::pow(2.0, D) - 1) * ed;
    c.G = ed * (1 + 16 * t.M * (std::pow(2.0, D) - 1) / std::abs(t.a2));
    c.exponent = D * static_cast<int>(binomial(static_cast<std::size_t>(m) + d, d));
    c.bern.F = c.F;
    c.bern.G = c.G;
    return c;
}

// P(|f - phi| <= F eps + G k^{-alpha}) >= (1 - 2 exp(-k eps^2 / B))^{ceil(log2 d) C(m+d,d)}
inline Prediction predict_lemma9(double k, double eps, const Lemma9Constants& c) {
    Prediction p;
    if (c.exponent == 0) {
        p.value = 1;
        return p;
    }
    const double base = 1 - 2 * std::exp(-k * eps * eps / c.bern.C_or_B);
    p.vacuous = base <= 0;
    p.value = std::pow(std::max(0.0, base), c.exponent);
    return p;
}

inline double lemma9_threshold(double k, double alpha, double eps, const Lemma9Constants& c) { return c.F * eps + c.G * std::pow(k, -alpha); }

struct RandomLiprBuild {
    LiprBuild build;
    Lemma9Constants constants;
};

// Lip_r glue with one random product tree per multi-index, shared by all cubes.
inline RandomLiprBuild build_random_lipr(const LiprBuildParams& p, const LiprTarget& target, RngSpec rng, unsigned threads = default_threads()) {
    const TaylorSpec& t = require_taylor(activation(p.activation));
    if (p.m >= 2 && p.k < product_k0(t, p.alpha)) throw PreconditionError("build_random_lipr: k below k0 = " + std::to_string(product_k0(t, p.alpha)));
    std::size_t counter = 0;
    ProductFactory product = [&](std::size_t n) {
        return build_random_product_d(n, p.k, p.alpha, p.activation, {rng.seed, detail::substream(rng.stream_id, 0xfeed, counter++)}).network;
    };
    auto comp = assemble_lipr(p, target, product, threads);
    RandomLiprBuild out;
    out.build.composite = comp;
    out.build.approx = lipr_approximator(comp, p);
    out.constants = lemma9_constants(p.d, p.m, p.k, p.alpha, t);
    out.build.approx.predicted_bound = out.constants.G * std::pow(p.k, -p.alpha);
    out.build.approx.info["F"] = out.constants.F;
    out.build.approx.info["G"] = out.constants.G;
    out.build.approx.info["B"] = out.constants.bern.C_or_B;
    return out;
}

struct Theorem2Bound {
    double probability = 0;  // clamped to [0,1]
    double raw = 0;          // 1 - C2 exp(-k eps^2 / (F^2 B)) before clamping
    double k = 0;
    double C2 = 0;
    double C3_eff = 0;  // k / (K F^2 B), so the exponent reads C3_eff K eps^2
    double F = 0;
    double B = 0;
    double c1 = 0;
    double c2 = 0;
};

// Lower bound on P(error <= deterministic part + eps) for the random Lip_r
// network fitting (W, K): k is the largest admissible integer with
// 4k ceil(d/2) C(m+d,d) k^{d alpha/r} <= W and C(m+d,d) |a2|^{-D} k^{alpha (D + d/r)} <= K.
inline Theorem2Bound theorem2_bound(double W, double K, std::size_t d, int m, double beta, double alpha, double eps, const std::string& activation_tag) {
    const TaylorSpec& t = require_taylor(activation(activation_tag));
    if (d == 0 || m < 0 || !(beta > 0 && beta <= 1) || !(alpha > 0)) throw PreconditionError("theorem2_bound: bad (d, m, beta, alpha)");
    const double r = m + beta;
    const int D = ceil_log2(d);
    const double binom = binomial(static_cast<std::size_t>(m) + d, d);
    const double half = static_cast<double>((d + 1) / 2);
    const double k0 = std::max(1.0, std::ceil(product_k0(t, alpha) - 1e-12));
    Theorem2Bound out;
    out.c1 = 4 * k0 * half * binom * std::pow(k0, static_cast<double>(d) * alpha / r);
    out.c2 = std::pow(k0, alpha * D) / (4 * half * std::pow(std::abs(t.a2), D));
    auto Wk = [&](double k) { return 4 * k * half * binom * std::pow(k, static_cast<double>(d) * alpha / r); };
    auto Kk = [&](double k) { return binom * std::pow(std::abs(t.a2), -D) * std::pow(k, alpha * (D + static_cast<double>(d) / r)); };
    if (Wk(k0) > W || Kk(k0) > K)
        throw InfeasibleError("theorem2_bound: (W, K) infeasible; need W >= c1 = " + std::to_string(out.c1) + " and K >= c2 W with c2 = " + std::to_string(out.c2),
                              out.c1, out.c2);
    double lo = k0, hi = k0;
    while (Wk(hi * 2) <= W && Kk(hi * 2) <= K && hi < 1e15) {
        hi *= 2;
        lo = hi;
    }
    hi *= 2;
    while (hi - lo > 1) {
        const double mid = std::floor((lo + hi) / 2);
        if (Wk(mid) <= W && Kk(mid) <= K)
            lo = mid;
        else
            hi = mid;
    }
    out.k = lo;
    const auto c = lemma9_constants(d, m, lo, alpha, t);
    out.F = c.F;
    out.B = c.bern.C_or_B;
    out.C2 = 2.0 * D * binom;
    if (out.C2 == 0 || out.F == 0) {
        out.raw = 1;
    } else {
        out.raw = 1 - out.C2 * std::exp(-out.k * eps * eps / (out.F * out.F * out.B));
        out.C3_eff = out.k / (K * out.F * out.F * out.B);
    }
    out.probability = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

}  // namespace normnet
