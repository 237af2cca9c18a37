#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "algebra.hpp"
#include "rng.hpp"

namespace normnet {

struct SamplePanel {
    std::vector<std::vector<double>> points;
    double B = 1;
    double s_stat = 0;

    std::size_t n() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points[0].size(); }
};

// s = max_j (n^{-1} sum_i x_{ij}^2)^{1/2}
inline double panel_s_stat(const std::vector<std::vector<double>>& pts) {
    if (pts.empty()) return 0;
    double s = 0;
    for (std::size_t j = 0; j < pts[0].size(); ++j) {
        double acc = 0;
        for (const auto& x : pts) acc += x[j] * x[j];
        s = std::max(s, std::sqrt(acc / static_cast<double>(pts.size())));
    }
    return s;
}

inline SamplePanel make_panel(std::vector<std::vector<double>> pts, double B) {
    if (pts.empty()) throw PreconditionError("panel: no points");
    if (B < 1) throw PreconditionError("panel: B must be >= 1");
    for (const auto& x : pts) {
        if (x.size() != pts[0].size()) throw DimensionError("panel: points of differing dimension");
        for (double v : x)
            if (std::abs(v) > B) throw PreconditionError("panel: point outside [-B, B]^d");
    }
    SamplePanel p;
    p.B = B;
    p.s_stat = panel_s_stat(pts);
    p.points = std::move(pts);
    return p;
}

inline SamplePanel random_panel(std::size_t n, std::size_t d, double B, RngSpec rng) {
    CounterRng g(rng);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (auto& x : pts)
        for (auto& v : x) v = g.uniform(-B, B);
    return make_panel(std::move(pts), B);
}

using FunctionFamily = std::vector<ScalarFn>;

inline FunctionFamily family_of(const std::vector<Network>& nets) {
    FunctionFamily f;
    for (const auto& n : nets) {
        auto p = std::make_shared<const Network>(n);
        f.push_back([p](std::span<const double> x) { return p->eval_scalar(x); });
    }
    return f;
}

// values[f][i] = f(x_i)
inline std::vector<std::vector<double>> family_values(const FunctionFamily& fam, const SamplePanel& panel) {
    if (fam.empty()) throw PreconditionError("rademacher: empty function family");
    std::vector<std::vector<double>> v(fam.size(), std::vector<double>(panel.n()));
    for (std::size_t f = 0; f < fam.size(); ++f)
        for (std::size_t i = 0; i < panel.n(); ++i) v[f][i] = fam[f](panel.points[i]);
    return v;
}

inline constexpr std::size_t kMaxExactN = 20;

// E_xi sup_f (1/n) |sum_i xi_i f(x_i)| by enumerating all 2^n sign vectors.
inline double rademacher_exact(const std::vector<std::vector<double>>& values) {
    if (values.empty()) throw PreconditionError("rademacher: empty function family");
    const std::size_t n = values[0].size();
    if (n > kMaxExactN) throw PreconditionError("rademacher_exact: n = " + std::to_string(n) + " > 20; use rademacher_mc");
    if (n == 0) return 0;
    const std::size_t total = std::size_t{1} << n;
    double acc = 0;
    std::vector<double> sums(values.size());
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double best = 0;
        for (std::size_t f = 0; f < values.size(); ++f) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1u) ? values[f][i] : -values[f][i];
            best = std::max(best, std::abs(s));
        }
        acc += best;
    }
    return acc / static_cast<double>(total) / static_cast<double>(n);
}

inline double rademacher_exact(const FunctionFamily& fam, const SamplePanel& panel) { return rademacher_exact(family_values(fam, panel)); }

struct McEstimate {
    double mean = 0;
    double stderr_ = 0;
    std::size_t trials = 0;
};

inline McEstimate rademacher_mc(const std::vector<std::vector<double>>& values, std::size_t trials, RngSpec rng) {
    if (values.empty()) throw PreconditionError("rademacher: empty function family");
    if (trials < 100) throw PreconditionError("rademacher_mc: need at least 100 trials");
    const std::size_t n = values[0].size();
    CounterRng g(rng);
    double sum = 0, sumsq = 0;
    std::vector<int> xi(n);
    for (std::size_t t = 0; t < trials; ++t) {
        for (auto& v : xi) v = g.sign();
        double best = 0;
        for (const auto& fv : values) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += xi[i] * fv[i];
            best = std::max(best, std::abs(s));
        }
        const double val = best / static_cast<double>(n);
        sum += val;
        sumsq += val * val;
    }
    McEstimate e;
    e.trials = trials;
    e.mean = sum / static_cast<double>(trials);
    const double var = std::max(0.0, (sumsq - sum * sum / static_cast<double>(trials)) / static_cast<double>(trials - 1));
    e.stderr_ = std::sqrt(var / static_cast<double>(trials));
    return e;
}

inline McEstimate rademacher_mc(const FunctionFamily& fam, const SamplePanel& panel, std::size_t trials, RngSpec rng) {
    return rademacher_mc(family_values(fam, panel), trials, rng);
}

// (B K / sqrt n) sqrt(2 (L + 1 + ln d)) for 1-Lipschitz activations
inline double bound_upper(double B, double K, double n, double L, double d) {
    return B * K / std::sqrt(n) * std::sqrt(2 * (L + 1 + std::log(d)));
}

// (1 - alpha) K s / (2 sqrt 2 sqrt n)
inline double bound_lower_relu(double K, double alpha_leak, double s, double n) {
    if (!(alpha_leak >= 0 && alpha_leak < 1)) throw PreconditionError("bound_lower_relu: leak must lie in [0,1)");
    return (1 - alpha_leak) * K * s / (2 * std::numbers::sqrt2 * std::sqrt(n));
}

struct GeneralLowerBound {
    double c_star = 0;    // sigma'(0) / (8 M B^2)
    double value = 0;     // c_star K s^2 / n
    double eps_star = 0;  // sigma'(0) s / (2 sqrt 2 M B^2 sqrt n)
};

inline GeneralLowerBound bound_lower_general(double sigma_prime0, double M, double B, double K, double s, double n) {
    if (!(sigma_prime0 > 0) || !(M > 0)) throw PreconditionError("bound_lower_general: need sigma'(0) > 0 and M > 0");
    GeneralLowerBound g;
    g.c_star = sigma_prime0 / (8 * M * B * B);
    g.value = g.c_star * K * s * s / n;
    g.eps_star = sigma_prime0 * s / (2 * std::numbers::sqrt2 * M * B * B * std::sqrt(n));
    return g;
}

// Linear-remainder constant: sup_{0 < |z| <= delta} |sigma(z) - sigma(0) - sigma'(0) z| / z^2
inline double linear_remainder_constant(const ActivationEntry& e, double delta, int n = 4001) {
    const double s1 = derivative_at_zero(e), s0 = e(0.0);
    double best = 0;
    for (int i = 0; i < n; ++i) {
        const double z = -delta + 2 * delta * i / (n - 1);
        if (std::abs(z) < 1e-3 * delta) continue;
        best = std::max(best, std::abs(e(z) - s0 - s1 * z) / (z * z));
    }
    return best;
}

// x -> (K/2)(sigma(x_j) - sigma(-x_j)), j = 1..d, bias-free
inline std::vector<Network> build_rad_witness_relu(double K, std::size_t d, const std::string& tag = "relu") {
    const ActivationEntry& e = activation(tag);
    if (!e.piecewise || (e.piecewise->kind != PiecewiseKind::relu && e.piecewise->kind != PiecewiseKind::leaky))
        throw PreconditionError("build_rad_witness_relu: activation must be relu or leaky");
    std::vector<Network> fam;
    for (std::size_t j = 0; j < d; ++j) {
        Matrix A0 = Matrix::Zero(2, static_cast<Eigen::Index>(d));
        A0(0, static_cast<Eigen::Index>(j)) = 1;
        A0(1, static_cast<Eigen::Index>(j)) = -1;
        Matrix A1(1, 2);
        A1 << K / 2, -K / 2;
        std::vector<Layer> layers{make_layer(A0, Vector::Zero(2), tag), affine_layer(A1, Vector::Zero(1))};
        ArchitectureCert c;
        c.W = 2;
        c.L = 1;
        c.I = constrained_layers(layers);
        c.K = std::max(K, product_over(layers, c.I));
        fam.emplace_back(d, std::move(layers), c);
    }
    return fam;
}

// x -> (K / sigma'(0)) sigma(eps x_j), j = 1..d, bias-free; needs eps <= sigma'(0) and eps < delta / B
inline std::vector<Network> build_rad_witness_general(double K, std::size_t d, double eps, const std::string& tag, double delta, double B) {
    const ActivationEntry& e = activation(tag);
    const double s1 = derivative_at_zero(e);
    if (!(s1 > 0)) throw PreconditionError("build_rad_witness_general: sigma'(0) must be positive");
    if (!(eps > 0) || eps > s1 || !(eps < delta / B))
        throw PreconditionError("build_rad_witness_general: eps = " + std::to_string(eps) + " outside (0, min(sigma'(0), delta/B))");
    std::vector<Network> fam;
    for (std::size_t j = 0; j < d; ++j) {
        Matrix A0 = Matrix::Zero(2, static_cast<Eigen::Index>(d));
        A0(0, static_cast<Eigen::Index>(j)) = eps;
        Matrix A1(1, 2);
        A1 << K / s1, 0;
        std::vector<Layer> layers{make_layer(A0, Vector::Zero(2), tag), affine_layer(A1, Vector::Zero(1))};
        ArchitectureCert c;
        c.W = 2;
        c.L = 1;
        c.I = constrained_layers(layers);
        c.K = std::max(K * std::max(1.0, 1.0 / s1), product_over(layers, c.I));
        fam.emplace_back(d, std::move(layers), c);
    }
    return fam;
}

// (K^2 L)^{-r/(d - 2r)}
inline double thm1_lower_rate(double K, double L, double d, double r) {
    if (!(d > 2 * r)) throw PreconditionError("thm1_lower_rate: requires d > 2r");
    if (K < 1 || L < 1) throw PreconditionError("thm1_lower_rate: requires K >= 1 and L >= 1");
    return std::pow(K * K * L, -r / (d - 2 * r));
}

}  // namespace normnet
