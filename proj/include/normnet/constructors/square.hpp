#pragma once

#include <cmath>
#include <string>

#include "../activations.hpp"
#include "approximator.hpp"

namespace normnet {

struct SquareBuildParams {
    double k = 8;
    double alpha = 1;
    std::string activation = "silu";
};

inline const TaylorSpec& require_taylor(const ActivationEntry& e) {
    if (!e.taylor) throw AssumptionViolated("activation '" + e.tag + "' has no Taylor (Assumption 1) metadata");
    if (e.taylor->a2 == 0) throw AssumptionViolated("activation '" + e.tag + "' has a2 = 0");
    return *e.taylor;
}

inline double square_k0(const TaylorSpec& t, double alpha) { return std::max(1.0, std::pow(t.rho, -2.0 / alpha)); }
inline double product_k0(const TaylorSpec& t, double alpha) { return std::max(1.0, std::pow(2.0 / t.rho, 2.0 / alpha)); }

namespace detail {

// Layers of x -> clip(d (sigma(x0 + w x) + sigma(x0 - w x)) + c) with the given clip tag;
// clip == "" gives the unclipped one-hidden-layer map.
inline std::vector<Layer> square_layers(const std::string& act, double w, double x0, double d, double c, const std::string& clip) {
    Matrix A0(2, 1);
    A0 << w, -w;
    Vector b0 = Vector::Constant(2, x0);
    Matrix A1(1, 2);
    A1 << d, d;
    Vector b1 = Vector::Constant(1, c);
    std::vector<Layer> layers{make_layer(A0, b0, act)};
    if (clip.empty()) {
        layers.push_back(affine_layer(A1, b1));
    } else {
        layers.push_back(make_layer(A1, b1, clip));
        layers.push_back(affine_layer(Matrix::Identity(1, 1), Vector::Zero(1)));
    }
    return layers;
}

inline ArchitectureCert square_cert(const std::vector<Layer>& layers, double K) {
    ArchitectureCert c;
    c.W = 2;
    c.L = layers.size() - 1;
    c.I = constrained_layers(layers);
    c.K = std::max({K, 1.0, product_over(layers, c.I)});
    c.output_dim = 1;
    return c;
}

}  // namespace detail

// x^2 on [0,1]: phi = clip01(d (sigma(w x) + sigma(-w x))), w = k^{-alpha/2}, d = 1/(2 a2 w^2)
inline CertifiedApproximator build_square(const SquareBuildParams& p) {
    const ActivationEntry& e = activation(p.activation);
    const TaylorSpec& t = require_taylor(e);
    if (!(p.alpha > 0)) throw PreconditionError("build_square: alpha must be positive");
    const double k0 = square_k0(t, p.alpha);
    if (p.k < k0) throw PreconditionError("build_square: k = " + std::to_string(p.k) + " below k0 = " + std::to_string(k0));
    const double w = std::pow(p.k, -p.alpha / 2);
    const double d = 1.0 / (2 * t.a2 * w * w);
    const double K = std::pow(p.k, p.alpha) / std::abs(t.a2);

    auto clipped = detail::square_layers(e.tag, w, 0.0, d, 0.0, "clip01");
    auto cert = detail::square_cert(clipped, K);
    auto a = approximator_from_network("x^2", Network(1, std::move(clipped), cert), t.M / std::abs(t.a2) * std::pow(p.k, -p.alpha));
    auto raw = detail::square_layers(e.tag, w, 0.0, d, 0.0, "");
    auto rawc = detail::square_cert(raw, K);
    auto un = std::make_shared<const Network>(1, std::move(raw), rawc);
    a.unclipped = [un](std::span<const double> x) { return un->eval_scalar(x); };
    a.unclipped_network = un;
    a.info = {{"k", p.k}, {"alpha", p.alpha}, {"w_k", w}, {"d_k", d}, {"K", K}, {"k0", k0}, {"M", t.M}, {"a2", t.a2}};
    return a;
}

// Weight of the weak-modulus square builder for a given schedule.
inline double weak_weight(const WeakSpec& s, double k, double alpha) {
    switch (s.schedule) {
        case WeightSchedule::power_law: return std::pow(k, -alpha / s.holder_beta);
        case WeightSchedule::logarithmic: return std::exp(1.0 - std::pow(k, alpha));
        case WeightSchedule::exact: return std::pow(k, -alpha / 2);
    }
    return std::pow(k, -alpha / 2);
}

// x^2 on [0,1] from the even-part expansion sigma(x0+h)+sigma(x0-h)-2sigma(x0) = gamma h^2 + O(omega(h) h^2).
// w_k <= 0 selects the activation's weight schedule.
inline CertifiedApproximator build_square_weak(const std::string& activation_tag, double k, double alpha, double w_k = 0) {
    const ActivationEntry& e = activation(activation_tag);
    if (!e.weak) throw AssumptionViolated("activation '" + e.tag + "' has no weak-modulus metadata");
    const WeakSpec& s = *e.weak;
    if (s.gamma == 0) throw AssumptionViolated("activation '" + e.tag + "' has gamma = 0");
    const double w = w_k > 0 ? w_k : weak_weight(s, k, alpha);
    if (!(w > 0) || w > s.rho) throw PreconditionError("build_square_weak: w_k = " + std::to_string(w) + " outside (0, rho]");
    const double om = s.omega(w);
    if (!std::isfinite(om)) throw PreconditionError("build_square_weak: omega(w_k) is not finite");
    const double d = 1.0 / (s.gamma * w * w);
    const double c = -2.0 * d * e(s.x0);
    const double K = 2.0 / (std::abs(s.gamma) * w * w);

    auto clipped = detail::square_layers(e.tag, w, s.x0, d, c, "clip01");
    auto cert = detail::square_cert(clipped, K);
    auto a = approximator_from_network("x^2", Network(1, std::move(clipped), cert), om / std::abs(s.gamma));
    auto raw = detail::square_layers(e.tag, w, s.x0, d, c, "");
    auto rawc = detail::square_cert(raw, K);
    auto un = std::make_shared<const Network>(1, std::move(raw), rawc);
    a.unclipped_network = un;
    if (s.even_part) {
        // closed form avoids d_k times a difference of nearly equal values
        auto even = s.even_part;
        a.unclipped = [even, w, d](std::span<const double> x) { return d * even(w * x[0]); };
    } else {
        a.unclipped = [un](std::span<const double> x) { return un->eval_scalar(x); };
    }
    a.info = {{"k", k}, {"alpha", alpha}, {"w_k", w}, {"d_k", d}, {"K", K}, {"omega_w", om}, {"gamma", s.gamma}};
    return a;
}

// Least-squares slope of log K_k against log k for build_square outputs.
struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;  // root-mean-square residual in log space
};

inline SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw PreconditionError("fit_loglog: need at least two points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    SlopeFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0) throw PreconditionError("fit_loglog: x values are all equal");
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = std::log(ys[i]) - (f.intercept + f.slope * std::log(xs[i]));
        r2 += r * r;
    }
    f.residual = std::sqrt(r2 / n);
    return f;
}

inline SlopeFit scaling_sweep(const std::string& activation_tag, double alpha, const std::vector<double>& k_list) {
    if (k_list.size() < 2) throw PreconditionError("scaling_sweep: need at least two k values");
    std::vector<double> Ks;
    for (double k : k_list) Ks.push_back(build_square({k, alpha, activation_tag}).cert.K);
    return fit_loglog(k_list, Ks);
}

}  // namespace normnet
