#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "../algebra.hpp"
#include "square.hpp"

namespace normnet {

namespace detail {

// Rows +-(w,w), +-(w,0), +-(0,w); polarization xy = ((x+y)^2 - x^2 - y^2)/2.
// Row order makes the output exactly 0 when x = 0 or y = 0 (terms cancel in summation order).
inline std::vector<Layer> product2_layers(const std::string& act, double w, double d, bool clip) {
    Matrix A0(6, 2);
    A0 << w, w, w, 0, 0, w, -w, -w, -w, 0, 0, -w;
    Matrix A1(1, 6);
    A1 << 1, -1, -1, 1, -1, -1;
    A1 *= d / 2;
    std::vector<Layer> layers{make_layer(A0, Vector::Zero(6), act)};
    if (clip) {
        layers.push_back(make_layer(A1, Vector::Zero(1), "clip11"));
        layers.push_back(affine_layer(Matrix::Identity(1, 1), Vector::Zero(1)));
    } else {
        layers.push_back(affine_layer(A1, Vector::Zero(1)));
    }
    return layers;
}

inline ArchitectureCert fixed_cert(const std::vector<Layer>& layers, std::size_t W, double K) {
    ArchitectureCert c;
    c.W = W;
    c.L = layers.size() - 1;
    c.I = constrained_layers(layers);
    c.K = std::max({K, 1.0, product_over(layers, c.I)});
    c.output_dim = layers.back().n_out();
    return c;
}

// x -> x through two identity-tagged hidden neurons (odd channel of a tree level)
inline Network passthrough2() {
    std::vector<Layer> layers{make_layer(Matrix::Identity(1, 1), Vector::Zero(1), "identity"),
                              make_layer(Matrix::Identity(1, 1), Vector::Zero(1), "identity"),
                              affine_layer(Matrix::Identity(1, 1), Vector::Zero(1))};
    ArchitectureCert c;
    c.W = 1;
    c.L = 2;
    c.K = 1;
    c.output_dim = 1;
    return Network(1, std::move(layers), c);
}

inline Matrix selection(std::size_t n, const std::vector<std::size_t>& cols) {
    Matrix P = Matrix::Zero(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < cols.size(); ++r) P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols[r])) = 1.0;
    return P;
}

}  // namespace detail

// xy on [-1,1]^2 in NN(6, 2, (3/2) k^alpha/|a2|)
inline CertifiedApproximator build_product2(double k, double alpha, const std::string& activation_tag) {
    const ActivationEntry& e = activation(activation_tag);
    const TaylorSpec& t = require_taylor(e);
    if (!(alpha > 0)) throw PreconditionError("build_product2: alpha must be positive");
    const double k0 = product_k0(t, alpha);
    if (k < k0) throw PreconditionError("build_product2: k = " + std::to_string(k) + " below k0 = " + std::to_string(k0));
    const double w = std::pow(k, -alpha / 2);
    const double d = 1.0 / (2 * t.a2 * w * w);
    const double K = 1.5 * std::pow(k, alpha) / std::abs(t.a2);
    auto layers = detail::product2_layers(e.tag, w, d, true);
    auto cert = detail::fixed_cert(layers, 6, K);
    auto a = approximator_from_network("xy", Network(2, std::move(layers), cert), 9 * t.M / std::abs(t.a2) * std::pow(k, -alpha));
    auto raw = detail::product2_layers(e.tag, w, d, false);
    auto rawc = detail::fixed_cert(raw, 6, K);
    auto un = std::make_shared<const Network>(2, std::move(raw), rawc);
    a.unclipped = [un](std::span<const double> x) { return un->eval_scalar(x); };
    a.info = {{"k", k}, {"alpha", alpha}, {"w_k", w}, {"d_k", d}, {"K", K}, {"k0", k0}, {"M", t.M}, {"a2", t.a2}};
    return a;
}

// Binary product tree: one network per level, each mapping n channels to ceil(n/2).
struct ProductTree {
    CertifiedApproximator approx;
    std::vector<Network> levels;
    double eps_k = 0;  // per-block error bound C* k^{-alpha}
};

// One tree level from a pairwise block: channels (2p, 2p+1) -> block, odd tail passed through.
inline Network tree_level(const Network& block, std::size_t n) {
    std::vector<Network> parts;
    for (std::size_t p = 0; p + 1 < n; p += 2) parts.push_back(compose_affine(block, detail::selection(n, {p, p + 1}), Vector::Zero(2)));
    if (n % 2 == 1) parts.push_back(compose_affine(detail::passthrough2(), detail::selection(n, {n - 1}), Vector::Zero(1)));
    Network level = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) level = concat(level, parts[i]);
    return level;
}

inline Network compose_levels(const std::vector<Network>& levels) {
    Network net = levels[0];
    for (std::size_t i = 1; i < levels.size(); ++i) net = compose(levels[i], net);
    return net;
}

// x_1 ... x_d on [-1,1]^d; W = 6 ceil(d/2), L = 2 ceil(log2 d), K = [(3/2) k^alpha/|a2|]^{ceil(log2 d)}
inline ProductTree build_product_tree(std::size_t d, double k, double alpha, const std::string& activation_tag) {
    if (d == 0) throw PreconditionError("build_product_d: d must be >= 1");
    const ActivationEntry& e = activation(activation_tag);
    const TaylorSpec& t = require_taylor(e);
    const double Cstar = 9 * t.M / std::abs(t.a2);
    const int D = ceil_log2(d);
    ProductTree tree;
    tree.eps_k = Cstar * std::pow(k, -alpha);
    if (d == 1) {
        tree.approx = approximator_from_network("prod_1", identity_network(1), 0.0);
        tree.approx.info = {{"k", k}, {"alpha", alpha}, {"levels", 0}};
        return tree;
    }
    const auto block = build_product2(k, alpha, activation_tag);
    std::size_t n = d;
    while (n > 1) {
        tree.levels.push_back(tree_level(*block.network, n));
        n = (n + 1) / 2;
    }
    Network net = compose_levels(tree.levels);
    const double K = std::pow(block.cert.K, D);
    ArchitectureCert c = net.cert();
    c.W = std::max<std::size_t>(c.W, 6 * ((d + 1) / 2));
    c.L = std::max<std::size_t>(c.L, 2 * static_cast<std::size_t>(D));
    c.K = std::max(c.K, K);
    std::vector<Layer> layers = net.layers();
    Network certified(d, std::move(layers), c);
    tree.approx = approximator_from_network("prod_" + std::to_string(d), std::move(certified), (std::pow(2.0, D) - 1) * Cstar * std::pow(k, -alpha));
    tree.approx.info = block.info;
    tree.approx.info["levels"] = D;
    tree.approx.info["C_star"] = Cstar;
    tree.approx.info["K"] = K;
    return tree;
}

inline CertifiedApproximator build_product_d(std::size_t d, double k, double alpha, const std::string& activation_tag) {
    return build_product_tree(d, k, alpha, activation_tag).approx;
}

// Level-by-level errors of the tree on a set of points: eps[l] is the max
// deviation of level l's outputs from the exact partial products.
inline std::vector<double> product_tree_level_errors(const ProductTree& tree, const std::vector<std::vector<double>>& points) {
    std::vector<double> eps(tree.levels.size() + 1, 0.0);
    for (const auto& x : points) {
        std::vector<double> cur = x, exact = x;
        for (std::size_t l = 0; l < tree.levels.size(); ++l) {
            cur = tree.levels[l].eval(cur);
            std::vector<double> next;
            for (std::size_t p = 0; p < exact.size(); p += 2) next.push_back(p + 1 < exact.size() ? exact[p] * exact[p + 1] : exact[p]);
            exact = std::move(next);
            for (std::size_t i = 0; i < cur.size(); ++i) eps[l + 1] = std::max(eps[l + 1], std::abs(cur[i] - exact[i]));
        }
    }
    return eps;
}

}  // namespace normnet
