#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "network.hpp"

namespace normnet {

// x -> x on R^d as a single affine layer
inline Network identity_network(std::size_t d) {
    ArchitectureCert c;
    c.W = 1;
    c.L = 0;
    c.K = 1;
    c.output_dim = d;
    return Network(d, {affine_layer(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)), Vector::Zero(static_cast<Eigen::Index>(d)))}, c);
}

// x -> A x + b as a network with no hidden layer
inline Network affine_network(const Matrix& A, const Vector& b) {
    ArchitectureCert c;
    c.W = 1;
    c.L = 0;
    c.output_dim = static_cast<std::size_t>(A.rows());
    std::vector<Layer> layers{affine_layer(A, b)};
    c.I = constrained_layers(layers);
    c.K = std::max(1.0, product_over(layers, c.I));
    return Network(static_cast<std::size_t>(A.cols()), std::move(layers), c);
}

namespace detail {

// Inserts identity hidden layers in front of the final layer.
inline std::vector<Layer> pad_depth(const std::vector<Layer>& layers, std::size_t extra) {
    std::vector<Layer> out(layers.begin(), layers.end() - 1);
    const auto n = static_cast<Eigen::Index>(layers.back().n_in());
    for (std::size_t i = 0; i < extra; ++i) out.push_back(make_layer(Matrix::Identity(n, n), Vector::Zero(n), "identity"));
    out.push_back(layers.back());
    return out;
}

inline Matrix block_diag(const Matrix& A, const Matrix& B) {
    Matrix M = Matrix::Zero(A.rows() + B.rows(), A.cols() + B.cols());
    M.topLeftCorner(A.rows(), A.cols()) = A;
    M.bottomRightCorner(B.rows(), B.cols()) = B;
    return M;
}

inline Vector stack(const Vector& a, const Vector& b) {
    Vector v(a.size() + b.size());
    v << a, b;
    return v;
}

inline std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline ArchitectureCert derived_cert(const std::vector<Layer>& layers, std::size_t W, std::size_t L, double K) {
    ArchitectureCert c;
    c.W = std::max<std::size_t>(W, 1);
    c.L = L;
    c.I = constrained_layers(layers);
    // Lipschitz-style K can undershoot the realized norm product (mismatched
    // layer profiles in concat/lincomb); a zero combination gives K = 0
    c.K = std::max(K > 0 ? K : 1.0, product_over(layers, c.I));
    c.output_dim = layers.back().n_out();
    return c;
}

}  // namespace detail

// Same function with certificate (W2, L2, K): identity layers are inserted
// before the output layer and hidden layers get zero channels up to width W2.
inline Network pad(const Network& net, std::size_t W2, std::size_t L2) {
    if (W2 < net.cert().W || L2 < net.cert().L)
        throw PreconditionError("pad: target (W, L) = (" + std::to_string(W2) + ", " + std::to_string(L2) + ") below current (" +
                                std::to_string(net.cert().W) + ", " + std::to_string(net.cert().L) + ")");
    const std::size_t extra = L2 - net.depth();
    if (extra > 0 && net.layers().back().n_in() > W2)
        throw PreconditionError("pad: identity layers would need width " + std::to_string(net.layers().back().n_in()) + " > W2");
    std::vector<Layer> layers = detail::pad_depth(net.layers(), extra);
    const auto Wt = static_cast<Eigen::Index>(W2);
    // hidden layers are widened with zero channels only when the width bound grows
    for (std::size_t l = 0; W2 > net.cert().W && l + 1 < layers.size(); ++l) {
        Layer& L = layers[l];
        const auto n = static_cast<Eigen::Index>(L.n_out());
        if (n >= Wt) continue;
        Matrix A = Matrix::Zero(Wt, L.weights.cols());
        A.topRows(n) = L.weights;
        Vector b = Vector::Zero(Wt);
        b.head(n) = L.bias;
        L.activations.resize(W2, "identity");
        L.weights = std::move(A);
        L.bias = std::move(b);
        Layer& next = layers[l + 1];
        Matrix B = Matrix::Zero(next.weights.rows(), Wt);
        B.leftCols(n) = next.weights;
        next.weights = std::move(B);
    }
    ArchitectureCert c = net.cert();
    c.W = W2;
    c.L = L2;
    c.I = constrained_layers(layers);
    return Network(net.input_dim(), std::move(layers), c);
}

// outer o inner, fusing inner's output layer into outer's first layer.
inline Network compose(const Network& outer, const Network& inner) {
    if (inner.output_dim() != outer.input_dim())
        throw DimensionError("compose: inner output dim " + std::to_string(inner.output_dim()) + " != outer input dim " + std::to_string(outer.input_dim()));
    const auto& Li = inner.layers();
    const auto& Lo = outer.layers();
    std::vector<Layer> layers(Li.begin(), Li.end() - 1);
    const Layer& last = Li.back();
    const Layer& first = Lo.front();
    Matrix A = first.weights * last.weights;
    Vector b = first.weights * last.bias + first.bias;
    layers.push_back(make_layer(std::move(A), std::move(b), first.activations));
    layers.insert(layers.end(), Lo.begin() + 1, Lo.end());
    auto c = detail::derived_cert(layers, std::max(inner.cert().W, outer.cert().W), inner.cert().L + outer.cert().L,
                                  inner.cert().K * outer.cert().K);
    return Network(inner.input_dim(), std::move(layers), c);
}

// x -> net(A x + b)
inline Network compose_affine(const Network& net, const Matrix& A, const Vector& b) {
    if (static_cast<std::size_t>(A.rows()) != net.input_dim())
        throw DimensionError("compose_affine: A has " + std::to_string(A.rows()) + " rows, network expects " + std::to_string(net.input_dim()));
    if (b.size() != A.rows()) throw DimensionError("compose_affine: b length differs from A rows");
    std::vector<Layer> layers = net.layers();
    Layer& f = layers.front();
    Vector nb = f.weights * b + f.bias;
    Matrix nA = f.weights * A;
    f.weights = std::move(nA);
    f.bias = std::move(nb);
    const double scale = std::max(1.0, op_norm_inf(A, b));
    auto c = detail::derived_cert(layers, net.cert().W, net.cert().L, scale * net.cert().K);
    return Network(static_cast<std::size_t>(A.cols()), std::move(layers), c);
}

namespace detail {

inline std::vector<Layer> parallel_layers(const Network& a, const Network& b) {
    const std::size_t L = std::max(a.depth(), b.depth());
    auto la = pad_depth(a.layers(), L - a.depth());
    auto lb = pad_depth(b.layers(), L - b.depth());
    std::vector<Layer> out;
    out.push_back(make_layer(
        [&] {
            Matrix M(la[0].weights.rows() + lb[0].weights.rows(), la[0].weights.cols());
            M << la[0].weights, lb[0].weights;
            return M;
        }(),
        stack(la[0].bias, lb[0].bias), join(la[0].activations, lb[0].activations)));
    for (std::size_t l = 1; l < la.size(); ++l)
        out.push_back(make_layer(block_diag(la[l].weights, lb[l].weights), stack(la[l].bias, lb[l].bias), join(la[l].activations, lb[l].activations)));
    return out;
}

}  // namespace detail

// x -> (a(x), b(x))
inline Network concat(const Network& a, const Network& b) {
    if (a.input_dim() != b.input_dim())
        throw DimensionError("concat: input dims differ (" + std::to_string(a.input_dim()) + " vs " + std::to_string(b.input_dim()) + ")");
    auto layers = detail::parallel_layers(a, b);
    auto c = detail::derived_cert(layers, a.cert().W + b.cert().W, std::max(a.cert().L, b.cert().L), std::max(a.cert().K, b.cert().K));
    return Network(a.input_dim(), std::move(layers), c);
}

// x -> c1 a(x) + c2 b(x)
inline Network lincomb(double c1, const Network& a, double c2, const Network& b) {
    if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim()) throw DimensionError("lincomb: input or output dims differ");
    auto layers = detail::parallel_layers(a, b);
    Layer& last = layers.back();
    const auto na = static_cast<Eigen::Index>(a.output_dim());
    Matrix A(na, last.weights.cols());
    A << c1 * last.weights.topLeftCorner(na, a.layers().back().weights.cols()),
        c2 * last.weights.bottomRightCorner(na, b.layers().back().weights.cols());
    Vector bias = c1 * last.bias.head(na) + c2 * last.bias.tail(na);
    last = affine_layer(std::move(A), std::move(bias));
    auto c = detail::derived_cert(layers, a.cert().W + b.cert().W, std::max(a.cert().L, b.cert().L),
                                  std::abs(c1) * a.cert().K + std::abs(c2) * b.cert().K);
    return Network(a.input_dim(), std::move(layers), c);
}

// sum_i c_i net_i as a left fold of lincomb
inline Network lincomb(const std::vector<double>& coeffs, const std::vector<Network>& nets) {
    if (coeffs.empty() || coeffs.size() != nets.size()) throw DimensionError("lincomb: coefficient and network counts differ or are empty");
    std::vector<Layer> layers = nets[0].layers();
    layers.back().weights *= coeffs[0];
    layers.back().bias *= coeffs[0];
    const auto& c0 = nets[0].cert();
    Network acc(nets[0].input_dim(), layers, detail::derived_cert(layers, c0.W, c0.L, std::abs(coeffs[0]) * c0.K));
    std::size_t W = c0.W, L = c0.L;
    double K = std::abs(coeffs[0]) * c0.K;
    for (std::size_t i = 1; i < nets.size(); ++i) {
        acc = lincomb(1.0, acc, coeffs[i], nets[i]);
        W += nets[i].cert().W;
        L = std::max(L, nets[i].cert().L);
        K += std::abs(coeffs[i]) * nets[i].cert().K;
    }
    // intermediate certs are clamped at 1, so the sum is taken over the original terms
    auto layers_out = acc.layers();
    return Network(acc.input_dim(), layers_out, detail::derived_cert(layers_out, W, L, K));
}

}  // namespace normnet
