#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "activations.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace normnet {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kStructTol = 1e-12;
inline constexpr double kCertSlack = 1e-9;

inline double op_norm_inf(const Matrix& A) {
    if (A.size() == 0) throw DimensionError("op_norm_inf: empty matrix");
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

// ||(A, b)|| = max_i (sum_j |A_ij| + |b_i|)
inline double op_norm_inf(const Matrix& A, const Vector& b) {
    if (A.rows() == 0) throw DimensionError("op_norm_inf: empty matrix");
    if (b.size() != A.rows()) throw DimensionError("op_norm_inf: bias length differs from row count");
    return (A.cwiseAbs().rowwise().sum() + b.cwiseAbs()).maxCoeff();
}

struct Layer {
    Matrix weights;
    Vector bias;
    std::vector<std::string> activations;

    std::size_t n_out() const { return static_cast<std::size_t>(weights.rows()); }
    std::size_t n_in() const { return static_cast<std::size_t>(weights.cols()); }
    double norm() const { return op_norm_inf(weights, bias); }

    bool operator==(const Layer& o) const {
        return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() && weights == o.weights &&
               bias == o.bias && activations == o.activations;
    }
};

inline Layer make_layer(Matrix A, Vector b, std::vector<std::string> acts) {
    return Layer{std::move(A), std::move(b), std::move(acts)};
}

inline Layer make_layer(Matrix A, Vector b, const std::string& act) {
    std::vector<std::string> acts(static_cast<std::size_t>(A.rows()), act);
    return Layer{std::move(A), std::move(b), std::move(acts)};
}

// Final affine layer (identity activations).
inline Layer affine_layer(Matrix A, Vector b) { return make_layer(std::move(A), std::move(b), "identity"); }

struct ArchitectureCert {
    std::size_t W = 1;
    std::size_t L = 0;
    double K = 1;
    std::vector<std::size_t> I;
    std::size_t output_dim = 1;

    bool operator==(const ArchitectureCert&) const = default;
};

struct NormReport {
    bool ok = true;
    std::vector<double> norms;
    double product = 1;
    std::vector<std::size_t> offending;
    std::string message;
};

class Network {
public:
    Network() = default;

    Network(std::size_t input_dim, std::vector<Layer> layers, ArchitectureCert cert, const Registry& reg = builtin_registry())
        : input_dim_(input_dim), layers_(std::move(layers)), cert_(std::move(cert)) {
        validate(reg);
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().n_out(); }
    const std::vector<Layer>& layers() const { return layers_; }
    const ArchitectureCert& cert() const { return cert_; }
    std::size_t depth() const { return layers_.size() - 1; }

    std::size_t width() const {
        std::size_t w = 0;
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) w = std::max(w, layers_[l].n_out());
        return w;
    }

    std::vector<double> layer_norms() const {
        std::vector<double> out;
        for (auto& L : layers_) out.push_back(L.norm());
        return out;
    }

    const ActivationEntry& activation_of(std::size_t layer, std::size_t neuron) const { return *acts_[layer][neuron]; }

    void eval(const double* x, double* out) const {
        thread_local std::vector<double> a, b;
        const std::size_t maxw = max_dim_;
        if (a.size() < maxw) a.resize(maxw);
        if (b.size() < maxw) b.resize(maxw);
        for (std::size_t j = 0; j < input_dim_; ++j) {
            if (!std::isfinite(x[j])) throw NonFiniteError("eval: non-finite input", 0);
            a[j] = x[j];
        }
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& L = layers_[l];
            const std::size_t n = L.n_out(), m = L.n_in();
            const double* W = L.weights.data();
            const auto& acts = acts_[l];
            for (std::size_t i = 0; i < n; ++i) {
                double s = L.bias[static_cast<Eigen::Index>(i)];
                const double* row = W + i * m;
                for (std::size_t j = 0; j < m; ++j) s += row[j] * a[j];
                const double v = (*acts[i])(s);
                if (!std::isfinite(v)) {
                    std::ostringstream msg;
                    msg << "eval: non-finite value at layer " << l << ", neuron " << i;
                    throw NonFiniteError(msg.str(), l);
                }
                b[i] = v;
            }
            std::swap(a, b);
        }
        for (std::size_t i = 0; i < output_dim(); ++i) out[i] = a[i];
    }

    std::vector<double> eval(std::span<const double> x) const {
        if (x.size() != input_dim_) throw DimensionError("eval: input length " + std::to_string(x.size()) + " != input_dim " + std::to_string(input_dim_));
        std::vector<double> out(output_dim());
        eval(x.data(), out.data());
        return out;
    }

    double eval_scalar(std::span<const double> x) const {
        if (output_dim() != 1) throw DimensionError("eval_scalar: network output is not scalar");
        return eval(x)[0];
    }

    double operator()(double x) const {
        const double in[1] = {x};
        return eval_scalar(std::span<const double>(in, 1));
    }

    bool operator==(const Network& o) const {
        return input_dim_ == o.input_dim_ && layers_ == o.layers_ && cert_ == o.cert_;
    }

private:
    void validate(const Registry& reg) {
        if (input_dim_ == 0) throw DimensionError("network: input_dim must be positive");
        if (layers_.empty()) throw DimensionError("network: at least one layer required");
        std::size_t prev = input_dim_;
        max_dim_ = input_dim_;
        acts_.clear();
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& L = layers_[l];
            const std::string where = "layer " + std::to_string(l);
            if (L.n_out() == 0) throw DimensionError(where + ": no neurons");
            if (L.n_in() != prev) throw DimensionError(where + ": expects " + std::to_string(L.n_in()) + " inputs but previous layer has " + std::to_string(prev));
            if (static_cast<std::size_t>(L.bias.size()) != L.n_out()) throw DimensionError(where + ": bias length differs from weight row count");
            if (L.activations.size() != L.n_out()) throw DimensionError(where + ": activation count differs from weight row count");
            if (!L.weights.allFinite() || !L.bias.allFinite()) throw NonFiniteError(where + ": non-finite weights", l);
            std::vector<const ActivationEntry*> acts;
            for (auto& tag : L.activations) {
                const ActivationEntry& e = reg.lookup(tag);
                if (l + 1 == layers_.size() && !(e.piecewise && e.piecewise->kind == PiecewiseKind::identity))
                    throw DimensionError(where + ": final layer must use identity activations, got '" + tag + "'");
                acts.push_back(&e);
            }
            acts_.push_back(std::move(acts));
            prev = L.n_out();
            max_dim_ = std::max(max_dim_, prev);
        }
        if (cert_.output_dim != prev) throw DimensionError("network: cert output_dim " + std::to_string(cert_.output_dim) + " != final layer size " + std::to_string(prev));
        if (width() > cert_.W) throw DimensionError("network: width " + std::to_string(width()) + " exceeds cert W " + std::to_string(cert_.W));
        if (depth() > cert_.L) throw DimensionError("network: depth " + std::to_string(depth()) + " exceeds cert L " + std::to_string(cert_.L));
        if (!(cert_.K > 0) || !std::isfinite(cert_.K)) throw DimensionError("network: cert K must be positive and finite");
        for (auto i : cert_.I) {
            if (i >= layers_.size()) throw DimensionError("network: cert I references layer " + std::to_string(i) + " beyond depth");
        }
    }

    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
    ArchitectureCert cert_;
    std::vector<std::vector<const ActivationEntry*>> acts_;
    std::size_t max_dim_ = 0;
};

// Layers whose norm exceeds 1 form the constrained set.
inline std::vector<std::size_t> constrained_layers(const std::vector<Layer>& layers) {
    std::vector<std::size_t> I;
    for (std::size_t l = 0; l < layers.size(); ++l)
        if (layers[l].norm() > 1 + kStructTol) I.push_back(l);
    return I;
}

inline double product_over(const std::vector<Layer>& layers, const std::vector<std::size_t>& I) {
    double p = 1;
    for (auto i : I) p *= layers[i].norm();
    return p;
}

// Network whose cert is the tightest Def-2 certificate of its own layers.
inline Network network_with_tight_cert(std::size_t input_dim, std::vector<Layer> layers) {
    ArchitectureCert c;
    c.output_dim = layers.back().n_out();
    c.L = layers.size() - 1;
    std::size_t w = 1;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) w = std::max(w, layers[l].n_out());
    c.W = w;
    c.I = constrained_layers(layers);
    c.K = std::max(1.0, product_over(layers, c.I));
    return Network(input_dim, std::move(layers), std::move(c));
}

inline NormReport check_norm_constraint(const Network& net) {
    NormReport r;
    r.norms = net.layer_norms();
    const auto& I = net.cert().I;
    std::vector<bool> in_I(r.norms.size(), false);
    for (auto i : I) in_I[i] = true;
    std::ostringstream msg;
    for (std::size_t l = 0; l < r.norms.size(); ++l) {
        if (in_I[l]) {
            r.product *= r.norms[l];
            if (r.norms[l] < 1 - kStructTol) {
                r.ok = false;
                r.offending.push_back(l);
                msg << "layer " << l << " in I has norm " << r.norms[l] << " < 1; ";
            }
        } else if (r.norms[l] > 1 + kStructTol) {
            r.ok = false;
            r.offending.push_back(l);
            msg << "layer " << l << " outside I has norm " << r.norms[l] << " > 1; ";
        }
    }
    if (r.product > net.cert().K * (1 + kStructTol)) {
        r.ok = false;
        msg << "product over I " << r.product << " exceeds K " << net.cert().K << "; ";
    }
    r.message = msg.str();
    return r;
}

// Axis-aligned box sampled on a tensor grid.
struct EvalGrid {
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t points_per_axis = 2;

    EvalGrid() = default;
    EvalGrid(std::vector<double> lo, std::vector<double> hi, std::size_t n) : lower(std::move(lo)), upper(std::move(hi)), points_per_axis(n) {
        if (lower.size() != upper.size() || lower.empty()) throw DimensionError("grid: bound lengths differ or are empty");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw PreconditionError("grid: lower must be < upper on each axis");
        if (points_per_axis < 1) throw PreconditionError("grid: need at least one point per axis");
    }

    static EvalGrid cube(std::size_t dim, double lo, double hi, std::size_t n) {
        return EvalGrid(std::vector<double>(dim, lo), std::vector<double>(dim, hi), n);
    }

    // 1D: 10^5 + 1 points; d >= 2: largest per-axis count with total <= 10^6
    static EvalGrid default_for(std::size_t dim, double lo, double hi) {
        if (dim == 1) return cube(1, lo, hi, 100001);
        auto n = static_cast<std::size_t>(std::floor(std::pow(1e6, 1.0 / static_cast<double>(dim)) + 1e-9));
        return cube(dim, lo, hi, std::max<std::size_t>(n, 2));
    }

    std::size_t dim() const { return lower.size(); }

    std::size_t size() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < dim(); ++i) n *= points_per_axis;
        return n;
    }

    double coord(std::size_t axis, std::size_t i) const {
        if (points_per_axis == 1) return 0.5 * (lower[axis] + upper[axis]);
        return lower[axis] + (upper[axis] - lower[axis]) * static_cast<double>(i) / static_cast<double>(points_per_axis - 1);
    }

    void point(std::size_t idx, double* x) const {
        for (std::size_t a = 0; a < dim(); ++a) {
            x[a] = coord(a, idx % points_per_axis);
            idx /= points_per_axis;
        }
    }
};

using ScalarFn = std::function<double(std::span<const double>)>;

// max over grid of |f(x) - g(x)|; g is any scalar evaluator
inline double sup_error(const ScalarFn& f, const ScalarFn& g, const EvalGrid& grid, unsigned threads = default_threads()) {
    const std::size_t n = grid.size(), chunk = 4096;
    std::vector<double> part(chunk_count(n, chunk), 0.0);
    parallel_chunks(n, chunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::vector<double> x(grid.dim());
        double m = 0;
        for (std::size_t i = b; i < e; ++i) {
            grid.point(i, x.data());
            m = std::max(m, std::abs(f(x) - g(x)));
        }
        part[c] = m;
    });
    double m = 0;
    for (double v : part) m = std::max(m, v);
    return m;
}

inline ScalarFn as_scalar_fn(const Network& net) {
    return [&net](std::span<const double> x) { return net.eval_scalar(x); };
}

inline double sup_error(const ScalarFn& f, const Network& net, const EvalGrid& grid, unsigned threads = default_threads()) {
    if (grid.dim() != net.input_dim()) throw DimensionError("sup_error: grid dimension differs from network input_dim");
    return sup_error(f, as_scalar_fn(net), grid, threads);
}

using VectorFn = std::function<std::vector<double>(std::span<const double>)>;

// max over sampled pairs of ||f(x) - f(y)||_inf / ||x - y||_inf. Half of the
// pairs are independent draws in the box, half are local perturbations.
inline double measure_lipschitz_empirical(const VectorFn& f, std::size_t dim, std::size_t n_pairs, std::uint64_t seed,
                                          double lo = -1.0, double hi = 1.0) {
    if (n_pairs < 1) throw PreconditionError("measure_lipschitz_empirical: n_pairs must be >= 1");
    CounterRng rng(seed, 0x11b5);
    std::vector<double> x(dim), y(dim);
    double best = 0;
    for (std::size_t p = 0; p < n_pairs; ++p) {
        double dist = 0;
        do {
            for (std::size_t i = 0; i < dim; ++i) x[i] = rng.uniform(lo, hi);
            if (p % 2 == 0) {
                for (std::size_t i = 0; i < dim; ++i) y[i] = rng.uniform(lo, hi);
            } else {
                const double r = (hi - lo) * 1e-3;
                for (std::size_t i = 0; i < dim; ++i) y[i] = std::clamp(x[i] + rng.uniform(-r, r), lo, hi);
            }
            dist = 0;
            for (std::size_t i = 0; i < dim; ++i) dist = std::max(dist, std::abs(x[i] - y[i]));
        } while (dist == 0);
        const auto fx = f(x), fy = f(y);
        double num = 0;
        for (std::size_t i = 0; i < fx.size(); ++i) num = std::max(num, std::abs(fx[i] - fy[i]));
        best = std::max(best, num / dist);
    }
    return best;
}

inline double measure_lipschitz_empirical(const Network& net, std::size_t n_pairs, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    return measure_lipschitz_empirical([&net](std::span<const double> x) { return net.eval(x); }, net.input_dim(), n_pairs, seed, lo, hi);
}

// Bias-free form acting on (x, 1). The constant channel of hidden layer l
// carries sigma_l(1), where sigma_l is the activation of that layer's first
// neuron; later layers divide by it.
inline Network augment(const Network& net) {
    const auto& Ls = net.layers();
    std::vector<Layer> out;
    double c_prev = 1.0;
    for (std::size_t l = 0; l < Ls.size(); ++l) {
        const Layer& L = Ls[l];
        const bool last = l + 1 == Ls.size();
        const auto n = static_cast<Eigen::Index>(L.n_out()), m = static_cast<Eigen::Index>(L.n_in());
        const Eigen::Index rows = last ? n : n + 1;
        Matrix A = Matrix::Zero(rows, m + 1);
        A.topLeftCorner(n, m) = L.weights;
        A.block(0, m, n, 1) = L.bias / c_prev;
        std::vector<std::string> acts = L.activations;
        if (!last) {
            A(n, m) = 1.0 / c_prev;
            const std::string& tag = L.activations.front();
            const double c = net.activation_of(l, 0)(1.0);
            if (std::abs(c) <= kStructTol)
                throw UnsupportedNormalization("augment: activation '" + tag + "' of layer " + std::to_string(l) + " has sigma(1) = 0");
            acts.push_back(tag);
            c_prev = c;
        }
        out.push_back(make_layer(std::move(A), Vector::Zero(rows), std::move(acts)));
    }
    ArchitectureCert c = net.cert();
    c.W = net.cert().W + 1;
    c.I = constrained_layers(out);
    c.K = std::max(net.cert().K, product_over(out, c.I));
    return Network(net.input_dim() + 1, std::move(out), std::move(c));
}

inline std::vector<double> eval_augmented(const Network& aug, std::span<const double> x) {
    std::vector<double> xt(x.begin(), x.end());
    xt.push_back(1.0);
    return aug.eval(xt);
}

}  // namespace normnet
