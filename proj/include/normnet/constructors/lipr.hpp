#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "../algebra.hpp"
#include "product.hpp"

namespace normnet {

using MultiIndex = std::vector<int>;

// All s in N^d with |s| <= m, ordered by degree then lexicographically (descending first coordinate).
inline std::vector<MultiIndex> multi_indices(std::size_t d, int m) {
    std::vector<MultiIndex> out;
    for (int deg = 0; deg <= m; ++deg) {
        MultiIndex s(d, 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            if (i + 1 == d) {
                s[i] = left;
                out.push_back(s);
                return;
            }
            for (int v = left; v >= 0; --v) {
                s[i] = v;
                rec(i + 1, left - v);
            }
        };
        rec(0, deg);
    }
    return out;
}

inline int degree(const MultiIndex& s) { return std::accumulate(s.begin(), s.end(), 0); }

inline double multi_factorial(const MultiIndex& s) {
    double f = 1;
    for (int v : s)
        for (int i = 2; i <= v; ++i) f *= i;
    return f;
}

inline double monomial(const MultiIndex& s, std::span<const double> z) {
    double p = 1;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int e = 0; e < s[i]; ++e) p *= z[i];
    return p;
}

// Target function with optional analytic partials; H is the Hölder constant
// of the order-m partials (1 for the unit ball of Lip_r).
struct LiprTarget {
    std::string name;
    std::function<double(std::span<const double>)> f;
    std::function<double(std::span<const double>, const MultiIndex&)> partial;
    double holder_const = 1;
};

// Nested second-order central differences, step h per derivative order.
inline double fd_partial(const std::function<double(std::span<const double>)>& f, std::span<const double> x, const MultiIndex& s, double h = 1e-4) {
    std::size_t axis = s.size();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] > 0) {
            axis = i;
            break;
        }
    if (axis == s.size()) return f(x);
    MultiIndex rest = s;
    rest[axis] -= 1;
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    xp[axis] += h;
    xm[axis] -= h;
    return (fd_partial(f, xp, rest, h) - fd_partial(f, xm, rest, h)) / (2 * h);
}

inline double target_partial(const LiprTarget& t, std::span<const double> x, const MultiIndex& s) {
    if (degree(s) == 0) return t.f(x);
    if (t.partial) return t.partial(x, s);
    return fd_partial(t.f, x, s);
}

struct LiprBuildParams {
    std::size_t d = 1;
    int m = 0;
    double beta = 1;
    double alpha = 1;
    double gamma = 0;  // <= 0 selects alpha / r
    double k = 8;
    std::string activation = "silu";

    double r() const { return m + beta; }
    double mesh_gamma() const { return gamma > 0 ? gamma : alpha / r(); }
};

inline std::size_t cubes_per_axis(double k, double gamma) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(std::pow(k, gamma) - 1e-9)));
}

inline constexpr std::size_t kMaxCubes = std::size_t{1} << 20;

// phi(x) = sum_j rho_j(x) sum_s c_{j,s} M_s(x - x_j) over a uniform cube
// partition; rho_j are normalized products of hat functions of half-width h.
class LiprComposite {
public:
    std::size_t d = 1;
    std::size_t n_axis = 1;
    double h = 1;
    std::vector<MultiIndex> indices;
    std::vector<std::shared_ptr<const Network>> monomials;  // null for s = 0
    std::vector<double> coeffs;                               // cube-major, coeffs[j * indices.size() + s]

    std::size_t n_cubes() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < d; ++i) n *= n_axis;
        return n;
    }

    double center(std::size_t axis_index) const { return (static_cast<double>(axis_index) + 0.5) * h; }

    std::vector<double> cube_center(std::size_t j) const {
        std::vector<double> c(d);
        for (std::size_t a = 0; a < d; ++a) {
            c[a] = center(j % n_axis);
            j /= n_axis;
        }
        return c;
    }

    // (cube index, rho_j(x)) for the cubes whose bump is positive at x
    std::vector<std::pair<std::size_t, double>> partition(std::span<const double> x) const {
        std::vector<std::pair<std::size_t, double>> act{{0, 1.0}};
        std::size_t stride = 1;
        for (std::size_t a = 0; a < d; ++a) {
            std::vector<std::pair<std::size_t, double>> next;
            const auto i0 = static_cast<long long>(std::floor(x[a] / h - 0.5));
            for (long long i = i0; i <= i0 + 1; ++i) {
                if (i < 0 || i >= static_cast<long long>(n_axis)) continue;
                const double f = 1.0 - std::abs(x[a] - center(static_cast<std::size_t>(i))) / h;
                if (f <= 0) continue;
                for (auto& [j, eta] : act) next.emplace_back(j + static_cast<std::size_t>(i) * stride, eta * f);
            }
            act = std::move(next);
            stride *= n_axis;
        }
        double den = 0;
        for (auto& [j, eta] : act) den += eta;
        if (!(den > 0)) throw PreconditionError("lipr: input outside [0,1]^d");
        for (auto& [j, eta] : act) eta /= den;
        return act;
    }

    // sum_s c_{j,s} M_s(x - x_j)
    double local(std::size_t j, std::span<const double> x) const {
        const auto c = cube_center(j);
        std::vector<double> z(d);
        for (std::size_t a = 0; a < d; ++a) z[a] = x[a] - c[a];
        double v = 0;
        const std::size_t ns = indices.size();
        for (std::size_t s = 0; s < ns; ++s) {
            const double cs = coeffs[j * ns + s];
            if (cs == 0) continue;
            v += cs * (monomials[s] ? monomials[s]->eval_scalar(z) : 1.0);
        }
        return v;
    }

    double eval(std::span<const double> x) const {
        if (x.size() != d) throw DimensionError("lipr: input length differs from d");
        double v = 0;
        for (auto& [j, rho] : partition(x)) v += rho * local(j, x);
        return v;
    }
};

using ProductFactory = std::function<Network(std::size_t)>;

// Monomial network z -> approx z^s: a product network on |s| replicated coordinates.
inline std::shared_ptr<const Network> monomial_network(const MultiIndex& s, const ProductFactory& product) {
    const int deg = degree(s);
    if (deg == 0) return nullptr;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int e = 0; e < s[i]; ++e) cols.push_back(i);
    const Network P = deg == 1 ? identity_network(1) : product(static_cast<std::size_t>(deg));
    return std::make_shared<const Network>(compose_affine(P, detail::selection(s.size(), cols), Vector::Zero(deg)));
}

struct LiprBuild {
    CertifiedApproximator approx;
    std::shared_ptr<const LiprComposite> composite;
};

namespace detail {

inline std::size_t monomial_width(int deg) { return deg <= 1 ? 1 : 6 * static_cast<std::size_t>((deg + 1) / 2); }
inline std::size_t monomial_depth(int deg) { return deg <= 1 ? 0 : 2 * static_cast<std::size_t>(ceil_log2(static_cast<std::size_t>(deg))); }
inline double monomial_K(int deg, double k, double alpha, double a2) {
    return deg <= 1 ? 1.0 : std::pow(1.5 * std::pow(k, alpha) / std::abs(a2), ceil_log2(static_cast<std::size_t>(deg)));
}

}  // namespace detail

// Width and norm budget of build_lipr at k when every |c_{j,s}| <= 1.
struct LiprBudget {
    double W = 0;
    std::size_t L = 0;
    double K = 0;
};

inline LiprBudget lipr_budget(const LiprBuildParams& p, double a2) {
    const double N = std::pow(static_cast<double>(cubes_per_axis(p.k, p.mesh_gamma())), static_cast<double>(p.d));
    LiprBudget b;
    for (const auto& s : multi_indices(p.d, p.m)) {
        const int deg = degree(s);
        b.W += static_cast<double>(detail::monomial_width(deg));
        b.L = std::max(b.L, detail::monomial_depth(deg));
        b.K += detail::monomial_K(deg, p.k, p.alpha, a2);
    }
    b.W *= N;
    b.K *= N;
    return b;
}

inline void check_lipr_params(const LiprBuildParams& p) {
    if (p.d == 0) throw PreconditionError("lipr: d must be >= 1");
    if (p.m < 0) throw PreconditionError("lipr: m must be >= 0");
    if (!(p.beta > 0 && p.beta <= 1)) throw PreconditionError("lipr: beta must lie in (0,1]");
    if (!(p.alpha > 0)) throw PreconditionError("lipr: alpha must be positive");
    if (!(p.k >= 1)) throw PreconditionError("lipr: k must be >= 1");
    const double n = std::pow(static_cast<double>(cubes_per_axis(p.k, p.mesh_gamma())), static_cast<double>(p.d));
    if (n > static_cast<double>(kMaxCubes))
        throw PreconditionError("lipr: memory budget exceeded (" + std::to_string(n) + " cubes > " + std::to_string(kMaxCubes) + ")");
}

// Partition, coefficients and monomial networks; shared by the deterministic and random builders.
inline std::shared_ptr<LiprComposite> assemble_lipr(const LiprBuildParams& p, const LiprTarget& target, const ProductFactory& product,
                                                    unsigned threads = default_threads()) {
    check_lipr_params(p);
    auto comp = std::make_shared<LiprComposite>();
    comp->d = p.d;
    comp->n_axis = cubes_per_axis(p.k, p.mesh_gamma());
    comp->h = 1.0 / static_cast<double>(comp->n_axis);
    comp->indices = multi_indices(p.d, p.m);
    for (const auto& s : comp->indices) comp->monomials.push_back(monomial_network(s, product));
    const std::size_t N = comp->n_cubes(), ns = comp->indices.size();
    comp->coeffs.assign(N * ns, 0.0);
    parallel_chunks(N, 256, threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            const auto c = comp->cube_center(j);
            for (std::size_t s = 0; s < ns; ++s)
                comp->coeffs[j * ns + s] = target_partial(target, c, comp->indices[s]) / multi_factorial(comp->indices[s]);
        }
    });
    return comp;
}

inline CertifiedApproximator lipr_approximator(std::shared_ptr<const LiprComposite> comp, const LiprBuildParams& p) {
    CertifiedApproximator a;
    a.target = "lipr";
    a.input_dim = p.d;
    a.declared_only = true;
    a.evaluate = [comp](std::span<const double> x) { return comp->eval(x); };
    const std::size_t N = comp->n_cubes(), ns = comp->indices.size();
    double W = 0, K = 0;
    std::size_t L = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        double cmax = 0;
        for (std::size_t j = 0; j < N; ++j) cmax = std::max(cmax, std::abs(comp->coeffs[j * ns + s]));
        const auto& net = comp->monomials[s];
        W += static_cast<double>(net ? std::max<std::size_t>(net->cert().W, 1) : 1);
        L = std::max(L, net ? net->cert().L : 0);
        K += cmax * (net ? net->cert().K : 1.0);
    }
    a.cert.W = static_cast<std::size_t>(W) * N;
    a.cert.L = L;
    a.cert.K = K > 0 ? K * static_cast<double>(N) : 1.0;
    a.cert.output_dim = 1;
    a.info["n_cubes"] = static_cast<double>(N);
    a.info["n_axis"] = static_cast<double>(comp->n_axis);
    a.info["h"] = comp->h;
    a.info["gamma"] = p.mesh_gamma();
    a.info["n_monomials"] = static_cast<double>(ns);
    return a;
}

inline LiprBuild build_lipr(const LiprBuildParams& p, const LiprTarget& target, unsigned threads = default_threads()) {
    const ActivationEntry& e = activation(p.activation);
    const int maxdeg = p.m;
    double a2 = 1, M = 0;
    if (maxdeg >= 2) {
        const TaylorSpec& t = require_taylor(e);
        a2 = t.a2;
        M = t.M;
        const double k0 = product_k0(t, p.alpha);
        if (p.k < k0) throw PreconditionError("build_lipr: k = " + std::to_string(p.k) + " below k0 = " + std::to_string(k0));
    } else if (e.taylor) {
        a2 = e.taylor->a2;
        M = e.taylor->M;
    }
    ProductFactory product = [&](std::size_t n) { return *build_product_d(n, p.k, p.alpha, p.activation).network; };
    auto comp = assemble_lipr(p, target, product, threads);
    LiprBuild out;
    out.composite = comp;
    out.approx = lipr_approximator(comp, p);

    // error constants: Taylor remainder on the bump support (radius h) and monomial network errors
    const double Cstar = maxdeg >= 2 ? 9 * M / std::abs(a2) : 0.0;
    double C1 = 0, C1_paper = 0, C3 = 0;
    const std::size_t N = comp->n_cubes(), ns = comp->indices.size();
    for (std::size_t s = 0; s < ns; ++s) {
        const auto& idx = comp->indices[s];
        const int deg = degree(idx);
        if (deg == p.m) {
            C1 += target.holder_const / multi_factorial(idx);
            C1_paper += 1.0 / (std::pow(2.0, p.r()) * multi_factorial(idx));
        }
        if (deg >= 2) {
            double cmax = 0;
            for (std::size_t j = 0; j < N; ++j) cmax = std::max(cmax, std::abs(comp->coeffs[j * ns + s]));
            C3 += cmax * (std::pow(2.0, ceil_log2(static_cast<std::size_t>(deg))) - 1) * Cstar;
        }
    }
    const double C = std::max(C1, C3);
    const double g = p.mesh_gamma();
    out.approx.predicted_bound = C * (std::pow(p.k, -g * p.r()) + std::pow(p.k, -p.alpha));
    out.approx.info["C1"] = C1;
    out.approx.info["C1_paper"] = C1_paper;
    out.approx.info["C3"] = C3;
    out.approx.info["C"] = C;
    const double binom = binomial(static_cast<std::size_t>(p.m) + p.d, p.d);
    const int D = ceil_log2(p.d);
    const double CW = 6.0 * static_cast<double>((p.d + 1) / 2) * binom;
    const double CK = std::pow(1.5 / std::abs(a2), D) * binom;
    out.approx.info["paper_W"] = CW * std::pow(p.k, static_cast<double>(p.d) * g);
    out.approx.info["paper_L"] = 2.0 * D;
    out.approx.info["paper_K"] = CK * std::pow(p.k, p.alpha * D + static_cast<double>(p.d) * g);
    out.approx.info["k"] = p.k;
    out.approx.info["alpha"] = p.alpha;
    return out;
}

// Largest integer k >= k0 whose Lip_r build fits in (W, K); depth is fixed by (d, m).
struct ChooseKResult {
    double k = 0;
    double c1 = 0;
    double c2 = 0;
    LiprBudget budget;
};

inline ChooseKResult choose_k(double W, double K, std::size_t d, int m, double beta, double alpha, const std::string& activation_tag) {
    LiprBuildParams p;
    p.d = d;
    p.m = m;
    p.beta = beta;
    p.alpha = alpha;
    p.activation = activation_tag;
    const ActivationEntry& e = activation(activation_tag);
    const TaylorSpec& t = require_taylor(e);
    const double k0 = m >= 2 ? std::ceil(product_k0(t, alpha) - 1e-12) : 1.0;
    const double binom = binomial(static_cast<std::size_t>(m) + d, d);
    const int D = ceil_log2(d);
    ChooseKResult r;
    r.c1 = 6.0 * static_cast<double>((d + 1) / 2) * binom * std::pow(k0, static_cast<double>(d) * alpha / p.r());
    r.c2 = std::pow(1.5 * std::pow(k0, alpha) / std::abs(t.a2), D) / (6.0 * static_cast<double>((d + 1) / 2));
    auto fits = [&](double k) {
        p.k = k;
        const auto b = lipr_budget(p, t.a2);
        const double n = std::pow(static_cast<double>(cubes_per_axis(k, p.mesh_gamma())), static_cast<double>(d));
        return b.W <= W && b.K <= K && n <= static_cast<double>(kMaxCubes);
    };
    if (!fits(k0))
        throw InfeasibleError("choose_k: (W, K) = (" + std::to_string(W) + ", " + std::to_string(K) + ") infeasible; need W >= c1 = " +
                                  std::to_string(r.c1) + " and K >= c2 W with c2 = " + std::to_string(r.c2),
                              r.c1, r.c2);
    double lo = k0, hi = k0;
    while (fits(hi * 2)) {
        lo = hi * 2;
        hi *= 2;
        if (hi > 1e15) break;
    }
    hi = std::max(hi * 2, lo + 1);
    while (hi - lo > 1) {
        const double mid = std::floor((lo + hi) / 2);
        if (fits(mid))
            lo = mid;
        else
            hi = mid;
    }
    r.k = lo;
    p.k = lo;
    r.budget = lipr_budget(p, t.a2);
    return r;
}

}  // namespace normnet
