#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace normnet {

// sigma(t) = a1 t + a2 t^2 + a3 t^3 + r(t), |r(t)| <= M t^4 on |t| <= rho
struct TaylorSpec {
    double a1 = 0;
    double a2 = 0;
    double a3 = 0;
    double M = 0;
    double rho = 1;
};

// How the weak-path square builder picks w_k from (k, alpha).
enum class WeightSchedule {
    power_law,    // w = k^{-alpha/beta}, Hölder modulus omega(t) ~ t^beta
    logarithmic,  // w = e^{1 - k^alpha}, omega(t) = 2/log(e/t)
    exact,        // omega == 0, w = k^{-alpha/2}
};

// |sigma(x0+h) + sigma(x0-h) - 2 sigma(x0) - gamma h^2| <= omega(|h|) h^2 on |h| <= rho
struct WeakSpec {
    double x0 = 0;
    double gamma = 0;
    double rho = 1;
    std::function<double(double)> omega;
    // optional closed form of sigma(x0+h) + sigma(x0-h) - 2 sigma(x0)
    std::function<double(double)> even_part;
    WeightSchedule schedule = WeightSchedule::power_law;
    double holder_beta = 1;
};

enum class PiecewiseKind { identity, relu, leaky, clip01, clip11 };

struct PiecewiseLinear {
    PiecewiseKind kind = PiecewiseKind::identity;
    double leak = 0;
};

struct ActivationEntry {
    std::string tag;
    std::function<double(double)> fn;
    std::optional<TaylorSpec> taylor;
    std::optional<WeakSpec> weak;
    std::optional<PiecewiseLinear> piecewise;

    double operator()(double x) const {
        if (piecewise) {
            switch (piecewise->kind) {
                case PiecewiseKind::identity: return x;
                case PiecewiseKind::relu: return x > 0 ? x : 0.0;
                case PiecewiseKind::leaky: return x > 0 ? x : piecewise->leak * x;
                case PiecewiseKind::clip01: return std::clamp(x, 0.0, 1.0);
                case PiecewiseKind::clip11: return std::clamp(x, -1.0, 1.0);
            }
        }
        return fn(x);
    }

    // sigma(x0+h) + sigma(x0-h) - 2 sigma(x0), closed form when available
    double even_part(double h) const {
        if (weak && weak->even_part) return weak->even_part(h);
        const double x0 = weak ? weak->x0 : 0.0;
        return (*this)(x0 + h) + (*this)(x0 - h) - 2.0 * (*this)(x0);
    }
};

namespace detail {

inline ActivationEntry piecewise_entry(std::string tag, PiecewiseKind kind, double leak = 0) {
    ActivationEntry e;
    e.tag = std::move(tag);
    e.piecewise = PiecewiseLinear{kind, leak};
    PiecewiseLinear p = *e.piecewise;
    e.fn = [p](double x) {
        switch (p.kind) {
            case PiecewiseKind::identity: return x;
            case PiecewiseKind::relu: return x > 0 ? x : 0.0;
            case PiecewiseKind::leaky: return x > 0 ? x : p.leak * x;
            case PiecewiseKind::clip01: return std::clamp(x, 0.0, 1.0);
            case PiecewiseKind::clip11: return std::clamp(x, -1.0, 1.0);
        }
        return x;
    };
    return e;
}

inline double case_c(double x) {
    const double a = std::abs(x);
    if (a == 0.0) return 0.0;
    if (a <= 1.0) return x * x * (1.0 + 1.0 / (1.0 - std::log(a)));
    // C^1 continuation past |x| = 1; the formula is singular at |x| = e
    return 2.0 + 5.0 * (a - 1.0);
}

inline std::vector<ActivationEntry> builtin_entries() {
    std::vector<ActivationEntry> out;
    out.push_back(piecewise_entry("identity", PiecewiseKind::identity));
    out.push_back(piecewise_entry("relu", PiecewiseKind::relu));
    out.push_back(piecewise_entry("leaky", PiecewiseKind::leaky, 0.01));
    out.push_back(piecewise_entry("clip01", PiecewiseKind::clip01));
    out.push_back(piecewise_entry("clip11", PiecewiseKind::clip11));

    {
        ActivationEntry e;
        e.tag = "caseA";
        e.fn = [](double x) { const double a = std::abs(x); return x * x + a * a * a; };
        WeakSpec w;
        w.gamma = 2;
        w.omega = [](double t) { return 2.0 * t; };
        w.even_part = [](double h) { const double a = std::abs(h); return 2.0 * h * h + 2.0 * a * a * a; };
        w.schedule = WeightSchedule::power_law;
        w.holder_beta = 1.0;
        e.weak = w;
        out.push_back(std::move(e));
    }
    {
        constexpr double beta = 0.7;
        ActivationEntry e;
        e.tag = "caseB";
        e.fn = [](double x) { return x * x + std::pow(std::abs(x), 2.0 + beta); };
        WeakSpec w;
        w.gamma = 2;
        w.omega = [](double t) { return 2.0 * std::pow(t, beta); };
        w.even_part = [](double h) { return 2.0 * h * h + 2.0 * std::pow(std::abs(h), 2.0 + beta); };
        w.schedule = WeightSchedule::power_law;
        w.holder_beta = beta;
        e.weak = w;
        out.push_back(std::move(e));
    }
    {
        ActivationEntry e;
        e.tag = "caseC";
        e.fn = case_c;
        WeakSpec w;
        w.gamma = 2;
        w.omega = [](double t) { return t <= 0 ? 0.0 : 2.0 / (1.0 - std::log(t)); };
        w.even_part = [](double h) { return 2.0 * case_c(h); };
        w.schedule = WeightSchedule::logarithmic;
        w.holder_beta = 0;
        e.weak = w;
        out.push_back(std::move(e));
    }
    {
        ActivationEntry e;
        e.tag = "caseD";
        e.fn = [](double x) { return x * x + x * std::abs(x); };
        WeakSpec w;
        w.gamma = 2;
        w.omega = [](double) { return 0.0; };
        w.even_part = [](double h) { return 2.0 * h * h; };
        w.schedule = WeightSchedule::exact;
        w.holder_beta = 1.0;
        e.weak = w;
        out.push_back(std::move(e));
    }
    {
        ActivationEntry e;
        e.tag = "silu";
        e.fn = [](double x) { return x / (1.0 + std::exp(-x)); };
        e.taylor = TaylorSpec{0.5, 0.25, 0.0, 0.022, 1.0};
        out.push_back(std::move(e));
    }
    {
        ActivationEntry e;
        e.tag = "gelu";
        e.fn = [](double x) { return 0.5 * x * std::erfc(-x / std::numbers::sqrt2); };
        e.taylor = TaylorSpec{0.5, 1.0 / std::sqrt(2.0 * std::numbers::pi), 0.0, 0.067, 1.0};
        out.push_back(std::move(e));
    }
    {
        ActivationEntry e;
        e.tag = "tanh";
        e.fn = [](double x) { return std::tanh(x); };
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace detail

class Registry {
public:
    Registry() = default;

    static Registry with_builtins() {
        Registry r;
        for (auto& e : detail::builtin_entries()) r.add(std::move(e));
        return r;
    }

    Registry(Registry&& other) noexcept : entries_(std::move(other.entries_)) {}

    const ActivationEntry& add(ActivationEntry entry) {
        std::lock_guard lock(mutex_);
        if (entries_.count(entry.tag)) throw RegistryError("duplicate activation tag '" + entry.tag + "'");
        for (double x = -4.0; x <= 4.0; x += 0.125) {
            if (!std::isfinite(entry(x))) throw RegistryError("activation '" + entry.tag + "' is not finite on [-4,4]");
        }
        auto tag = entry.tag;
        auto& slot = entries_[tag];
        slot = std::make_unique<ActivationEntry>(std::move(entry));
        return *slot;
    }

    bool contains(std::string_view tag) const {
        std::lock_guard lock(mutex_);
        return entries_.count(std::string(tag)) > 0;
    }

    // "leaky:<alpha>" tags are materialized on first use.
    const ActivationEntry& lookup(std::string_view tag) const {
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(std::string(tag));
            if (it != entries_.end()) return *it->second;
        }
        if (tag.starts_with("leaky:")) {
            double leak = 0;
            try {
                std::size_t pos = 0;
                std::string num(tag.substr(6));
                leak = std::stod(num, &pos);
                if (pos != num.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw RegistryError("bad leaky tag '" + std::string(tag) + "'");
            }
            if (!(leak >= 0.0 && leak < 1.0)) throw RegistryError("leaky slope must lie in [0,1): '" + std::string(tag) + "'");
            std::lock_guard lock(mutex_);
            auto& slot = entries_[std::string(tag)];
            if (!slot) slot = std::make_unique<ActivationEntry>(detail::piecewise_entry(std::string(tag), PiecewiseKind::leaky, leak));
            return *slot;
        }
        throw RegistryError("unknown activation tag '" + std::string(tag) + "'");
    }

    std::vector<std::string> tags() const {
        std::lock_guard lock(mutex_);
        std::vector<std::string> out;
        for (auto& [k, v] : entries_) out.push_back(k);
        return out;
    }

private:
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::unique_ptr<ActivationEntry>> entries_;
};

inline Registry& builtin_registry() {
    static Registry reg = Registry::with_builtins();
    return reg;
}

inline const ActivationEntry& activation(std::string_view tag) { return builtin_registry().lookup(tag); }

struct TaylorReport {
    double a1 = 0, a2 = 0, a3 = 0;
    double M_hat = 0;
    double worst_t = 0;
    bool coefficients_ok = false;
    bool remainder_ok = false;
    bool pass = false;
};

// Central-difference derivatives at 0: five-point stencils at step h and h/2
// combined by Richardson extrapolation.
inline TaylorReport verify_taylor_spec(const ActivationEntry& e, int grid_points = 20001) {
    if (!e.taylor) throw PreconditionError("activation '" + e.tag + "' has no Taylor metadata");
    const auto& f = e;
    auto d1 = [&](double h) { return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h); };
    auto d2 = [&](double h) { return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h); };
    auto d3 = [&](double h) { return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h); };
    const double h = 1e-3;
    TaylorReport r;
    r.a1 = (16 * d1(h / 2) - d1(h)) / 15;
    r.a2 = (16 * d2(h / 2) - d2(h)) / 15 / 2;
    r.a3 = (4 * d3(h / 2) - d3(h)) / 3 / 6;
    if (std::abs(r.a2) < 1e-10) throw AssumptionViolated("activation '" + e.tag + "' has a2 = 0 (no quadratic term at 0)");

    const auto& s = *e.taylor;
    r.coefficients_ok = std::abs(r.a1 - s.a1) <= 1e-6 && std::abs(r.a2 - s.a2) <= 1e-6 && std::abs(r.a3 - s.a3) <= 1e-6;
    const int n = std::max(grid_points, 3);
    for (int i = 0; i < n; ++i) {
        const double t = -s.rho + 2.0 * s.rho * i / (n - 1);
        if (std::abs(t) < 1e-4) continue;
        const double rem = f(t) - s.a1 * t - s.a2 * t * t - s.a3 * t * t * t;
        const double ratio = std::abs(rem) / (t * t * t * t);
        if (ratio > r.M_hat) {
            r.M_hat = ratio;
            r.worst_t = t;
        }
    }
    r.remainder_ok = r.M_hat <= s.M * (1 + 1e-6);
    r.pass = r.coefficients_ok && r.remainder_ok;
    return r;
}

struct WeakReport {
    bool pass = true;
    double worst_h = 0;
    double worst_ratio = 0;  // max |even - gamma h^2| / (omega(h) h^2) over h with omega(h) > 0
    double worst_excess = 0;  // largest violation beyond slack, 0 when passing
};

inline WeakReport verify_weak_spec(const ActivationEntry& e, int grid_points = 2001) {
    if (!e.weak) throw PreconditionError("activation '" + e.tag + "' has no weak-modulus metadata");
    const auto& s = *e.weak;
    WeakReport r;
    const int n = std::max(grid_points, 2);
    const double lo = std::log(s.rho * 1e-10), hi = std::log(s.rho);
    for (int i = 0; i < n; ++i) {
        const double h = std::exp(lo + (hi - lo) * i / (n - 1));
        for (double hs : {h, -h}) {
            const double p = e(s.x0 + hs), m = e(s.x0 - hs), c = e(s.x0);
            const double lhs = std::abs(p + m - 2 * c - s.gamma * h * h);
            const double rhs = s.omega(h) * h * h;
            const double slack = 1e-9 * (std::abs(p) + std::abs(m) + 2 * std::abs(c) + std::abs(s.gamma) * h * h + rhs);
            if (rhs > 0) {
                const double ratio = lhs / rhs;
                if (ratio > r.worst_ratio) {
                    r.worst_ratio = ratio;
                    r.worst_h = hs;
                }
            }
            if (lhs > rhs + slack) {
                const double excess = lhs - rhs;
                if (r.pass || excess > r.worst_excess) {
                    r.worst_excess = excess;
                    r.worst_h = hs;
                }
                r.pass = false;
            }
        }
    }
    return r;
}

// sigma'(0) by central differences, used by the smooth-activation witness.
inline double derivative_at_zero(const ActivationEntry& e) {
    const double h = 1e-4;
    return (-e(2 * h) + 8 * e(h) - 8 * e(-h) + e(-2 * h)) / (12 * h);
}

// max |sigma''| on [-delta, delta] by second differences on a grid
inline double second_derivative_bound(const ActivationEntry& e, double delta, int n = 2001) {
    const double h = 1e-4;
    double best = 0;
    for (int i = 0; i < n; ++i) {
        const double t = -delta + 2 * delta * i / (n - 1);
        best = std::max(best, std::abs((e(t + h) - 2 * e(t) + e(t - h)) / (h * h)));
    }
    return best;
}

}  // namespace normnet
