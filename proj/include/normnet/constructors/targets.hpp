#pragma once

#include <cmath>
#include <string>

#include "lipr.hpp"

namespace normnet {

// min_i min(x_i, 1 - x_i): Lipschitz 1 in the sup norm, not differentiable (m = 0 only)
inline LiprTarget tent_target() {
    LiprTarget t;
    t.name = "tent";
    t.f = [](std::span<const double> x) {
        double v = 0.5;
        for (double xi : x) v = std::min(v, std::min(xi, 1 - xi));
        return v;
    };
    t.holder_const = 1;
    return t;
}

// 0.5 prod_i sin(x_i + 0.3); every partial is 0.5 prod of shifted sines, so the
// order-m partials are (0.5 d)-Lipschitz in the sup norm.
inline LiprTarget sinprod_target(std::size_t d) {
    LiprTarget t;
    t.name = "sinprod";
    t.f = [](std::span<const double> x) {
        double v = 0.5;
        for (double xi : x) v *= std::sin(xi + 0.3);
        return v;
    };
    t.partial = [](std::span<const double> x, const MultiIndex& s) {
        double v = 0.5;
        for (std::size_t i = 0; i < x.size(); ++i) v *= std::sin(x[i] + 0.3 + s[i] * M_PI / 2);
        return v;
    };
    t.holder_const = 0.5 * static_cast<double>(d);
    return t;
}

inline LiprTarget lipr_target(const std::string& name, std::size_t d) {
    if (name == "tent") return tent_target();
    if (name == "sinprod") return sinprod_target(d);
    throw PreconditionError("unknown Lip_r target '" + name + "' (expected tent or sinprod)");
}

// tent needs m = 0; smoother classes default to sinprod
inline LiprTarget default_lipr_target(std::size_t d, int m) { return m == 0 ? tent_target() : sinprod_target(d); }

}  // namespace normnet
