#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "../constructors/product.hpp"
#include "../constructors/square.hpp"
#include "../constructors/targets.hpp"
#include "csv.hpp"

namespace normnet {

struct SweepTarget {
    std::string kind = "square";  // square | product2 | product_d | lipr
    std::size_t d = 1;
    int m = 0;
    double beta = 1;
    std::string lipr_fn;  // empty: default for (d, m)

    std::string label() const {
        if (kind == "product_d") return "product_d(" + std::to_string(d) + ")";
        if (kind == "lipr") {
            char b[64];
            std::snprintf(b, sizeof b, "lipr(%zu,%d,%g)", d, m, beta);
            return b;
        }
        return kind;
    }
};

// "square", "product2", "product_d(3)" or "product_d:3", "lipr(1,0,1)" or "lipr:1,0,1[,tent]"
inline SweepTarget parse_sweep_target(const std::string& spec) {
    SweepTarget t;
    std::string name = spec, args;
    const auto p = spec.find_first_of("(:");
    if (p != std::string::npos) {
        name = spec.substr(0, p);
        args = spec.substr(p + 1);
        if (!args.empty() && args.back() == ')') args.pop_back();
    }
    std::vector<std::string> parts;
    std::size_t b = 0;
    while (!args.empty() && b <= args.size()) {
        const auto e = args.find(',', b);
        parts.push_back(args.substr(b, e == std::string::npos ? std::string::npos : e - b));
        if (e == std::string::npos) break;
        b = e + 1;
    }
    auto to_int = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw PreconditionError("target '" + spec + "': '" + s + "' is not an integer");
        }
    };
    t.kind = name;
    if (name == "square" || name == "product2") {
        if (!parts.empty()) throw PreconditionError("target '" + name + "' takes no arguments");
        t.d = name == "square" ? 1 : 2;
    } else if (name == "product_d") {
        if (parts.size() != 1) throw PreconditionError("target product_d needs one argument d");
        const int d = to_int(parts[0]);
        if (d < 1) throw PreconditionError("target product_d: d must be >= 1");
        t.d = static_cast<std::size_t>(d);
    } else if (name == "lipr") {
        if (parts.size() < 3 || parts.size() > 4) throw PreconditionError("target lipr needs (d, m, beta[, function])");
        const int d = to_int(parts[0]);
        if (d < 1) throw PreconditionError("target lipr: d must be >= 1");
        t.d = static_cast<std::size_t>(d);
        t.m = to_int(parts[1]);
        try {
            t.beta = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw PreconditionError("target lipr: beta '" + parts[2] + "' is not a number");
        }
        if (parts.size() == 4) t.lipr_fn = parts[3];
    } else {
        throw PreconditionError("unknown target '" + spec + "' (expected square, product2, product_d(d) or lipr(d,m,beta))");
    }
    return t;
}

struct SweepRow {
    double k = 0;
    double measured = 0;
    double predicted = 0;
    bool skipped = false;
    std::string note;
};

struct SweepResult {
    SweepTarget target;
    std::string activation;
    double alpha = 1;
    std::vector<SweepRow> rows;
    SlopeFit fit;
    bool fitted = false;
    bool sound = true;  // measured <= predicted (1 + 1e-6) on every built row
};

struct SweepOptions {
    std::size_t grid_1d = 100001;
    std::size_t grid_total = 1000000;
    unsigned threads = default_threads();
};

inline EvalGrid sweep_grid(std::size_t dim, double lo, double hi, const SweepOptions& o) {
    if (dim == 1) return EvalGrid::cube(1, lo, hi, o.grid_1d);
    auto n = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(o.grid_total), 1.0 / static_cast<double>(dim)) + 1e-9));
    return EvalGrid::cube(dim, lo, hi, std::max<std::size_t>(n, 2));
}

// Builds the target approximator at one k; measured error is the grid sup-error.
inline SweepRow sweep_point(const SweepTarget& t, const std::string& act, double alpha, double k, const SweepOptions& o) {
    SweepRow row;
    row.k = k;
    const ActivationEntry& e = activation(act);
    try {
        if (t.kind == "square") {
            const auto a = e.taylor ? build_square({k, alpha, act}) : build_square_weak(act, k, alpha);
            row.predicted = a.predicted_bound;
            row.measured = sup_error([](std::span<const double> x) { return x[0] * x[0]; }, a.evaluate, sweep_grid(1, 0, 1, o), o.threads);
        } else if (t.kind == "product2" || t.kind == "product_d") {
            const auto a = t.kind == "product2" ? build_product2(k, alpha, act) : build_product_d(t.d, k, alpha, act);
            row.predicted = a.predicted_bound;
            auto prod = [](std::span<const double> x) {
                double p = 1;
                for (double v : x) p *= v;
                return p;
            };
            row.measured = sup_error(prod, a.evaluate, sweep_grid(t.d, -1, 1, o), o.threads);
        } else {
            LiprBuildParams p;
            p.d = t.d;
            p.m = t.m;
            p.beta = t.beta;
            p.alpha = alpha;
            p.k = k;
            p.activation = act;
            const auto target = t.lipr_fn.empty() ? default_lipr_target(t.d, t.m) : lipr_target(t.lipr_fn, t.d);
            const auto b = build_lipr(p, target, o.threads);
            row.predicted = b.approx.predicted_bound;
            row.measured = sup_error(target.f, b.approx.evaluate, sweep_grid(t.d, 0, 1, o), o.threads);
        }
    } catch (const PreconditionError& err) {
        row.skipped = true;
        row.note = err.what();
    }
    return row;
}

inline SweepResult rate_sweep(const SweepTarget& t, const std::string& act, double alpha, const std::vector<double>& k_list, const SweepOptions& o = {}) {
    if (k_list.size() < 4) throw PreconditionError("rate-sweep: need at least 4 k values");
    SweepResult r;
    r.target = t;
    r.activation = act;
    r.alpha = alpha;
    std::vector<double> ks, errs;
    for (double k : k_list) {
        auto row = sweep_point(t, act, alpha, k, o);
        if (!row.skipped) {
            if (row.measured > row.predicted * (1 + 1e-6)) r.sound = false;
            if (row.measured > 0) {
                ks.push_back(k);
                errs.push_back(row.measured);
            }
        }
        r.rows.push_back(std::move(row));
    }
    if (ks.size() >= 2) {
        r.fit = fit_loglog(ks, errs);
        r.fitted = true;
    }
    return r;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    CsvWriter w(os, "rate_sweep", {"target", "activation", "alpha", "k", "measured", "predicted", "sound", "note"});
    for (const auto& row : r.rows) {
        w.cell(r.target.label()).cell(r.activation).cell(r.alpha).cell(row.k);
        if (row.skipped) {
            w.cell(std::string()).cell(std::string()).cell(std::string());
        } else {
            w.cell(row.measured).cell(row.predicted).cell(row.measured <= row.predicted * (1 + 1e-6));
        }
        std::string note = row.note;
        for (auto& ch : note)
            if (ch == ',' || ch == '\n') ch = ';';
        w.cell(row.skipped ? "skipped: " + note : note);
        w.end_row();
    }
    os << "# slope: " << (r.fitted ? fmt17(r.fit.slope) : std::string("nan")) << "\n";
}

}  // namespace normnet
