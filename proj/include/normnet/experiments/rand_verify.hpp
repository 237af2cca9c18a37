#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "../constructors/random.hpp"
#include "../constructors/targets.hpp"
#include "csv.hpp"

namespace normnet {

// An eps value, absolute or a multiple of the lemma's bias threshold eps0 ("2eps0").
struct EpsSpec {
    double value = 0;
    bool times_eps0 = false;
};

inline EpsSpec parse_eps(const std::string& s) {
    EpsSpec e;
    std::string num = s;
    if (s.size() >= 4 && s.compare(s.size() - 4, 4, "eps0") == 0) {
        e.times_eps0 = true;
        num = s.substr(0, s.size() - 4);
        if (num.empty()) num = "1";
        if (num.back() == '*') num.pop_back();
    }
    try {
        std::size_t used = 0;
        e.value = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
        throw PreconditionError("eps '" + s + "' is not a number or a multiple of eps0");
    }
    if (!(e.value > 0)) throw PreconditionError("eps must be positive");
    return e;
}

struct RandVerifyOptions {
    int lemma = 6;
    double k = 1000;
    double alpha = 1;
    std::vector<EpsSpec> eps;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::vector<std::vector<double>> points;
    std::string activation = "silu";
    int m = 1;              // lemma 9 smoothness order
    double beta = 1;        // lemma 9 Hölder exponent
    std::string target;     // lemma 9 target; empty picks the default
    unsigned threads = default_threads();
};

struct SuccessRecord {
    int lemma = 6;
    double k = 0;
    double alpha = 0;
    double eps = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double freq = 0;
    double predicted = 0;
    double sigma = 0;   // binomial standard deviation at the clamped prediction
    double margin = 0;  // freq - (predicted - 3 sigma)
    std::vector<double> point;
    bool vacuous = false;
    bool violation = false;
};

// Per-point moment checks for the single-layer builders: E[phi] - f within eps0,
// and the sample variance of the per-neuron terms Y_i below the closed-form bound.
struct MomentCheck {
    std::vector<double> point;
    double target = 0;
    double mean = 0;
    double mean_stderr = 0;
    double bias = 0;
    double eps0 = 0;
    bool bias_ok = true;
    double var_y = 0;
    double var_stderr = 0;
    double var_bound = 0;
    bool var_ok = true;
};

struct RandVerifyResult {
    std::vector<SuccessRecord> records;
    std::vector<MomentCheck> moments;  // lemmas 6 and 7 only
    double eps0 = 0;
    bool any_violation() const {
        for (const auto& r : records)
            if (r.violation) return true;
        for (const auto& m : moments)
            if (!m.bias_ok || !m.var_ok) return true;
        return false;
    }
};

namespace rand_detail {

inline double target_value(int lemma, std::span<const double> x, const LiprTarget* t) {
    if (lemma == 6) return x[0] * x[0];
    if (lemma == 9) return t->f(x);
    double p = 1;
    for (double v : x) p *= v;
    return p;
}

inline std::size_t expected_dim(int lemma, const RandVerifyOptions& o) {
    if (lemma == 6) return 1;
    if (lemma == 7) return 2;
    return o.points.empty() ? 0 : o.points[0].size();
}

struct TrialOut {
    std::vector<unsigned char> success;  // point-major, eps-minor
    std::vector<double> unclipped;       // per point
    std::vector<double> y_mean, y_var;   // per point, per-trial sample moments of Y_i
};

}  // namespace rand_detail

inline RandVerifyResult run_rand_verify(const RandVerifyOptions& o) {
    if (o.lemma < 6 || o.lemma > 9) throw PreconditionError("rand-verify: lemma must be 6, 7, 8 or 9");
    if (o.trials == 0) throw PreconditionError("rand-verify: trials must be positive");
    if (o.points.empty()) throw PreconditionError("rand-verify: no evaluation points");
    if (o.eps.empty()) throw PreconditionError("rand-verify: no eps values");
    const std::size_t dim = rand_detail::expected_dim(o.lemma, o);
    for (const auto& p : o.points)
        if (p.size() != dim) throw DimensionError("rand-verify: lemma " + std::to_string(o.lemma) + " needs points of dimension " + std::to_string(dim));
    const TaylorSpec& t = require_taylor(activation(o.activation));

    LiprTarget target;
    LiprBuildParams lp;
    Lemma9Constants c9;
    BernsteinConstants bern;
    if (o.lemma == 9) {
        lp.d = dim;
        lp.m = o.m;
        lp.beta = o.beta;
        lp.alpha = o.alpha;
        lp.k = o.k;
        lp.activation = o.activation;
        target = o.target.empty() ? default_lipr_target(dim, o.m) : lipr_target(o.target, dim);
        c9 = lemma9_constants(dim, o.m, o.k, o.alpha, t);
        bern = c9.bern;
    } else {
        bern = o.lemma == 6 ? lemma6_constants(o.k, o.alpha, t) : lemma7_constants(o.k, o.alpha, t);
    }

    RandVerifyResult res;
    res.eps0 = bern.eps0;
    std::vector<double> eps;
    for (const auto& e : o.eps) eps.push_back(e.times_eps0 ? e.value * bern.eps0 : e.value);
    // success thresholds: lemma 9 counts |f - phi| <= F eps + G k^{-alpha}
    std::vector<double> thresh = eps;
    if (o.lemma == 9)
        for (auto& v : thresh) v = lemma9_threshold(o.k, o.alpha, v, c9);

    const std::size_t np = o.points.size(), ne = eps.size();
    const bool moments = o.lemma == 6 || o.lemma == 7;
    std::vector<rand_detail::TrialOut> outs(o.trials);
    const double sigma_scale = (o.lemma == 6 ? 1.0 : 4.0) * t.a2 * std::pow(o.k, -o.alpha);
    const ActivationEntry& act = activation(o.activation);

    parallel_chunks(o.trials, 1, o.threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t tr = b; tr < e; ++tr) {
            const RngSpec rng{o.seed, tr};
            auto& out = outs[tr];
            out.success.assign(np * ne, 0);
            std::function<double(std::span<const double>)> phi, raw;
            RandomBuild rb;
            RandomLiprBuild lb;
            if (o.lemma == 6) rb = build_random_square(o.k, o.alpha, o.activation, rng);
            else if (o.lemma == 7) rb = build_random_product2(o.k, o.alpha, o.activation, rng);
            else if (o.lemma == 8) rb = build_random_product_d(dim, o.k, o.alpha, o.activation, rng);
            else lb = build_random_lipr(lp, target, rng, 1);
            for (std::size_t pi = 0; pi < np; ++pi) {
                const auto& x = o.points[pi];
                const double v = o.lemma == 9 ? lb.build.approx.evaluate(x) : rb.network.eval_scalar(x);
                const double err = std::abs(v - rand_detail::target_value(o.lemma, x, &target));
                for (std::size_t ei = 0; ei < ne; ++ei) out.success[pi * ne + ei] = err <= thresh[ei];
            }
            if (!moments) continue;
            out.unclipped.resize(np);
            out.y_mean.resize(np);
            out.y_var.resize(np);
            for (std::size_t pi = 0; pi < np; ++pi) {
                const auto& x = o.points[pi];
                out.unclipped[pi] = rb.unclipped.eval_scalar(x);
                double s = 0, s2 = 0;
                for (double w : rb.weights) {
                    double y;
                    if (o.lemma == 6) {
                        y = (act(w * x[0]) + act(-w * x[0])) / sigma_scale;
                    } else {
                        y = (act(w * x[0] + w * x[1]) - act(w * x[0] - w * x[1]) + act(-w * x[0] - w * x[1]) - act(-w * x[0] + w * x[1])) / sigma_scale;
                    }
                    s += y;
                    s2 += y * y;
                }
                const double n = static_cast<double>(rb.weights.size());
                out.y_mean[pi] = s / n;
                out.y_var[pi] = n > 1 ? (s2 - s * s / n) / (n - 1) : 0.0;
            }
        }
    });

    const double T = static_cast<double>(o.trials);
    for (std::size_t pi = 0; pi < np; ++pi) {
        for (std::size_t ei = 0; ei < ne; ++ei) {
            SuccessRecord r;
            r.lemma = o.lemma;
            r.k = o.k;
            r.alpha = o.alpha;
            r.eps = eps[ei];
            r.trials = o.trials;
            for (const auto& out : outs) r.successes += out.success[pi * ne + ei];
            r.freq = static_cast<double>(r.successes) / T;
            Prediction pr;
            if (o.lemma == 6) pr = predict_lemma6(o.k, eps[ei], bern);
            else if (o.lemma == 7) pr = predict_lemma7(o.k, eps[ei], bern);
            else if (o.lemma == 8) pr = predict_lemma8(dim, o.k, eps[ei], bern);
            else pr = predict_lemma9(o.k, eps[ei], c9);
            r.predicted = pr.value;
            r.vacuous = pr.vacuous;
            const double p = std::clamp(pr.value, 0.0, 1.0);
            r.sigma = std::sqrt(p * (1 - p) / T);
            r.margin = r.freq - (pr.value - 3 * r.sigma);
            r.violation = !r.vacuous && r.margin < 0;
            r.point = o.points[pi];
            res.records.push_back(std::move(r));
        }
        if (!moments) continue;
        MomentCheck mc;
        mc.point = o.points[pi];
        mc.target = rand_detail::target_value(o.lemma, o.points[pi], nullptr);
        mc.eps0 = bern.eps0;
        mc.var_bound = bern.var_bound;
        double s = 0, s2 = 0, v = 0, v2 = 0;
        for (const auto& out : outs) {
            s += out.unclipped[pi];
            s2 += out.unclipped[pi] * out.unclipped[pi];
            v += out.y_var[pi];
            v2 += out.y_var[pi] * out.y_var[pi];
        }
        mc.mean = s / T;
        mc.mean_stderr = T > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / T) / (T - 1)) / T) : 0.0;
        mc.bias = std::abs(mc.mean - mc.target);
        mc.bias_ok = mc.bias <= mc.eps0 + 3 * mc.mean_stderr;
        mc.var_y = v / T;
        mc.var_stderr = T > 1 ? std::sqrt(std::max(0.0, (v2 - v * v / T) / (T - 1)) / T) : 0.0;
        mc.var_ok = mc.var_y <= mc.var_bound + 3 * mc.var_stderr;
        res.moments.push_back(std::move(mc));
    }
    return res;
}

inline std::string point_label(const std::vector<double>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + fmt17(p[i]);
    return s;
}

inline void write_rand_verify_csv(std::ostream& os, const RandVerifyResult& r) {
    CsvWriter w(os, "rand_verify", {"case", "k", "alpha", "eps", "trials", "freq", "predicted", "margin", "point", "vacuous", "violation"});
    for (const auto& rec : r.records) {
        w.cell("lemma" + std::to_string(rec.lemma)).cell(rec.k).cell(rec.alpha).cell(rec.eps).cell(rec.trials).cell(rec.freq).cell(rec.predicted).cell(rec.margin);
        w.cell(point_label(rec.point)).cell(rec.vacuous).cell(rec.violation);
        w.end_row();
    }
    for (const auto& m : r.moments) {
        os << "# moments point=" << point_label(m.point) << " mean=" << fmt17(m.mean) << " bias=" << fmt17(m.bias) << " eps0=" << fmt17(m.eps0)
           << " stderr=" << fmt17(m.mean_stderr) << " bias_ok=" << m.bias_ok << " var_y=" << fmt17(m.var_y) << " var_bound=" << fmt17(m.var_bound)
           << " var_stderr=" << fmt17(m.var_stderr) << " var_ok=" << m.var_ok << "\n";
    }
}

}  // namespace normnet
