#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "../complexity.hpp"
#include "csv.hpp"

namespace normnet {

// "name" or "name:key=value,key=value"
struct KeyValueSpec {
    std::string name;
    std::map<std::string, std::string> kv;

    double num(const std::string& key, double def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw PreconditionError(name + ": value of '" + key + "' is not a number");
        }
    }
    std::string str(const std::string& key, const std::string& def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }
};

inline KeyValueSpec parse_kv_spec(const std::string& s) {
    KeyValueSpec out;
    const auto colon = s.find(':');
    out.name = s.substr(0, colon);
    if (out.name.empty()) throw PreconditionError("empty spec");
    if (colon == std::string::npos) return out;
    std::string rest = s.substr(colon + 1);
    std::size_t b = 0;
    while (b < rest.size()) {
        auto e = rest.find(',', b);
        if (e == std::string::npos) e = rest.size();
        const std::string item = rest.substr(b, e - b);
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw PreconditionError("spec '" + s + "': expected key=value, got '" + item + "'");
        out.kv[item.substr(0, eq)] = item.substr(eq + 1);
        b = e + 1;
    }
    return out;
}

struct RademacherOptions {
    std::string panel = "random";
    std::string family;
    std::size_t n = 8;
    std::size_t d = 3;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
};

struct RademacherRow {
    std::size_t panel_id = 0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::string family;
    std::optional<double> exact;
    double mc = 0;
    double stderr_ = 0;
    std::optional<double> upper;
    std::optional<double> lower_relu;
    std::optional<double> lower_general;
    std::vector<std::string> failures;
    std::string note;

    bool ok() const { return failures.empty(); }
};

struct WitnessFamily {
    std::vector<Network> nets;
    double W = 0, L = 0, K = 0;
    bool one_lipschitz = false;
    std::optional<double> leak;        // relu-type witness: applies the ReLU lower bound
    std::optional<std::string> general;  // smooth witness: activation tag
};

// Random bias-free ReLU networks with exact layer norms 1, ..., 1, K.
inline std::vector<Network> random_lipschitz_family(std::size_t count, std::size_t d, std::size_t W, std::size_t L, double K, RngSpec rng) {
    CounterRng g(rng);
    std::vector<Network> fam;
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<Layer> layers;
        std::size_t in = d;
        for (std::size_t l = 0; l <= L; ++l) {
            const std::size_t out = l == L ? 1 : W;
            Matrix A(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            for (Eigen::Index i = 0; i < A.rows(); ++i)
                for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = g.uniform(-1, 1);
            const double s = op_norm_inf(A);
            A *= (l == L ? K : 1.0) / s;
            layers.push_back(make_layer(A, Vector::Zero(A.rows()), l == L ? "identity" : "relu"));
            in = out;
        }
        ArchitectureCert cert;
        cert.W = W;
        cert.L = L;
        cert.I = constrained_layers(layers);
        cert.K = std::max(K, product_over(layers, cert.I));
        fam.emplace_back(d, std::move(layers), cert);
    }
    return fam;
}

inline WitnessFamily make_family(const KeyValueSpec& f, std::size_t d, const SamplePanel& panel, RngSpec rng, std::string& note) {
    WitnessFamily w;
    w.K = f.num("K", 2);
    if (f.name == "relu-witness" || f.name == "leaky-witness") {
        const double leak = f.name == "relu-witness" ? 0.0 : f.num("leak", 0.01);
        std::string tag = "relu";
        if (leak > 0) {
            char b[48];
            std::snprintf(b, sizeof b, "leaky:%.17g", leak);
            tag = b;
        }
        w.nets = build_rad_witness_relu(w.K, d, tag);
        w.W = 2;
        w.L = 1;
        w.one_lipschitz = true;
        w.leak = leak;
    } else if (f.name == "general-witness") {
        const std::string tag = f.str("act", "tanh");
        const ActivationEntry& e = activation(tag);
        const double delta = f.num("delta", 1);
        const double s1 = derivative_at_zero(e);
        const double M = linear_remainder_constant(e, delta);
        const auto g = bound_lower_general(s1, M, panel.B, w.K, panel.s_stat, static_cast<double>(panel.n()));
        if (g.eps_star > std::min(delta / panel.B, s1)) {
            note = "eps* exceeds min(delta/B, sigma'(0)); panel skipped for the general bound";
            return w;
        }
        w.nets = build_rad_witness_general(w.K, d, g.eps_star, tag, delta, panel.B);
        w.W = 2;
        w.L = 1;
        w.K = w.nets[0].cert().K;
        w.general = tag;
    } else if (f.name == "random-relu") {
        const auto W = static_cast<std::size_t>(f.num("W", 4));
        const auto L = static_cast<std::size_t>(f.num("L", 2));
        const auto count = static_cast<std::size_t>(f.num("count", 5));
        if (W == 0 || L == 0 || count == 0) throw PreconditionError("random-relu: W, L and count must be positive");
        w.nets = random_lipschitz_family(count, d, W, L, w.K, rng);
        w.W = static_cast<double>(W);
        w.L = static_cast<double>(L);
        w.one_lipschitz = true;
    } else {
        throw PreconditionError("unknown family '" + f.name + "' (expected relu-witness, leaky-witness, general-witness or random-relu)");
    }
    return w;
}

inline std::vector<RademacherRow> run_rademacher(const RademacherOptions& o) {
    if (o.family.empty()) throw PreconditionError("rademacher: empty family spec");
    if (o.n == 0 || o.d == 0) throw PreconditionError("rademacher: n and d must be positive");
    const auto pspec = parse_kv_spec(o.panel);
    const auto fspec = parse_kv_spec(o.family);
    if (pspec.name != "random") throw PreconditionError("unknown panel spec '" + pspec.name + "' (expected random[:B=..,count=..])");
    const double B = pspec.num("B", 1);
    const auto count = static_cast<std::size_t>(pspec.num("count", 1));
    std::vector<RademacherRow> rows;
    for (std::size_t pid = 0; pid < count; ++pid) {
        const auto panel = random_panel(o.n, o.d, B, {o.seed, 3 * pid});
        RademacherRow r;
        r.panel_id = pid;
        r.n = o.n;
        r.d = o.d;
        r.family = o.family;
        const auto fam = make_family(fspec, o.d, panel, {o.seed, 3 * pid + 1}, r.note);
        if (fam.nets.empty()) {
            rows.push_back(std::move(r));
            continue;
        }
        const auto values = family_values(family_of(fam.nets), panel);
        const auto mc = rademacher_mc(values, o.trials, {o.seed, 3 * pid + 2});
        r.mc = mc.mean;
        r.stderr_ = mc.stderr_;
        if (o.n <= kMaxExactN) r.exact = rademacher_exact(values);
        const double n = static_cast<double>(o.n);
        if (fam.one_lipschitz) r.upper = bound_upper(B, fam.K, n, fam.L, static_cast<double>(o.d));
        if (fam.leak) r.lower_relu = bound_lower_relu(fam.K, *fam.leak, panel.s_stat, n);
        if (fam.general) {
            const ActivationEntry& e = activation(*fam.general);
            const double delta = fspec.num("delta", 1);
            r.lower_general = bound_lower_general(derivative_at_zero(e), linear_remainder_constant(e, delta), B, fspec.num("K", 2), panel.s_stat, n).value;
        }
        const double est = r.exact ? *r.exact : r.mc;
        if (r.upper && est > *r.upper * (1 + 1e-12)) r.failures.push_back("above_upper");
        if (r.lower_relu && est < *r.lower_relu * (1 - 1e-12)) r.failures.push_back("below_lower_relu");
        if (r.lower_general && est < *r.lower_general * (1 - 1e-12)) r.failures.push_back("below_lower_general");
        if (r.exact && std::abs(r.mc - *r.exact) > 3 * r.stderr_) r.failures.push_back("mc_off");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_rademacher_csv(std::ostream& os, const std::vector<RademacherRow>& rows) {
    CsvWriter w(os, "rademacher", {"panel_id", "n", "d", "family", "exact", "mc", "stderr", "upper", "lower_relu", "lower_general", "verdict"});
    auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
    for (const auto& r : rows) {
        std::string fam = r.family;
        for (auto& c : fam)
            if (c == ',') c = ';';
        w.cell(r.panel_id).cell(r.n).cell(r.d).cell(fam).cell(opt(r.exact));
        if (!r.note.empty()) {
            w.cell(std::string()).cell(std::string()).cell(std::string()).cell(std::string()).cell(std::string()).cell("skipped");
        } else {
            w.cell(r.mc).cell(r.stderr_).cell(opt(r.upper)).cell(opt(r.lower_relu)).cell(opt(r.lower_general));
            std::string v;
            for (const auto& f : r.failures) v += (v.empty() ? "" : ";") + f;
            w.cell(v.empty() ? std::string("ok") : v);
        }
        w.end_row();
    }
}

}  // namespace normnet
