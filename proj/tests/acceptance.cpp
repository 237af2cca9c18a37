// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "normnet/experiments/rademacher_run.hpp"
#include "normnet/experiments/rand_verify.hpp"
#include "normnet/experiments/rate_sweep.hpp"
#include "normnet/experiments/table_c.hpp"
#include "normnet/normnet.hpp"
#include "reference_table.hpp"

using namespace normnet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Detail {
public:
    template <class... T>
    Detail& add(const char* fmt, T... v) {
        char b[512];
        std::snprintf(b, sizeof b, fmt, v...);
        if (!s_.empty()) s_ += "; ";
        s_ += b;
        return *this;
    }
    std::string str() const { return s_; }

private:
    std::string s_;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
    std::fflush(stdout);
}

double prod(std::span<const double> x) {
    double p = 1;
    for (double v : x) p *= v;
    return p;
}

double sq(std::span<const double> x) { return x[0] * x[0]; }

constexpr double kBoundSlack = 1e-6;

Outcome table_reproduction() {
    TableCOptions o;
    o.threads = 1;
    const auto rows = run_table_c(o);
    const auto& ref = reference_rows();
    Outcome out;
    int bad = 0;
    Detail d;
    if (rows.size() != ref.size()) return {false, "row count differs"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& f = ref[i];
        std::vector<std::string> miss;
        if (!matches_printed(r.w_k, f.w_k)) miss.push_back("w_k");
        if (!matches_printed(r.d_k, f.d_k)) miss.push_back("d_k");
        if (std::abs(r.err_unclipped - f.err_unclipped) > 2e-3) miss.push_back("err_unclipped");
        if (std::abs(r.err_clipped - f.err_clipped) > 2e-3) miss.push_back("err_clipped");
        if (std::abs(r.predicted - f.predicted) > 1e-4) miss.push_back("predicted");
        if (std::abs(r.min_phi - f.min_phi) > 1e-4 || std::abs(r.max_phi - f.max_phi) > 1e-4) miss.push_back("range");
        if (r.case_tag == "D" && (r.err_unclipped > 1e-12 || r.err_clipped > 1e-12)) miss.push_back("caseD_exact");
        for (const auto& m : miss) {
            ++bad;
            d.add("%s%d %s", r.case_tag.c_str(), r.k, m.c_str());
        }
    }
    out.pass = bad == 0;
    out.detail = bad == 0 ? "16 rows x 7 cells match" : d.str();
    return out;
}

Outcome bound_soundness() {
    int checked = 0, skipped = 0, bad = 0;
    double worst = 0;
    Detail d;
    auto check = [&](const std::string& label, double err, double pred) {
        ++checked;
        if (pred > 0) worst = std::max(worst, err / pred);
        // exact constructions predict 0; allow rounding only
        if (err > pred * (1 + kBoundSlack) + (pred == 0 ? 1e-12 : 0)) {
            ++bad;
            d.add("%s err %.4g > pred %.4g", label.c_str(), err, pred);
        }
    };
    const auto g1 = EvalGrid::cube(1, 0, 1, 100001);
    for (double alpha : {0.5, 1.0, 2.0})
        for (double k : {8.0, 16.0, 32.0, 64.0}) {
            char tag[64];
            std::snprintf(tag, sizeof tag, "k=%g,a=%g", k, alpha);
            for (const char* act : {"silu", "gelu"}) {
                const auto a = build_square({k, alpha, act});
                check(std::string("square/") + act + "/" + tag, sup_error(sq, *a.network, g1), a.predicted_bound);
            }
            for (const char* c : {"caseA", "caseB", "caseC", "caseD"}) {
                try {
                    const auto a = build_square_weak(c, k, alpha);
                    check(std::string("square/") + c + "/" + tag, sup_error(sq, *a.network, g1), a.predicted_bound);
                    check(std::string("square_unclipped/") + c + "/" + tag, sup_error(sq, a.unclipped, g1), a.predicted_bound);
                } catch (const PreconditionError&) {
                    ++skipped;  // w_k underflows to 0
                }
            }
            for (const char* act : {"silu", "gelu"}) {
                if (k < product_k0(*activation(act).taylor, alpha)) {
                    skipped += 3 + 4;
                    continue;
                }
                const auto p2 = build_product2(k, alpha, act);
                check(std::string("product2/") + act + "/" + tag, sup_error(prod, *p2.network, EvalGrid::cube(2, -1, 1, 401)), p2.predicted_bound);
                const auto p3 = build_product_d(3, k, alpha, act);
                check(std::string("product3/") + act + "/" + tag, sup_error(prod, *p3.network, EvalGrid::cube(3, -1, 1, 41)), p3.predicted_bound);
                const auto p4 = build_product_d(4, k, alpha, act);
                check(std::string("product4/") + act + "/" + tag, sup_error(prod, *p4.network, EvalGrid::cube(4, -1, 1, 17)), p4.predicted_bound);
                for (auto [dd, m] : {std::pair<std::size_t, int>{1, 0}, {1, 1}, {2, 1}, {1, 2}}) {
                    LiprBuildParams p;
                    p.d = dd;
                    p.m = m;
                    p.k = k;
                    p.alpha = alpha;
                    p.activation = act;
                    const auto t = default_lipr_target(dd, m);
                    const auto b = build_lipr(p, t);
                    char lab[96];
                    std::snprintf(lab, sizeof lab, "lipr(%zu,%d)/%s/%s", dd, m, act, tag);
                    check(lab, sup_error(t.f, b.approx.evaluate, EvalGrid::cube(dd, 0, 1, dd == 1 ? 20001 : 201)), b.approx.predicted_bound);
                }
            }
        }
    Outcome o;
    o.pass = bad == 0;
    o.detail = Detail().add("%d checks, %d skipped as infeasible (k < k0 or w_k underflow), worst err/pred %.4f", checked, skipped, worst).str();
    if (bad) o.detail += "; " + d.str();
    return o;
}

Outcome rate_exponents() {
    SweepOptions so;
    so.threads = 1;
    const std::vector<double> ks{8, 16, 32, 64, 128, 256};
    Detail d;
    bool pass = true;
    for (const char* act : {"silu", "caseA", "caseB"}) {
        const auto r = rate_sweep(parse_sweep_target("square"), act, 1, ks, so);
        const bool ok = r.fitted && std::abs(r.fit.slope + 1) <= 0.15;
        pass = pass && ok;
        d.add("%s slope %.3f", act, r.fit.slope);
    }
    // case C: with w_k = e^{1 - k^alpha} the bound omega(w_k)/|gamma| is exactly k^{-alpha}
    const auto c = rate_sweep(parse_sweep_target("square"), "caseC", 1, {8, 16, 32, 64}, so);
    double worst = 0;
    for (const auto& row : c.rows) worst = std::max(worst, std::abs(row.predicted - 1 / row.k) * row.k);
    const bool c_ok = worst <= 1e-12;
    pass = pass && c_ok;
    d.add("caseC slope %.3f, predicted = k^-alpha to rel %.1e", c.fit.slope, worst);
    for (const auto& ref : reference_rows())
        if (std::string(ref.case_tag) == "C") {
            const double pred = 1.0 / ref.k;
            if (std::abs(pred - ref.predicted) > 1e-4) {
                pass = false;
                d.add("caseC k=%d predicted differs from table", ref.k);
            }
        }
    return {pass, d.str()};
}

Outcome certificate_soundness() {
    CounterRng g(2024, 4);
    int bad = 0;
    double worst = 0;
    Detail d;
    const char* kinds[] = {"square", "square_weak", "product2", "product_d", "random_square", "random_product2", "random_product_d", "lipr_monomial", "compose", "lincomb"};
    for (int i = 0; i < 50; ++i) {
        const std::string kind = kinds[i % 10];
        const double alpha = 0.5 + 1.5 * g.uniform01();
        const double k = std::round(16 + 48 * g.uniform01());
        const char* act = g.uniform01() < 0.5 ? "silu" : "gelu";
        const std::size_t dd = 2 + static_cast<std::size_t>(3 * g.uniform01());
        Network net;
        double lo = -1, hi = 1;
        const double kk = std::max(k, std::ceil(product_k0(*activation(act).taylor, alpha)));
        if (kind == "square") {
            net = *build_square({k, alpha, act}).network;
            lo = 0;
        } else if (kind == "square_weak") {
            const char* cs[] = {"caseA", "caseB", "caseC", "caseD"};
            net = *build_square_weak(cs[(i / 10) % 4], std::round(4 + 12 * g.uniform01()), 1).network;
            lo = 0;
        } else if (kind == "product2") {
            net = *build_product2(kk, alpha, act).network;
        } else if (kind == "product_d") {
            net = *build_product_d(dd, kk, alpha, act).network;
        } else if (kind == "random_square") {
            net = build_random_square(k, alpha, act, {static_cast<std::uint64_t>(i), 1}).network;
            lo = 0;
        } else if (kind == "random_product2") {
            net = build_random_product2(kk, alpha, act, {static_cast<std::uint64_t>(i), 2}).network;
        } else if (kind == "random_product_d") {
            net = build_random_product_d(dd, kk, alpha, act, {static_cast<std::uint64_t>(i), 3}).network;
        } else if (kind == "lipr_monomial") {
            LiprBuildParams p;
            p.d = 2;
            p.m = 2 + (i / 10) % 2;
            p.k = kk;
            p.alpha = alpha;
            p.activation = act;
            const auto b = build_lipr(p, sinprod_target(2));
            net = *b.composite->monomials.back();
        } else if (kind == "compose") {
            const auto inner = build_square({k, alpha, act});
            net = compose(*build_square({kk, alpha, act}).network, *inner.network);
            lo = 0;
        } else {
            net = lincomb(0.5, *build_product2(kk, alpha, act).network, -1.5, *build_product2(kk, alpha, "silu").network);
        }
        const auto rep = check_norm_constraint(net);
        const double lip = measure_lipschitz_empirical(net, 10000, 100 + static_cast<std::uint64_t>(i), lo, hi);
        worst = std::max(worst, lip / net.cert().K);
        if (!rep.ok || lip > net.cert().K + 1e-9) {
            ++bad;
            d.add("#%d %s: norm %s, lip %.4g vs K %.4g", i, kind.c_str(), rep.ok ? "ok" : rep.message.c_str(), lip, net.cert().K);
        }
    }
    Outcome o;
    o.pass = bad == 0;
    o.detail = Detail().add("50 constructions, worst lip/K %.3g", worst).str();
    if (bad) o.detail += "; " + d.str();
    return o;
}

Outcome partition_of_unity() {
    double worst = 0;
    bool neg = false;
    for (auto [d, k, gamma] : {std::tuple<std::size_t, double, double>{1, 16, 1}, {2, 8, 0.5}, {3, 4, 0.5}}) {
        LiprBuildParams p;
        p.d = d;
        p.k = k;
        p.gamma = gamma;
        const auto b = build_lipr(p, tent_target());
        CounterRng g(77, d);
        std::vector<double> x(d);
        for (int i = 0; i < 10000; ++i) {
            for (auto& v : x) v = g.uniform01();
            double s = 0;
            for (auto& [j, rho] : b.composite->partition(x)) {
                neg = neg || rho < 0;
                s += rho;
            }
            worst = std::max(worst, std::abs(s - 1));
        }
    }
    return {worst <= 1e-12 && !neg, Detail().add("max |sum - 1| = %.2e over 3 x 10^4 points", worst).str()};
}

Outcome tree_recursion() {
    bool pass = true;
    Detail d;
    for (std::size_t dim : {3u, 4u, 8u}) {
        const auto tree = build_product_tree(dim, 64, 1, "silu");
        std::vector<std::vector<double>> pts;
        CounterRng g(31, dim);
        for (int i = 0; i < 4000; ++i) {
            std::vector<double> x(dim);
            for (auto& v : x) v = g.uniform(-1, 1);
            pts.push_back(x);
        }
        for (double c : {-1.0, 1.0}) pts.emplace_back(dim, c);
        const auto eps = product_tree_level_errors(tree, pts);
        double slack = 1e300;
        for (std::size_t l = 1; l < eps.size(); ++l) slack = std::min(slack, 2 * eps[l - 1] + tree.eps_k - eps[l]);
        pass = pass && slack >= 0;
        d.add("d=%zu levels %zu min slack %.3g (eps_k %.3g)", dim, eps.size() - 1, slack, tree.eps_k);
    }
    return {pass, d.str()};
}

Outcome randomized_guarantees() {
    bool pass = true;
    Detail d;
    for (int lemma : {6, 7}) {
        RandVerifyOptions o;
        o.lemma = lemma;
        o.k = 1000;
        o.alpha = 1;
        o.eps = {parse_eps("2eps0")};
        o.trials = 10000;
        o.seed = 20240;
        o.threads = 1;
        if (lemma == 6) o.points = {{0.0}, {0.3}, {0.7}, {1.0}};
        else o.points = {{0.5, 0.5}, {0.5, -0.5}, {-0.5, 0.5}, {-0.5, -0.5}};
        const auto r = run_rand_verify(o);
        double minfreq = 1, maxbias = 0, maxvar = 0;
        bool vac = false;
        for (const auto& rec : r.records) {
            minfreq = std::min(minfreq, rec.freq);
            vac = vac || rec.vacuous;
        }
        for (const auto& m : r.moments) {
            maxbias = std::max(maxbias, m.bias / (m.eps0 + 3 * m.mean_stderr));
            maxvar = std::max(maxvar, m.var_y / (m.var_bound + 3 * m.var_stderr));
        }
        pass = pass && !r.any_violation();
        d.add("lemma %d: min freq %.4f, pred %.4f%s, bias/allow %.3f, var/allow %.3f", lemma, minfreq, r.records[0].predicted, vac ? " (vacuous)" : "",
              maxbias, maxvar);
    }
    return {pass, d.str()};
}

Outcome rademacher_sandwich() {
    int bad = 0;
    Detail d;
    double min_gap_lower = 1e300, min_gap_upper = 1e300, worst_z = 0;
    for (std::size_t pid = 0; pid < 20; ++pid) {
        const std::size_t n = 4 + pid % 9, dim = 1 + pid % 4;
        const auto panel = random_panel(n, dim, 1, {555, 3 * pid});
        const double K = 1 + static_cast<double>(pid % 3);
        const auto relu = family_values(family_of(build_rad_witness_relu(K, dim)), panel);
        const double ex = rademacher_exact(relu);
        const double lo = bound_lower_relu(K, 0, panel.s_stat, static_cast<double>(n));
        const double up = bound_upper(1, K, static_cast<double>(n), 1, static_cast<double>(dim));
        const auto rnd = family_values(family_of(random_lipschitz_family(6, dim, 4, 2, K, {555, 3 * pid + 1})), panel);
        const double ex2 = rademacher_exact(rnd);
        const double up2 = bound_upper(1, K, static_cast<double>(n), 2, static_cast<double>(dim));
        const auto mc = rademacher_mc(relu, 10000, {555, 3 * pid + 2});
        const double z = std::abs(mc.mean - ex) / mc.stderr_;
        min_gap_lower = std::min(min_gap_lower, ex - lo);
        min_gap_upper = std::min({min_gap_upper, up - ex, up2 - ex2});
        worst_z = std::max(worst_z, z);
        if (ex < lo || ex > up || ex2 > up2 || z > 3) {
            ++bad;
            d.add("panel %zu: exact %.4g lower %.4g upper %.4g random %.4g/%.4g z %.2f", pid, ex, lo, up, ex2, up2, z);
        }
    }
    Outcome o;
    o.pass = bad == 0;
    o.detail = Detail().add("20 panels; min exact-lower %.3g, min upper-exact %.3g, max MC z %.2f", min_gap_lower, min_gap_upper, worst_z).str();
    if (bad) o.detail += "; " + d.str();
    return o;
}

Outcome choose_k_feasibility() {
    CounterRng g(99, 9);
    int bad = 0;
    Detail d;
    for (int i = 0; i < 10; ++i) {
        const double W = std::round(std::pow(10.0, 1 + 3 * g.uniform01()));
        const double K = std::round(W * std::pow(10.0, 2 * g.uniform01()));
        const std::size_t L = 1 + static_cast<std::size_t>(4 * g.uniform01());
        const auto r = choose_k(W, K, 1, 0, 1, 1, "silu");
        LiprBuildParams p;
        p.d = 1;
        p.m = 0;
        p.beta = 1;
        p.k = r.k;
        const auto b = build_lipr(p, tent_target());
        const auto& c = b.approx.cert;
        const bool ok = static_cast<double>(c.W) <= W && c.L <= std::max<std::size_t>(L, 0) && c.K <= K;
        if (!ok) {
            ++bad;
            d.add("(W=%g,K=%g): k=%g cert (%zu,%zu,%g)", W, K, r.k, c.W, c.L, c.K);
        }
        if (i < 3) d.add("(W=%g,K=%g) -> k=%g, W'=%zu, K'=%.4g", W, K, r.k, c.W, c.K);
    }
    return {bad == 0, d.str()};
}

Outcome scaling_exponent() {
    Detail d;
    bool pass = true;
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto f = scaling_sweep("silu", alpha, {8, 16, 32, 64, 128, 256});
        pass = pass && std::abs(f.slope - alpha) <= 0.01;
        d.add("alpha %.1f fitted %.6f", alpha, f.slope);
    }
    return {pass, d.str()};
}

}  // namespace

int main() {
    criterion(1, "weak-modulus square table reproduction", table_reproduction);
    criterion(2, "bound soundness of deterministic constructors", bound_soundness);
    criterion(3, "rate exponents of the square approximation", rate_exponents);
    criterion(4, "certificate soundness (norms and empirical Lipschitz)", certificate_soundness);
    criterion(5, "partition of unity", partition_of_unity);
    criterion(6, "product tree error recursion", tree_recursion);
    criterion(7, "randomized concentration guarantees", randomized_guarantees);
    criterion(8, "Rademacher sandwich", rademacher_sandwich);
    criterion(9, "choose_k feasibility", choose_k_feasibility);
    criterion(10, "scaling exponent of K_k", scaling_exponent);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
