// normnet: experiment driver and network build/eval tool.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "normnet/constructors/lipr_io.hpp"
#include "normnet/experiments/figures.hpp"
#include "normnet/experiments/rademacher_run.hpp"
#include "normnet/experiments/rand_verify.hpp"
#include "normnet/experiments/rate_sweep.hpp"
#include "normnet/experiments/table_c.hpp"
#include "normnet/normnet.hpp"

namespace {

using namespace normnet;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t' && c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(what + ": '" + s + "' is not a number");
}

std::vector<double> number_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    for (const auto& t : split(s, ",")) v.push_back(to_double(t, what));
    if (v.empty()) throw UsageError(what + ": empty list");
    return v;
}

std::vector<int> int_list(const std::string& s, const std::string& what) {
    std::vector<int> v;
    for (double d : number_list(s, what)) {
        if (d != std::floor(d) || d < 1) throw UsageError(what + ": expected positive integers");
        v.push_back(static_cast<int>(d));
    }
    return v;
}

// Writes to the file, or stdout for "" and "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path, std::ios::binary);
        if (!file_) throw Error("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    bool to_stdout() const { return !file_.is_open(); }

private:
    std::ofstream file_;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- table-c

struct TableArgs {
    double alpha = 1;
    std::string k = "8,16,32,64";
    std::string cases = "A,B,C,D";
    std::size_t grid = 100001;
    std::string out;
    bool latex = false;
    bool naive = false;
};

int run_table(const TableArgs& a) {
    TableCOptions o;
    o.alpha = a.alpha;
    o.k_list = int_list(a.k, "--k");
    o.cases = split(a.cases, ",");
    o.grid = a.grid;
    o.naive = a.naive;
    if (o.grid < kMinTableGrid) std::cerr << "warning: grid of " << o.grid << " points is below " << kMinTableGrid << "; errors may be underestimated\n";
    const auto rows = run_table_c(o);
    if (a.latex)
        write_table_c_latex(std::cout, rows);
    else
        write_table_c_text(std::cout, rows);
    if (!a.out.empty()) {
        Output out(a.out);
        write_table_c_csv(out.stream(), rows);
    }
    int rc = kOk;
    for (const auto& r : rows) {
        if (r.err_clipped > r.err_unclipped + 1e-12 || r.err_unclipped > r.predicted * (1 + 1e-6) + 1e-12) {
            std::cerr << "bound violated: case " << r.case_tag << " k=" << r.k << "\n";
            rc = kVerifyFailed;
        }
    }
    return rc;
}

// ---- plots

struct PlotArgs {
    std::string case_tag;
    std::string k = "8,16,32,64";
    double alpha = 1;
    std::string out = ".";
    std::string format = "svg";
};

int run_plots(const PlotArgs& a) {
    FigureOptions o;
    o.case_tag = a.case_tag;
    o.k_list = int_list(a.k, "--k");
    o.alpha = a.alpha;
    o.out_dir = a.out;
    o.format = a.format;
    const auto f = write_case_figures(o);
    std::cout << f.approx << "\n" << f.abserr << "\n";
    return kOk;
}

// ---- rate-sweep

struct SweepArgs {
    std::string target = "square";
    std::string activation = "silu";
    double alpha = 1;
    std::string k = "8,16,32,64";
    std::string out;
};

int run_sweep(const SweepArgs& a) {
    const auto t = parse_sweep_target(a.target);
    const auto r = rate_sweep(t, a.activation, a.alpha, number_list(a.k, "--k"));
    Output out(a.out);
    write_sweep_csv(out.stream(), r);
    if (!out.to_stdout()) std::cout << "slope " << (r.fitted ? fmt17(r.fit.slope) : std::string("nan")) << "\n";
    int rc = r.sound ? kOk : kVerifyFailed;
    if (!r.sound) std::cerr << "measured error exceeds the predicted bound\n";
    if (t.kind != "lipr" && r.fitted && r.fit.slope > -a.alpha + 0.15) {
        std::cerr << "fitted slope " << r.fit.slope << " shallower than -alpha + 0.15\n";
        rc = kVerifyFailed;
    }
    return rc;
}

// ---- rand-verify

struct RandArgs {
    int lemma = 6;
    double k = 1000;
    double alpha = 1;
    std::string eps = "2eps0";
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::string points;
    std::size_t dim = 0;
    std::string activation = "silu";
    int m = 1;
    double beta = 1;
    std::string target;
    std::string out;
};

std::vector<std::vector<double>> parse_points(const std::string& s, std::size_t dim) {
    std::vector<std::vector<double>> pts;
    if (s.find(';') != std::string::npos) {
        for (const auto& p : split(s, ";")) pts.push_back(number_list(p, "--points"));
    } else {
        const auto flat = number_list(s, "--points");
        if (flat.size() % dim != 0) throw UsageError("--points: " + std::to_string(flat.size()) + " values do not split into points of dimension " + std::to_string(dim));
        for (std::size_t i = 0; i < flat.size(); i += dim) pts.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i), flat.begin() + static_cast<std::ptrdiff_t>(i + dim));
    }
    return pts;
}

int run_rand(const RandArgs& a) {
    RandVerifyOptions o;
    o.lemma = a.lemma;
    o.k = a.k;
    o.alpha = a.alpha;
    for (const auto& e : split(a.eps, ",")) o.eps.push_back(parse_eps(e));
    o.trials = a.trials;
    o.seed = a.seed;
    const std::size_t dim = a.dim ? a.dim : (a.lemma == 7 ? 2 : a.lemma == 8 ? 3 : 1);
    std::string pts = a.points;
    if (pts.empty()) pts = a.lemma == 6 ? "0,0.3,0.7,1" : a.lemma == 7 ? "0.5,0.5;0.5,-0.5;-0.5,0.5;-0.5,-0.5" : a.lemma == 8 ? "0.5,0.5,0.5" : "0.5";
    o.points = parse_points(pts, dim);
    o.activation = a.activation;
    o.m = a.m;
    o.beta = a.beta;
    o.target = a.target;
    if (a.trials < 1000) std::cerr << "note: fewer than 1000 trials\n";
    const auto r = run_rand_verify(o);
    Output out(a.out);
    write_rand_verify_csv(out.stream(), r);
    if (r.any_violation()) {
        std::cerr << "dominance or moment check failed\n";
        return kVerifyFailed;
    }
    return kOk;
}

// ---- rademacher

struct RadArgs {
    std::string panel = "random";
    std::string family;
    std::size_t n = 8;
    std::size_t d = 3;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    std::string out;
};

int run_rad(const RadArgs& a) {
    if (a.family.empty()) throw UsageError("--family: empty family spec");
    RademacherOptions o;
    o.panel = a.panel;
    o.family = a.family;
    o.n = a.n;
    o.d = a.d;
    o.trials = a.trials;
    o.seed = a.seed;
    const auto rows = run_rademacher(o);
    Output out(a.out);
    write_rademacher_csv(out.stream(), rows);
    for (const auto& r : rows)
        if (!r.ok()) return kVerifyFailed;
    return kOk;
}

// ---- build / eval

struct BuildArgs {
    std::string target;
    std::string params;
    std::string out;
};

int run_build(const BuildArgs& a) {
    const auto p = parse_kv_spec("params:" + a.params);
    const double k = p.num("k", 16), alpha = p.num("alpha", 1);
    const std::string act = p.str("activation", "silu");
    const auto d = static_cast<std::size_t>(p.num("d", 2));
    const RngSpec rng{static_cast<std::uint64_t>(p.num("seed", 1)), static_cast<std::uint64_t>(p.num("stream", 0))};
    std::string json;
    ArchitectureCert cert;
    double predicted = -1;
    auto from = [&](const CertifiedApproximator& ap) {
        json = network_to_json(*ap.network);
        cert = ap.cert;
        predicted = ap.predicted_bound;
    };
    auto from_net = [&](const Network& n) {
        json = network_to_json(n);
        cert = n.cert();
    };
    if (a.target == "square") {
        from(build_square({k, alpha, act}));
    } else if (a.target == "square-weak") {
        from(build_square_weak(p.str("activation", "caseA"), k, alpha, p.num("w", 0)));
    } else if (a.target == "product2") {
        from(build_product2(k, alpha, act));
    } else if (a.target == "product_d") {
        from(build_product_d(d, k, alpha, act));
    } else if (a.target == "random-square") {
        from_net(build_random_square(k, alpha, act, rng).network);
    } else if (a.target == "random-product2") {
        from_net(build_random_product2(k, alpha, act, rng).network);
    } else if (a.target == "random-product_d") {
        from_net(build_random_product_d(d, k, alpha, act, rng).network);
    } else if (a.target == "lipr" || a.target == "random-lipr") {
        LiprBuildParams lp;
        lp.d = static_cast<std::size_t>(p.num("d", 1));
        lp.m = static_cast<int>(p.num("m", 0));
        lp.beta = p.num("beta", 1);
        lp.alpha = alpha;
        lp.gamma = p.num("gamma", 0);
        lp.k = k;
        lp.activation = act;
        const std::string fn = p.str("fn", "");
        const auto target = fn.empty() ? default_lipr_target(lp.d, lp.m) : lipr_target(fn, lp.d);
        LiprBuild b;
        if (a.target == "lipr") {
            b = build_lipr(lp, target);
        } else {
            b = build_random_lipr(lp, target, rng).build;
        }
        json = composite_to_json(*b.composite, b.approx.cert);
        cert = b.approx.cert;
        predicted = b.approx.predicted_bound;
    } else {
        throw UsageError("--target: unknown target '" + a.target +
                         "' (square, square-weak, product2, product_d, lipr, random-square, random-product2, random-product_d, random-lipr)");
    }
    Output out(a.out);
    out.stream() << json << "\n";
    std::ostream& info = out.to_stdout() ? std::cerr : std::cout;
    info << "W=" << cert.W << " L=" << cert.L << " K=" << fmt17(cert.K);
    if (predicted >= 0) info << " predicted=" << fmt17(predicted);
    info << "\n";
    return kOk;
}

struct EvalArgs {
    std::string net;
    std::string x;
};

int run_eval(const EvalArgs& a) {
    const std::string bytes = read_file(a.net);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("$: malformed JSON: ") + e.what());
    }
    std::function<std::vector<double>(const std::vector<double>&)> f;
    std::size_t dim = 0;
    if (is_composite_json(j)) {
        auto c = std::make_shared<LiprComposite>(composite_from_json(j));
        dim = c->d;
        f = [c](const std::vector<double>& x) { return std::vector<double>{c->eval(x)}; };
    } else {
        auto n = std::make_shared<Network>(network_from_json(j));
        dim = n->input_dim();
        f = [n](const std::vector<double>& x) { return n->eval(std::span<const double>(x)); };
    }
    // a readable file holds one point per line; otherwise --x is the point list itself
    std::vector<std::vector<double>> pts;
    std::ifstream file(a.x);
    if (file) {
        std::string line;
        while (std::getline(file, line)) {
            if (line.empty() || line[0] == '#') continue;
            pts.push_back(number_list(line, "--x"));
        }
    } else {
        const auto flat = number_list(a.x, "--x");
        if (flat.size() % dim != 0) throw UsageError("--x: " + std::to_string(flat.size()) + " values do not split into points of dimension " + std::to_string(dim));
        for (std::size_t i = 0; i < flat.size(); i += dim) pts.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i), flat.begin() + static_cast<std::ptrdiff_t>(i + dim));
    }
    for (const auto& x : pts) {
        if (x.size() != dim) throw DimensionError("--x: point of length " + std::to_string(x.size()) + ", network expects " + std::to_string(dim));
        const auto y = f(x);
        for (std::size_t i = 0; i < y.size(); ++i) std::cout << (i ? "," : "") << fmt17(y[i]);
        std::cout << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"normnet: norm-constrained network constructions and experiments"};
    app.require_subcommand(1);
    int rc = kOk;

    TableArgs ta;
    auto* table = app.add_subcommand("table-c", "reproduce the weak-modulus square table");
    table->add_option("--alpha", ta.alpha, "rate exponent");
    table->add_option("--k", ta.k, "comma-separated k values");
    table->add_option("--cases", ta.cases, "comma-separated cases from A,B,C,D");
    table->add_option("--grid", ta.grid, "uniform grid points on [0,1]");
    table->add_option("--out", ta.out, "CSV output path");
    table->add_flag("--latex", ta.latex, "print rows as LaTeX table lines");
    table->add_flag("--naive", ta.naive, "evaluate the layered network instead of the closed-form even part");
    table->callback([&] { rc = run_table(ta); });

    PlotArgs pa;
    auto* plots = app.add_subcommand("plots", "approximation and error figures");
    plots->add_option("--case", pa.case_tag, "A, B or C")->required();
    plots->add_option("--k", pa.k, "comma-separated k values");
    plots->add_option("--alpha", pa.alpha, "rate exponent");
    plots->add_option("--out", pa.out, "output directory");
    plots->add_option("--format", pa.format, "svg or png");
    plots->callback([&] { rc = run_plots(pa); });

    SweepArgs sa;
    auto* sweep = app.add_subcommand("rate-sweep", "measured vs predicted error over k");
    sweep->add_option("--target", sa.target, "square | product2 | product_d(d) | lipr(d,m,beta)");
    sweep->add_option("--activation", sa.activation, "activation tag");
    sweep->add_option("--alpha", sa.alpha, "rate exponent");
    sweep->add_option("--k", sa.k, "comma-separated k values (at least 4)");
    sweep->add_option("--out", sa.out, "CSV output path");
    sweep->callback([&] { rc = run_sweep(sa); });

    RandArgs ra;
    auto* rand = app.add_subcommand("rand-verify", "Monte-Carlo check of the random-weight success bounds");
    rand->add_option("--lemma", ra.lemma, "6 (square), 7 (product2), 8 (product_d), 9 (Lip_r)")->check(CLI::Range(6, 9));
    rand->add_option("--k", ra.k, "number of random units");
    rand->add_option("--alpha", ra.alpha, "rate exponent");
    rand->add_option("--eps", ra.eps, "comma-separated eps values; 'Xeps0' is X times the bias threshold");
    rand->add_option("--trials", ra.trials, "independent constructions");
    rand->add_option("--seed", ra.seed, "base seed");
    rand->add_option("--points", ra.points, "points: coordinates split by ',' and points by ';' (or a flat list of --dim chunks)");
    rand->add_option("--dim", ra.dim, "point dimension for flat --points lists");
    rand->add_option("--activation", ra.activation, "activation tag");
    rand->add_option("--m", ra.m, "Lip_r smoothness order (lemma 9)");
    rand->add_option("--beta", ra.beta, "Lip_r Hölder exponent (lemma 9)");
    rand->add_option("--target", ra.target, "Lip_r target: tent or sinprod (lemma 9)");
    rand->add_option("--out", ra.out, "CSV output path");
    rand->callback([&] { rc = run_rand(ra); });

    RadArgs rda;
    auto* rad = app.add_subcommand("rademacher", "Rademacher complexity estimates against closed-form bounds");
    rad->add_option("--panel", rda.panel, "random[:B=..,count=..]");
    rad->add_option("--family", rda.family, "relu-witness | leaky-witness:leak=.. | general-witness:act=.. | random-relu:K=..,L=..,W=..,count=..")->required();
    rad->add_option("--n", rda.n, "sample size");
    rad->add_option("--d", rda.d, "input dimension");
    rad->add_option("--trials", rda.trials, "Monte-Carlo sign draws");
    rad->add_option("--seed", rda.seed, "base seed");
    rad->add_option("--out", rda.out, "CSV output path");
    rad->callback([&] { rc = run_rad(rda); });

    BuildArgs ba;
    auto* build = app.add_subcommand("build", "build a network and write it as JSON");
    build->add_option("--target", ba.target, "constructor name")->required();
    build->add_option("--params", ba.params, "key=value list, e.g. k=16,alpha=1,activation=silu");
    build->add_option("--out", ba.out, "JSON output path");
    build->callback([&] { rc = run_build(ba); });

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "evaluate a saved network");
    ev->add_option("--net", ea.net, "network JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--x", ea.x, "CSV file of points, or a comma list")->required();
    ev->callback([&] { rc = run_eval(ea); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kVerifyFailed;
    }
    return rc;
}
