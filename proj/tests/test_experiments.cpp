#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "normnet/experiments/figures.hpp"
#include "normnet/experiments/rademacher_run.hpp"
#include "normnet/experiments/rand_verify.hpp"
#include "normnet/experiments/rate_sweep.hpp"
#include "normnet/experiments/table_c.hpp"
#include "normnet/normnet.hpp"
#include "reference_table.hpp"

using namespace normnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("normnet_test_" + std::to_string(::getpid())) / name;
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NORMNET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(TableC, MatchesReferenceCells) {
    TableCOptions o;
    const auto rows = run_table_c(o);
    ASSERT_EQ(rows.size(), reference_rows().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& ref = reference_rows()[i];
        SCOPED_TRACE(std::string(ref.case_tag) + std::to_string(ref.k));
        ASSERT_EQ(r.case_tag, ref.case_tag);
        ASSERT_EQ(r.k, ref.k);
        EXPECT_TRUE(matches_printed(r.w_k, ref.w_k)) << r.w_k;
        EXPECT_TRUE(matches_printed(r.d_k, ref.d_k)) << r.d_k;
        EXPECT_NEAR(r.err_unclipped, ref.err_unclipped, 2e-3);
        EXPECT_NEAR(r.err_clipped, ref.err_clipped, 2e-3);
        EXPECT_NEAR(r.predicted, ref.predicted, 1e-4);
        EXPECT_NEAR(r.min_phi, ref.min_phi, 1e-4);
        EXPECT_NEAR(r.max_phi, ref.max_phi, 1e-4);
        if (r.case_tag == "D") {
            EXPECT_LE(r.err_unclipped, 1e-12);
            EXPECT_LE(r.err_clipped, 1e-12);
        }
    }
}

TEST(TableC, CaseCk16ScaleIsInverseWeightSquared) {
    TableCOptions o;
    o.cases = {"C"};
    o.k_list = {16};
    o.grid = 1001;
    const auto r = run_table_c(o)[0];
    EXPECT_NEAR(r.d_k, 1 / (2 * r.w_k * r.w_k), 1e-6 * r.d_k);
    EXPECT_NEAR(r.w_k, std::exp(-15.0), 1e-20);
}

TEST(TableC, NaiveEvaluationAgreesForSmoothCases) {
    TableCOptions o;
    o.cases = {"A", "B"};
    o.k_list = {8, 16};
    o.grid = 10001;
    const auto a = run_table_c(o);
    o.naive = true;
    const auto b = run_table_c(o);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].err_unclipped, b[i].err_unclipped, 1e-9);
}

TEST(TableC, CsvIsByteStableAcrossThreads) {
    TableCOptions o;
    o.grid = 20001;
    o.threads = 1;
    std::ostringstream a, b;
    write_table_c_csv(a, run_table_c(o));
    o.threads = 4;
    write_table_c_csv(b, run_table_c(o));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("# schema: normnet.table_c/1\n", 0), 0u);
}

TEST(TableC, LatexRow) {
    TableCOptions o;
    o.cases = {"A"};
    o.k_list = {8};
    std::ostringstream s;
    write_table_c_latex(s, run_table_c(o));
    EXPECT_NE(s.str().find("A & 8 & 1.0 & 0.1250 & 32.00"), std::string::npos) << s.str();
}

TEST(TableC, RejectsUnknownCase) {
    TableCOptions o;
    o.cases = {"Q"};
    EXPECT_THROW(run_table_c(o), Error);
}

TEST(Figures, WritesBothFormats) {
    const auto dir = scratch_dir("figs");
    for (const char* fmt : {"svg", "png"}) {
        FigureOptions o;
        o.case_tag = "B";
        o.k_list = {8, 16};
        o.out_dir = dir.string();
        o.format = fmt;
        const auto f = write_case_figures(o);
        ASSERT_TRUE(fs::exists(f.approx));
        ASSERT_TRUE(fs::exists(f.abserr));
        EXPECT_GT(fs::file_size(f.approx), 100u);
        if (std::string(fmt) == "png") {
            EXPECT_EQ(slurp(f.abserr).substr(1, 3), "PNG");
        } else {
            EXPECT_NE(slurp(f.approx).find("<svg"), std::string::npos);
        }
        ASSERT_EQ(f.max_abserr.size(), 2u);
        EXPECT_NEAR(f.max_abserr[0], 0.125, 2e-3);
        EXPECT_NEAR(f.max_abserr[1], 0.0625, 2e-3);
    }
}

TEST(RateSweep, SquareSlopeNearMinusAlpha) {
    SweepOptions o;
    o.grid_1d = 20001;
    const auto r = rate_sweep(parse_sweep_target("square"), "silu", 1, {8, 16, 32, 64, 128}, o);
    ASSERT_TRUE(r.fitted);
    EXPECT_TRUE(r.sound);
    EXPECT_NEAR(r.fit.slope, -1.0, 0.15);
}

TEST(RateSweep, InfeasibleKSkipped) {
    SweepOptions o;
    o.grid_total = 10000;
    const auto r = rate_sweep(parse_sweep_target("product2"), "silu", 0.5, {8, 16, 32, 64, 128}, o);
    EXPECT_TRUE(r.rows[0].skipped);
    EXPECT_FALSE(r.rows[1].skipped);
    EXPECT_TRUE(r.sound);
}

TEST(RateSweep, ParsesTargets) {
    EXPECT_EQ(parse_sweep_target("product_d(3)").d, 3u);
    EXPECT_EQ(parse_sweep_target("product_d:4").d, 4u);
    const auto t = parse_sweep_target("lipr(2,1,0.5,tent)");
    EXPECT_EQ(t.kind, "lipr");
    EXPECT_EQ(t.d, 2u);
    EXPECT_EQ(t.m, 1);
    EXPECT_DOUBLE_EQ(t.beta, 0.5);
    EXPECT_EQ(t.lipr_fn, "tent");
    EXPECT_THROW(parse_sweep_target("cube"), PreconditionError);
    EXPECT_THROW(parse_sweep_target("product_d(x)"), PreconditionError);
}

TEST(RandVerify, ParsesEps) {
    EXPECT_TRUE(parse_eps("2eps0").times_eps0);
    EXPECT_DOUBLE_EQ(parse_eps("2eps0").value, 2.0);
    EXPECT_DOUBLE_EQ(parse_eps("eps0").value, 1.0);
    EXPECT_FALSE(parse_eps("0.05").times_eps0);
    EXPECT_THROW(parse_eps("abc"), PreconditionError);
    EXPECT_THROW(parse_eps("-1"), PreconditionError);
}

TEST(RandVerify, DeterministicAndThreadInvariant) {
    RandVerifyOptions o;
    o.lemma = 7;
    o.k = 200;
    o.eps = {parse_eps("3eps0"), parse_eps("0.2")};
    o.trials = 300;
    o.seed = 9;
    o.points = {{0.5, 0.5}, {-0.5, 0.5}};
    o.threads = 1;
    std::ostringstream a, b;
    write_rand_verify_csv(a, run_rand_verify(o));
    o.threads = 3;
    write_rand_verify_csv(b, run_rand_verify(o));
    EXPECT_EQ(a.str(), b.str());
}

TEST(RandVerify, Lemma6NoViolation) {
    RandVerifyOptions o;
    o.lemma = 6;
    o.k = 500;
    o.eps = {parse_eps("4eps0"), parse_eps("0.1")};
    o.trials = 500;
    o.points = {{0.0}, {0.3}, {1.0}};
    const auto r = run_rand_verify(o);
    EXPECT_FALSE(r.any_violation());
    EXPECT_EQ(r.records.size(), 6u);
    for (const auto& rec : r.records) EXPECT_GE(rec.freq, 0.0);
}

TEST(RandVerify, WrongPointDimensionRejected) {
    RandVerifyOptions o;
    o.lemma = 7;
    o.eps = {parse_eps("0.1")};
    o.points = {{0.5}};
    EXPECT_THROW(run_rand_verify(o), Error);
}

TEST(Rademacher, RunAllFamilies) {
    for (const char* fam : {"relu-witness", "leaky-witness:leak=0.1", "general-witness:act=tanh", "random-relu:W=3,L=2,count=4"}) {
        RademacherOptions o;
        o.panel = "random:count=3";
        o.family = fam;
        o.n = 8;
        o.d = 2;
        o.trials = 4000;
        const auto rows = run_rademacher(o);
        ASSERT_EQ(rows.size(), 3u);
        for (const auto& r : rows) EXPECT_TRUE(r.ok()) << fam << " " << r.failures.size();
    }
}

TEST(Rademacher, SpecErrors) {
    RademacherOptions o;
    o.family = "";
    EXPECT_THROW(run_rademacher(o), PreconditionError);
    o.family = "mystery";
    EXPECT_THROW(run_rademacher(o), PreconditionError);
    EXPECT_THROW(parse_kv_spec("relu:K"), PreconditionError);
    EXPECT_EQ(parse_kv_spec("relu:K=3").num("K", 1), 3.0);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch_dir("cli");
    EXPECT_EQ(run_cli("table-c --k 8 --cases A --grid 2001 --out " + (dir / "t.csv").string()), 0);
    EXPECT_EQ(run_cli("table-c --k 8 --cases Z"), 2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
    EXPECT_EQ(run_cli("rand-verify --lemma 5 --k 10 --eps 0.1"), 2);
    EXPECT_EQ(run_cli("eval --net " + (dir / "missing.json").string() + " --x 0.5"), 2);
}

TEST(Cli, OutputReproducible) {
    const auto dir = scratch_dir("repro");
    const std::string args = "rand-verify --lemma 6 --k 100 --eps 2eps0 --trials 100 --seed 4 --points 0.5 --out ";
    ASSERT_EQ(run_cli(args + (dir / "a.csv").string()), 0);
    ASSERT_EQ(run_cli(args + (dir / "b.csv").string()), 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(Cli, BuildEvalRoundTrip) {
    const auto dir = scratch_dir("build");
    const auto net = (dir / "sq.json").string();
    ASSERT_EQ(run_cli("build --target square --params k=16,alpha=1,activation=silu --out " + net), 0);
    const auto n = deserialize(slurp(net));
    const auto a = build_square({16, 1, "silu"});
    EXPECT_EQ(n.eval_scalar(std::vector<double>{0.3}), a(0.3));
}
