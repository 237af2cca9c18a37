#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "../constructors/square.hpp"
#include "../parallel.hpp"
#include "csv.hpp"

namespace normnet {

struct ExperimentRow {
    std::string case_tag;  // "A".."D"
    int k = 0;
    double alpha = 1;
    double w_k = 0;
    double d_k = 0;
    double err_unclipped = 0;
    double err_clipped = 0;
    double predicted = 0;
    double min_phi = 0;
    double max_phi = 0;
};

struct TableCOptions {
    double alpha = 1;
    std::vector<int> k_list{8, 16, 32, 64};
    std::vector<std::string> cases{"A", "B", "C", "D"};
    std::size_t grid = 100001;
    bool naive = false;  // evaluate the layered network instead of the closed-form even part
    unsigned threads = default_threads();
};

inline constexpr std::size_t kMinTableGrid = 1000;

inline ExperimentRow table_c_row(const std::string& case_tag, int k, const TableCOptions& o) {
    const auto a = build_square_weak("case" + case_tag, k, o.alpha);
    ExperimentRow r;
    r.case_tag = case_tag;
    r.k = k;
    r.alpha = o.alpha;
    r.w_k = a.info.at("w_k");
    r.d_k = a.info.at("d_k");
    r.predicted = a.predicted_bound;

    const std::size_t n = std::max<std::size_t>(o.grid, 2);
    struct Part {
        double eu = 0, ec = 0, lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    };
    std::vector<Part> parts(chunk_count(n, 4096));
    const ScalarFn phi = o.naive ? as_scalar_fn(*a.unclipped_network) : a.unclipped;
    parallel_chunks(n, 4096, o.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        Part p;
        for (std::size_t i = b; i < e; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(n - 1);
            const double in[1] = {x};
            const double v = phi(std::span<const double>(in, 1));
            const double cl = std::clamp(v, 0.0, 1.0);
            p.eu = std::max(p.eu, std::abs(v - x * x));
            p.ec = std::max(p.ec, std::abs(cl - x * x));
            p.lo = std::min(p.lo, v);
            p.hi = std::max(p.hi, v);
        }
        parts[c] = p;
    });
    Part t;
    for (const auto& p : parts) {
        t.eu = std::max(t.eu, p.eu);
        t.ec = std::max(t.ec, p.ec);
        t.lo = std::min(t.lo, p.lo);
        t.hi = std::max(t.hi, p.hi);
    }
    r.err_unclipped = t.eu;
    r.err_clipped = t.ec;
    r.min_phi = t.lo;
    r.max_phi = t.hi;
    return r;
}

inline std::vector<ExperimentRow> run_table_c(const TableCOptions& o) {
    for (const auto& c : o.cases)
        if (c != "A" && c != "B" && c != "C" && c != "D") throw PreconditionError("table-c: unknown case '" + c + "' (expected A, B, C or D)");
    std::vector<ExperimentRow> rows;
    for (const auto& c : o.cases)
        for (int k : o.k_list) rows.push_back(table_c_row(c, k, o));
    return rows;
}

inline void write_table_c_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    CsvWriter w(os, "table_c", {"case", "k", "alpha", "w_k", "d_k", "err_unclipped", "err_clipped", "predicted", "min_phi", "max_phi"});
    for (const auto& r : rows) {
        w.cell(r.case_tag).cell(r.k).cell(r.alpha).cell(r.w_k).cell(r.d_k).cell(r.err_unclipped).cell(r.err_clipped).cell(r.predicted).cell(r.min_phi).cell(r.max_phi);
        w.end_row();
    }
}

namespace table_detail {

// four significant digits, switching to scientific notation for very small or very large magnitudes
inline std::string sig4(double v) {
    char b[40];
    const double a = std::abs(v);
    if (a != 0 && (a < 1e-3 || a >= 1e6)) std::snprintf(b, sizeof b, "%.3e", v);
    else if (a >= 100) std::snprintf(b, sizeof b, "%.2f", v);
    else std::snprintf(b, sizeof b, "%.4f", v);
    return b;
}

}  // namespace table_detail

inline void write_table_c_latex(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    using table_detail::sig4;
    for (const auto& r : rows) {
        char a[16];
        std::snprintf(a, sizeof a, "%.1f", r.alpha);
        os << r.case_tag << " & " << r.k << " & " << a << " & " << sig4(r.w_k) << " & " << sig4(r.d_k) << " & " << sig4(r.err_unclipped) << " & "
           << sig4(r.err_clipped) << " & " << sig4(r.predicted) << " & " << sig4(r.min_phi) << " & " << sig4(r.max_phi) << " \\\\\n";
    }
}

inline void write_table_c_text(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    using table_detail::sig4;
    char line[256];
    std::snprintf(line, sizeof line, "%-4s %4s %5s %11s %11s %11s %11s %11s %11s %11s\n", "case", "k", "alpha", "w_k", "d_k", "err", "clipped", "pred", "min",
                  "max");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-4s %4d %5.2f %11s %11s %11s %11s %11s %11s %11s\n", r.case_tag.c_str(), r.k, r.alpha, sig4(r.w_k).c_str(),
                      sig4(r.d_k).c_str(), sig4(r.err_unclipped).c_str(), sig4(r.err_clipped).c_str(), sig4(r.predicted).c_str(), sig4(r.min_phi).c_str(),
                      sig4(r.max_phi).c_str());
        os << line;
    }
}

}  // namespace normnet
