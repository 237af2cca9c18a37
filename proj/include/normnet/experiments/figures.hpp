#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "../constructors/square.hpp"
#include "plot.hpp"

namespace normnet {

struct FigureOptions {
    std::string case_tag = "A";
    std::vector<int> k_list{8, 16, 32, 64};
    double alpha = 1;
    std::string out_dir = ".";
    std::string format = "svg";
    std::size_t samples = 1001;
};

struct FigureFiles {
    std::string approx;
    std::string abserr;
    std::vector<double> max_abserr;  // per k, unclipped curve
};

// Approximation and absolute-error panels for the weak-modulus square builder:
// solid Phi_k, dashed clip(Phi_k), one color per k.
inline FigureFiles write_case_figures(const FigureOptions& o) {
    if (o.case_tag != "A" && o.case_tag != "B" && o.case_tag != "C") throw PreconditionError("plots: case must be A, B or C");
    if (o.format != "svg" && o.format != "png") throw PreconditionError("plots: format must be svg or png");
    if (o.samples < 2) throw PreconditionError("plots: need at least two samples");
    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (!std::filesystem::is_directory(o.out_dir)) throw Error("plots: cannot create directory '" + o.out_dir + "'");

    PlotSpec approx, err;
    approx.title = "case " + o.case_tag + ": approximation of x^2";
    approx.y_label = "value";
    err.title = "case " + o.case_tag + ": absolute error";
    err.y_label = "|error|";
    std::vector<double> xs(o.samples);
    for (std::size_t i = 0; i < o.samples; ++i) xs[i] = static_cast<double>(i) / static_cast<double>(o.samples - 1);

    FigureFiles files;
    for (int k : o.k_list) {
        const auto a = build_square_weak("case" + o.case_tag, k, o.alpha);
        Curve raw{"Phi_" + std::to_string(k), xs, {}, LineStyle::solid};
        Curve clip{"phi_" + std::to_string(k), xs, {}, LineStyle::dashed};
        Curve eraw = raw, eclip = clip;
        double emax = 0;
        for (double x : xs) {
            const double in[1] = {x};
            const double v = a.unclipped(std::span<const double>(in, 1));
            const double c = std::clamp(v, 0.0, 1.0);
            raw.y.push_back(v);
            clip.y.push_back(c);
            eraw.y.push_back(std::abs(v - x * x));
            eclip.y.push_back(std::abs(c - x * x));
            emax = std::max(emax, eraw.y.back());
        }
        files.max_abserr.push_back(emax);
        approx.curves.push_back(std::move(raw));
        approx.curves.push_back(std::move(clip));
        err.curves.push_back(std::move(eraw));
        err.curves.push_back(std::move(eclip));
    }
    const auto base = std::filesystem::path(o.out_dir) / ("case" + o.case_tag);
    approx.path = base.string() + "_approx." + o.format;
    err.path = base.string() + "_abserr." + o.format;
    approx.format = err.format = o.format;
    write_plot(approx);
    write_plot(err);
    files.approx = approx.path;
    files.abserr = err.path;
    return files;
}

}  // namespace normnet
