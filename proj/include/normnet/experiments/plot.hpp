#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"

namespace normnet {

enum class LineStyle { solid, dashed };

struct Curve {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    LineStyle style = LineStyle::solid;
};

struct PlotSpec {
    std::vector<Curve> curves;
    std::string title;
    std::string x_label = "x";
    std::string y_label;
    std::string path;
    std::string format = "svg";  // svg | png
    int width = 640;
    int height = 480;
};

namespace plot_detail {

inline const std::array<std::array<int, 3>, 6> kPalette{{{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75}}};

struct Frame {
    double x0, x1, y0, y1;
    int left = 70, right = 20, top = 40, bottom = 50;
    int w, h;
    double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
    double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

inline Frame frame_for(const PlotSpec& s) {
    Frame f{};
    f.w = s.width;
    f.h = s.height;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& c : s.curves) {
        if (c.x.size() != c.y.size()) throw DimensionError("plot: curve '" + c.label + "' has x/y of different lengths");
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) continue;
            x0 = std::min(x0, c.x[i]);
            x1 = std::max(x1, c.x[i]);
            y0 = std::min(y0, c.y[i]);
            y1 = std::max(y1, c.y[i]);
        }
    }
    if (!(x0 < x1)) x0 = 0, x1 = 1;
    if (!(y0 < y1)) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.04 * (y1 - y0);
    f.x0 = x0;
    f.x1 = x1;
    f.y0 = y0 - pad;
    f.y1 = y1 + pad;
    return f;
}

inline std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

inline std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

}  // namespace plot_detail

inline std::string render_svg(const PlotSpec& s) {
    using namespace plot_detail;
    const Frame f = frame_for(s);
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s.width << "\" height=\"" << s.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << s.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(s.title) << "</text>\n";
    o << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.w - f.left - f.right << "\" height=\"" << f.h - f.top - f.bottom
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = f.x0 + (f.x1 - f.x0) * t / 5, yv = f.y0 + (f.y1 - f.y0) * t / 5;
        o << "<text x=\"" << f.px(xv) << "\" y=\"" << f.h - f.bottom + 16 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        o << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    o << "<text x=\"" << s.width / 2 << "\" y=\"" << s.height - 10 << "\" text-anchor=\"middle\">" << esc(s.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << s.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << s.height / 2 << ")\">" << esc(s.y_label) << "</text>\n";
    for (std::size_t ci = 0; ci < s.curves.size(); ++ci) {
        const auto& c = s.curves[ci];
        const auto& col = kPalette[(ci / 2) % kPalette.size()];
        o << "<polyline fill=\"none\" stroke=\"rgb(" << col[0] << "," << col[1] << "," << col[2] << ")\" stroke-width=\"1.5\"";
        if (c.style == LineStyle::dashed) o << " stroke-dasharray=\"6,4\"";
        o << " points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i)
            if (std::isfinite(c.y[i])) o << f.px(c.x[i]) << "," << f.py(c.y[i]) << " ";
        o << "\"/>\n";
        const int ly = f.top + 14 + static_cast<int>(ci) * 15;
        const int lx = f.w - f.right - 150;
        o << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly - 4 << "\" stroke=\"rgb(" << col[0] << "," << col[1] << ","
          << col[2] << ")\" stroke-width=\"1.5\"" << (c.style == LineStyle::dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        o << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << esc(c.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

namespace plot_detail {

struct Raster {
    int w, h;
    std::vector<std::uint8_t> px;  // RGB
    Raster(int w, int h) : w(w), h(h), px(static_cast<std::size_t>(w) * h * 3, 255) {}
    void set(int x, int y, const std::array<int, 3>& c) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        auto* p = &px[(static_cast<std::size_t>(y) * w + x) * 3];
        p[0] = static_cast<std::uint8_t>(c[0]);
        p[1] = static_cast<std::uint8_t>(c[1]);
        p[2] = static_cast<std::uint8_t>(c[2]);
    }
    // dash_phase carries the dash pattern across segments
    void line(double x0, double y0, double x1, double y1, const std::array<int, 3>& c, bool dashed, double& dash_phase) {
        const double len = std::hypot(x1 - x0, y1 - y0);
        const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            const double along = dash_phase + t * len;
            if (dashed && std::fmod(along, 10.0) >= 6.0) continue;
            const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0))), y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
            set(x, y, c);
            set(x, y + 1, c);
        }
        dash_phase += len;
    }
};

inline void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void chunk(std::string& out, const char* type, const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string td = std::string(type, 4) + data;
    out += td;
    put_u32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(td.data()), static_cast<uInt>(td.size()))));
}

}  // namespace plot_detail

// PNG without text: frame, curves and legend swatches only.
inline std::string render_png(const PlotSpec& s) {
    using namespace plot_detail;
    const Frame f = frame_for(s);
    Raster r(s.width, s.height);
    const std::array<int, 3> black{0, 0, 0};
    double ph = 0;
    r.line(f.left, f.top, f.w - f.right, f.top, black, false, ph);
    r.line(f.left, f.h - f.bottom, f.w - f.right, f.h - f.bottom, black, false, ph);
    r.line(f.left, f.top, f.left, f.h - f.bottom, black, false, ph);
    r.line(f.w - f.right, f.top, f.w - f.right, f.h - f.bottom, black, false, ph);
    for (std::size_t ci = 0; ci < s.curves.size(); ++ci) {
        const auto& c = s.curves[ci];
        const auto& col = kPalette[(ci / 2) % kPalette.size()];
        double phase = 0;
        for (std::size_t i = 1; i < c.x.size(); ++i)
            r.line(f.px(c.x[i - 1]), f.py(c.y[i - 1]), f.px(c.x[i]), f.py(c.y[i]), col, c.style == LineStyle::dashed, phase);
        double lp = 0;
        const double ly = f.top + 10 + static_cast<double>(ci) * 12;
        r.line(f.w - f.right - 40, ly, f.w - f.right - 10, ly, col, c.style == LineStyle::dashed, lp);
    }
    std::string raw;
    raw.reserve(static_cast<std::size_t>(s.height) * (s.width * 3 + 1));
    for (int y = 0; y < s.height; ++y) {
        raw.push_back(0);
        raw.append(reinterpret_cast<const char*>(&r.px[static_cast<std::size_t>(y) * s.width * 3]), static_cast<std::size_t>(s.width) * 3);
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::string z(zlen, '\0');
    if (compress2(reinterpret_cast<Bytef*>(z.data()), &zlen, reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw Error("plot: zlib compression failed");
    z.resize(zlen);
    std::string out = "\x89PNG\r\n\x1a\n";
    std::string ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(s.width));
    put_u32(ihdr, static_cast<std::uint32_t>(s.height));
    ihdr += std::string("\x08\x02\x00\x00\x00", 5);
    chunk(out, "IHDR", ihdr);
    chunk(out, "IDAT", z);
    chunk(out, "IEND", "");
    return out;
}

inline void write_plot(const PlotSpec& s) {
    const std::string data = s.format == "png" ? render_png(s) : render_svg(s);
    std::ofstream f(s.path, std::ios::binary);
    if (!f) throw Error("plot: cannot write '" + s.path + "'");
    f << data;
    if (!f) throw Error("plot: write to '" + s.path + "' failed");
}

}  // namespace normnet
