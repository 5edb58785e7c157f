#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "perfspline/app/config.hpp"
#include "perfspline/perfect_spline.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline::app {

struct PlotPaths {
    std::filesystem::path csv;
    std::filesystem::path knots;
    std::filesystem::path svg;
};

/// plot.csv → plot.knots.csv and plot.svg next to it.
inline PlotPaths plot_paths(const std::filesystem::path& csv) {
    PlotPaths p;
    p.csv = csv;
    p.knots = csv;
    p.knots.replace_extension(".knots.csv");
    p.svg = csv;
    p.svg.replace_extension(".svg");
    return p;
}

/// Columns x, s, f, s_r on the closed grid x_i = 2πi/N, i = 0..N.
inline std::string plot_csv(const PerfectSpline& s, const PeriodicFunction& f, std::size_t n) {
    const PiecewiseSpline exact(s);
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "x,s,f,s_r\n";
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = two_pi * static_cast<double>(i) / static_cast<double>(n);
        out << x << ',' << exact(x) << ',' << f(x) << ',' << s.highest_derivative(x) << '\n';
    }
    return out.str();
}

/// index, knot, value of s^{(r)} just right of the knot.
inline std::string knots_csv(const PerfectSpline& s) {
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "index,knot,s_r_after\n";
    for (std::size_t i = 0; i < s.knots().size(); ++i) {
        out << i << ',' << s.knots()[i] << ',' << s.amplitude() * s.lead_sign() * ((i % 2 == 0) ? 1.0 : -1.0)
            << '\n';
    }
    return out.str();
}

/// Self-contained SVG line chart of s (solid) and f (dashed) with knot markers.
inline std::string plot_svg(const PerfectSpline& s, const PeriodicFunction& f, std::size_t n) {
    constexpr double width = 800.0;
    constexpr double height = 400.0;
    constexpr double pad = 30.0;
    const PiecewiseSpline exact(s);
    std::vector<double> sv(n + 1), fv(n + 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = two_pi * static_cast<double>(i) / static_cast<double>(n);
        sv[i] = exact(x);
        fv[i] = f(x);
        lo = std::min({lo, sv[i], fv[i]});
        hi = std::max({hi, sv[i], fv[i]});
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    }
    auto px = [&](double x) { return pad + (width - 2 * pad) * x / two_pi; };
    auto py = [&](double y) { return height - pad - (height - 2 * pad) * (y - lo) / (hi - lo); };
    auto polyline = [&](const std::vector<double>& v, const char* style) {
        std::ostringstream line;
        line << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = two_pi * static_cast<double>(i) / static_cast<double>(n);
            line << px(x) << ',' << py(v[i]) << ' ';
        }
        line << "\"/>\n";
        return line.str();
    };
    std::ostringstream out;
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << polyline(fv, "stroke=\"#999999\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"");
    out << polyline(sv, "stroke=\"#1f4e9c\" stroke-width=\"2\"");
    for (double t : s.knots()) {
        out << "<line x1=\"" << px(t) << "\" y1=\"" << pad << "\" x2=\"" << px(t) << "\" y2=\"" << height - pad
            << "\" stroke=\"#c0392b\" stroke-width=\"1\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void run_plot(const PerfectSpline& s, const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const PeriodicFunction f = compile(cfg.function);
    const PlotPaths paths = plot_paths(out);
    write_text_file(paths.csv, plot_csv(s, f, cfg.grid));
    write_text_file(paths.knots, knots_csv(s));
    if (svg) write_text_file(paths.svg, plot_svg(s, f, cfg.grid));
}

} // namespace perfspline::app
