#ifndef THREEWAVE_SVG_HPP
#define THREEWAVE_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "threewave/io.hpp"

// Minimal line/scatter SVG emitter. CSV is the source of truth; this exists
// so a run can be eyeballed without external plotting tools.

namespace threewave {

class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_line(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& label) {
        series_.push_back(Series{x, y, label, false});
        extend_bounds(x, y);
    }

    void add_points(const std::vector<double>& x, const std::vector<double>& y,
                    const std::string& label) {
        series_.push_back(Series{x, y, label, true});
        extend_bounds(x, y);
    }

    void write(std::ostream& out) const {
        const double W = 720, Hh = 480;
        const double ml = 70, mr = 20, mt = 40, mb = 50;
        const double pw = W - ml - mr, ph = Hh - mt - mb;
        double x0 = xmin_, x1 = xmax_, y0 = ymin_, y1 = ymax_;
        if (!(x1 > x0)) x1 = x0 + 1;
        if (!(y1 > y0)) y1 = y0 + 1;
        const double ypad = 0.05 * (y1 - y0);
        y0 -= ypad;
        y1 += ypad;
        auto X = [&](double x) { return ml + pw * (x - x0) / (x1 - x0); };
        auto Y = [&](double y) { return mt + ph * (1.0 - (y - y0) / (y1 - y0)); };

        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
            << "\" viewBox=\"0 0 " << W << ' ' << Hh << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
            << title_ << "</text>\n";

        // axes + ticks
        out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 5; ++k) {
            const double fx = x0 + (x1 - x0) * k / 5.0;
            const double fy = y0 + (y1 - y0) * k / 5.0;
            out << "<line x1=\"" << X(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << X(fx)
                << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << X(fx) << "\" y=\"" << mt + ph + 20
                << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(fx) << "</text>\n"
                << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y(fy) << "\" x2=\"" << ml << "\" y2=\""
                << Y(fy) << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << ml - 8 << "\" y=\"" << Y(fy) + 4
                << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(fy) << "</text>\n";
        }
        out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << Hh - 10
            << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel_ << "</text>\n"
            << "<text x=\"16\" y=\"" << mt + ph / 2
            << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
            << mt + ph / 2 << ")\">" << ylabel_ << "</text>\n";

        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        for (std::size_t s = 0; s < series_.size(); ++s) {
            const Series& sr = series_[s];
            const char* color = palette[s % 8];
            if (sr.scatter) {
                for (std::size_t i = 0; i < sr.x.size(); ++i)
                    out << "<circle cx=\"" << X(sr.x[i]) << "\" cy=\"" << Y(sr.y[i])
                        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            } else {
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < sr.x.size(); ++i)
                    out << X(sr.x[i]) << ',' << Y(sr.y[i]) << ' ';
                out << "\"/>\n";
            }
            out << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(s)
                << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << sr.label
                << "</text>\n";
        }
        out << "</svg>\n";
    }

private:
    struct Series {
        std::vector<double> x, y;
        std::string label;
        bool scatter;
    };

    static std::string short_num(double v) {
        if (v == 0) return "0";
        const double a = std::abs(v);
        char buf[32];
        if (a >= 1e4 || a < 1e-3)
            std::snprintf(buf, sizeof buf, "%.2e", v);
        else
            std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }

    void extend_bounds(const std::vector<double>& x, const std::vector<double>& y) {
        for (double v : x) {
            xmin_ = std::min(xmin_, v);
            xmax_ = std::max(xmax_, v);
        }
        for (double v : y) {
            ymin_ = std::min(ymin_, v);
            ymax_ = std::max(ymax_, v);
        }
    }

    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
    double xmin_ = std::numeric_limits<double>::infinity();
    double xmax_ = -std::numeric_limits<double>::infinity();
    double ymin_ = std::numeric_limits<double>::infinity();
    double ymax_ = -std::numeric_limits<double>::infinity();
};

}  // namespace threewave

#endif  // THREEWAVE_SVG_HPP
