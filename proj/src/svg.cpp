#include "hydrostab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hydrostab/errors.hpp"

namespace hydrostab {

namespace {

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double map(double v, double pix_lo, double pix_hi) const {
        double t;
        if (log) {
            const double l0 = std::log10(lo), l1 = std::log10(hi);
            t = (std::log10(v) - l0) / (l1 - l0);
        } else {
            t = (v - lo) / (hi - lo);
        }
        return pix_lo + t * (pix_hi - pix_lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int e0 = static_cast<int>(std::floor(std::log10(lo)));
            const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
            for (int e = e0; e <= e1; ++e) {
                const double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
            }
            if (out.size() < 2) out = {lo, hi};
            return out;
        }
        const double span = hi - lo;
        const double raw = span / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (raw <= m * mag) {
                step = m * mag;
                break;
            }
        }
        const double first = std::ceil(lo / step) * step;
        for (double v = first; v <= hi + 0.5 * step; v += step) out.push_back(v);
        return out;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const PlotOptions& opts,
                     const std::vector<PlotSeries>& series) {
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double W = opts.width, H = opts.height;
    const double px0 = ml, px1 = W - mr, py0 = H - mb, py1 = mt;  // y axis flipped

    Axis ax, ay;
    ax.log = opts.log_x;
    ay.log = opts.log_y;
    bool any = false;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            const double x = s.x[k], y = s.y[k];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (opts.log_x && x <= 0.0) continue;
            if (opts.log_y && y <= 0.0) continue;
            if (!any) {
                xlo = xhi = x;
                ylo = yhi = y;
                any = true;
            } else {
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
            }
        }
    if (!any) {
        xlo = ylo = opts.log_x || opts.log_y ? 1.0 : 0.0;
        xhi = yhi = 10.0;
    }
    if (xlo == xhi) {
        xlo -= 0.5;
        xhi += 0.5;
        if (opts.log_x) { xlo = xhi / 2; xhi = xhi * 2; }
    }
    if (ylo == yhi) {
        if (opts.log_y) { ylo /= 2; yhi *= 2; }
        else { ylo -= 0.5; yhi += 0.5; }
    }
    ax.lo = xlo;
    ax.hi = xhi;
    ay.lo = ylo;
    ay.hi = yhi;

    std::ofstream os(path);
    if (!os) throw StructuralError("cannot open svg for writing: " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
          "font-family=\"sans-serif\">" << escape(opts.title) << "</text>\n";

    // axes
    os << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
       << "\" stroke=\"black\"/>\n";

    for (double t : ax.ticks()) {
        const double px = ax.map(t, px0, px1);
        os << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px << "\" y2=\"" << py0 + 5
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px << "\" y=\"" << py0 + 20
           << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(t)
           << "</text>\n";
        os << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px << "\" y2=\"" << py1
           << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
    for (double t : ay.ticks()) {
        const double py = ay.map(t, py0, py1);
        os << "<line x1=\"" << px0 - 5 << "\" y1=\"" << py << "\" x2=\"" << px0 << "\" y2=\"" << py
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px0 - 8 << "\" y=\"" << py + 4
           << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(t)
           << "</text>\n";
        os << "<line x1=\"" << px0 << "\" y1=\"" << py << "\" x2=\"" << px1 << "\" y2=\"" << py
           << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
    os << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
       << escape(opts.xlabel) << "</text>\n";
    os << "<text x=\"18\" y=\"" << (py0 + py1) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
          "font-family=\"sans-serif\" transform=\"rotate(-90 18 " << (py0 + py1) / 2 << ")\">"
       << escape(opts.ylabel) << "</text>\n";

    int legend_row = 0;
    for (const auto& s : series) {
        std::ostringstream pts;
        bool pen_down = false;
        std::string polys;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            const double x = s.x[k], y = s.y[k];
            const bool ok = std::isfinite(x) && std::isfinite(y) && (!opts.log_x || x > 0) &&
                            (!opts.log_y || y > 0);
            if (!ok) {
                if (pen_down) {
                    polys += "<polyline fill=\"none\" stroke=\"" + s.color +
                             "\" stroke-width=\"1.6\" points=\"" + pts.str() + "\"/>\n";
                    pts.str("");
                    pen_down = false;
                }
                continue;
            }
            pts << fmt(ax.map(x, px0, px1)) << "," << fmt(ay.map(y, py0, py1)) << " ";
            pen_down = true;
            if (s.markers)
                polys += "<circle cx=\"" + fmt(ax.map(x, px0, px1)) + "\" cy=\"" +
                         fmt(ay.map(y, py0, py1)) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        }
        if (pen_down)
            polys += "<polyline fill=\"none\" stroke=\"" + s.color +
                     "\" stroke-width=\"1.6\" points=\"" + pts.str() + "\"/>\n";
        os << polys;
        if (!s.label.empty()) {
            const double lx = px1 - 170, ly = py1 + 14 + 18 * legend_row++;
            os << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\""
               << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << lx + 30 << "\" y=\"" << ly
               << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape(s.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
}

}  // namespace hydrostab
