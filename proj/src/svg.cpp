#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tdlab/errors.hpp"
#include "tdlab/svg.hpp"

namespace tdlab {

namespace {

constexpr double W = 720, H = 480, L = 80, R = 170, T = 30, B = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;

    void fit(const std::vector<double>& v, const std::string& style) {
        double mn = INFINITY, mx = -INFINITY, pos = INFINITY;
        for (double x : v)
            if (std::isfinite(x)) {
                mn = std::min(mn, x);
                mx = std::max(mx, x);
                if (x > 0) pos = std::min(pos, x);
            }
        if (!std::isfinite(mn)) {
            mn = 0;
            mx = 1;
        }
        log = style == "log" || (style != "linear" && mn > 0 && mx / mn > 100.0);
        if (log && !(pos < INFINITY)) log = false;
        if (log) {
            lo = std::log10(std::max(mn, pos));
            hi = std::log10(mx);
        } else {
            lo = mn;
            hi = mx;
        }
        if (hi - lo < 1e-12 * (1 + std::abs(hi))) {
            lo -= 0.5;
            hi += 0.5;
        }
        double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    // fraction in [0,1], NaN when not representable
    double frac(double v) const {
        if (!std::isfinite(v) || (log && v <= 0)) return NAN;
        double u = log ? std::log10(v) : v;
        return (u - lo) / (hi - lo);
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (int e = int(std::ceil(lo)); e <= int(std::floor(hi)); ++e) out.push_back(std::pow(10.0, e));
            if (out.size() < 2) out = {std::pow(10.0, lo + 0.05 * (hi - lo)), std::pow(10.0, hi - 0.05 * (hi - lo))};
            return out;
        }
        double span = hi - lo, step = std::pow(10.0, std::floor(std::log10(span / 5)));
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (span / (step * m) <= 7) {
                step *= m;
                break;
            }
        for (double x = std::ceil(lo / step) * step; x <= hi; x += step) out.push_back(std::abs(x) < 1e-12 * step ? 0 : x);
        return out;
    }
};

double px(const Axis& a, double v) { return L + a.frac(v) * (W - L - R); }
double py(const Axis& a, double v) { return H - B - a.frac(v) * (H - T - B); }

void frame(std::ostringstream& s, const Axis& ax, const Axis& ay, const std::string& xl, const std::string& yl) {
    s << "<rect x='" << L << "' y='" << T << "' width='" << W - L - R << "' height='" << H - T - B
      << "' fill='none' stroke='#444'/>\n";
    for (double t : ax.ticks()) {
        double x = px(ax, t);
        s << "<line x1='" << x << "' y1='" << H - B << "' x2='" << x << "' y2='" << H - B + 5 << "' stroke='#444'/>"
          << "<text x='" << x << "' y='" << H - B + 18 << "' text-anchor='middle' font-size='11'>" << num(t)
          << "</text>\n";
    }
    for (double t : ay.ticks()) {
        double y = py(ay, t);
        s << "<line x1='" << L - 5 << "' y1='" << y << "' x2='" << L << "' y2='" << y << "' stroke='#444'/>"
          << "<text x='" << L - 8 << "' y='" << y + 4 << "' text-anchor='end' font-size='11'>" << num(t)
          << "</text>\n";
    }
    s << "<text x='" << (L + W - R) / 2 << "' y='" << H - 15 << "' text-anchor='middle' font-size='13'>" << esc(xl)
      << (ax.log ? " (log)" : "") << "</text>\n";
    s << "<text transform='translate(20," << (T + H - B) / 2 << ") rotate(-90)' text-anchor='middle' font-size='13'>"
      << esc(yl) << (ay.log ? " (log)" : "") << "</text>\n";
}

bool varies(const std::vector<double>& v) {
    double first = NAN;
    for (double x : v) {
        if (!std::isfinite(x)) continue;
        if (std::isnan(first)) first = x;
        else if (x != first) return true;
    }
    return false;
}

std::string pick_x(const CsvTable& t) {
    for (const char* c : {"p", "phi", "psi", "gamma", "sw2", "n1", "m"})
        if (t.column(c) >= 0 && varies(t.numeric(c))) return c;
    for (const char* c : {"p", "phi", "psi"})
        if (t.column(c) >= 0) return c;
    throw MissingColumn("no x column (p, phi, psi, gamma, sw2) in " + t.kind + " table");
}

std::string render_phase(const CsvTable& t, const std::string& style) {
    auto xs = t.numeric("phi"), ys = t.numeric("n1_over_m"), zs = t.numeric("e_test");
    std::vector<double> ux = xs, uy = ys;
    std::sort(ux.begin(), ux.end());
    ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
    std::sort(uy.begin(), uy.end());
    uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
    Axis ax, ay;
    ax.fit(ux, style);
    ay.fit(uy, style);
    double zlo = INFINITY, zhi = -INFINITY;
    for (double z : zs)
        if (std::isfinite(z) && z > 0) {
            zlo = std::min(zlo, std::log10(z));
            zhi = std::max(zhi, std::log10(z));
        }
    if (!(zhi > zlo)) zhi = zlo + 1;
    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "' font-family='sans-serif'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";
    auto cell = [](const std::vector<double>& u, std::size_t i, const Axis& a, bool xdir) {
        double c = a.frac(u[i]);
        double lo = i ? (c + a.frac(u[i - 1])) / 2 : c - (u.size() > 1 ? (a.frac(u[1]) - c) / 2 : 0.5);
        double hi = i + 1 < u.size() ? (c + a.frac(u[i + 1])) / 2 : c + (u.size() > 1 ? (c - a.frac(u[i - 1])) / 2 : 0.5);
        lo = std::clamp(lo, 0.0, 1.0);
        hi = std::clamp(hi, 0.0, 1.0);
        return xdir ? std::pair{L + lo * (W - L - R), L + hi * (W - L - R)}
                    : std::pair{H - B - hi * (H - T - B), H - B - lo * (H - T - B)};
    };
    s << "<g shape-rendering='crispEdges'>\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t i = std::lower_bound(ux.begin(), ux.end(), xs[r]) - ux.begin();
        std::size_t j = std::lower_bound(uy.begin(), uy.end(), ys[r]) - uy.begin();
        auto [x0, x1] = cell(ux, i, ax, true);
        auto [y0, y1] = cell(uy, j, ay, false);
        std::string fill = "#cccccc";  // poles and failures
        if (std::isfinite(zs[r]) && zs[r] > 0) {
            double f = std::clamp((std::log10(zs[r]) - zlo) / (zhi - zlo), 0.0, 1.0);
            char b[16];
            std::snprintf(b, sizeof b, "#%02x%02x%02x", int(255 * f), int(60 + 100 * (1 - f)), int(255 * (1 - f)));
            fill = b;
        }
        s << "<rect x='" << x0 << "' y='" << y0 << "' width='" << x1 - x0 << "' height='" << y1 - y0 << "' fill='"
          << fill << "'/>\n";
    }
    s << "</g>\n";
    frame(s, ax, ay, "phi", "n1/m");
    s << "<text x='" << W - R + 10 << "' y='" << T + 15 << "' font-size='12'>log10 E_test</text>\n"
      << "<text x='" << W - R + 10 << "' y='" << T + 32 << "' font-size='12' fill='#1f9bff'>" << num(zlo)
      << "</text>\n<text x='" << W - R + 10 << "' y='" << T + 49 << "' font-size='12' fill='#ff3c00'>" << num(zhi)
      << "</text>\n</svg>\n";
    return s.str();
}

}  // namespace

std::string render_plot(const CsvTable& t, const std::string& style) {
    if (style != "auto" && style != "log" && style != "linear") throw ConfigError("style must be auto, log or linear");
    if (t.rows.empty()) throw ConfigError("nothing to plot: " + (t.kind.empty() ? "table" : t.kind) + " has no rows");
    if (t.kind == "phase") return render_phase(t, style);

    const bool mc = t.column("mc_mean") >= 0;
    const std::string ycol = mc ? "mc_mean" : "e_test";
    const std::string xcol = pick_x(t);
    auto xs = t.numeric(xcol), ys = t.numeric(ycol);
    std::vector<double> se(xs.size(), NAN), th(xs.size(), NAN);
    if (mc) se = t.numeric("mc_stderr");
    if (mc && t.column("theory") >= 0) th = t.numeric("theory");
    std::vector<std::string> label(xs.size(), "");
    if (int c = t.column("series"); c >= 0)
        for (std::size_t i = 0; i < xs.size(); ++i) label[i] = t.rows[i][c];

    std::vector<double> all = ys;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        all.push_back(ys[i] - 2 * se[i]);
        all.push_back(ys[i] + 2 * se[i]);
        all.push_back(th[i]);
    }
    if (std::none_of(all.begin(), all.end(), [](double v) { return std::isfinite(v); }))
        throw NonFinite("no finite values in column '" + ycol + "'");
    Axis ax, ay;
    ax.fit(xs, style);
    ay.fit(all, style);

    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!groups.count(label[i])) order.push_back(label[i]);
        groups[label[i]].push_back(i);
    }

    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "' font-family='sans-serif'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";

    // interpolation thresholds p = m and p = m^2
    if (xcol == "p" && t.column("m") >= 0) {
        auto ms = t.numeric("m");
        double m = NAN;
        for (double v : ms)
            if (std::isfinite(v) && v > 0) m = v;
        if (!varies(ms) && std::isfinite(m))
            for (auto [v, name] : {std::pair{m, "p=m"}, std::pair{m * m, "p=m^2"}}) {
                double f = ax.frac(v);
                if (!(f >= 0 && f <= 1)) continue;
                double x = px(ax, v);
                s << "<line x1='" << x << "' y1='" << T << "' x2='" << x << "' y2='" << H - B
                  << "' stroke='#888' stroke-dasharray='6,4'/><text x='" << x + 3 << "' y='" << T + 12
                  << "' font-size='11' fill='#666'>" << name << "</text>\n";
            }
    }

    int k = 0;
    for (const auto& g : order) {
        const char* col = kColors[k % 8];
        auto idx = groups[g];
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
        auto polyline = [&](const std::vector<double>& v, const char* dash) {
            std::ostringstream pts;
            bool any = false;
            for (auto i : idx) {
                double fx = ax.frac(xs[i]), fy = ay.frac(v[i]);
                if (std::isnan(fx) || std::isnan(fy)) {
                    // break the line at poles and failed points
                    if (any) s << "<polyline fill='none' stroke='" << col << "' stroke-width='1.8'" << dash
                               << " points='" << pts.str() << "'/>\n";
                    pts.str("");
                    any = false;
                    continue;
                }
                pts << px(ax, xs[i]) << "," << py(ay, v[i]) << " ";
                any = true;
            }
            if (any) s << "<polyline fill='none' stroke='" << col << "' stroke-width='1.8'" << dash << " points='"
                       << pts.str() << "'/>\n";
        };
        if (mc) {
            polyline(th, " stroke-dasharray='5,3'");
            for (auto i : idx) {
                double fx = ax.frac(xs[i]), fy = ay.frac(ys[i]);
                if (std::isnan(fx) || std::isnan(fy)) continue;
                double x = px(ax, xs[i]);
                if (std::isfinite(se[i])) {
                    double lo = ys[i] - 2 * se[i], hi = ys[i] + 2 * se[i];
                    double ylo = std::isnan(ay.frac(lo)) ? H - B : py(ay, lo), yhi = py(ay, hi);
                    s << "<line x1='" << x << "' y1='" << ylo << "' x2='" << x << "' y2='" << yhi << "' stroke='" << col
                      << "'/>\n";
                }
                s << "<circle cx='" << x << "' cy='" << py(ay, ys[i]) << "' r='3' fill='" << col << "'/>\n";
            }
        } else {
            polyline(ys, "");
        }
        s << "<line x1='" << W - R + 10 << "' y1='" << T + 10 + 18 * k << "' x2='" << W - R + 30 << "' y2='"
          << T + 10 + 18 * k << "' stroke='" << col << "' stroke-width='2'/><text x='" << W - R + 35 << "' y='"
          << T + 14 + 18 * k << "' font-size='11'>" << esc(g.empty() ? ycol : g) << "</text>\n";
        ++k;
    }
    frame(s, ax, ay, xcol, mc ? "test error (MC, +-2 se)" : "test error");
    s << "</svg>\n";
    return s.str();
}

}  // namespace tdlab
