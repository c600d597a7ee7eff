#include "llcomb/diagram.hpp"

#include "llcomb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace llcomb {

namespace {

constexpr double width = 800.0, height = 600.0;
constexpr double left = 80.0, right = 160.0, top = 50.0, bottom = 60.0;
// the default range covers candidates up to this mode number when no branch is given
constexpr int default_k_window = 10;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

std::string label_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Pt {
    double x, y;
};

// |a| on the trivial curve times sqrt(pi): the L2 norm of the constant over (0, pi).
double constant_norm(const ConstantState& c) { return std::sqrt(std::numbers::pi * c.abs2()); }

std::vector<Pt> sample_trivial(const DiagramSpec& spec, double fmax) {
    std::vector<Pt> pts;
    if (spec.mode == Mode::hat) {
        // t = tanh(v) resolves both ends of (-1, 1)
        constexpr int m = 8001;
        for (int i = 0; i < m; ++i) {
            const double t = std::tanh(-8.0 + 16.0 * i / (m - 1));
            const ConstantState c = trivial_hat(t, spec.params.f, spec.params.d);
            pts.push_back({c.zeta, constant_norm(c)});
        }
    } else {
        double smax = 1.0;
        while (trivial_bar(smax, spec.params.zeta).f < fmax && smax < 1e6) smax *= 2.0;
        constexpr int m = 8001;
        for (int i = 0; i < m; ++i) {
            const ConstantState c = trivial_bar(smax * i / (m - 1), spec.params.zeta);
            pts.push_back({c.f, constant_norm(c)});
        }
    }
    return pts;
}

std::vector<BifurcationCandidate> marked_points(const DiagramSpec& spec) {
    EnumerationOptions opt;
    opt.include_k0 = true;
    return spec.mode == Mode::hat ? enumerate_bifpoints_hat(spec.params.f, spec.params.d, opt)
                                  : enumerate_bifpoints_bar(spec.params.zeta, spec.params.d, opt);
}

std::pair<double, double> fitted_range(const DiagramSpec& spec, const std::vector<BifurcationCandidate>& marks) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& b : spec.branches)
        for (const auto& p : b.branch.points) {
            lo = std::min(lo, p.param);
            hi = std::max(hi, p.param);
        }
    if (spec.branches.empty() || !std::isfinite(lo)) {
        for (const auto& c : marks) {
            if (c.k > default_k_window) continue;
            lo = std::min(lo, c.param);
            hi = std::max(hi, c.param);
        }
    }
    if (!std::isfinite(lo)) return spec.mode == Mode::hat ? std::pair{-5.0, 10.0} : std::pair{0.0, 5.0};
    const double pad = std::max(0.1 * (hi - lo), 0.5);
    lo -= pad;
    hi += pad;
    if (spec.mode == Mode::bar) lo = std::max(lo, 0.0);
    return {lo, hi};
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

std::string tick_label(double v, double step) {
    const int digits = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

} // namespace

const std::vector<std::string>& diagram_palette() {
    static const std::vector<std::string> p{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                            "#17becf", "#8c564b", "#e377c2", "#bcbd22", "#7f7f7f"};
    return p;
}

void validate(const DiagramSpec& spec) {
    if (spec.branches.empty() && !spec.trivial_overlay)
        throw PreconditionError("diagram: nothing to draw (no branch and the trivial curve is off)");
    for (const auto& b : spec.branches) {
        if (b.branch.mode != spec.mode) throw PreconditionError("diagram: branch '" + b.label + "' uses the other mode");
        if (b.branch.points.empty()) throw PreconditionError("diagram: branch '" + b.label + "' has no points");
    }
    if (spec.param_range && !(spec.param_range->second > spec.param_range->first))
        throw PreconditionError("diagram: empty parameter range");
    validate(spec.params);
}

std::string render_diagram_svg(const DiagramSpec& spec) {
    validate(spec);
    const auto marks = spec.mark_bifpoints && spec.trivial_overlay ? marked_points(spec) : std::vector<BifurcationCandidate>{};
    const auto [xlo, xhi] = spec.param_range ? *spec.param_range : fitted_range(spec, marks);
    const std::vector<Pt> trivial = spec.trivial_overlay ? sample_trivial(spec, xhi) : std::vector<Pt>{};
    auto inside = [&](double x) { return x >= xlo && x <= xhi; };

    double ymax = 0.0;
    for (const Pt& p : trivial)
        if (inside(p.x)) ymax = std::max(ymax, p.y);
    for (const auto& b : spec.branches)
        for (const auto& p : b.branch.points)
            if (inside(p.param)) ymax = std::max(ymax, p.l2norm);
    if (!(ymax > 0.0)) ymax = 1.0;
    const double ylo = 0.0, yhi = 1.05 * ymax;

    const double pw = width - left - right, ph = height - top - bottom;
    auto X = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto Y = [&](double y) { return top + ph - (y - ylo) / (yhi - ylo) * ph; };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    s += "<defs><clipPath id=\"plot\"><rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\"/></clipPath></defs>\n";
    if (!spec.title.empty())
        s += "<text x=\"400.00\" y=\"28.00\" text-anchor=\"middle\" font-size=\"15\">" + escape(spec.title) + "</text>\n";

    // axes and ticks
    s += "<g id=\"axes\" stroke=\"#444\" fill=\"none\">\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\"/>\n";
    const double xs = nice_step(xhi - xlo), ys = nice_step(yhi - ylo);
    for (double v = std::ceil(xlo / xs) * xs; v <= xhi + 1e-9 * xs; v += xs)
        s += "<line x1=\"" + num(X(v)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(X(v)) + "\" y2=\"" +
             num(top + ph + 5) + "\"/>\n";
    for (double v = std::ceil(ylo / ys) * ys; v <= yhi + 1e-9 * ys; v += ys)
        s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(Y(v)) + "\" x2=\"" + num(left) + "\" y2=\"" + num(Y(v)) +
             "\"/>\n";
    s += "</g>\n<g id=\"tick-labels\" fill=\"#222\">\n";
    for (double v = std::ceil(xlo / xs) * xs; v <= xhi + 1e-9 * xs; v += xs)
        s += "<text x=\"" + num(X(v)) + "\" y=\"" + num(top + ph + 19) + "\" text-anchor=\"middle\">" +
             tick_label(v, xs) + "</text>\n";
    for (double v = std::ceil(ylo / ys) * ys; v <= yhi + 1e-9 * ys; v += ys)
        s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(Y(v) + 4) + "\" text-anchor=\"end\">" + tick_label(v, ys) +
             "</text>\n";
    s += "</g>\n";
    s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 15) + "\" text-anchor=\"middle\">" +
         (spec.mode == Mode::hat ? "zeta" : "f") + "</text>\n";
    s += "<text x=\"20.00\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20.00 " +
         num(top + ph / 2) + ")\">L2 norm</text>\n";

    s += "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">\n";
    if (spec.trivial_overlay) {
        std::string d;
        bool open = false;
        std::string last;
        for (const Pt& p : trivial) {
            if (!inside(p.x) || !(p.y <= yhi)) {
                open = false;
                continue;
            }
            const std::string xy = num(X(p.x)) + " " + num(Y(p.y));
            if (open && xy == last) continue;
            d += (d.empty() ? "" : " ") + std::string(open ? "L" : "M") + xy;
            open = true;
            last = xy;
        }
        s += "<path id=\"trivial\" stroke=\"black\" d=\"" + d + "\"/>\n";
    }
    const auto& pal = diagram_palette();
    for (std::size_t i = 0; i < spec.branches.size(); ++i) {
        const DiagramBranch& b = spec.branches[i];
        const std::string color = b.color.empty() ? pal[i % pal.size()] : b.color;
        std::string d, last;
        for (const auto& p : b.branch.points) {
            const std::string xy = num(X(p.param)) + " " + num(Y(p.l2norm));
            if (xy == last) continue;
            d += (d.empty() ? "M" : " L") + xy;
            last = xy;
        }
        s += "<path id=\"branch-" + std::to_string(i) + "\" stroke=\"" + escape(color) + "\" d=\"" + d + "\"/>\n";
    }
    s += "</g>\n";

    // markers
    s += "<g id=\"markers\" clip-path=\"url(#plot)\" font-size=\"10\">\n";
    for (const auto& c : marks) {
        if (!inside(c.param)) continue;
        const double y = constant_norm(c.state);
        if (c.k == 0) {
            s += "<rect class=\"fold\" x=\"" + num(X(c.param) - 3) + "\" y=\"" + num(Y(y) - 3) +
                 "\" width=\"6.00\" height=\"6.00\" fill=\"#888\"/>\n";
        } else {
            s += "<circle class=\"bifpoint\" cx=\"" + num(X(c.param)) + "\" cy=\"" + num(Y(y)) +
                 "\" r=\"2.50\" fill=\"white\" stroke=\"black\"/>\n";
        }
    }
    for (std::size_t i = 0; i < spec.branches.size(); ++i) {
        const DiagramBranch& b = spec.branches[i];
        const std::string color = b.color.empty() ? pal[i % pal.size()] : b.color;
        for (const auto& e : b.branch.events) {
            const BranchPoint& p = b.branch.points[e.index];
            const double param = e.kind == EventKind::turning_point ? e.param : p.param;
            const double cx = X(param), cy = Y(p.l2norm);
            const std::string kind(to_string(e.kind));
            switch (e.kind) {
            case EventKind::turning_point:
                s += "<circle class=\"" + kind + "\" cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"4.00\" fill=\"" +
                     escape(color) + "\"/>\n";
                s += "<text x=\"" + num(cx + 6) + "\" y=\"" + num(cy - 6) + "\">" + label_num(param) + "</text>\n";
                break;
            case EventKind::trivial_return:
                s += "<rect class=\"" + kind + "\" x=\"" + num(cx - 4) + "\" y=\"" + num(cy - 4) +
                     "\" width=\"8.00\" height=\"8.00\" fill=\"none\" stroke=\"" + escape(color) + "\"/>\n";
                s += "<text x=\"" + num(cx + 6) + "\" y=\"" + num(cy + 14) + "\">" + label_num(param) + "</text>\n";
                break;
            case EventKind::secondary_bif_candidate:
                s += "<path class=\"" + kind + "\" d=\"M" + num(cx) + " " + num(cy - 5) + " L" + num(cx + 5) + " " +
                     num(cy + 4) + " L" + num(cx - 5) + " " + num(cy + 4) + " Z\" fill=\"none\" stroke=\"" +
                     escape(color) + "\"/>\n";
                break;
            case EventKind::step_limit:
            case EventKind::ds_min_exhausted:
                s += "<path class=\"" + kind + "\" d=\"M" + num(cx - 4) + " " + num(cy - 4) + " L" + num(cx + 4) + " " +
                     num(cy + 4) + " M" + num(cx - 4) + " " + num(cy + 4) + " L" + num(cx + 4) + " " + num(cy - 4) +
                     "\" stroke=\"" + escape(color) + "\"/>\n";
                break;
            }
        }
    }
    s += "</g>\n";

    // legend
    s += "<g id=\"legend\">\n";
    double ly = top + 12;
    if (spec.trivial_overlay) {
        s += "<line x1=\"" + num(width - right + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(width - right + 34) +
             "\" y2=\"" + num(ly) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        s += "<text x=\"" + num(width - right + 40) + "\" y=\"" + num(ly + 4) + "\">trivial</text>\n";
        ly += 18;
    }
    for (std::size_t i = 0; i < spec.branches.size(); ++i) {
        const DiagramBranch& b = spec.branches[i];
        const std::string color = b.color.empty() ? pal[i % pal.size()] : b.color;
        s += "<line x1=\"" + num(width - right + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(width - right + 34) +
             "\" y2=\"" + num(ly) + "\" stroke=\"" + escape(color) + "\" stroke-width=\"1.5\"/>\n";
        s += "<text x=\"" + num(width - right + 40) + "\" y=\"" + num(ly + 4) + "\">" + escape(b.label) + "</text>\n";
        ly += 18;
    }
    s += "</g>\n</svg>\n";
    return s;
}

} // namespace llcomb
