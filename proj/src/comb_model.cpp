#include "llcomb/comb_model.hpp"

#include "llcomb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace llcomb {

namespace {

constexpr double pi = std::numbers::pi;

double sqr(double x) { return x * x; }

// Distance of q to the nearest square j^2 with j in N0 \ {k}; +inf if none is near.
double distance_to_other_square(double q, int k) {
    const double root = std::sqrt(std::max(q, 0.0));
    const long centre = std::lround(root);
    double best = std::numeric_limits<double>::infinity();
    for (long j = centre - 1; j <= centre + 1; ++j) {
        if (j < 0 || j == k) continue;
        best = std::min(best, std::abs(q - static_cast<double>(j * j)));
    }
    return best;
}

void classify(BifurcationCandidate& c, double s_dist, double t_dist, const EnumerationOptions& opt) {
    c.s_ok = s_dist > opt.equality_tol;
    c.t_ok = t_dist > opt.equality_tol;
    c.t_expr = t_dist;
    c.marginal = (c.s_ok && s_dist < opt.marginal_tol) || (c.t_ok && t_dist < opt.marginal_tol);
}

double hat_s_expression(double t, double f, double d, int k) {
    const double w = 1.0 - t * t;
    return -sqr(k) + 2.0 / d * (f * f * w - t / std::sqrt(w));
}

double hat_t_expression(double t, double f, int sigma) {
    const double w = 1.0 - t * t;
    const double sw = std::sqrt(w);
    const double root = std::sqrt(std::max(0.0, std::pow(f, 4) * w * w - 1.0));
    const double f2 = f * f;
    const double f4 = f2 * f2;
    const double f6 = f4 * f2;
    const double t3 = t * t * t;
    return 4.0 * f6 * t3 * w * w + f4 * sw - 2.0 * t * f2 - std::pow(w, -1.5) -
           sigma * root * (4.0 * f4 * t3 * w + f2 * (2.0 * t * t - 1.0) / sw);
}

BifurcationCandidate make_hat_candidate(double t, double f, double d, int k, int sigma,
                                        const EnumerationOptions& opt) {
    BifurcationCandidate c;
    c.mode = Mode::hat;
    c.k = k;
    c.sigma = sigma;
    c.coord = t;
    c.state = trivial_hat(t, f, d);
    c.param = c.state.zeta;
    c.turning_point = (k == 0);
    c.s_expr = hat_s_expression(t, f, d, k);
    classify(c, distance_to_other_square(c.s_expr, k), std::abs(hat_t_expression(t, f, sigma)), opt);
    c.kernel = kernel_vectors({c.state.a1, c.state.a2}, c.state.zeta, d, k);
    return c;
}

// Golden-section minimisation of |h| on [lo, hi].
template <class F>
double argmin_abs(F&& h, double lo, double hi, double tol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = std::abs(h(c)), fe = std::abs(h(e));
    while (b - a > tol) {
        if (fc < fe) {
            b = e; e = c; fe = fc;
            c = b - g * (b - a); fc = std::abs(h(c));
        } else {
            a = c; c = e; fc = fe;
            e = a + g * (b - a); fe = std::abs(h(e));
        }
    }
    return 0.5 * (a + b);
}

} // namespace

std::string_view to_string(Mode mode) noexcept { return mode == Mode::hat ? "hat" : "bar"; }

Mode mode_from_string(std::string_view name) {
    if (name == "hat") return Mode::hat;
    if (name == "bar") return Mode::bar;
    throw PreconditionError("unknown mode '" + std::string(name) + "' (expected hat or bar)");
}

void validate(const Parameters& p) {
    if (!std::isfinite(p.d) || !std::isfinite(p.zeta) || !std::isfinite(p.f))
        throw PreconditionError("parameters must be finite");
    if (p.d == 0.0) throw PreconditionError("dispersion d must be nonzero");
}

double active_param(const Parameters& p, Mode mode) noexcept { return mode == Mode::hat ? p.zeta : p.f; }

Parameters with_active_param(Parameters p, Mode mode, double value) noexcept {
    (mode == Mode::hat ? p.zeta : p.f) = value;
    return p;
}

ConstantState trivial_hat(double t, double f, double d) {
    if (!(std::abs(t) < 1.0)) throw DomainError("hat coordinate must satisfy |t| < 1, got " + std::to_string(t));
    if (d == 0.0) throw PreconditionError("dispersion d must be nonzero");
    const double w = 1.0 - t * t;
    const double sw = std::sqrt(w);
    ConstantState s;
    s.mode = Mode::hat;
    s.coord = t;
    s.a1 = f * w;
    s.a2 = -f * t * sw;
    s.f = f;
    s.zeta = f * f * w + t / sw;
    return s;
}

ConstantState trivial_bar(double s, double zeta) {
    const double q = s * s - zeta;
    const double root = std::sqrt(1.0 + q * q);
    ConstantState c;
    c.mode = Mode::bar;
    c.coord = s;
    c.a1 = s / root;
    c.a2 = s * q / root;
    c.zeta = zeta;
    c.f = s * root;
    return c;
}

double trivial_hat_dzeta(double t, double f) {
    const double w = 1.0 - t * t;
    return -2.0 * f * f * t + std::pow(w, -1.5);
}

double constant_identity_defect(double a1, double a2, double zeta, double f) noexcept {
    const double r = a1 * a1 + a2 * a2;
    return f * f - r * (1.0 + sqr(r - zeta));
}

std::array<double, 2> constant_residual(double a1, double a2, double zeta, double f) noexcept {
    const double r = a1 * a1 + a2 * a2;
    return {-a2 - zeta * a1 + r * a1, a1 - zeta * a2 + r * a2 - f};
}

std::vector<ConstantState> constant_solutions(double zeta, double f) {
    // |a|^2 = x solves x (1 + (x - zeta)^2) = f^2, and every root lies in [0, f^2].
    auto p = [&](double x) { return x * (1.0 + sqr(x - zeta)) - f * f; };
    std::vector<double> knots{0.0};
    const double disc = 4.0 * zeta * zeta - 12.0;
    if (disc > 0) {
        for (double sgn : {-1.0, 1.0}) {
            const double xc = (4.0 * zeta + sgn * std::sqrt(disc)) / 6.0;
            if (xc > 0 && xc < f * f) knots.push_back(xc);
        }
    }
    knots.push_back(f * f);
    std::sort(knots.begin(), knots.end());

    std::vector<double> roots;
    if (f == 0.0) roots.push_back(0.0);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double lo = knots[i], hi = knots[i + 1];
        double plo = p(lo), phi = p(hi);
        if (plo == 0.0) { roots.push_back(lo); continue; }
        if (phi == 0.0) { roots.push_back(hi); continue; }
        if ((plo < 0) == (phi < 0)) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double pm = p(mid);
            if ((pm < 0) == (plo < 0)) { lo = mid; plo = pm; } else { hi = mid; }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, b); }),
                roots.end());

    std::vector<ConstantState> out;
    for (double x : roots) {
        const double q = x - zeta;
        const double scale = f / (1.0 + q * q);
        ConstantState c;
        c.mode = Mode::hat;
        c.a1 = scale;
        c.a2 = scale * q;
        c.zeta = zeta;
        c.f = f;
        c.coord = -q / std::sqrt(1.0 + q * q);
        out.push_back(c);
    }
    return out;
}

bool BoundsReport::admits_nonconstant(double d, double zeta, double slack) const noexcept {
    const double z = sign_of(d) * zeta;
    return z >= zeta_star_lo - slack && z <= zeta_star_hi + slack;
}

BoundsReport bounds_report(const Parameters& p) {
    validate(p);
    const double ad = std::abs(p.d);
    const double f = p.f, f2 = f * f;
    const double growth = 1.0 + 12.0 * pi * pi * f2 / ad;
    BoundsReport r;
    r.gamma = 36.0 * pi * pi * f2 * f2 / ad;
    if (p.d < 0) r.gamma += f2 * growth * growth;
    r.linf_bound = std::abs(f) * growth / std::max(1.0, -p.zeta * sign_of(p.d) - r.gamma);
    r.zeta_star_lo = -r.gamma - std::sqrt(6.0) * std::abs(f) * growth;
    r.zeta_star_hi = 6.0 * f2 * growth * growth;
    if (std::abs(f) >= 1.0) {
        r.khat = 2.0 * std::sqrt((f2 + std::sqrt(f2 - 1.0) + std::sqrt(f2 * f2 - 1.0)) / ad);
    } else {
        // No hat-mode bifurcation exists; the formula itself needs |f| >= 1.
        r.khat = 0.0;
    }
    if (p.d < 0) r.kbar = 4.0 * std::sqrt(std::max(p.zeta - std::sqrt(3.0), 0.0) / ad);
    return r;
}

double kernel_condition(std::array<double, 2> a, double zeta, double d, int k) noexcept {
    const double A = zeta + d * k * k;
    const double r = a[0] * a[0] + a[1] * a[1];
    return A * A - 4.0 * r * A + 1.0 + 3.0 * r * r;
}

std::array<double, 4> linearization_matrix(std::array<double, 2> a, double zeta) noexcept {
    const double a1 = a[0], a2 = a[1];
    return {-zeta + 3 * a1 * a1 + a2 * a2, -1 + 2 * a1 * a2,
            1 + 2 * a1 * a2, -zeta + a1 * a1 + 3 * a2 * a2};
}

KernelPair kernel_vectors(std::array<double, 2> a, double zeta, double d, int k) {
    const double A = zeta + d * k * k;
    const double r = a[0] * a[0] + a[1] * a[1];
    const double scale = 1.0 + A * A + 4.0 * r * std::abs(A) + 3.0 * r * r;
    const double cond = kernel_condition(a, zeta, d, k);
    if (!(std::abs(cond) <= 1e-8 * scale))
        throw PreconditionError("kernel_vectors: kernel condition not satisfied (value " + std::to_string(cond) + ")");

    const double a1 = a[0], a2 = a[1];
    const double p = 3 * a1 * a1 + a2 * a2;  // first diagonal of N + zeta
    const double q = a1 * a1 + 3 * a2 * a2;  // second diagonal of N + zeta
    constexpr double exact = 1e-12;
    KernelPair kp;
    if (std::abs(a1 * a2 - 0.5) <= exact && std::abs(p - A) <= exact)
        kp.alpha = {q - A, -1 - 2 * a1 * a2};
    else
        kp.alpha = {1 - 2 * a1 * a2, p - A};
    if (std::abs(a1 * a2 + 0.5) <= exact && std::abs(p - A) <= exact)
        kp.beta = {q - A, 1 - 2 * a1 * a2};
    else
        kp.beta = {-1 - 2 * a1 * a2, p - A};
    return kp;
}

double kernel_residual(const KernelPair& kp, std::array<double, 2> a, double zeta, double d, int k) noexcept {
    const auto n = linearization_matrix(a, zeta);
    const double dk2 = d * k * k;
    const double m00 = dk2 - n[0], m01 = -n[1], m10 = -n[2], m11 = dk2 - n[3];
    const double r1 = std::max(std::abs(m00 * kp.alpha[0] + m01 * kp.alpha[1]),
                               std::abs(m10 * kp.alpha[0] + m11 * kp.alpha[1]));
    const double r2 = std::max(std::abs(m00 * kp.beta[0] + m10 * kp.beta[1]),
                               std::abs(m01 * kp.beta[0] + m11 * kp.beta[1]));
    return std::max(r1, r2);
}

double hat_bifurcation_function(double t, double f, double d, int k, int sigma) noexcept {
    const double w = 1.0 - t * t;
    const double radicand = std::max(0.0, std::pow(f, 4) * w * w - 1.0);
    return f * f * w - t / std::sqrt(w) - sigma * std::sqrt(radicand) - d * k * k;
}

double hat_admissible_t(double f) noexcept {
    if (std::abs(f) < 1.0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, 1.0 - 1.0 / (f * f)));
}

std::vector<BifurcationCandidate> enumerate_bifpoints_hat(double f, double d, const EnumerationOptions& opt) {
    validate(Parameters{d, 0.0, f});
    std::vector<BifurcationCandidate> out;
    if (std::abs(f) < 1.0) return out;

    const int kmax = static_cast<int>(std::floor(bounds_report({d, 0.0, f}).khat / 2.0));
    const int kmin = opt.include_k0 ? 0 : 1;
    const double tmax = hat_admissible_t(f);
    const int npts = std::max(opt.grid_points, 2);

    std::vector<double> ts(npts);
    for (int j = 0; j < npts; ++j) ts[j] = -tmax + 2.0 * tmax * j / (npts - 1);

    for (int sigma : {-1, 1}) {
        std::vector<double> base(npts);
        for (int j = 0; j < npts; ++j) base[j] = hat_bifurcation_function(ts[j], f, d, 0, sigma);

        for (int k = kmin; k <= kmax; ++k) {
            const double shift = d * k * k;
            auto h = [&](double t) { return hat_bifurcation_function(t, f, d, k, sigma); };
            std::vector<double> roots;
            std::vector<double> tangential;

            if (tmax == 0.0) {
                if (std::abs(h(0.0)) <= opt.tangential_tol) roots.push_back(0.0);
            } else {
                for (int j = 0; j < npts; ++j) {
                    const double hj = base[j] - shift;
                    if (hj == 0.0) { roots.push_back(ts[j]); continue; }
                    if (j + 1 < npts) {
                        const double hn = base[j + 1] - shift;
                        if (hn != 0.0 && (hj < 0) != (hn < 0)) {
                            double lo = ts[j], hi = ts[j + 1], hlo = hj;
                            while (hi - lo > opt.root_tol) {
                                const double mid = 0.5 * (lo + hi);
                                const double hm = h(mid);
                                if (hm == 0.0) { lo = hi = mid; break; }
                                if ((hm < 0) == (hlo < 0)) { lo = mid; hlo = hm; } else { hi = mid; }
                            }
                            roots.push_back(0.5 * (lo + hi));
                        }
                    }
                    // Double root: touches zero without a sign change in either adjacent cell.
                    if (j > 0 && j + 1 < npts && std::abs(hj) < opt.tangential_tol) {
                        const double hp = base[j - 1] - shift, hn = base[j + 1] - shift;
                        const bool same = (hp < 0) == (hj < 0) && (hn < 0) == (hj < 0) && hp != 0 && hn != 0;
                        if (same && std::abs(hj) <= std::abs(hp) && std::abs(hj) <= std::abs(hn))
                            tangential.push_back(argmin_abs(h, ts[j - 1], ts[j + 1], opt.root_tol));
                    }
                }
            }
            for (double t : roots) out.push_back(make_hat_candidate(t, f, d, k, sigma, opt));
            for (double t : tangential) {
                auto c = make_hat_candidate(t, f, d, k, sigma, opt);
                c.tangential = true;
                out.push_back(c);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.coord < b.coord;
    });
    return out;
}

std::vector<BifurcationCandidate> enumerate_bifpoints_bar(double zeta, double d, const EnumerationOptions& opt) {
    validate(Parameters{d, zeta, 0.0});
    const double sqrt3 = std::sqrt(3.0);
    int kend = opt.k_max;
    if (d < 0) {
        const double kbar = *bounds_report({d, zeta, 0.0}).kbar;
        kend = static_cast<int>(std::floor(kbar / 4.0 + 1e-12));
    }
    std::vector<BifurcationCandidate> out;
    for (int k = opt.include_k0 ? 0 : 1; k <= kend; ++k) {
        const double A = zeta + d * k * k;
        if (A < sqrt3) continue;
        const double root = std::sqrt(std::max(0.0, A * A - 3.0));
        for (int sigma : {-1, 1}) {
            const double s2 = 2.0 / 3.0 * A - sigma / 3.0 * root;
            BifurcationCandidate c;
            c.mode = Mode::bar;
            c.k = k;
            c.sigma = sigma;
            c.coord = std::sqrt(std::max(s2, 0.0));
            c.state = trivial_bar(c.coord, zeta);
            c.param = c.state.f;
            c.turning_point = (k == 0);
            c.s_expr = -sqr(k) + 2.0 / (3.0 * d) * (zeta + 4.0 * d * k * k - 2.0 * sigma * root);
            const double t_dist = std::min({std::abs(A - sqrt3),
                                            std::abs(4.0 * zeta + d * k * k - 2.0 * sigma * root),
                                            std::abs(2.0 * zeta + 5.0 * d * k * k - 4.0 * sigma * root)});
            classify(c, distance_to_other_square(c.s_expr, k), t_dist, opt);
            c.kernel = kernel_vectors({c.state.a1, c.state.a2}, zeta, d, k);
            out.push_back(c);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.coord < b.coord;
    });
    return out;
}

double candidate_residual(const BifurcationCandidate& c, double d) noexcept {
    return kernel_condition({c.state.a1, c.state.a2}, c.state.zeta, d, c.k);
}

Parameters candidate_parameters(const BifurcationCandidate& c, double d) noexcept {
    return Parameters{d, c.state.zeta, c.state.f};
}

} // namespace llcomb
