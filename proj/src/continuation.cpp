#include "llcomb/continuation.hpp"

#include "llcomb/eigen_tools.hpp"
#include "llcomb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace llcomb {

namespace {

// Trapezoid-weighted inner product of stacked fields: the discrete L2(0, pi) product.
double wdot(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const int n = g.size();
    const auto w = g.weights();
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += w[j] * (a[j] * b[j] + a[n + j] * b[n + j]);
    return s;
}

Eigen::VectorXd weighted(const Grid& g, const Eigen::VectorXd& a) {
    const int n = g.size();
    const auto w = g.weights();
    Eigen::VectorXd out(a.size());
    for (int j = 0; j < n; ++j) {
        out[j] = w[j] * a[j];
        out[n + j] = w[j] * a[n + j];
    }
    return out;
}

double aug_norm(const Grid& g, const Eigen::VectorXd& du, double dl) { return std::sqrt(wdot(g, du, du) + dl * dl); }

// max_x |u(x) - mean(u)|: distance to the closest constant, up to a factor below 2.
double offmean_linf(const FieldState& s) {
    const double m1 = s.a1().mean(), m2 = s.a2().mean();
    return ((s.a1().array() - m1).square() + (s.a2().array() - m2).square()).sqrt().maxCoeff();
}

struct Corrected {
    bool ok = false;
    Eigen::VectorXd u;
    double lam = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// Newton on F(u, lam) = 0 together with the linear constraint cu . u + clam lam = rhs.
Corrected bordered_newton(const Grid& g, Eigen::VectorXd u, double lam, const Parameters& p, Mode mode,
                          const Eigen::VectorXd& cu, double clam, double rhs, double tol, int max_iter) {
    const int N = static_cast<int>(u.size());
    Corrected out;
    double first = -1.0;
    for (int it = 0;; ++it) {
        const Parameters P = with_active_param(p, mode, lam);
        const FieldState s(g, u);
        const Eigen::VectorXd F = residual(s, P);
        const double gc = cu.dot(u) + clam * lam - rhs;
        const double r = std::max(F.lpNorm<Eigen::Infinity>(), std::abs(gc));
        out.iterations = it;
        out.residual = r;
        if (!std::isfinite(r)) return out;
        if (r < tol) {
            out.ok = true;
            out.u = std::move(u);
            out.lam = lam;
            return out;
        }
        if (first < 0) first = r;
        if (it >= max_iter || r > 1e3 * std::max(first, 1e-3)) return out;

        Eigen::MatrixXd M(N + 1, N + 1);
        M.topLeftCorner(N, N) = jacobian(s, P);
        M.topRightCorner(N, 1) = residual_dparam(s, mode);
        M.bottomLeftCorner(1, N) = cu.transpose();
        M(N, N) = clam;
        Eigen::VectorXd rhsv(N + 1);
        rhsv.head(N) = -F;
        rhsv[N] = -gc;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
        if (!(lu.rcond() > 1e-16)) return out;
        const Eigen::VectorXd delta = lu.solve(rhsv);
        u += delta.head(N);
        lam += delta[N];
    }
}

// Normalized tangent from the null direction of [J, F_lam] with lam-component fixed to one.
std::pair<Eigen::VectorXd, double> tangent_at(const FieldState& s, const Parameters& P, Mode mode) {
    const Eigen::MatrixXd J = jacobian(s, P);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    if (!(lu.rcond() > 1e-14))
        throw SingularJacobianError("cannot compute a tangent at a singular point; supply one", lu.rcond());
    Eigen::VectorXd tu = -lu.solve(residual_dparam(s, mode));
    double tl = 1.0;
    const double nrm = aug_norm(s.grid, tu, tl);
    tu /= nrm;
    tl /= nrm;
    // orient towards growing l2 norm
    if (wdot(s.grid, s.u, tu) < 0) {
        tu = -tu;
        tl = -tl;
    }
    return {tu, tl};
}

std::vector<BifurcationCandidate> candidates_for(const Parameters& p, Mode mode) {
    return mode == Mode::hat ? enumerate_bifpoints_hat(p.f, p.d) : enumerate_bifpoints_bar(p.zeta, p.d);
}

std::optional<BifurcationCandidate> nearest_candidate(const Parameters& p, Mode mode, double coord) {
    std::optional<BifurcationCandidate> best;
    double bd = std::numeric_limits<double>::infinity();
    const double target = mode == Mode::bar ? std::abs(coord) : coord;
    for (const auto& c : candidates_for(p, mode)) {
        const double dist = std::abs(c.coord - target);
        if (dist < bd) {
            bd = dist;
            best = c;
        }
    }
    return best;
}

void check_theory(const FieldState& s, const Parameters& P, double slack) {
    const ValidationReport v = validate_solution(s, P);
    if (!v.nonconstant) return;
    const double z = sign_of(P.d) * P.zeta;
    if (z < v.window_lo - slack || z > v.window_hi + slack || !v.bound_ok()) {
        std::ostringstream msg;
        msg << "nonconstant branch point outside the admissible region: sign(d) zeta = " << z << ", window ["
            << v.window_lo << ", " << v.window_hi << "], |a|_inf = " << v.linf << " (bound " << v.linf_bound << ")";
        throw TheoryViolation(msg.str());
    }
}

// Signed amplitude of cosine mode k projected onto `dir` (a unit vector in R^2).
std::array<double, 2> mode_pair(const FieldState& s, int k) {
    const Eigen::VectorXd c1 = cosine_coefficients(s.grid, s.a1()), c2 = cosine_coefficients(s.grid, s.a2());
    return {c1[k], c2[k]};
}

template <class F>
double golden_min(F&& f, double a, double b, double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Unit null direction of [J, F_lam] at a solution, oriented along (tu, tl).
std::optional<std::pair<Eigen::VectorXd, double>> exact_tangent(const FieldState& s, const Parameters& P, Mode mode,
                                                                const Eigen::VectorXd& tu, double tl) {
    const Grid& g = s.grid;
    const int N = static_cast<int>(s.u.size());
    Eigen::MatrixXd M(N + 1, N + 1);
    M.topLeftCorner(N, N) = jacobian(s, P);
    M.topRightCorner(N, 1) = residual_dparam(s, mode);
    M.bottomLeftCorner(1, N) = weighted(g, tu).transpose();
    M(N, N) = tl;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    if (!(lu.rcond() > 1e-14)) return std::nullopt;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
    rhs[N] = 1.0;
    const Eigen::VectorXd z = lu.solve(rhs);
    Eigen::VectorXd v = z.head(N);
    double vl = z[N];
    const double nrm = aug_norm(g, v, vl);
    if (!(nrm > 0.0)) return std::nullopt;
    return std::pair<Eigen::VectorXd, double>{v / nrm, vl / nrm};
}

// Fold between states ua and ub: the extremum of lam along the branch, parametrized by
// sigma = <w, u> with w the secant direction (transversal to the branch at the fold).
std::optional<Corrected> refine_fold(const Grid& g, const Eigen::VectorXd& ua, double la, const Eigen::VectorXd& ub,
                                     double lb, double lmid, const Parameters& p, Mode mode, double tol) {
    const Eigen::VectorXd du = ub - ua;
    const Eigen::VectorXd w = weighted(g, du);
    const double sa = w.dot(ua), sb = w.dot(ub);
    if (!(sb > sa)) return std::nullopt;
    const double orient = lmid >= 0.5 * (la + lb) ? -1.0 : 1.0;  // minimize orient * lam
    Eigen::VectorXd warm_u = ua;
    double warm_l = la;
    bool failed = false;
    std::optional<Corrected> best;
    auto value = [&](double sigma) {
        const double t = (sigma - sa) / (sb - sa);
        Corrected r = bordered_newton(g, ua + t * du, la + t * (lb - la), p, mode, w, 0.0, sigma, tol, 15);
        if (!r.ok) r = bordered_newton(g, warm_u, warm_l, p, mode, w, 0.0, sigma, tol, 15);
        if (!r.ok) {
            failed = true;
            return std::numeric_limits<double>::infinity();
        }
        warm_u = r.u;
        warm_l = r.lam;
        const double v = orient * r.lam;
        if (!best || v < orient * best->lam) best = r;
        return v;
    };
    golden_min(value, sa, sb, 1e-7 * (sb - sa));
    if (failed || !best) return std::nullopt;
    return best;
}

// Follow the branch from `cur` towards zero amplitude of cosine mode k along direction e,
// pinning <u, phi> = A <phi, phi> with phi = e cos(kx) and A shrinking geometrically.
// Succeeds when the state ends within the trivial-return tolerance of the trivial curve.
std::optional<Corrected> refine_return(const BranchPoint& cur, const Parameters& p, Mode mode, int k,
                                       std::array<double, 2> e, const ContinuationConfig& cfg) {
    const Grid& g = cur.state.grid;
    const FieldState phi = FieldState::from_functions(
        g, [&](double x) { return e[0] * std::cos(k * x); }, [&](double x) { return e[1] * std::cos(k * x); });
    const Eigen::VectorXd cphi = weighted(g, phi.u);
    const double pp = cphi.dot(phi.u);
    double amp = cphi.dot(cur.state.u) / pp;
    const double target = 0.25 * cfg.trivial_return_tol;
    if (!(amp > target)) return std::nullopt;
    Eigen::VectorXd u = cur.state.u;
    double lam = cur.param;
    while (amp > target) {
        const double next = std::max(0.2 * amp, target);
        // rescale the mode-k part of the guess to the new amplitude
        const Eigen::VectorXd guess = u + (next - amp) * phi.u;
        Corrected r = bordered_newton(g, guess, lam, p, mode, cphi, 0.0, next * pp, cfg.corrector_tol,
                                      cfg.corrector_max_iter + 5);
        if (!r.ok) return std::nullopt;
        u = r.u;
        lam = r.lam;
        amp = next;
    }
    const FieldState s(g, u);
    if (distance_to_trivial(s, with_active_param(p, mode, lam), mode).first >= cfg.trivial_return_tol)
        return std::nullopt;
    Corrected out;
    out.ok = true;
    out.u = std::move(u);
    out.lam = lam;
    return out;
}

} // namespace

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::turning_point: return "turning_point";
    case EventKind::trivial_return: return "trivial_return";
    case EventKind::secondary_bif_candidate: return "secondary_bif_candidate";
    case EventKind::step_limit: return "step_limit";
    case EventKind::ds_min_exhausted: return "ds_min_exhausted";
    }
    return "unknown";
}

const BranchEvent* Branch::find_event(EventKind kind) const noexcept {
    for (const auto& e : events)
        if (e.kind == kind) return &e;
    return nullptr;
}

std::vector<const BranchEvent*> Branch::events_of(EventKind kind) const {
    std::vector<const BranchEvent*> out;
    for (const auto& e : events)
        if (e.kind == kind) out.push_back(&e);
    return out;
}

void validate(const ContinuationConfig& cfg) {
    if (!(cfg.ds_min > 0 && cfg.ds_min <= cfg.ds_init && cfg.ds_init <= cfg.ds_max))
        throw PreconditionError("continuation steps must satisfy 0 < ds_min <= ds_init <= ds_max");
    if (cfg.max_steps < 0) throw PreconditionError("max_steps must be nonnegative");
    if (!(cfg.trivial_return_tol > 0) || !(cfg.corrector_tol > 0) || cfg.corrector_max_iter < 1)
        throw PreconditionError("continuation tolerances must be positive");
}

BranchPoint make_point(const FieldState& s, const Parameters& p, Mode mode, bool monitor_eigenvalues) {
    BranchPoint bp;
    bp.param = active_param(p, mode);
    bp.state = s;
    bp.l2norm = l2norm(s);
    const Eigen::MatrixXd J = jacobian(s, p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    bp.det_sign = determinant_sign(lu);
    if (monitor_eigenvalues) {
        const SmallEigenpairs e = smallest_eigenpairs(J, 1, false, {}, &lu);
        bp.min_eig = (bp.det_sign == 0 ? 1 : bp.det_sign) * std::abs(e.values.front());
    }
    return bp;
}

int dominant_mode(const FieldState& s) {
    const Eigen::VectorXd e = mode_energy(s);
    Eigen::Index k = 0;
    e.tail(e.size() - 1).maxCoeff(&k);
    return static_cast<int>(k) + 1;
}

double off_multiple_energy_fraction(const FieldState& s, int k) {
    const Eigen::VectorXd e = mode_energy(s);
    double total = 0.0, off = 0.0;
    for (Eigen::Index q = 1; q < e.size(); ++q) {
        total += e[q];
        if (q % k != 0) off += e[q];
    }
    return total > 0 ? off / total : 0.0;
}

int count_minima_abs(const FieldState& s, double prominence) {
    const int n = s.n();
    // |a| around the even extension: x_0 .. x_{n-1} = pi, then back down to x_1
    std::vector<double> v;
    v.reserve(2 * (n - 1));
    for (int j = 0; j < n; ++j) v.push_back(std::hypot(s.a1()[j], s.a2()[j]));
    for (int j = n - 2; j >= 1; --j) v.push_back(v[j]);
    const int L = static_cast<int>(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const int start = static_cast<int>(hi - v.begin());
    prominence *= *hi - *lo;
    if (!(prominence > 0.0)) return 0;
    int minima = 0;
    bool look_for_max = false;
    double mx = v[start], mn = v[start];
    for (int i = 1; i <= L; ++i) {
        const double x = v[(start + i) % L];
        mx = std::max(mx, x);
        mn = std::min(mn, x);
        if (look_for_max) {
            if (x < mx - prominence) {
                look_for_max = false;
                mn = x;
            }
        } else if (x > mn + prominence) {
            ++minima;
            look_for_max = true;
            mx = x;
        }
    }
    return minima;
}

int count_maxima_abs(const FieldState& s, double prominence) {
    // extrema alternate on a closed curve
    return count_minima_abs(s, prominence);
}

std::pair<double, double> distance_to_trivial(const FieldState& u, const Parameters& p, Mode mode) {
    const int n = u.n();
    const Eigen::VectorXd a1 = u.a1(), a2 = u.a2();
    auto dist_to = [&](double c1, double c2) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) m = std::max(m, (a1[j] - c1) * (a1[j] - c1) + (a2[j] - c2) * (a2[j] - c2));
        return std::sqrt(m);
    };
    std::function<double(double)> dist;
    double lo, hi;
    if (mode == Mode::hat) {
        dist = [&](double t) {
            const auto c = trivial_hat(t, p.f, p.d);
            return dist_to(c.a1, c.a2);
        };
        lo = -1.0;
        hi = 1.0;
    } else {
        dist = [&](double s) {
            const auto c = trivial_bar(s, p.zeta);
            return dist_to(c.a1, c.a2);
        };
        hi = linf_norm(u) + 1.0;
        lo = -hi;
    }
    constexpr int samples = 10000;
    const double h = (hi - lo) / samples;
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    int ibest = 0;
    for (int i = 0; i < samples; ++i) {
        const double c = lo + (i + 0.5) * h;
        const double v = dist(c);
        if (v < best) {
            best = v;
            arg = c;
            ibest = i;
        }
    }
    double a = lo + std::max(ibest - 0.5, 0.0) * h, b = lo + std::min(ibest + 1.5, double(samples)) * h;
    if (mode == Mode::hat) {
        a = std::max(a, -1.0 + 1e-15);
        b = std::min(b, 1.0 - 1e-15);
    }
    const double refined = golden_min(dist, a, b, 1e-13);
    const double vr = dist(refined);
    if (vr < best) {
        best = vr;
        arg = refined;
    }
    return {best, arg};
}

BranchPoint branch_switch(const BifurcationCandidate& c, double d, double eps, const Grid& grid) {
    if (c.k < 1) throw PreconditionError("k = 0 marks a turning point of the trivial curve, not a bifurcation");
    if (!c.s_ok)
        throw PreconditionError("condition (S) fails at candidate k = " + std::to_string(c.k) +
                                ": the kernel is not simple");
    if (!c.t_ok)
        throw PreconditionError("condition (T) fails at candidate k = " + std::to_string(c.k) +
                                ": the crossing is not transversal");
    if (!(std::isfinite(eps) && eps != 0.0)) throw PreconditionError("branch_switch: eps must be finite and nonzero");

    const Parameters P0 = candidate_parameters(c, d);
    const Mode mode = c.mode;
    const double lam0 = active_param(P0, mode);
    const double an = std::hypot(c.kernel.alpha[0], c.kernel.alpha[1]);
    const double al1 = c.kernel.alpha[0] / an, al2 = c.kernel.alpha[1] / an;
    const int k = c.k;
    const FieldState uc = FieldState::constant(grid, c.state.a1, c.state.a2);
    const FieldState phi = FieldState::from_functions(
        grid, [&](double x) { return al1 * std::cos(k * x); }, [&](double x) { return al2 * std::cos(k * x); });
    const Eigen::VectorXd cu = weighted(grid, phi.u);
    const double pp = wdot(grid, phi.u, phi.u);

    double last_res = 0.0;
    for (double scale : {1.0, 2.0, 4.0, 8.0, 10.0}) {
        const double e = std::copysign(std::abs(eps) * scale, eps);
        const Eigen::VectorXd u0 = uc.u + e * phi.u;
        const double rhs = cu.dot(uc.u) + e * pp;
        NewtonOptions nopt;
        Corrected r = bordered_newton(grid, u0, lam0, P0, mode, cu, 0.0, rhs, nopt.tol, 25);
        last_res = r.residual;
        if (!r.ok) continue;
        FieldState s(grid, r.u);
        if (!is_nonconstant(s)) continue;
        BranchPoint bp = make_point(s, with_active_param(P0, mode, r.lam), mode);
        Eigen::VectorXd du = r.u - uc.u;
        double dl = r.lam - lam0;
        const double nrm = aug_norm(grid, du, dl);
        bp.tangent = du / nrm;
        bp.tangent_param = dl / nrm;
        bp.ds = nrm;
        return bp;
    }
    throw ConvergenceError("branch_switch: corrector failed for eps up to 10x the requested value", 25, last_res);
}

BranchPoint switch_at(const Branch& b, int index, double eps) {
    if (index < 0 || index >= static_cast<int>(b.points.size()))
        throw PreconditionError("switch_at: point index out of range");
    const BranchPoint& bp = b.points[index];
    const Grid& g = bp.state.grid;
    const Parameters P = with_active_param(b.params, b.mode, bp.param);
    const EigenResult e = eigen_indicator(bp.state, P, 1, true);
    Eigen::VectorXd phi = e.vectors.col(0).real();
    if (bp.tangent.size() == phi.size() && bp.tangent.size() > 0) {
        const double tt = wdot(g, bp.tangent, bp.tangent);
        if (tt > 0) phi -= wdot(g, phi, bp.tangent) / tt * bp.tangent;
    }
    phi /= std::sqrt(wdot(g, phi, phi));
    const Eigen::VectorXd cu = weighted(g, phi);
    for (double scale : {1.0, 2.0, 4.0, 8.0, 10.0}) {
        const double ee = eps * scale;
        const double rhs = cu.dot(bp.state.u) + ee;
        Corrected r = bordered_newton(g, bp.state.u + ee * phi, bp.param, P, b.mode, cu, 0.0, rhs, 1e-10, 25);
        if (!r.ok) continue;
        FieldState s(g, r.u);
        BranchPoint out = make_point(s, with_active_param(P, b.mode, r.lam), b.mode);
        const Eigen::VectorXd du = r.u - bp.state.u;
        const double dl = r.lam - bp.param;
        const double nrm = aug_norm(g, du, dl);
        out.tangent = du / nrm;
        out.tangent_param = dl / nrm;
        out.ds = nrm;
        return out;
    }
    throw ConvergenceError("switch_at: corrector failed", 25, 0.0);
}

Branch continue_branch(const BranchPoint& start, const Parameters& p, Mode mode, const ContinuationConfig& cfg) {
    validate(cfg);
    validate(p);
    const Grid& g = start.state.grid;
    Branch br;
    br.mode = mode;
    br.params = p;
    br.points.push_back(start);
    BranchPoint& first = br.points.front();
    const Parameters P0 = with_active_param(p, mode, start.param);
    if (first.l2norm == 0.0) first.l2norm = l2norm(first.state);
    if (first.tangent.size() != first.state.u.size() || aug_norm(g, first.tangent, first.tangent_param) == 0.0) {
        auto [tu, tl] = tangent_at(first.state, P0, mode);
        first.tangent = tu;
        first.tangent_param = tl;
    }

    Eigen::VectorXd tu = first.tangent;
    double tl = first.tangent_param;
    {
        const double nrm = aug_norm(g, tu, tl);
        tu /= nrm;
        tl /= nrm;
    }
    double ds = cfg.ds_init;
    const double collapse_ds = std::max(cfg.ds_min, 1e-4);
    std::vector<double> arclength{0.0};
    int steps = 0;
    bool exact_tangent_used = false;
    constexpr double min_cos = 0.9;  // largest accepted turn of the secant per step: about 26 degrees

    auto add_event = [&](EventKind kind, int index, double param, std::string note = {}) -> BranchEvent& {
        BranchEvent e;
        e.kind = kind;
        e.index = index;
        e.param = param;
        e.note = std::move(note);
        br.events.push_back(std::move(e));
        return br.events.back();
    };

    auto finish_return = [&](const FieldState& s, double lam, double dist_step) {
        const Parameters P = with_active_param(p, mode, lam);
        BranchPoint bp = make_point(s, P, mode, cfg.monitor_eigenvalues);
        const BranchPoint& cur = br.points.back();
        const Eigen::VectorXd du = s.u - cur.state.u;
        const double dl = lam - cur.param;
        const double nrm = aug_norm(g, du, dl);
        bp.tangent = nrm > 0 ? Eigen::VectorXd(du / nrm) : tu;
        bp.tangent_param = nrm > 0 ? dl / nrm : tl;
        bp.ds = dist_step;
        br.points.push_back(std::move(bp));
        arclength.push_back(arclength.back() + dist_step);
        const auto [dist, coord] = distance_to_trivial(s, P, mode);
        BranchEvent& e = add_event(EventKind::trivial_return, static_cast<int>(br.points.size()) - 1, lam);
        e.distance = dist;
        e.candidate = nearest_candidate(P, mode, coord);
        if (e.candidate) {
            std::ostringstream note;
            note << "k=" << e.candidate->k << " sigma=" << e.candidate->sigma << " coord=" << e.candidate->coord
                 << " param=" << e.candidate->param;
            e.note = note.str();
        }
    };

    for (;;) {
        if (steps >= cfg.max_steps || static_cast<int>(br.points.size()) >= cfg.max_points) {
            add_event(EventKind::step_limit, static_cast<int>(br.points.size()) - 1, br.points.back().param);
            break;
        }
        const BranchPoint& cur = br.points.back();
        const Eigen::VectorXd cu = weighted(g, tu);
        const double base = cu.dot(cur.state.u) + tl * cur.param;
        Corrected r = bordered_newton(g, cur.state.u + ds * tu, cur.param + ds * tl, p, mode, cu, tl, base + ds,
                                      cfg.corrector_tol, cfg.corrector_max_iter);
        bool accept = r.ok;
        Eigen::VectorXd su;
        double sl = 0.0, dist = 0.0;
        if (accept) {
            su = r.u - cur.state.u;
            sl = r.lam - cur.param;
            dist = aug_norm(g, su, sl);
            su /= dist;
            sl /= dist;
            const double cosang = wdot(g, su, tu) + sl * tl;
            // reject jumps to another branch and backtracking
            if (cosang < min_cos || dist > 1.5 * ds) accept = false;
        }
        if (!accept) {
            if (!exact_tangent_used) {
                // the secant may be a chord across a sharp bend; retry along the local tangent
                const Parameters Pc = with_active_param(p, mode, cur.param);
                if (auto t = exact_tangent(cur.state, Pc, mode, tu, tl)) {
                    tu = t->first;
                    tl = t->second;
                }
                exact_tangent_used = true;
            }
            ds *= 0.5;
            if (ds < cfg.ds_min) {
                add_event(EventKind::ds_min_exhausted, static_cast<int>(br.points.size()) - 1, cur.param);
                break;
            }
            continue;
        }
        ++steps;
        exact_tangent_used = false;
        FieldState s(g, r.u);
        const Parameters P = with_active_param(p, mode, r.lam);
        check_theory(s, P, cfg.window_slack);

        // trivial return: the state collapsed onto a constant, or the dominant mode changed sign
        const int kdom = dominant_mode(cur.state);
        const auto v0 = mode_pair(cur.state, kdom);
        const double v0n = std::hypot(v0[0], v0[1]);
        const auto v1 = mode_pair(s, kdom);
        const double proj1 = v0n > 0 ? (v1[0] * v0[0] + v1[1] * v0[1]) / v0n : 0.0;
        const bool collapsed = offmean_linf(s) < cfg.trivial_return_tol;
        if (v0n > 0 && proj1 >= 0 && proj1 < 0.25 * v0n && !collapsed && ds > collapse_ds) {
            // the mode that carried the state nearly vanished in one step: likely a jump onto a
            // neighbouring branch close to the trivial curve
            --steps;
            ds = std::max(0.25 * ds, cfg.ds_min);
            continue;
        }
        if (collapsed || (v0n > 0 && proj1 < 0)) {
            if (auto hit = refine_return(cur, p, mode, kdom, {v0[0] / v0n, v0[1] / v0n}, cfg)) {
                const double step = aug_norm(g, hit->u - cur.state.u, hit->lam - cur.param);
                finish_return(FieldState(g, hit->u), hit->lam, step);
                break;
            }
            if (collapsed) {
                // the corrector fell onto the trivial curve without a traceable crossing
                if (ds > collapse_ds) {
                    --steps;
                    ds = std::max(0.25 * ds, cfg.ds_min);
                    continue;
                }
                finish_return(s, r.lam, dist);
                break;
            }
        }

        BranchPoint bp = make_point(s, P, mode, cfg.monitor_eigenvalues);
        bp.tangent = su;
        bp.tangent_param = sl;
        bp.ds = dist;
        const BranchPoint prev = cur;  // copy: push_back may reallocate
        br.points.push_back(std::move(bp));
        arclength.push_back(arclength.back() + dist);
        const int inew = static_cast<int>(br.points.size()) - 1;

        bool turning = false;
        // compare accepted secants; tl may have been replaced by the exact tangent after a rejection
        const double prev_tl = prev.tangent_param;
        if (prev_tl != 0.0 && sl != 0.0 && (prev_tl > 0) != (sl > 0)) {
            turning = true;
            // parabola through the last three (arclength, param) pairs
            double ext = prev.param;
            int iext = inew - 1;
            if (inew >= 2) {
                const double s0 = arclength[inew - 2], s1 = arclength[inew - 1], s2 = arclength[inew];
                const double l0 = br.points[inew - 2].param, l1 = br.points[inew - 1].param,
                             l2 = br.points[inew].param;
                const double d01 = (l1 - l0) / (s1 - s0), d12 = (l2 - l1) / (s2 - s1);
                const double c2 = (d12 - d01) / (s2 - s0);
                if (c2 != 0.0) {
                    const double sx = 0.5 * (s0 + s1) - d01 / (2 * c2);
                    if (sx >= s0 && sx <= s2) ext = l0 + d01 * (sx - s0) + c2 * (sx - s0) * (sx - s1);
                    if (std::abs(sx - s2) < std::abs(sx - s1)) iext = inew;
                }
            }
            BranchEvent& e = add_event(EventKind::turning_point, iext, ext);
            if (inew >= 2) {
                const BranchPoint& pa = br.points[inew - 2];
                const BranchPoint& pb = br.points[inew];
                if (auto f = refine_fold(g, pa.state.u, pa.param, pb.state.u, pb.param, br.points[inew - 1].param, p,
                                         mode, cfg.corrector_tol)) {
                    e.param = f->lam;
                    e.state = FieldState(g, f->u);
                }
            }
        }
        if (cfg.monitor_eigenvalues && inew >= 2 && !turning) {
            const double m0 = prev.min_eig, m1 = br.points[inew].min_eig;
            if ((m0 > 0) != (m1 > 0) && m0 != 0.0 && m1 != 0.0) {
                const double w = m0 / (m0 - m1);
                add_event(EventKind::secondary_bif_candidate, inew, prev.param + w * (br.points[inew].param - prev.param),
                          "determinant sign change without a fold");
            }
        }

        tu = su;
        tl = sl;
        if (r.iterations <= 3)
            ds = std::min(ds * 1.5, cfg.ds_max);
        else if (r.iterations > 5)
            ds = std::max(ds * 0.7, cfg.ds_min);
    }
    // a fold also flips det J; drop sign changes that sit next to a turning point
    std::erase_if(br.events, [&](const BranchEvent& e) {
        if (e.kind != EventKind::secondary_bif_candidate) return false;
        for (const auto& t : br.events)
            if (t.kind == EventKind::turning_point && std::abs(t.index - e.index) <= 2) return true;
        return false;
    });
    return br;
}

} // namespace llcomb
