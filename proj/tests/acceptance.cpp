// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Run a subset with criterion numbers as arguments, e.g. `acceptance 1 2 10`.

#include "llcomb/continuation.hpp"
#include "llcomb/runtime.hpp"
#include "llcomb/spectral_bvp.hpp"
#include "llcomb/time_evolution.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace llcomb;

namespace {

// ---- pinned tolerances --------------------------------------------------------------
constexpr double table_tol = 1e-4;            // criteria 1, 2
constexpr double kernel_eig_tol = 1e-6;       // criterion 4
constexpr double kernel_corr_min = 0.999;     // criterion 4
constexpr int kernel_grid = 256;              // criterion 4
constexpr double return_tol = 1e-2;           // criterion 5
constexpr double fold_tol = 1e-2;             // criterion 6
constexpr double identity_tol = 1e-8;         // criterion 7
constexpr double order_min = 1.9;             // criterion 8
constexpr double soliton_prominence = 0.25;   // criterion 8: tail ripples of the soliton stay below this
constexpr double drift_max = 1e-6;            // criterion 9
constexpr double drift_window = 10.0;         // criterion 9
constexpr double five_peak_dist = 0.05;       // criterion 9
constexpr double five_peak_min_contrast = 0.5;  // criterion 9: max|a| - min|a| of the pattern
constexpr int seeds = 5;                      // criterion 9
constexpr int scan_points = 1000000;          // criterion 10

struct Row {
    int k, sigma;
    double coord, param;
};

// Tabulated bifurcation points (k, sigma, coordinate, parameter).
const std::vector<Row> bar_zeta0{
    {5, 1, 1.03235, 1.50871}, {5, -1, 1.50582, 3.73195}, {6, 1, 1.16104, 1.94874},
    {6, -1, 1.85795, 6.67731}, {7, 1, 1.31863, 2.64494}, {7, -1, 2.18965, 10.72430},
    {8, 1, 1.48760, 3.61248}, {8, -1, 2.51404, 16.08736},
};
const std::vector<Row> bar_zeta10{
    {1, 1, 1.82156, 12.30707}, {1, -1, 3.12227, 3.21945}, {2, 1, 1.76678, 12.28053},
    {2, -1, 3.02410, 3.97844}, {3, 1, 1.67183, 12.16097}, {3, -1, 2.85277, 6.02862},
    {4, 1, 1.53017, 11.81841}, {4, -1, 2.59331, 8.87959}, {5, 1, 1.33036, 11.02958},
    {5, -1, 2.21287, 11.50749}, {6, 1, 1.06458, 9.49913}, {6, -1, 1.61245, 12.04060},
};
const std::vector<Row> hat_f16{
    {1, 1, 0.10528, 2.63750},   {1, -1, 0.77130, 2.24888},  {2, 1, -0.18543, 2.28327},
    {2, -1, 0.75556, 2.25196},  {3, 1, -0.52046, 1.25702},  {3, -1, 0.72127, 2.26952},
    {4, 1, -0.72866, 0.13682},  {4, -1, 0.66089, 2.32248},  {5, -1, -0.77281, -0.18666},
    {5, -1, 0.56321, 2.42954},  {6, -1, -0.61695, 0.80166}, {6, -1, 0.40312, 2.58449},
    {7, -1, -0.20600, 2.24085}, {7, -1, 0.01535, 2.57475},
};
const std::vector<Row> hat_f2{
    {1, -1, 0.85260, 2.72386}, {1, 1, 0.22806, 4.02619}, {2, -1, 0.86118, 2.72771},
    {2, 1, 0.49553, 3.58830},  {3, 1, 0.86262, 2.72883}, {3, 1, 0.78647, 2.79924},
};

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("violated: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string num(double v, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

const BifurcationCandidate* match(const std::vector<BifurcationCandidate>& cs, const Row& r) {
    const BifurcationCandidate* best = nullptr;
    for (const auto& c : cs)
        if (c.k == r.k && c.sigma == r.sigma && (!best || std::abs(c.coord - r.coord) < std::abs(best->coord - r.coord)))
            best = &c;
    return best && std::abs(best->coord - r.coord) < 1e-3 ? best : nullptr;
}

void check_table(Outcome& o, const std::vector<BifurcationCandidate>& cs, const std::vector<Row>& rows,
                 const std::string& label, bool require_st, std::size_t expected_total) {
    double worst = 0.0;
    for (const auto& r : rows) {
        const auto* c = match(cs, r);
        o.require(c != nullptr, label + " row k=" + std::to_string(r.k) + " sigma=" + std::to_string(r.sigma) + " found");
        if (!c) continue;
        worst = std::max(worst, std::abs(c->param - r.param));
        o.require(std::abs(c->param - r.param) <= table_tol, label + " k=" + std::to_string(r.k) + " param " + num(c->param));
        if (require_st) o.require(c->s_ok && c->t_ok, label + " k=" + std::to_string(r.k) + " (S) and (T)");
    }
    if (expected_total > 0) o.require(cs.size() == expected_total, label + " has " + std::to_string(cs.size()) + " points");
    o.note(label + ": " + std::to_string(rows.size()) + " rows, max |delta| " + num(worst, 3));
}

// ---- criterion 1, 2, 3 ----------------------------------------------------------------

Outcome criterion1() {
    Outcome o;
    check_table(o, enumerate_bifpoints_bar(0.0, 0.1), bar_zeta0, "zeta=0 d=0.1", false, 0);
    check_table(o, enumerate_bifpoints_bar(10.0, -0.2), bar_zeta10, "zeta=10 d=-0.2", false, 12);
    return o;
}

Outcome criterion2() {
    Outcome o;
    check_table(o, enumerate_bifpoints_hat(1.6, 0.1), hat_f16, "f=1.6 d=0.1", true, 14);
    check_table(o, enumerate_bifpoints_hat(2.0, -0.1), hat_f2, "f=2 d=-0.1", true, 6);
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> uf(-3.0, 3.0), ud(-1.0, 1.0), uz(-5.0, 15.0);
    int hat_total = 0, bar_total = 0, small_f = 0;
    for (int i = 0; i < 1000; ++i) {
        const double f = uf(rng);
        double d = ud(rng);
        if (std::abs(d) < 0.02) d = std::copysign(0.02, d);
        const auto hat = enumerate_bifpoints_hat(f, d);
        hat_total += static_cast<int>(hat.size());
        o.require(static_cast<double>(hat.size()) <= bounds_report({d, 0.0, f}).khat,
                  "hat count <= khat at f=" + num(f) + " d=" + num(d));
        if (std::abs(f) < 1.0) {
            ++small_f;
            o.require(hat.empty(), "no hat points for |f| < 1 at f=" + num(f));
        }
        if (d < 0) {
            const double zeta = uz(rng);
            const auto bar = enumerate_bifpoints_bar(zeta, d);
            bar_total += static_cast<int>(bar.size());
            o.require(static_cast<double>(bar.size()) <= *bounds_report({d, zeta, 0.0}).kbar,
                      "bar count <= kbar at zeta=" + num(zeta) + " d=" + num(d));
        }
    }
    o.note("1000 samples, " + std::to_string(hat_total) + " hat and " + std::to_string(bar_total) + " bar points, " +
           std::to_string(small_f) + " with |f| < 1");
    return o;
}

// ---- criterion 4 ----------------------------------------------------------------------

Outcome criterion4() {
    Outcome o;
    const Grid g(kernel_grid);
    int checked = 0;
    double worst_corr = 1.0, worst_small = 0.0;
    auto run = [&](const std::vector<BifurcationCandidate>& cs, const std::vector<Row>& rows, double d) {
        for (const auto& r : rows) {
            const auto* c = match(cs, r);
            if (!c || !c->s_ok) continue;
            ++checked;
            const Parameters p = candidate_parameters(*c, d);
            const FieldState u = FieldState::constant(g, c->state.a1, c->state.a2);
            const EigenResult e = eigen_indicator(u, p, 3, true);
            int small = 0;
            for (const auto& v : e.values)
                if (std::abs(v) < kernel_eig_tol) ++small;
            worst_small = std::max(worst_small, std::abs(e.values.front()));
            o.require(small == 1, "one small eigenvalue at k=" + std::to_string(c->k) + " param " + num(c->param) +
                                      " (found " + std::to_string(small) + ")");
            // weighted correlation with alpha cos(kx)
            const int n = g.size();
            const auto w = g.weights();
            std::complex<double> dot = 0.0;
            double nv = 0.0, nphi = 0.0;
            for (int j = 0; j < n; ++j) {
                const double ck = std::cos(c->k * g.x(j));
                const double phi[2] = {c->kernel.alpha[0] * ck, c->kernel.alpha[1] * ck};
                for (int h = 0; h < 2; ++h) {
                    const std::complex<double> v = e.vectors(h * n + j, 0);
                    dot += w[j] * std::conj(v) * phi[h];
                    nv += w[j] * std::norm(v);
                    nphi += w[j] * phi[h] * phi[h];
                }
            }
            const double corr = std::abs(dot) / std::sqrt(nv * nphi);
            worst_corr = std::min(worst_corr, corr);
            o.require(corr > kernel_corr_min, "eigenvector correlation " + num(corr) + " at k=" + std::to_string(c->k));
        }
    };
    run(enumerate_bifpoints_bar(0.0, 0.1), bar_zeta0, 0.1);
    run(enumerate_bifpoints_bar(10.0, -0.2), bar_zeta10, -0.2);
    run(enumerate_bifpoints_hat(1.6, 0.1), hat_f16, 0.1);
    run(enumerate_bifpoints_hat(2.0, -0.1), hat_f2, -0.1);
    o.require(checked == 40, "all 40 tabulated points satisfy (S)");
    o.note(std::to_string(checked) + " candidates at n=" + std::to_string(kernel_grid) + ", largest kernel eigenvalue " +
           num(worst_small, 3) + ", smallest correlation " + num(worst_corr, 10));
    return o;
}

// ---- criteria 5, 6, 7 share their branches ---------------------------------------------

struct Branches {
    std::vector<std::pair<std::string, Branch>> runs;
};

BifurcationCandidate find_candidate(const std::vector<BifurcationCandidate>& cs, int k, int sigma, double coord) {
    const auto* c = match(cs, {k, sigma, coord, 0.0});
    if (!c) throw std::runtime_error("candidate k=" + std::to_string(k) + " not enumerated");
    return *c;
}

const Branches& bar_branches() {
    static const Branches b = [] {
        Branches out;
        const Parameters p{0.1, 0.0, 0.0};
        const auto cs = enumerate_bifpoints_bar(0.0, 0.1);
        for (const auto& r : bar_zeta0) {
            if (r.sigma != 1) continue;
            const auto c = find_candidate(cs, r.k, 1, r.coord);
            out.runs.emplace_back("bar k=" + std::to_string(r.k), continue_branch(branch_switch(c, p.d), p, Mode::bar));
        }
        return out;
    }();
    return b;
}

const Branches& fold_branches() {
    static const Branches b = [] {
        Branches out;
        const Parameters p{-0.1, 0.0, 2.0};
        const auto cs = enumerate_bifpoints_hat(2.0, -0.1);
        for (int k : {1, 2}) {
            const auto c = find_candidate(cs, k, 1, k == 1 ? 0.22806 : 0.49553);
            out.runs.emplace_back("hat k=" + std::to_string(k) + " sigma=1",
                                  continue_branch(branch_switch(c, p.d), p, Mode::hat));
        }
        return out;
    }();
    return b;
}

Outcome criterion5() {
    Outcome o;
    const auto& runs = bar_branches().runs;
    std::size_t i = 0;
    for (const auto& r : bar_zeta0) {
        if (r.sigma != -1) continue;
        const auto& [label, b] = runs.at(i++);
        const BranchEvent* ret = b.find_event(EventKind::trivial_return);
        o.require(ret != nullptr, label + " returns to the trivial curve");
        if (!ret) continue;
        const bool same = ret->candidate && ret->candidate->k == r.k && ret->candidate->sigma == -1;
        o.require(same, label + " returns at k=" + std::to_string(r.k) + " sigma=-1");
        const double terminal = b.points.back().param;
        o.require(std::abs(terminal - r.param) <= return_tol, label + " terminal f " + num(terminal));
        o.note(label + ": f " + num(terminal) + " (table " + num(r.param) + "), " + std::to_string(b.points.size()) +
               " points");
    }
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto& runs = fold_branches().runs;
    struct Expect {
        double zeta;
        int minima;
        int connected_k;
    };
    const Expect expect[2] = {{3.30685, 1, 3}, {3.25783, 2, 2}};
    for (int i = 0; i < 2; ++i) {
        const auto& [label, b] = runs[i];
        const BranchEvent* ret = b.find_event(EventKind::trivial_return);
        const bool connected = (b.origin.candidate && b.origin.candidate->k == expect[i].connected_k) ||
                               (ret && ret->candidate && ret->candidate->k == expect[i].connected_k);
        o.require(connected, label + " is connected to k=" + std::to_string(expect[i].connected_k));
        const BranchEvent* hit = nullptr;
        for (const BranchEvent* e : b.events_of(EventKind::turning_point))
            if (std::abs(e->param - expect[i].zeta) <= fold_tol) hit = e;
        o.require(hit != nullptr, label + " has a turning point within " + num(fold_tol) + " of " + num(expect[i].zeta));
        if (!hit) continue;
        const FieldState& s = hit->state ? *hit->state : b.points[hit->index].state;
        const int minima = count_minima_abs(s);
        o.require(minima == expect[i].minima, label + " fold state has " + std::to_string(minima) + " minima");
        o.note(label + ": fold at zeta " + num(hit->param) + " with " + std::to_string(minima) + " minima" +
               (ret && ret->candidate ? ", returns at k=" + std::to_string(ret->candidate->k) : ""));
    }
    return o;
}

Outcome criterion7() {
    Outcome o;
    int checked = 0;
    double worst_mean = 0.0, worst_energy = 0.0, worst_res = 0.0;
    auto check = [&](const FieldState& s, const Parameters& p, const std::string& where) {
        if (!is_nonconstant(s)) return;
        ++checked;
        const ValidationReport r = validate_solution(s, p);
        worst_mean = std::max(worst_mean, std::abs(r.mean_identity_defect));
        worst_energy = std::max(worst_energy, std::abs(r.energy_identity_defect));
        worst_res = std::max(worst_res, r.residual);
        o.require(std::abs(r.mean_identity_defect) <= identity_tol, where + " mean identity " + num(r.mean_identity_defect));
        o.require(std::abs(r.energy_identity_defect) <= identity_tol,
                  where + " energy identity " + num(r.energy_identity_defect));
        o.require(r.bound_ok(), where + " sup bound");
        o.require(r.window_ok(p.d, p.zeta), where + " detuning window");
    };
    for (const Branches* set : {&bar_branches(), &fold_branches()})
        for (const auto& [label, b] : set->runs) {
            for (std::size_t i = 0; i < b.points.size(); ++i)
                check(b.points[i].state, with_active_param(b.params, b.mode, b.points[i].param),
                      label + " point " + std::to_string(i));
            for (const auto& e : b.events)
                if (e.state) check(*e.state, with_active_param(b.params, b.mode, e.param), label + " fold state");
        }
    o.note(std::to_string(checked) + " nonconstant solutions; max |mean defect| " + num(worst_mean, 3) +
           ", max |energy defect| " + num(worst_energy, 3) + ", max residual " + num(worst_res, 3));
    return o;
}

// ---- criterion 8 ------------------------------------------------------------------------

// Bright 1-soliton at zeta = 2.67 (f = 1.6, d = 0.1), taken from the k = 1, sigma = -1
// branch between its first two folds and polished by Newton.
FieldState soliton_at_267() {
    const Parameters p{0.1, 0.0, 1.6};
    const auto c = find_candidate(enumerate_bifpoints_hat(1.6, 0.1), 1, -1, 0.77130);
    const Branch b = continue_branch(branch_switch(c, p.d), p, Mode::hat);
    const auto folds = b.events_of(EventKind::turning_point);
    if (folds.empty()) throw std::runtime_error("k=1 branch has no fold");
    const int start = folds.front()->index;
    for (std::size_t i = start + 1; i < b.points.size(); ++i) {
        if (b.points[i].param > 2.67) continue;
        const std::size_t j = std::abs(b.points[i - 1].param - 2.67) < std::abs(b.points[i].param - 2.67) ? i - 1 : i;
        NewtonOptions no;
        no.max_iter = 100;
        return newton_solve(b.points[j].state, {0.1, 2.67, 1.6}, no);
    }
    throw std::runtime_error("k=1 branch does not come back to zeta = 2.67 after its first fold");
}

Outcome criterion8() {
    Outcome o;
    const FieldState u0 = soliton_at_267();
    o.require(count_maxima_abs(u0, soliton_prominence) == 1 && is_nonconstant(u0), "initial state is a single-peak soliton");
    o.note("initial peak |a| " + num(std::sqrt((u0.a1().array().square() + u0.a2().array().square()).maxCoeff()), 4));
    const Parameters p{0.1, 2.67, 1.6};
    const RampSchedule ramp = RampSchedule::constant(2.67, 1.0);
    auto run = [&](double dt) {
        EvolveOptions opt;
        opt.dt = dt;
        opt.sample_every = 1 << 30;
        return evolve(u0, ramp, p, opt).final_state;
    };
    const double dts[3] = {4e-3, 2e-3, 1e-3};
    const FieldState ref = run(dts[2] / 16.0);
    double err[3];
    for (int i = 0; i < 3; ++i) err[i] = l2norm(FieldState(ref.grid, run(dts[i]).u - ref.u));
    const double q1 = std::log2(err[0] / err[1]), q2 = std::log2(err[1] / err[2]);
    o.require(q1 >= order_min && q2 >= order_min, "observed orders " + num(q1, 4) + ", " + num(q2, 4));
    o.note("errors " + num(err[0], 3) + ", " + num(err[1], 3) + ", " + num(err[2], 3) + "; orders " + num(q1, 4) + ", " +
           num(q2, 4));
    return o;
}

// ---- criterion 9 ------------------------------------------------------------------------

// Distance to the 5-fold projection, or infinity when the sample is not a pronounced
// 5-peak pattern.
double five_peak_distance(const FieldState& s) {
    const Grid& g = s.grid;
    const int n = s.n();
    Eigen::VectorXd c1 = cosine_coefficients(g, s.a1()), c2 = cosine_coefficients(g, s.a2());
    for (int k = 0; k < n; ++k)
        if (k % 5 != 0) c1[k] = c2[k] = 0.0;
    Eigen::VectorXd pu(2 * n);
    pu << from_cosine_coefficients(g, c1), from_cosine_coefficients(g, c2);
    const FieldState proj(g, pu);
    if (count_maxima_abs(proj) != 5) return INFINITY;
    const Eigen::ArrayXd mod = (proj.a1().array().square() + proj.a2().array().square()).sqrt();
    if (mod.maxCoeff() - mod.minCoeff() < five_peak_min_contrast) return INFINITY;
    return (s.u - pu).lpNorm<Eigen::Infinity>();
}

Outcome criterion9() {
    Outcome o;
    const Parameters p{0.1, 0.0, 1.6};
    const RampSchedule ramp = RampSchedule::soliton_capture(1000.0, -5.0, 2.67);
    const Grid g(256);
    const auto cs = constant_solutions(ramp(0.0), p.f);
    const FieldState u0 = FieldState::constant(g, cs.front().a1, cs.front().a2);
    bool any_five = false;
    for (int seed = 1; seed <= seeds; ++seed) {
        EvolveOptions opt;
        opt.dt = 1e-3;
        opt.sample_every = 100;
        opt.noise_amp = 1e-14;
        opt.seed = static_cast<std::uint64_t>(seed);
        DriftMonitor drift(ramp.total_time() - drift_window);
        double best_five = INFINITY, best_five_t = 0.0;
        double norm_lo = INFINITY, norm_hi = -INFINITY;
        opt.observer = [&](double t, double z, const FieldState& s) {
            drift(t, z, s);
            if (t >= ramp.total_time() - drift_window) {
                const double l2 = l2norm(s);
                norm_lo = std::min(norm_lo, l2);
                norm_hi = std::max(norm_hi, l2);
            }
            const double d5 = five_peak_distance(s);
            if (d5 < best_five) {
                best_five = d5;
                best_five_t = t;
            }
        };
        const Trajectory tr = evolve(u0, ramp, p, opt);
        const std::string tag = "seed " + std::to_string(seed);
        o.require(tr.status == EvolveStatus::completed, tag + " completes");
        const double state_drift = drift.drift(tr.final_state);
        const double norm_drift = norm_hi - norm_lo;
        const int peaks = count_maxima_abs(tr.final_state);
        o.require(state_drift < drift_max, tag + " stationary: L2 distance over the last window " + num(state_drift, 3) +
                                               " (L2 norm change " + num(norm_drift, 3) + ")");
        o.require(peaks >= 1 && peaks <= 3 && is_nonconstant(tr.final_state),
                  tag + " final state is a k-soliton with k in {1,2,3} (maxima " + std::to_string(peaks) + ")");
        any_five = any_five || best_five < five_peak_dist;
        o.note(tag + ": final maxima " + std::to_string(peaks) + ", L2 norm " + num(tr.l2norms.back()) +
               ", drift " + num(state_drift, 3) + " (norm change " + num(norm_drift, 3) + "), closest 5-peak pattern " +
               num(best_five, 3) + " at t " + num(best_five_t, 5));
    }
    o.require(any_five, "a transient passes within " + num(five_peak_dist) + " of a 5-peak pattern");
    return o;
}

// ---- criterion 10 -----------------------------------------------------------------------

// Independent oracle: the 2x2 kernel determinant along the f-fixed trivial curve,
// a(t) = (f(1-t^2), -f t sqrt(1-t^2)), zeta(t) = f^2 (1-t^2) + t / sqrt(1-t^2).
double det_along_hat(double t, double f, double d, int k) {
    const double w = 1.0 - t * t, sw = std::sqrt(w);
    const double a1 = f * w, a2 = -f * t * sw;
    const double zeta = f * f * w + t / sw;
    const double m00 = d * k * k + zeta - 3 * a1 * a1 - a2 * a2;
    const double m01 = 1 - 2 * a1 * a2;
    const double m10 = -1 - 2 * a1 * a2;
    const double m11 = d * k * k + zeta - a1 * a1 - 3 * a2 * a2;
    return m00 * m11 - m01 * m10;
}

// Root counts per (k, sigma) from sign changes on a uniform grid over |t| < 1. The family
// of a root is the sign of f^2 (1-t^2) - t / sqrt(1-t^2) - d k^2.
std::map<std::pair<int, int>, int> scan_roots(double f, double d, int kmax) {
    std::map<std::pair<int, int>, int> counts;
    const double h = 2.0 / (scan_points + 1);
    for (int k = 1; k <= kmax; ++k) {
        double t_prev = -1.0 + h;
        double v_prev = det_along_hat(t_prev, f, d, k);
        for (int i = 2; i <= scan_points; ++i) {
            const double t = -1.0 + i * h;
            const double v = det_along_hat(t, f, d, k);
            if ((v_prev < 0) != (v < 0)) {
                const double tm = 0.5 * (t + t_prev), wm = 1.0 - tm * tm;
                const double branch = f * f * wm - tm / std::sqrt(wm) - d * k * k;
                ++counts[{k, branch >= 0 ? 1 : -1}];
            }
            t_prev = t;
            v_prev = v;
        }
    }
    return counts;
}

Outcome criterion10() {
    Outcome o;
    struct Set {
        std::string label;
        double f, d;
    };
    std::vector<Set> sets{{"f=1.6 d=0.1", 1.6, 0.1}, {"f=2 d=-0.1", 2.0, -0.1}};
    // the bar-mode parameter sets enter through the forcing of each tabulated point
    for (const auto& r : bar_zeta0) sets.push_back({"d=0.1 f=" + num(r.param) + " (zeta=0 table)", r.param, 0.1});
    for (const auto& r : bar_zeta10) sets.push_back({"d=-0.2 f=" + num(r.param) + " (zeta=10 table)", r.param, -0.2});
    int agreeing = 0, roots = 0;
    for (const auto& s : sets) {
        const auto cands = enumerate_bifpoints_hat(s.f, s.d);
        std::map<std::pair<int, int>, int> enumerated;
        for (const auto& c : cands) ++enumerated[{c.k, c.sigma}];
        const int kmax = static_cast<int>(std::ceil(2.0 * bounds_report({s.d, 0.0, s.f}).khat)) + 2;
        const auto scanned = scan_roots(s.f, s.d, kmax);
        const bool same = scanned == enumerated;
        if (same) ++agreeing;
        roots += static_cast<int>(cands.size());
        if (!same) {
            std::string diff;
            std::set<std::pair<int, int>> keys;
            for (const auto& [key, _] : scanned) keys.insert(key);
            for (const auto& [key, _] : enumerated) keys.insert(key);
            for (const auto& key : keys) {
                const int a = scanned.count(key) ? scanned.at(key) : 0;
                const int b = enumerated.count(key) ? enumerated.at(key) : 0;
                if (a != b)
                    diff += " (k=" + std::to_string(key.first) + ", sigma=" + std::to_string(key.second) +
                            "): scan " + std::to_string(a) + " vs enumerator " + std::to_string(b) + ";";
            }
            o.require(false, s.label + diff);
        }
    }
    o.note(std::to_string(agreeing) + "/" + std::to_string(sets.size()) + " parameter sets agree, " +
           std::to_string(roots) + " roots, " + std::to_string(scan_points) + " scan points per mode");
    return o;
}

} // namespace

int main(int argc, char** argv) {
    configure_allocator();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"bar-mode bifurcation tables", criterion1},
        {"hat-mode bifurcation tables with (S) and (T)", criterion2},
        {"counting bounds over random (f, d)", criterion3},
        {"kernel and eigenvector consistency", criterion4},
        {"same-k returns of the zeta = 0 branches", criterion5},
        {"soliton turning points at f = 2, d = -0.1", criterion6},
        {"solution identities and a priori bounds", criterion7},
        {"splitting order", criterion8},
        {"dynamic detuning", criterion9},
        {"enumerator against brute-force scan", criterion10},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs);
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
