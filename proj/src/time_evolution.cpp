#include "llcomb/time_evolution.hpp"

#include "llcomb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>

namespace llcomb {

namespace {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

CVec to_complex(const FieldState& u) {
    const int n = u.n();
    CVec a(n);
    for (int j = 0; j < n; ++j) a[j] = {u.u[j], u.u[n + j]};
    return a;
}

FieldState from_complex(const Grid& g, const CVec& a) {
    const int n = g.size();
    Eigen::VectorXd u(2 * n);
    for (int j = 0; j < n; ++j) {
        u[j] = a[j].real();
        u[n + j] = a[j].imag();
    }
    return {g, std::move(u)};
}

void analyze(const Grid& g, CVec& a) { g.analyze_complex(reinterpret_cast<double*>(a.data())); }
void synthesize(const Grid& g, CVec& a) { g.synthesize_complex(reinterpret_cast<double*>(a.data())); }

void rotate(CVec& a, double tau) {
    for (auto& z : a) z *= std::polar(1.0, std::norm(z) * tau);
}

// Affine flow of mode 0: a0 -> e a0 + g with c = damping + i zeta.
struct ModeZeroFlow {
    cplx e;
    cplx g;
};

ModeZeroFlow mode_zero_flow(double damping, double zeta, double f, double tau) {
    const cplx c(damping, zeta);
    const cplx e = std::exp(-c * tau);
    // variation of constants; the limit c -> 0 gives f tau
    const cplx g = std::abs(c) * std::abs(tau) < 1e-8 ? cplx(f * tau) * (1.0 - 0.5 * c * tau) : f * (1.0 - e) / c;
    return {e, g};
}

// Linear half-step operators in coefficient space for a fixed dt. The zeta-independent
// mode factors are precomputed; zeta enters as one scalar phase per half-step.
class LinearFlow {
public:
    LinearFlow(int n, double dt, double d, double f, bool damping)
        : h_(0.5 * dt), f_(f), damping_(damping ? 1.0 : 0.0), half_(n), full_(n) {
        for (int m = 0; m < n; ++m) {
            half_[m] = std::exp(-cplx(damping_, d * m * m) * h_);
            full_[m] = half_[m] * half_[m];
        }
    }

    void half(CVec& c, double zeta) const {
        const cplx ph = std::polar(1.0, -zeta * h_);
        const ModeZeroFlow z = mode_zero_flow(damping_, zeta, f_, h_);
        c[0] = z.e * c[0] + z.g;
        for (std::size_t m = 1; m < c.size(); ++m) c[m] *= half_[m] * ph;
    }

    // half(zb) after half(za)
    void fused(CVec& c, double za, double zb) const {
        const cplx ph = std::polar(1.0, -(za + zb) * h_);
        const ModeZeroFlow a = mode_zero_flow(damping_, za, f_, h_);
        const ModeZeroFlow b = mode_zero_flow(damping_, zb, f_, h_);
        c[0] = b.e * (a.e * c[0] + a.g) + b.g;
        for (std::size_t m = 1; m < c.size(); ++m) c[m] *= full_[m] * ph;
    }

private:
    double h_, f_, damping_;
    CVec half_, full_;
};

bool all_finite(const CVec& a) {
    return std::all_of(a.begin(), a.end(), [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

} // namespace

RampSchedule::RampSchedule(std::vector<std::pair<double, double>> knots, double total_time)
    : knots_(std::move(knots)), total_(total_time) {
    if (!(total_ > 0.0) || !std::isfinite(total_)) throw PreconditionError("ramp total time must be positive");
    if (knots_.empty()) throw PreconditionError("ramp needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i].first) || !std::isfinite(knots_[i].second))
            throw PreconditionError("ramp knots must be finite");
        if (i > 0 && !(knots_[i].first > knots_[i - 1].first))
            throw PreconditionError("ramp knots must be strictly increasing in t");
    }
}

RampSchedule RampSchedule::constant(double zeta, double total_time) { return {{{0.0, zeta}}, total_time}; }

RampSchedule RampSchedule::soliton_capture(double total_time, double zeta0, double zeta1) {
    return {{{0.0, zeta0}, {total_time / 30.0, zeta0}, {total_time / 3.0, zeta1}, {total_time, zeta1}}, total_time};
}

double RampSchedule::operator()(double t) const noexcept {
    if (t <= knots_.front().first) return knots_.front().second;
    if (t >= knots_.back().first) return knots_.back().second;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                     [](double v, const std::pair<double, double>& k) { return v < k.first; });
    const auto& [t1, z1] = *it;
    const auto& [t0, z0] = *(it - 1);
    return z0 + (z1 - z0) * (t - t0) / (t1 - t0);
}

FieldState linear_substep(const FieldState& u, double tau, const Parameters& p, const SplitOptions& opt) {
    validate(p);
    const Grid& g = u.grid;
    const double damping = opt.damping ? 1.0 : 0.0;
    CVec a = to_complex(u);
    analyze(g, a);
    const ModeZeroFlow z = mode_zero_flow(damping, p.zeta, p.f, tau);
    a[0] = z.e * a[0] + z.g;
    for (std::size_t m = 1; m < a.size(); ++m)
        a[m] *= std::exp(-cplx(damping, p.zeta + p.d * static_cast<double>(m * m)) * tau);
    synthesize(g, a);
    return from_complex(g, a);
}

FieldState nonlinear_substep(const FieldState& u, double tau) {
    CVec a = to_complex(u);
    rotate(a, tau);
    return from_complex(u.grid, a);
}

FieldState strang_step(const FieldState& u, double dt, const Parameters& p, const SplitOptions& opt) {
    if (!std::isfinite(dt) || dt == 0.0) throw PreconditionError("strang_step: dt must be finite and nonzero");
    if (dt < 0.0 && (opt.damping || p.f != 0.0))
        throw PreconditionError("strang_step: negative dt only for the conservative core (no damping, f = 0)");
    validate(p);
    const Grid& g = u.grid;
    const LinearFlow lin(g.size(), dt, p.d, p.f, opt.damping);
    CVec a = to_complex(u);
    analyze(g, a);
    lin.half(a, p.zeta);
    synthesize(g, a);
    rotate(a, dt);
    analyze(g, a);
    lin.half(a, p.zeta);
    synthesize(g, a);
    return from_complex(g, a);
}

std::string_view to_string(EvolveStatus s) noexcept {
    switch (s) {
    case EvolveStatus::completed: return "completed";
    case EvolveStatus::blow_up: return "blow_up";
    }
    return "unknown";
}

Trajectory evolve(const FieldState& u0, const RampSchedule& ramp, const Parameters& p, const EvolveOptions& opt) {
    validate(p);
    const double T = ramp.total_time();
    const double dt = opt.dt;
    if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("evolve: dt must be positive");
    if (opt.sample_every < 1) throw PreconditionError("evolve: sample_every must be at least 1");
    if (opt.snapshot_every < 0) throw PreconditionError("evolve: snapshot_every must be nonnegative");
    if (!(opt.noise_amp >= 0.0)) throw PreconditionError("evolve: noise amplitude must be nonnegative");
    const long long steps = std::llround(T / dt);
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * std::max(1.0, T))
        throw PreconditionError("evolve: total time " + std::to_string(T) + " is not a whole number of steps of " +
                                std::to_string(dt));

    const Grid& g = u0.grid;
    CVec a = to_complex(u0);
    if (opt.noise_amp > 0.0) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> uni(-opt.noise_amp, opt.noise_amp);
        for (auto& z : a) {
            const double re = uni(rng);
            z += cplx(re, uni(rng));
        }
    }

    Trajectory tr;
    int samples = 0;
    auto record = [&](double t, double zeta) {
        FieldState s = from_complex(g, a);
        tr.times.push_back(t);
        tr.zetas.push_back(zeta);
        tr.l2norms.push_back(l2norm(s));
        if (opt.observer) opt.observer(t, zeta, s);
        if (opt.snapshot_every > 0 && samples % opt.snapshot_every == 0) tr.snapshots.emplace_back(t, s);
        ++samples;
        tr.final_state = std::move(s);
        tr.final_time = t;
    };
    if (!all_finite(a)) {
        tr.status = EvolveStatus::blow_up;
        tr.final_state = u0;
        return tr;
    }
    record(0.0, ramp(0.0));

    const LinearFlow lin(g.size(), dt, p.d, p.f, opt.split.damping);
    auto zeta_of_step = [&](long long j) { return ramp((static_cast<double>(j) + 0.5) * dt); };

    // the closing half-step of step j is fused with the opening half-step of step j + 1
    analyze(g, a);
    lin.half(a, zeta_of_step(0));
    synthesize(g, a);
    for (long long j = 0; j < steps; ++j) {
        rotate(a, dt);
        analyze(g, a);
        const long long done = j + 1;
        const bool sample = done % opt.sample_every == 0 || done == steps;
        if (!sample) {
            lin.fused(a, zeta_of_step(j), zeta_of_step(j + 1));
            synthesize(g, a);
            continue;
        }
        lin.half(a, zeta_of_step(j));
        synthesize(g, a);
        if (!all_finite(a)) {
            tr.status = EvolveStatus::blow_up;
            return tr;
        }
        const double t = done == steps ? T : static_cast<double>(done) * dt;
        record(t, ramp(t));
        if (done < steps) {
            analyze(g, a);
            lin.half(a, zeta_of_step(done));
            synthesize(g, a);
        }
    }
    return tr;
}

void DriftMonitor::operator()(double t, double, const FieldState& s) {
    if (t >= t_from_) kept_.push_back(s);
}

double DriftMonitor::drift(const FieldState& last) const {
    double worst = 0.0;
    for (const FieldState& s : kept_) {
        if (s.n() != last.n()) throw PreconditionError("DriftMonitor: grid mismatch");
        const FieldState diff(last.grid, s.u - last.u);
        worst = std::max(worst, l2norm(diff));
    }
    return worst;
}

std::vector<std::pair<int, double>> spectrum(const FieldState& u) {
    const Eigen::VectorXd c1 = cosine_coefficients(u.grid, u.a1());
    const Eigen::VectorXd c2 = cosine_coefficients(u.grid, u.a2());
    std::vector<std::pair<int, double>> out;
    out.reserve(c1.size());
    for (Eigen::Index k = 0; k < c1.size(); ++k) {
        double amp = std::hypot(c1[k], c2[k]);
        if (k > 0) amp *= 0.5;
        out.emplace_back(static_cast<int>(k), std::log(std::max(amp, 1e-300)));
    }
    return out;
}

} // namespace llcomb
