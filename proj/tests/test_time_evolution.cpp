#include "doctest.h"

#include "llcomb/errors.hpp"
#include "llcomb/time_evolution.hpp"

#include <cmath>
#include <complex>
#include <limits>

using namespace llcomb;

namespace {

using cplx = std::complex<double>;

// classical RK4 for z' = rhs(z) over [0, tau]
template <class F>
cplx rk4(F rhs, cplx z, double tau, int steps = 4000) {
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        const cplx k1 = rhs(z);
        const cplx k2 = rhs(z + 0.5 * h * k1);
        const cplx k3 = rhs(z + 0.5 * h * k2);
        const cplx k4 = rhs(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

cplx mode(const FieldState& s, int k) {
    const Eigen::VectorXd c1 = cosine_coefficients(s.grid, s.a1());
    const Eigen::VectorXd c2 = cosine_coefficients(s.grid, s.a2());
    return {c1[k], c2[k]};
}

FieldState pulse(const Grid& g) {
    return FieldState::from_functions(
        g, [](double x) { return 0.8 + 1.5 / std::cosh(3.0 * x); }, [](double x) { return -0.3 + 0.4 * std::cos(x); });
}

double l2_distance(const FieldState& a, const FieldState& b) { return l2norm(FieldState(a.grid, a.u - b.u)); }

} // namespace

TEST_CASE("ramp schedule") {
    const auto r = RampSchedule::soliton_capture(1000.0, -5.0, 2.67);
    CHECK(r.total_time() == 1000.0);
    CHECK(r(0.0) == -5.0);
    CHECK(r(1000.0 / 30) == doctest::Approx(-5.0));
    CHECK(r(1000.0 / 3) == doctest::Approx(2.67));
    CHECK(r(800.0) == 2.67);
    const double tm = 0.5 * (1000.0 / 30 + 1000.0 / 3);
    CHECK(r(tm) == doctest::Approx(0.5 * (-5.0 + 2.67)));
    // continuity across every knot
    for (const auto& [t, z] : r.knots()) {
        CHECK(r(t - 1e-9) == doctest::Approx(z).epsilon(1e-8));
        CHECK(r(t + 1e-9) == doctest::Approx(z).epsilon(1e-8));
    }
    CHECK(RampSchedule::constant(1.5, 10.0)(7.0) == 1.5);
    CHECK_THROWS_AS(RampSchedule({{0.0, 1.0}, {0.0, 2.0}}, 1.0), PreconditionError);
    CHECK_THROWS_AS(RampSchedule({{1.0, 1.0}, {0.5, 2.0}}, 1.0), PreconditionError);
    CHECK_THROWS_AS(RampSchedule({{0.0, 1.0}}, 0.0), PreconditionError);
    CHECK_THROWS_AS(RampSchedule({}, 1.0), PreconditionError);
}

TEST_CASE("zero state without forcing stays zero") {
    const Grid g(32);
    const FieldState zero = FieldState::constant(g, 0.0, 0.0);
    for (double dt : {1e-3, 0.1, 2.0}) {
        const FieldState s = strang_step(zero, dt, {0.1, 2.0, 0.0});
        CHECK(s.u.lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("nonlinear substep keeps the modulus at every node") {
    const Grid g(64);
    const FieldState u = pulse(g);
    const FieldState v = nonlinear_substep(u, 0.37);
    double worst = 0.0;
    for (int j = 0; j < g.size(); ++j)
        worst = std::max(worst, std::abs(std::hypot(v.a1()[j], v.a2()[j]) - std::hypot(u.a1()[j], u.a2()[j])));
    CHECK(worst < 1e-14);
    // the phase advance is |a|^2 tau
    const double j0 = std::arg(cplx(v.a1()[0], v.a2()[0]) / cplx(u.a1()[0], u.a2()[0]));
    CHECK(j0 == doctest::Approx(std::norm(cplx(u.a1()[0], u.a2()[0])) * 0.37));
}

TEST_CASE("linear substep matches the scalar mode equation") {
    const Grid g(32);
    SUBCASE("mode 1, d = 1, zeta = 0, f = 0") {
        const FieldState u = FieldState::from_functions(g, [](double x) { return std::cos(x); }, [](double) { return 0.0; });
        const double dt = 0.01;
        const FieldState v = linear_substep(u, 0.5 * dt, {1.0, 0.0, 0.0});
        CHECK(std::abs(mode(v, 1)) == doctest::Approx(std::exp(-0.5 * dt)).epsilon(1e-13));
        const cplx ode = rk4([](cplx z) { return -cplx(1.0, 1.0) * z; }, 1.0, 0.5 * dt);
        CHECK(std::abs(mode(v, 1) - ode) < 1e-12);
        for (int k = 0; k < g.size(); ++k)
            if (k != 1) CHECK(std::abs(mode(v, k)) < 1e-14);
    }
    SUBCASE("mode 4 with detuning") {
        const Parameters p{-0.3, 1.7, 0.0};
        const FieldState u = FieldState::from_functions(
            g, [](double x) { return 0.5 * std::cos(4 * x); }, [](double x) { return -0.2 * std::cos(4 * x); });
        const double tau = 0.8;
        const FieldState v = linear_substep(u, tau, p);
        const cplx ode = rk4([&](cplx z) { return -cplx(1.0, p.zeta + p.d * 16) * z; }, cplx(0.5, -0.2), tau);
        CHECK(std::abs(mode(v, 4) - ode) < 1e-10);
    }
    SUBCASE("mode 0 forcing by variation of constants") {
        const Parameters p{0.1, -2.5, 1.6};
        const FieldState u = FieldState::constant(g, 0.3, -0.4);
        const double tau = 1.3;
        const FieldState v = linear_substep(u, tau, p);
        const cplx ode = rk4([&](cplx z) { return -cplx(1.0, p.zeta) * z + p.f; }, cplx(0.3, -0.4), tau);
        CHECK(std::abs(mode(v, 0) - ode) < 1e-10);
        CHECK(std::abs(v.a1()[5] - ode.real()) < 1e-10);
    }
    SUBCASE("mode 0 forcing without damping or detuning grows linearly") {
        SplitOptions opt;
        opt.damping = false;
        const FieldState v = linear_substep(FieldState::constant(g, 0.0, 0.0), 0.25, {0.1, 0.0, 2.0}, opt);
        CHECK(v.a1()[3] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::abs(v.a2()[3]) < 1e-15);
    }
}

TEST_CASE("damped linear flow without forcing decays as exp(-t)") {
    const Grid g(64);
    const FieldState u = pulse(g);
    for (double t : {0.1, 1.0, 3.0}) {
        const FieldState v = linear_substep(u, t, {0.1, 2.67, 0.0});
        CHECK(l2norm(v) == doctest::Approx(std::exp(-t) * l2norm(u)).epsilon(1e-12));
    }
}

TEST_CASE("conservative core is time reversible") {
    const Grid g(64);
    const FieldState u = pulse(g);
    SplitOptions opt;
    opt.damping = false;
    const Parameters p{0.1, 2.67, 0.0};
    const double dt = 0.01;
    const FieldState back = strang_step(strang_step(u, dt, p, opt), -dt, p, opt);
    CHECK((back.u - u.u).lpNorm<Eigen::Infinity>() < 1e-10);
    // negative steps are refused with damping or forcing
    CHECK_THROWS_AS(strang_step(u, -dt, p), PreconditionError);
    CHECK_THROWS_AS(strang_step(u, -dt, {0.1, 2.67, 1.0}, opt), PreconditionError);
    CHECK_THROWS_AS(strang_step(u, 0.0, p), PreconditionError);
}

TEST_CASE("fused stepping in evolve equals repeated Strang steps") {
    const Grid g(64);
    const FieldState u = pulse(g);
    const Parameters p{0.1, 0.0, 1.6};
    const RampSchedule ramp({{0.0, -1.0}, {0.2, 2.0}}, 0.2);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.sample_every = 7;
    const Trajectory tr = evolve(u, ramp, p, opt);
    FieldState s = u;
    for (int j = 0; j < 20; ++j) s = strang_step(s, opt.dt, {p.d, ramp((j + 0.5) * opt.dt), p.f});
    CHECK((tr.final_state.u - s.u).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(tr.final_time == doctest::Approx(0.2));
    // samples at 0, 0.07, 0.14 and the final time
    REQUIRE(tr.times.size() == 4);
    CHECK(tr.times[1] == doctest::Approx(0.07));
    CHECK(tr.times.back() == doctest::Approx(0.2));
    CHECK(tr.zetas[1] == doctest::Approx(ramp(0.07)));
}

TEST_CASE("splitting is second order on a smooth pulse") {
    const Grid g(64);
    const FieldState u = pulse(g);
    const Parameters p{0.1, 2.67, 1.6};
    const RampSchedule ramp = RampSchedule::constant(2.67, 1.0);
    auto run = [&](double dt) {
        EvolveOptions opt;
        opt.dt = dt;
        opt.sample_every = 1000000;
        return evolve(u, ramp, p, opt).final_state;
    };
    const FieldState ref = run(1e-3 / 16);
    const double e1 = l2_distance(run(4e-3), ref), e2 = l2_distance(run(2e-3), ref), e3 = l2_distance(run(1e-3), ref);
    CHECK(std::log2(e1 / e2) >= 1.9);
    CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("stable constant steady state stays stationary") {
    const Grid g(64);
    const auto cs = constant_solutions(-5.0, 1.6);
    REQUIRE(cs.size() == 1);
    const FieldState u0 = FieldState::constant(g, cs[0].a1, cs[0].a2);
    EvolveOptions opt;
    opt.dt = 1e-3;
    opt.sample_every = 100;
    opt.noise_amp = 1e-14;
    opt.seed = 7;
    const Trajectory tr = evolve(u0, RampSchedule::constant(-5.0, 10.0), {0.1, -5.0, 1.6}, opt);
    const double l20 = l2norm(u0);
    double drift = 0.0;
    for (double v : tr.l2norms) drift = std::max(drift, std::abs(v - l20));
    CHECK(drift < 1e-6);
    CHECK(tr.status == EvolveStatus::completed);
}

TEST_CASE("evolve is deterministic per seed and samples inside [0, T]") {
    const Grid g(32);
    const FieldState u0 = FieldState::constant(g, 0.5, -0.2);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.sample_every = 10;
    opt.snapshot_every = 2;
    opt.noise_amp = 1e-3;
    opt.seed = 11;
    int observed = 0;
    opt.observer = [&](double, double, const FieldState&) { ++observed; };
    const RampSchedule ramp = RampSchedule::soliton_capture(1.0);
    const Trajectory a = evolve(u0, ramp, {0.1, 0.0, 1.6}, opt);
    const Trajectory b = evolve(u0, ramp, {0.1, 0.0, 1.6}, opt);
    opt.seed = 12;
    const Trajectory c = evolve(u0, ramp, {0.1, 0.0, 1.6}, opt);
    CHECK(a.final_state.u == b.final_state.u);
    CHECK(a.final_state.u != c.final_state.u);
    CHECK(observed == 3 * static_cast<int>(a.times.size()));
    CHECK(a.times.size() == 11);
    CHECK(a.snapshots.size() == 6);
    for (double t : a.times) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
    for (double v : a.l2norms) CHECK(std::isfinite(v));
}

TEST_CASE("evolve preconditions and blow-up") {
    const Grid g(32);
    const FieldState u0 = FieldState::constant(g, 0.5, -0.2);
    EvolveOptions opt;
    opt.dt = 0.3;
    CHECK_THROWS_AS(evolve(u0, RampSchedule::constant(0.0, 1.0), {0.1, 0.0, 1.0}, opt), PreconditionError);
    opt.dt = 0.1;
    opt.sample_every = 0;
    CHECK_THROWS_AS(evolve(u0, RampSchedule::constant(0.0, 1.0), {0.1, 0.0, 1.0}, opt), PreconditionError);
    opt.sample_every = 1;
    FieldState bad = u0;
    bad.u[3] = std::numeric_limits<double>::quiet_NaN();
    const Trajectory tr = evolve(bad, RampSchedule::constant(0.0, 1.0), {0.1, 0.0, 1.0}, opt);
    CHECK(tr.status == EvolveStatus::blow_up);
    CHECK(tr.times.empty());
}

TEST_CASE("spectrum of single modes") {
    const Grid g(64);
    const auto s3 = spectrum(FieldState::from_functions(g, [](double x) { return std::cos(3 * x); }, [](double) { return 0.0; }));
    REQUIRE(s3.size() == 64);
    CHECK(s3[3].first == 3);
    CHECK(s3[3].second == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    for (const auto& [k, v] : s3)
        if (k != 3) CHECK(v < std::log(1e-12));
    const auto s0 = spectrum(FieldState::constant(g, 0.6, 0.8));
    CHECK(s0[0].second == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& [k, v] : s0)
        if (k != 0) CHECK(v < std::log(1e-12));
}
