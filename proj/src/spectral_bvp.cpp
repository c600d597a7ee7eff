#include "llcomb/spectral_bvp.hpp"

#include "llcomb/eigen_tools.hpp"
#include "llcomb/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace llcomb {

namespace {

constexpr double pi = std::numbers::pi;

std::span<const double> cspan(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mspan(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

struct Cubic {
    Eigen::VectorXd c1, c2;  // coarse-grid values of the dealiased |a|^2 a
};

// Dealiased products: interpolate to the padded grid, multiply, truncate back.
Cubic cubic_term(const Grid& g, const Eigen::VectorXd& a1, const Eigen::VectorXd& a2) {
    const int n = g.size();
    Cubic out;
    if (!g.dealiased()) {
        const Eigen::ArrayXd q = a1.array().square() + a2.array().square();
        out.c1 = (q * a1.array()).matrix();
        out.c2 = (q * a2.array()).matrix();
        return out;
    }
    const int m = g.padded_size();
    Eigen::VectorXd k1(m), k2(m), A1(m), A2(m);
    k1.setZero();
    k2.setZero();
    g.analyze(cspan(a1), std::span<double>(k1.data(), n));
    g.analyze(cspan(a2), std::span<double>(k2.data(), n));
    g.synthesize_padded(cspan(k1), mspan(A1));
    g.synthesize_padded(cspan(k2), mspan(A2));
    const Eigen::ArrayXd q = A1.array().square() + A2.array().square();
    A1 = (q * A1.array()).matrix();
    A2 = (q * A2.array()).matrix();
    g.analyze_padded(cspan(A1), mspan(k1));
    g.analyze_padded(cspan(A2), mspan(k2));
    out.c1.resize(n);
    out.c2.resize(n);
    g.synthesize(std::span<const double>(k1.data(), n), mspan(out.c1));
    g.synthesize(std::span<const double>(k2.data(), n), mspan(out.c2));
    return out;
}

Eigen::VectorXd second_derivative(const Grid& g, const Eigen::VectorXd& v) {
    const int n = g.size();
    Eigen::VectorXd c(n), out(n);
    g.analyze(cspan(v), mspan(c));
    for (int k = 0; k < n; ++k) c[k] *= -static_cast<double>(k) * k;
    g.synthesize(cspan(c), mspan(out));
    return out;
}

// Values of both components on the padded grid (the coarse grid when not dealiased).
std::pair<Eigen::VectorXd, Eigen::VectorXd> padded_values(const FieldState& s) {
    const Grid& g = s.grid;
    if (!g.dealiased()) return {s.a1(), s.a2()};
    const int n = g.size(), m = g.padded_size();
    Eigen::VectorXd k1 = Eigen::VectorXd::Zero(m), k2 = Eigen::VectorXd::Zero(m), A1(m), A2(m);
    const Eigen::VectorXd a1 = s.a1(), a2 = s.a2();
    g.analyze(cspan(a1), std::span<double>(k1.data(), n));
    g.analyze(cspan(a2), std::span<double>(k2.data(), n));
    g.synthesize_padded(cspan(k1), mspan(A1));
    g.synthesize_padded(cspan(k2), mspan(A2));
    return {A1, A2};
}

} // namespace

FieldState::FieldState(Grid g, Eigen::VectorXd values) : grid(std::move(g)), u(std::move(values)) {
    if (u.size() != 2 * grid.size())
        throw PreconditionError("field vector has length " + std::to_string(u.size()) + ", expected " +
                                std::to_string(2 * grid.size()));
}

FieldState FieldState::constant(const Grid& g, double a1, double a2) {
    Eigen::VectorXd u(2 * g.size());
    u.head(g.size()).setConstant(a1);
    u.tail(g.size()).setConstant(a2);
    return {g, std::move(u)};
}

FieldState FieldState::from_functions(const Grid& g, const std::function<double(double)>& a1,
                                      const std::function<double(double)>& a2) {
    const int n = g.size();
    Eigen::VectorXd u(2 * n);
    for (int j = 0; j < n; ++j) {
        u[j] = a1(g.x(j));
        u[n + j] = a2(g.x(j));
    }
    return {g, std::move(u)};
}

Eigen::VectorXd cosine_coefficients(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& values) {
    Eigen::VectorXd c(g.size());
    g.analyze(std::span<const double>(values.data(), values.size()), mspan(c));
    return c;
}

Eigen::VectorXd from_cosine_coefficients(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    Eigen::VectorXd v(g.size());
    g.synthesize(std::span<const double>(coeffs.data(), coeffs.size()), mspan(v));
    return v;
}

double inner_product(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& v,
                     const Eigen::Ref<const Eigen::VectorXd>& w) {
    const Eigen::VectorXd cv = cosine_coefficients(g, v), cw = cosine_coefficients(g, w);
    // int_0^pi cos^2(kx) dx = pi/2 for k >= 1 and pi for k = 0
    return pi * (cv[0] * cw[0] + 0.5 * cv.tail(cv.size() - 1).dot(cw.tail(cw.size() - 1)));
}

double l2norm(const FieldState& s) {
    return std::sqrt(inner_product(s.grid, s.a1(), s.a1()) + inner_product(s.grid, s.a2(), s.a2()));
}

double linf_norm(const FieldState& s) {
    return (s.a1().array().square() + s.a2().array().square()).sqrt().maxCoeff();
}

Eigen::VectorXd mode_energy(const FieldState& s) {
    const Eigen::VectorXd c1 = cosine_coefficients(s.grid, s.a1()), c2 = cosine_coefficients(s.grid, s.a2());
    return (c1.array().square() + c2.array().square()).matrix();
}

bool is_nonconstant(const FieldState& s, double tol) {
    const Eigen::VectorXd e = mode_energy(s);
    const double off = std::sqrt(e.tail(e.size() - 1).sum());
    return off > tol * (1.0 + std::sqrt(e[0]));
}

Eigen::VectorXd residual(const FieldState& s, const Parameters& p) {
    const Grid& g = s.grid;
    const int n = g.size();
    const Eigen::VectorXd a1 = s.a1(), a2 = s.a2();
    const Cubic c = cubic_term(g, a1, a2);
    Eigen::VectorXd F(2 * n);
    F.head(n) = p.d * second_derivative(g, a1) - a2 - p.zeta * a1 + c.c1;
    F.tail(n) = p.d * second_derivative(g, a2) + a1 - p.zeta * a2 + c.c2;
    F.tail(n).array() -= p.f;
    return F;
}

Eigen::MatrixXd jacobian(const FieldState& s, const Parameters& p) {
    const Grid& g = s.grid;
    const int n = g.size();
    const Eigen::MatrixXd& D2 = g.second_derivative();
    Eigen::MatrixXd J(2 * n, 2 * n);
    J.topLeftCorner(n, n) = p.d * D2;
    J.bottomRightCorner(n, n) = p.d * D2;
    J.topRightCorner(n, n).setZero();
    J.bottomLeftCorner(n, n).setZero();
    J.diagonal().array() -= p.zeta;
    J.topRightCorner(n, n).diagonal().array() -= 1.0;
    J.bottomLeftCorner(n, n).diagonal().array() += 1.0;

    const Eigen::VectorXd a1 = s.a1(), a2 = s.a2();
    if (!g.dealiased()) {
        const Eigen::ArrayXd A1 = a1.array(), A2 = a2.array();
        J.topLeftCorner(n, n).diagonal().array() += 3.0 * A1.square() + A2.square();
        J.topRightCorner(n, n).diagonal().array() += 2.0 * A1 * A2;
        J.bottomLeftCorner(n, n).diagonal().array() += 2.0 * A1 * A2;
        J.bottomRightCorner(n, n).diagonal().array() += A1.square() + 3.0 * A2.square();
        return J;
    }
    // dealiased blocks R diag(w) E, evaluated in one product
    const Eigen::MatrixXd& E = g.prolongation();
    const Eigen::MatrixXd& R = g.restriction();
    const int m = g.padded_size();
    const Eigen::ArrayXd A1 = (E * a1).array(), A2 = (E * a2).array();
    Eigen::MatrixXd W(m, 3 * n);
    W.leftCols(n) = (3.0 * A1.square() + A2.square()).matrix().asDiagonal() * E;
    W.middleCols(n, n) = (2.0 * A1 * A2).matrix().asDiagonal() * E;
    W.rightCols(n) = (A1.square() + 3.0 * A2.square()).matrix().asDiagonal() * E;
    const Eigen::MatrixXd B = R * W;
    J.topLeftCorner(n, n) += B.leftCols(n);
    J.topRightCorner(n, n) += B.middleCols(n, n);
    J.bottomLeftCorner(n, n) += B.middleCols(n, n);
    J.bottomRightCorner(n, n) += B.rightCols(n);
    return J;
}

Eigen::VectorXd residual_dzeta(const FieldState& s) { return -s.u; }

Eigen::VectorXd residual_df(const FieldState& s) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(s.u.size());
    r.tail(s.n()).setConstant(-1.0);
    return r;
}

Eigen::VectorXd residual_dparam(const FieldState& s, Mode mode) {
    return mode == Mode::hat ? residual_dzeta(s) : residual_df(s);
}

FieldState newton_solve(const FieldState& u0, const Parameters& p, const NewtonOptions& opt, NewtonReport* report) {
    validate(p);
    if (!u0.u.allFinite()) throw PreconditionError("newton_solve: initial state is not finite");
    NewtonReport rep;
    FieldState s = u0;
    Eigen::VectorXd F = residual(s, p);
    // one pass = residual check and, unless converged, one damped Newton step
    for (int it = 1;; ++it) {
        const double r = F.lpNorm<Eigen::Infinity>();
        rep.history.push_back(r);
        rep.iterations = it;
        rep.residual = r;
        if (r < opt.tol) break;
        if (it >= opt.max_iter) {
            if (report) *report = rep;
            std::ostringstream msg;
            msg << "Newton did not converge in " << it << " iterations; residual " << r;
            throw ConvergenceError(msg.str(), it, r);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(s, p));
        const double rc = lu.rcond();
        if (!(rc > opt.rcond_min)) {
            if (report) *report = rep;
            throw SingularJacobianError("Newton matrix is numerically singular (rcond " + std::to_string(rc) + ")",
                                        rc);
        }
        const Eigen::VectorXd delta = -lu.solve(F);
        const double f0 = F.norm();
        double lambda = 1.0;
        for (;;) {
            FieldState trial(s.grid, s.u + lambda * delta);
            Eigen::VectorXd Ft = residual(trial, p);
            if (Ft.allFinite() && Ft.norm() <= (1.0 - 1e-4 * lambda) * f0) {
                s = std::move(trial);
                F = std::move(Ft);
                break;
            }
            lambda *= 0.5;
            if (lambda < opt.min_step) {
                if (report) *report = rep;
                throw ConvergenceError("Newton line search failed; residual " + std::to_string(r), it, r);
            }
        }
    }
    if (report) *report = rep;
    if (opt.check_theory) {
        const ValidationReport v = validate_solution(s, p);
        if (!v.theory_ok(p.d, p.zeta)) {
            std::ostringstream msg;
            msg << "converged state contradicts the a priori bounds: |a|_inf = " << v.linf << " (bound "
                << v.linf_bound << "), nonconstant = " << v.nonconstant << ", zeta window [" << v.window_lo << ", "
                << v.window_hi << "]";
            throw TheoryViolation(msg.str());
        }
    }
    return s;
}

EigenResult eigen_indicator(const FieldState& s, const Parameters& p, int m, bool want_vectors) {
    if (m < 1 || m > 10) throw PreconditionError("eigen_indicator: m must lie in [1, 10]");
    const Eigen::MatrixXd L = -jacobian(s, p);
    SmallEigenpairs e = smallest_eigenpairs(L, m, want_vectors);
    EigenResult out;
    out.values = std::move(e.values);
    out.vectors = std::move(e.vectors);
    out.restarts = e.restarts;
    return out;
}

double signed_min_eig(const FieldState& s, const Parameters& p) {
    const Eigen::MatrixXd J = jacobian(s, p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const int sg = determinant_sign(lu);
    const SmallEigenpairs e = smallest_eigenpairs(J, 1, false);
    return (sg == 0 ? 1 : sg) * std::abs(e.values.front());
}

bool ValidationReport::window_ok(double d, double zeta) const noexcept {
    if (!nonconstant) return true;
    const double z = sign_of(d) * zeta;
    return z >= window_lo - 1e-9 && z <= window_hi + 1e-9;
}

ValidationReport validate_solution(const FieldState& s, const Parameters& p) {
    const Grid& g = s.grid;
    ValidationReport r;
    r.residual = residual(s, p).lpNorm<Eigen::Infinity>();

    const Eigen::VectorXd c1 = cosine_coefficients(g, s.a1()), c2 = cosine_coefficients(g, s.a2());
    const int n = g.size();
    auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return pi * (a[0] * b[0] + 0.5 * a.tail(n - 1).dot(b.tail(n - 1)));
    };
    const double norm2 = ip(c1, c1) + ip(c2, c2);
    double grad2 = 0.0;
    for (int k = 1; k < n; ++k) grad2 += 0.5 * pi * double(k) * k * (c1[k] * c1[k] + c2[k] * c2[k]);
    const double int_a1 = pi * c1[0], int_a2 = pi * c2[0];

    const auto [A1, A2] = padded_values(s);
    const Eigen::ArrayXd q = A1.array().square() + A2.array().square();
    const int m = static_cast<int>(q.size());
    const double h = pi / (m - 1);
    const double quart = h * ((q.square()).sum() - 0.5 * (q[0] * q[0] + q[m - 1] * q[m - 1]));

    // even extension to [0, 2pi] doubles every integral
    r.mean_identity_defect = 2.0 * (norm2 - p.f * int_a1);
    r.energy_identity_defect = 2.0 * (p.d * grad2 + p.zeta * norm2 - quart + p.f * int_a2);
    r.linf = std::sqrt(q.maxCoeff());
    const BoundsReport b = bounds_report(p);
    r.linf_bound = b.linf_bound;
    r.window_lo = b.zeta_star_lo;
    r.window_hi = b.zeta_star_hi;
    r.nonconstant = is_nonconstant(s);
    return r;
}

} // namespace llcomb
