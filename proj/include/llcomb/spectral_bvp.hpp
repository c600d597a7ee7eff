#pragma once

// Cosine-collocation discretization of the Neumann boundary value problem
//
//   F(a) = d a'' + ( -a2 - zeta a1 + |a|^2 a1,
//                     a1 - zeta a2 + |a|^2 a2 - f ) = 0   on [0, pi].
//
// The unknown vector stacks both components: u = [a1(x_0..x_{n-1}); a2(...)].

#include "llcomb/comb_model.hpp"
#include "llcomb/grid.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace llcomb {

struct FieldState {
    Grid grid;
    Eigen::VectorXd u;  ///< length 2n

    FieldState() = default;
    FieldState(Grid g, Eigen::VectorXd values);

    int n() const noexcept { return grid.size(); }
    auto a1() const { return u.head(n()); }
    auto a2() const { return u.tail(n()); }

    static FieldState constant(const Grid& g, double a1, double a2);
    static FieldState from_functions(const Grid& g, const std::function<double(double)>& a1,
                                     const std::function<double(double)>& a2);
};

/// Cosine coefficients of one component (c_k, k = 0..n-1).
Eigen::VectorXd cosine_coefficients(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& values);
Eigen::VectorXd from_cosine_coefficients(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// L2 inner product on [0, pi] of two grid functions, exact for their cosine interpolants.
double inner_product(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& v, const Eigen::Ref<const Eigen::VectorXd>& w);

/// ||a||_{L2(0,pi)} of the stacked field.
double l2norm(const FieldState& s);
double linf_norm(const FieldState& s);

/// Cosine-mode energy |c1_k|^2 + |c2_k|^2 of both components, k = 0..n-1.
Eigen::VectorXd mode_energy(const FieldState& s);

Eigen::VectorXd residual(const FieldState& s, const Parameters& p);

/// dF/du; n x n blocks [[J11, J12], [J21, J22]].
Eigen::MatrixXd jacobian(const FieldState& s, const Parameters& p);

/// Derivatives of the residual with respect to zeta and to f.
Eigen::VectorXd residual_dzeta(const FieldState& s);
Eigen::VectorXd residual_df(const FieldState& s);
Eigen::VectorXd residual_dparam(const FieldState& s, Mode mode);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 25;
    double min_step = 0x1p-20;
    double rcond_min = 1e-14;
    bool check_theory = true;  ///< throw TheoryViolation if the result contradicts the a priori bounds
};

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
};

/// Damped Newton with Armijo backtracking on the residual 2-norm. Convergence is
/// declared on the max-norm. Throws ConvergenceError or SingularJacobianError.
FieldState newton_solve(const FieldState& u0, const Parameters& p, const NewtonOptions& opt = {},
                        NewtonReport* report = nullptr);

struct EigenResult {
    std::vector<std::complex<double>> values;  ///< sorted by magnitude
    Eigen::MatrixXcd vectors;                   ///< columns match `values`; empty unless requested
    int restarts = 0;
};

/// The m smallest-magnitude eigenvalues of the linearized operator
/// phi -> -d phi'' - N(a, zeta) phi (which is -jacobian). Requires 1 <= m <= 10.
EigenResult eigen_indicator(const FieldState& s, const Parameters& p, int m, bool want_vectors = false);

/// Signed smallest eigenvalue magnitude: sign(det J) * min |lambda|. Changes sign
/// exactly when an odd number of real eigenvalues crosses zero.
double signed_min_eig(const FieldState& s, const Parameters& p);

struct ValidationReport {
    double residual = 0.0;                ///< max-norm
    double mean_identity_defect = 0.0;    ///< integral of |a|^2 - f a1 over the 2pi extension
    double energy_identity_defect = 0.0;  ///< d|a'|^2 + zeta|a|^2 - |a|_4^4 + f int a2, 2pi extension
    double linf = 0.0;
    double linf_bound = 0.0;
    bool nonconstant = false;
    double window_lo = 0.0;  ///< sign(d) zeta must lie in [window_lo, window_hi] if nonconstant
    double window_hi = 0.0;

    bool bound_ok() const noexcept { return linf <= linf_bound * (1.0 + 1e-9); }
    bool window_ok(double d, double zeta) const noexcept;
    bool theory_ok(double d, double zeta) const noexcept { return bound_ok() && window_ok(d, zeta); }
};

ValidationReport validate_solution(const FieldState& s, const Parameters& p);

/// True when the off-mean cosine content is above `tol` (relative to 1 + |mean|).
bool is_nonconstant(const FieldState& s, double tol = 1e-6);

} // namespace llcomb
