#pragma once

// Closed-form mathematics of the stationary Lugiato-Lefever system
//
//   -d a1'' = -a2 - zeta a1 + (a1^2 + a2^2) a1
//   -d a2'' =  a1 - zeta a2 + (a1^2 + a2^2) a2 - f
//
// on [0, pi] with Neumann conditions: the two curves of constant solutions,
// a priori bounds, and the enumeration of all bifurcation points on those
// curves together with their kernel directions and simplicity/transversality
// flags.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace llcomb {

/// Which trivial curve is used. `hat`: f fixed, zeta is the branch parameter,
/// coordinate t in (-1, 1). `bar`: zeta fixed, f is the branch parameter,
/// coordinate s in R.
enum class Mode { hat, bar };

std::string_view to_string(Mode mode) noexcept;
Mode mode_from_string(std::string_view name);

struct Parameters {
    double d = 0.1;     ///< dispersion, nonzero
    double zeta = 0.0;  ///< detuning
    double f = 0.0;     ///< forcing
};

/// Throws PreconditionError when d == 0 or a value is not finite.
void validate(const Parameters& p);

/// Value of the active continuation parameter (zeta in hat mode, f in bar mode).
double active_param(const Parameters& p, Mode mode) noexcept;
Parameters with_active_param(Parameters p, Mode mode, double value) noexcept;

inline int sign_of(double x) noexcept { return (x > 0) - (x < 0); }

/// A point on one of the trivial curves. `zeta` and `f` are the parameter
/// values at which (a1, a2) is a constant solution; one of them is induced by
/// the coordinate.
struct ConstantState {
    double a1 = 0.0;
    double a2 = 0.0;
    double coord = 0.0;
    Mode mode = Mode::hat;
    double zeta = 0.0;
    double f = 0.0;

    double abs2() const noexcept { return a1 * a1 + a2 * a2; }
};

/// Point of the f-fixed trivial curve at coordinate t. Throws DomainError for |t| >= 1.
ConstantState trivial_hat(double t, double f, double d);

/// Point of the zeta-fixed trivial curve at coordinate s.
ConstantState trivial_bar(double s, double zeta);

/// Derivative of the induced detuning with respect to t.
double trivial_hat_dzeta(double t, double f);

/// f^2 - |a|^2 (1 + (|a|^2 - zeta)^2); zero for every constant solution.
double constant_identity_defect(double a1, double a2, double zeta, double f) noexcept;

/// Right-hand side minus left-hand side of the stationary system at a constant state.
std::array<double, 2> constant_residual(double a1, double a2, double zeta, double f) noexcept;

/// All constant solutions at fixed (zeta, f), ordered by |a|^2. One or three states.
std::vector<ConstantState> constant_solutions(double zeta, double f);

struct BoundsReport {
    double gamma = 0.0;
    double linf_bound = 0.0;
    double zeta_star_lo = 0.0;
    double zeta_star_hi = 0.0;
    double khat = 0.0;
    std::optional<double> kbar;  ///< only for d < 0

    /// True when sign(d) * zeta lies in [zeta_star_lo, zeta_star_hi].
    bool admits_nonconstant(double d, double zeta, double slack = 0.0) const noexcept;
};

BoundsReport bounds_report(const Parameters& p);

/// Left-hand side of the kernel condition
/// (zeta + d k^2)^2 - 4|a|^2 (zeta + d k^2) + 1 + 3|a|^4.
/// It equals det(d k^2 I - N(a, zeta)).
double kernel_condition(std::array<double, 2> a, double zeta, double d, int k) noexcept;

/// Pointwise linearization matrix N(a, zeta), row major.
std::array<double, 4> linearization_matrix(std::array<double, 2> a, double zeta) noexcept;

struct KernelPair {
    std::array<double, 2> alpha{};  ///< kernel direction: phi(x) = alpha cos(kx)
    std::array<double, 2> beta{};   ///< adjoint kernel direction
};

/// Kernel vectors of d k^2 I - N(a, zeta) and its transpose.
/// Throws PreconditionError unless kernel_condition(a, zeta, d, k) is close to zero.
KernelPair kernel_vectors(std::array<double, 2> a, double zeta, double d, int k);

/// max(|(dk^2 I - N) alpha|, |(dk^2 I - N)^T beta|).
double kernel_residual(const KernelPair& kp, std::array<double, 2> a, double zeta, double d, int k) noexcept;

struct BifurcationCandidate {
    Mode mode = Mode::hat;
    int k = 1;
    int sigma = 1;
    double coord = 0.0;   ///< t (hat) or s (bar)
    double param = 0.0;   ///< induced zeta (hat) or f (bar)
    bool s_ok = false;    ///< simple kernel
    bool t_ok = false;    ///< transversal crossing
    bool marginal = false;
    bool tangential = false;  ///< double root of the hat-mode equation
    bool turning_point = false;  ///< k == 0: fold of the trivial curve, not a bifurcation
    double s_expr = 0.0;  ///< value whose distance to the squares j^2 decides (S)
    double t_expr = 0.0;  ///< smallest |.| among the transversality expressions
    ConstantState state;
    KernelPair kernel;

    bool switchable() const noexcept { return k >= 1 && s_ok && t_ok; }
};

struct EnumerationOptions {
    int grid_points = 10000;
    double root_tol = 1e-12;
    double tangential_tol = 1e-8;
    double equality_tol = 1e-9;
    double marginal_tol = 1e-6;
    bool include_k0 = false;
    int k_max = 64;  ///< window for the bar curve with d > 0 (infinitely many points exist)
};

/// Hat-mode bifurcation points for fixed f. Empty when |f| < 1.
std::vector<BifurcationCandidate> enumerate_bifpoints_hat(double f, double d,
                                                          const EnumerationOptions& opt = {});

/// Bar-mode bifurcation points (s > 0) for fixed zeta.
std::vector<BifurcationCandidate> enumerate_bifpoints_bar(double zeta, double d,
                                                          const EnumerationOptions& opt = {});

/// The function whose roots in t are the hat-mode candidates for (k, sigma):
/// f^2 (1-t^2) - t / sqrt(1-t^2) - sigma sqrt(max(0, f^4 (1-t^2)^2 - 1)) - d k^2.
double hat_bifurcation_function(double t, double f, double d, int k, int sigma) noexcept;

/// Largest |t| admissible for hat-mode bifurcation: sqrt(1 - f^-2); NaN when |f| < 1.
double hat_admissible_t(double f) noexcept;

/// Residual of the kernel condition at a candidate.
double candidate_residual(const BifurcationCandidate& c, double d) noexcept;

/// Parameter set of the candidate's trivial state.
Parameters candidate_parameters(const BifurcationCandidate& c, double d) noexcept;

} // namespace llcomb
