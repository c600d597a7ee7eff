#pragma once

// Pseudo-arclength continuation of nonconstant solution branches, branch
// switching at simple transversal bifurcation points of the trivial curves,
// and event detection along a branch.

#include "llcomb/comb_model.hpp"
#include "llcomb/spectral_bvp.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace llcomb {

struct BranchPoint {
    double param = 0.0;  ///< active parameter: zeta (hat) or f (bar)
    FieldState state;
    double l2norm = 0.0;
    double min_eig = 0.0;      ///< sign(det J) * smallest |eigenvalue|
    int det_sign = 0;
    Eigen::VectorXd tangent;   ///< state part of the unit tangent; may be empty
    double tangent_param = 0.0;
    double ds = 0.0;           ///< arclength step that produced this point
};

enum class EventKind { turning_point, trivial_return, secondary_bif_candidate, step_limit, ds_min_exhausted };

std::string_view to_string(EventKind kind) noexcept;

struct BranchEvent {
    EventKind kind = EventKind::step_limit;
    int index = 0;             ///< index into Branch::points
    double param = 0.0;        ///< interpolated parameter value of the event
    std::optional<BifurcationCandidate> candidate;  ///< nearest enumerated point (trivial_return)
    double distance = 0.0;     ///< distance to the trivial curve (trivial_return)
    std::optional<FieldState> state;  ///< refined fold state (turning_point)
    std::string note;
};

struct BranchOrigin {
    std::optional<BifurcationCandidate> candidate;
    std::string file;
    double eps = 0.0;
    std::optional<int> parent_index;  ///< set for manual switches at a secondary point
};

struct Branch {
    Mode mode = Mode::hat;
    Parameters params;  ///< the active entry is meaningless; points carry it
    BranchOrigin origin;
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;

    const BranchEvent* find_event(EventKind kind) const noexcept;
    std::vector<const BranchEvent*> events_of(EventKind kind) const;
};

struct ContinuationConfig {
    double ds_init = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.25;
    int max_steps = 2000;
    int max_points = 20000;
    double trivial_return_tol = 1e-5;
    double corrector_tol = 1e-10;
    int corrector_max_iter = 10;
    bool monitor_eigenvalues = true;
    double window_slack = 1.0;  ///< allowed excursion beyond the nonexistence window
};

void validate(const ContinuationConfig& cfg);

/// Nontrivial point on the curve bifurcating at `c`: predictor constant + eps alpha cos(kx),
/// corrected under the pinning constraint <u - u_c, phi> = eps <phi, phi>. The tangent of
/// the returned point is the secant from the bifurcation point. Negative eps selects the other
/// half of the curve, the half-period shift of the positive half.
/// Throws PreconditionError if (S) or (T) fails, ConvergenceError if escalation does not help.
BranchPoint branch_switch(const BifurcationCandidate& c, double d, double eps = 1e-3, const Grid& grid = Grid(256));

/// Continue from `start` (which must carry a tangent, or one is computed) in the mode's parameter.
Branch continue_branch(const BranchPoint& start, const Parameters& p, Mode mode, const ContinuationConfig& cfg = {});

/// Switch onto the branch crossing `b.points[index]` along the eigenvector of the
/// smallest eigenvalue there (used at secondary bifurcation candidates).
BranchPoint switch_at(const Branch& b, int index, double eps = 1e-3);

/// min over the trivial curve of max_x |u(x) - a_const|; returns (distance, coordinate).
std::pair<double, double> distance_to_trivial(const FieldState& u, const Parameters& p, Mode mode);

/// Number of local minima (resp. maxima) of |a| on the even 2 pi periodic extension,
/// ignoring oscillations smaller than `prominence` times the range of |a|.
int count_minima_abs(const FieldState& s, double prominence = 0.05);
int count_maxima_abs(const FieldState& s, double prominence = 0.05);

/// Cosine mode carrying the largest energy among k >= 1.
int dominant_mode(const FieldState& s);

/// Fraction of the off-mean cosine energy outside multiples of k.
double off_multiple_energy_fraction(const FieldState& s, int k);

/// BranchPoint built from a converged state (monitors and l2norm filled in, no tangent).
BranchPoint make_point(const FieldState& s, const Parameters& p, Mode mode, bool monitor_eigenvalues = true);

} // namespace llcomb
