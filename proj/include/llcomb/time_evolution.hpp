#pragma once

// Strang splitting for i a_t = (-i + zeta(t)) a - d a_xx - |a|^2 a + i f on (0, pi)
// with Neumann conditions: exact linear flow per cosine mode, exact phase rotation for
// the nonlinearity.

#include "llcomb/comb_model.hpp"
#include "llcomb/spectral_bvp.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

namespace llcomb {

/// Piecewise-linear detuning zeta(t) through (t, zeta) knots, held constant outside them.
class RampSchedule {
public:
    /// Knots must be strictly increasing in t; total_time > 0.
    RampSchedule(std::vector<std::pair<double, double>> knots, double total_time);

    static RampSchedule constant(double zeta, double total_time);
    /// zeta0 on [0, T/30], linear to zeta1 at T/3, then zeta1 until T.
    static RampSchedule soliton_capture(double total_time = 1000.0, double zeta0 = -5.0, double zeta1 = 2.67);

    double operator()(double t) const noexcept;
    double total_time() const noexcept { return total_; }
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

private:
    std::vector<std::pair<double, double>> knots_;
    double total_;
};

struct SplitOptions {
    bool damping = true;  ///< false drops the -i a term (conservative core, test use)
};

/// Exact flow of the linear inhomogeneous part over time tau (any sign when damping is off).
FieldState linear_substep(const FieldState& u, double tau, const Parameters& p, const SplitOptions& opt = {});

/// a -> a exp(i |a|^2 tau); |a| is unchanged at every node.
FieldState nonlinear_substep(const FieldState& u, double tau);

/// One Strang step with zeta frozen at p.zeta. dt must be nonzero; negative dt requires the
/// conservative core (damping off, f = 0).
FieldState strang_step(const FieldState& u, double dt, const Parameters& p, const SplitOptions& opt = {});

struct EvolveOptions {
    double dt = 1e-3;
    int sample_every = 100;   ///< steps between samples
    int snapshot_every = 0;   ///< samples between stored snapshots; 0 stores none
    double noise_amp = 0.0;   ///< uniform on [-noise_amp, noise_amp] per node and field
    std::uint64_t seed = 0;
    SplitOptions split;
    /// Called at every sample with (t, zeta, state).
    std::function<void(double, double, const FieldState&)> observer;
};

enum class EvolveStatus { completed, blow_up };

std::string_view to_string(EvolveStatus s) noexcept;

struct Trajectory {
    std::vector<double> times;
    std::vector<double> zetas;
    std::vector<double> l2norms;
    std::vector<std::pair<double, FieldState>> snapshots;
    FieldState final_state;   ///< last finite state
    double final_time = 0.0;
    EvolveStatus status = EvolveStatus::completed;
};

/// Integrate from u0 (plus seeded noise) over [0, ramp.total_time()]. p.zeta is ignored.
/// total_time must be a whole number of steps and samples are taken at t = 0 and every
/// sample_every steps, plus at the final time.
Trajectory evolve(const FieldState& u0, const RampSchedule& ramp, const Parameters& p, const EvolveOptions& opt);

/// Observer that keeps the samples with t >= t_from. drift() is the largest L2 distance
/// between a kept sample and `last`, the stationarity measure over the window.
class DriftMonitor {
public:
    explicit DriftMonitor(double t_from) : t_from_(t_from) {}

    void operator()(double t, double zeta, const FieldState& s);
    double drift(const FieldState& last) const;
    std::size_t samples() const noexcept { return kept_.size(); }

private:
    double t_from_;
    std::vector<FieldState> kept_;
};

/// (k, log |a_k|) for k = 0 .. n-1, with a(x) = sum_k a_k e^{ikx} over the even extension:
/// |a_0| is the mean and |a_k| = |c_k| / 2 for k >= 1, c_k the complex cosine coefficient.
/// Zero amplitudes are floored at 1e-300 before the logarithm.
std::vector<std::pair<int, double>> spectrum(const FieldState& u);

} // namespace llcomb
