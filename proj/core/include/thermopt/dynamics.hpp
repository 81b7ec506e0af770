#pragma once

// Canonical flow of a Hamiltonian on the phase space (q1, q2, l1, l2),
// conserved-quantity monitoring, the work functional along a trajectory and
// the two-endpoint boundary problem solved by shooting on the initial costates.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "thermopt/control.hpp"
#include "thermopt/gas.hpp"

namespace thermopt::dynamics {

using control::PhasePoint;

using PhaseFunction = std::function<gas::ValueGradient<4>(const PhasePoint&)>;

/// Central-difference gradient with step 1e-6 * max(1, |coordinate|).
PhaseFunction with_fd_gradient(std::function<double(const PhasePoint&)> f);

/// The reduced Hamiltonian with exact gradient.
PhaseFunction reduced_hamiltonian_function(const gas::GasSpec& spec, const control::ControlBudget& budget);

/// -H, whose flow is the time reversal of the flow of H.
PhaseFunction negated(PhaseFunction h);

struct FlowOptions {
    double tol = 1e-10;          ///< per-step error bound (absolute + relative)
    std::size_t samples = 200;   ///< uniform output samples; 0 records every accepted step
    double min_step = 1e-13;     ///< relative to max(1, t0)
    std::size_t max_steps = 2'000'000;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<std::array<double, 4>> rates; ///< (dq1, dq2, dl1, dl2)/dt at each sample
    std::vector<double> hamiltonian;          ///< H along the samples
    std::vector<double> work;                 ///< cumulative J, filled by attach_work
    double h_drift = 0.0;
    double g_drift = 0.0;
    bool truncated = false;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::size_t size() const { return times.size(); }
};

/// Dormand-Prince 5(4) integration of dq/dt = dH/dl, dl/dt = -dH/dq on [0, t0].
/// Steps are clipped to land on the output samples. When the step size
/// underflows (or H cannot be evaluated) the partial trajectory is returned
/// with truncated = true.
Trajectory flow(const PhaseFunction& h, const PhasePoint& start, double t0, const FlowOptions& options = {});

/// sum_i (F_qi G_li - F_li G_qi).
double canonical_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& x);

/// G = q1 l2.
double integral_G(const PhasePoint& x);
PhaseFunction integral_G_function();

/// Builds a trajectory from explicit samples (times, states and velocities);
/// H-related fields are left empty.
Trajectory make_path(std::vector<double> times, std::vector<PhasePoint> states,
                     std::vector<std::array<double, 4>> rates);

/// Cumulative J(t_i) = int_0^{t_i} p dv along the (e, v) image, piecewise
/// quadratic in t (composite Simpson at every second sample).
/// Throws InsufficientSamplesError with fewer than three samples.
std::vector<double> cumulative_work(const gas::GasSpec& spec, const Trajectory& traj);
double work_functional(const gas::GasSpec& spec, const Trajectory& traj);
void attach_work(const gas::GasSpec& spec, Trajectory& traj);

struct ShootingProblem {
    control::EVPair x_start;
    control::EVPair x_end;
    double t0 = 1.0;
    gas::GasSpec spec;
    control::ControlBudget budget;
};

struct ShootOptions {
    double tol = 1e-8;
    FlowOptions flow{};
    int max_newton = 40;
    int grid = 11;
    double grid_half_width = 5.0;
    bool parallel = true;
};

struct ShootResult {
    std::array<double, 2> lambda0{};
    Trajectory traj;
    double residual = 0.0;        ///< relative endpoint error in (e, v)
    double work = 0.0;
    bool from_origin = false;     ///< Newton from lambda0 = 0 converged
    std::size_t converged_starts = 0;
    bool multiple = false;        ///< distinct converged costates were found
};

/// Damped Newton on the shooting map lambda0 -> x(t0) with a forward
/// difference Jacobian; multistart on a grid when the origin start fails.
/// Among converged starts the one with maximal J wins (first in grid order on
/// ties). Throws UnreachableEndpointError when nothing converges.
ShootResult shoot(const ShootingProblem& problem, const ShootOptions& options = {});

/// CSV: t,q1,q2,l1,l2,e,v,H,G,J_cum with shortest round-trip numbers.
void write_trajectory_csv(std::ostream& out, const gas::GasSpec& spec, const Trajectory& traj);

} // namespace thermopt::dynamics
