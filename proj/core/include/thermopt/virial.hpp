#pragma once

// First-order perturbation of the ideal-gas integrable system in the van der
// Waals parameters a and b:
//
//     H_vdW = H + a H_a + b H_b,   G_vdW = G + a G_a + b G_b,
//
// with G_a, G_b chosen so that [H_vdW, G_vdW] vanishes at first order. In
// angle coordinates that condition reads dG_a/dOmega1 = dH_a/dOmega2, which is
// integrated along Omega1 at fixed levels and Omega2.

#include <array>
#include <cstdint>
#include <vector>

#include "thermopt/angles.hpp"
#include "thermopt/control.hpp"
#include "thermopt/dynamics.hpp"
#include "thermopt/gas.hpp"
#include "thermopt/io.hpp"
#include "thermopt/jet.hpp"

namespace thermopt::virial {

using angles::InvariantLevels;
using control::ControlBudget;
using control::PhasePoint;
using gas::GasSpec;

/// Lower bound on H in the denominators of H_a and H_b.
inline constexpr double kHamiltonianGuard = 1e-10;

enum class Correction { A, B };

template <typename T>
T correction_Ha_expr(const GasSpec& spec, double delta, const T& q1, const T& q2, const T& l1, const T& l2)
{
    using std::exp;
    const double n = spec.n;
    const double R = spec.R;
    const double n3 = n * n * n;
    const T h = control::reduced_hamiltonian_expr(spec, delta, q1, q2, l1, l2);
    return exp(q2 / q1) * (q1 * q1 * (R * delta * n3 * l2 * l2 - 8.0 * h * h) - R * R * l2 * n3 * delta) /
           (4.0 * q1 * n * R * h);
}

template <typename T>
T correction_Hb_expr(const GasSpec& spec, double delta, const T& q1, const T& q2, const T& l1, const T& l2)
{
    using std::exp;
    const double n = spec.n;
    const double R = spec.R;
    const T h = control::reduced_hamiltonian_expr(spec, delta, q1, q2, l1, l2);
    return exp(q2 / q1) * R * delta * n * n * l2 * (R - l2 * q1 * q1) / (4.0 * h * q1 * q1);
}

/// Throw NearSingularError when H < kHamiltonianGuard.
double correction_Ha(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p);
double correction_Hb(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p);
gas::ValueGradient<4> correction_jet(const GasSpec& spec, const ControlBudget& budget, Correction which,
                                     const PhasePoint& p);

struct PerturbedHamiltonian {
    GasSpec base;            ///< ideal gas the corrections are taken around
    ControlBudget budget;
    double a = 0.0;
    double b = 0.0;
};

/// H + a H_a + b H_b; exactly H when a = b = 0.
double perturbed_hamiltonian(const PerturbedHamiltonian& ph, const PhasePoint& p);
dynamics::PhaseFunction perturbed_hamiltonian_function(const PerturbedHamiltonian& ph);

/// Derivative of H_a (or H_b) along the flow of G = q1 l2, i.e. d/dOmega2 at
/// fixed levels and Omega1: q1 dH/dq2 - l2 dH/dl1.
double omega2_derivative(const GasSpec& spec, const ControlBudget& budget, Correction which, const PhasePoint& p);

/// One chart of the invariant manifold in angle coordinates, with the inverse
/// map (Omega1, Omega2) -> (q1, q2).
class AngleChart {
public:
    /// Chart containing q1_seed on the given sheet; q1_ref defaults to the
    /// chart's default reference point.
    AngleChart(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_seed,
               int branch);
    AngleChart(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_seed,
               int branch, double q1_ref);

    const angles::InvariantManifold& manifold() const { return manifold_; }
    const angles::ComponentChart& chart() const { return chart_; }
    int branch() const { return chart_.branch; }
    double reference() const { return ref_; }

    std::array<double, 2> to_angles(double q1, double q2) const;
    /// Throws ChartError when Omega1 lies outside omega1_range().
    std::array<double, 2> from_angles(double omega1, double omega2) const;
    PhasePoint phase_point(double omega1, double omega2) const;

    /// Omega1 at the two chart ends, ascending (one may be infinite).
    std::array<double, 2> omega1_range() const;

private:
    angles::InvariantManifold manifold_;
    angles::ComponentChart chart_;
    double ref_ = 0.0;
};

/// int dH_{a|b}/dOmega2 dOmega1 over [omega1_range[0], omega1_range[1]] at
/// fixed Omega2, composite Gauss-Legendre with n_grid panels (n_grid >= 16).
double correction_G(const AngleChart& chart, Correction which, std::array<double, 2> omega1_range, double omega2,
                    int n_grid = 32);

/// G_a or G_b as a phase-space function: the same integral from the lower
/// turning point of the point's own chart up to the point.
double correction_G_at(const GasSpec& spec, const ControlBudget& budget, Correction which, const PhasePoint& p,
                       int n_grid = 32);

struct OrderCheckOptions {
    std::array<double, 2> direction{0.70710678118654752, 0.70710678118654752}; ///< (a, b) direction, normalized
    int points = 12;
    std::uint64_t seed = 20240611;
    int n_grid = 32;
    double fd_step = 1e-5;
};

struct OrderCheck {
    io::OrderReport corrected;    ///< [H_vdW, G + a G_a + b G_b]
    io::OrderReport uncorrected;  ///< [H_vdW, G]
    std::vector<PhasePoint> points;
};

/// Bracket norms (RMS over deterministic random points of M) for each eps and
/// the least-squares slope of log norm against log eps.
OrderCheck commutation_order_check(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                                   const std::vector<double>& eps, const OrderCheckOptions& options = {});

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace thermopt::virial
