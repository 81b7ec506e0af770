#pragma once

// Invariant manifold M = {H = h1, G = h2} of the reduced ideal-gas
// Hamiltonian, its discriminant D(q1), component structure and the angle
// variables
//
//     Omega1 = s int 4 h1 q1^2 / sqrt(D) dq1
//     Omega2 = q2/q1 + s int n^2 R delta (R - h2 q1) / (q1 sqrt(D)) dq1
//
// in which the flow is linear: Omega1 = t + alpha1, Omega2 = alpha2. The sign
// s = +-1 selects the sheet of M over the (q1, q2) plane; sheets are glued
// along the turning points D = 0.

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "thermopt/control.hpp"
#include "thermopt/gas.hpp"

namespace thermopt::angles {

using control::ControlBudget;
using control::PhasePoint;
using gas::GasSpec;

struct InvariantLevels {
    double h1 = 0.0; ///< level of H, >= 0
    double h2 = 0.0; ///< level of G = q1 l2
};

InvariantLevels levels_of(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p);

/// Sheet index: sign of q1 l1 + q2 l2 (+1 on ties).
int branch_of(const PhasePoint& p);

/// D = 2 R delta n (4 h1^2 q1^4 - delta R n^2 (R - h2 q1)^2), Horner form.
double discriminant_D(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1);

/// Number of connected components of {q1 in R : D(q1) > 0}: 3 when
/// h2^4 delta n^2 - 64 R h1^2 >= 0, otherwise 2.
int component_count_formula(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels);

/// Positive-interval count of D obtained from its numerically computed real
/// roots (companion matrix eigenvalues), independent of the factorization.
int component_count_by_roots(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels);

/// Formula count, cross-checked against component_count_by_roots away from
/// the equality boundary. Throws InternalConsistencyError on disagreement and
/// DegenerateLevelsError for h1 <= 0.
int component_count(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels);

/// Positive real roots of D, ascending, deduplicated at 1e-12 (relative).
std::vector<double> singular_set(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels);

/// (l1, l2) on M over (q1, q2) for the given sheet. Throws OffManifoldError
/// when D(q1) < -1e-12 (relative to the size of its terms).
std::array<double, 2> lambda_on_M(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                                  double q1, double q2, int branch);

struct ComponentChart {
    double lo = 0.0;                                      ///< turning point, D(lo) = 0
    double hi = std::numeric_limits<double>::infinity();  ///< next turning point or +inf
    int branch = 1;

    bool bounded() const { return hi < std::numeric_limits<double>::infinity(); }
    bool contains(double q1) const { return q1 > lo && q1 < hi; }
    /// Midpoint for bounded charts, 2 lo otherwise.
    double default_reference() const { return bounded() ? 0.5 * (lo + hi) : 2.0 * lo; }
};

/// Immutable description of one invariant manifold: factored discriminant and
/// singular quadratures of the angle integrands.
class InvariantManifold {
public:
    InvariantManifold(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels);

    const GasSpec& spec() const { return spec_; }
    const ControlBudget& budget() const { return budget_; }
    const InvariantLevels& levels() const { return levels_; }

    double discriminant(double q1) const;
    const std::vector<double>& positive_roots() const { return positive_roots_; }

    /// Chart whose open q1 interval contains q1. Throws ChartError when
    /// D(q1) <= 0 and DegenerateLevelsError when an endpoint is a double root.
    ComponentChart chart_at(double q1, int branch) const;

    std::array<double, 2> lambda_at(double q1, double q2, int branch) const;

    /// int_a^b 4 h1 q^2 / sqrt(D) dq and int_a^b n^2 R delta (R - h2 q)/(q sqrt(D)) dq
    /// for [a, b] inside the closure of the chart (either orientation).
    double integral1(const ComponentChart& chart, double a, double b) const;
    double integral2(const ComponentChart& chart, double a, double b) const;

    /// int_a^b g(q) 4 h1 q^2 / sqrt(D) dq with fixed composite Gauss-Legendre
    /// nodes (panels x 8) in the endpoint-regularized variable. Smooth in the
    /// levels and endpoints, unlike the adaptive rules.
    double energy_weighted_integral(const ComponentChart& chart, double a, double b,
                                    const std::function<double(double)>& g, int panels) const;

    double omega1(const ComponentChart& chart, double q1_ref, double q1) const;
    double omega2(const ComponentChart& chart, double q1_ref, double q1, double q2) const;

    /// Time to travel from q1 to the turning point ahead on the given sheet
    /// (+inf on an unbounded leg).
    double time_to_turn(const ComponentChart& chart, double q1) const;

    /// Point reached after time dt >= 0 on the current leg; q1 never passes
    /// the turning point ahead. Throws ChartError when dt exceeds time_to_turn.
    double advance_q1(const ComponentChart& chart, double q1, double dt) const;

private:
    enum class Weight { Energy, Volume };
    double integral(Weight w, const ComponentChart& chart, double a, double b) const;
    double reduced(double q, double root) const; // D(q) / (q - root)

    GasSpec spec_;
    ControlBudget budget_;
    InvariantLevels levels_;
    double k_ = 0.0;      // 2 R delta n
    double lead_ = 0.0;   // 2 h1
    double c_ = 0.0;      // n sqrt(delta R)
    std::array<double, 2> a_roots_{};  // roots of 2h1 q^2 + c h2 q - c R
    bool b_real_ = false;              // 2h1 q^2 - c h2 q + c R
    std::array<double, 2> b_roots_{};  // real roots, or (re, im) of the complex pair
    std::vector<double> positive_roots_;
};

double omega1(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_ref,
              double q1, int branch);
double omega2(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_ref,
              double q1, double q2, int branch);

struct AngleSolution {
    PhasePoint point;
    int branch = 1;
    int flips = 0;
};

struct AngleSolveOptions {
    bool continue_across_turns = true;
};

/// Evolves start by time t >= 0 through the linear angle flow. Turning points
/// (D = 0) flip the sheet when continuation is enabled; otherwise reaching one
/// throws ChartError.
AngleSolution solve_by_angles(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                              const PhasePoint& start, double t, const AngleSolveOptions& options = {});

} // namespace thermopt::angles
