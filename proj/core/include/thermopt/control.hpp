#pragma once

// Work-maximizing control on the ideal-gas state manifold. In the
// coordinates q1 = nR/(2e), q2 = -q1 ln v the process fields straighten to
// Y1 = d/dq2, Y2 = d/dq1 + (q2/q1) d/dq2, the admissible controls form the
// fixed ellipse 4 u1^2/(n^2 R) + 2 u2^2/(nR) <= delta, and maximizing the
// Pontryagin Hamiltonian over that ellipse gives the reduced Hamiltonian
// H(q, lambda).

#include <array>
#include <cmath>
#include <utility>

#include "thermopt/gas.hpp"
#include "thermopt/jet.hpp"

namespace thermopt::control {

struct ControlVector {
    double u1 = 0.0;
    double u2 = 0.0;
};

struct ControlBudget {
    double delta = 1.0;
};

ControlBudget make_budget(double delta);

struct PhasePoint {
    double q1 = 1.0;
    double q2 = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;

    std::array<double, 4> coords() const { return {q1, q2, l1, l2}; }
    static PhasePoint from(const std::array<double, 4>& c) { return {c[0], c[1], c[2], c[3]}; }
};

struct QPair {
    double q1 = 0.0;
    double q2 = 0.0;
};

struct EVPair {
    double e = 0.0;
    double v = 0.0;
};

QPair to_q(const gas::GasSpec& spec, double e, double v);
EVPair from_q(const gas::GasSpec& spec, double q1, double q2);

/// Left-hand side 4 u1^2/(n^2 R) + 2 u2^2/(nR) of the admissibility ellipse.
double ellipse_value(const gas::GasSpec& spec, const ControlVector& u);

ControlVector control_on_boundary(const gas::GasSpec& spec, const ControlBudget& budget, double tau);

/// H(q, lambda, u) = -R u1/q1^2 + l1 u2 + l2 (q2 u2 / q1 + u1).
/// Throws DomainError for q1 <= 0 or u outside the ellipse.
double pontryagin_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p,
                              const ControlVector& u);

/// Pontryagin Hamiltonian restricted to the ellipse boundary, as a function of
/// the boundary parameter tau (closed trigonometric form).
double boundary_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p, double tau);

struct TauStar {
    double tau = 0.0;
    double value = 0.0;
    bool degenerate = false; ///< H independent of tau; tau = 0 returned
};

/// Maximizing boundary parameter. The arctan root family is resolved by
/// comparing the two candidate branches.
TauStar tau_star(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p);

/// Expanded radicand of the reduced Hamiltonian (without the nR delta factor).
template <typename T>
T reduced_radicand(double n, double R, const T& q1, const T& q2, const T& l1, const T& l2)
{
    const T q1s = q1 * q1;
    const T q14 = q1s * q1s;
    return n * q14 * l2 * l2 + 2.0 * q14 * l1 * l1 + 4.0 * q1s * q1 * q2 * l1 * l2 +
           2.0 * q1s * q2 * q2 * l2 * l2 - 2.0 * R * n * q1s * l2 + R * R * n;
}

template <typename T>
T reduced_hamiltonian_expr(const gas::GasSpec& spec, double delta, const T& q1, const T& q2, const T& l1,
                           const T& l2)
{
    using std::sqrt;
    const T rad = reduced_radicand(spec.n, spec.R, q1, q2, l1, l2);
    return sqrt(spec.n * spec.R * delta * rad) / (2.0 * q1 * q1);
}

/// H(q, lambda) = sqrt(nR delta (...)) / (2 q1^2) >= 0.
/// Throws NumericalInconsistencyError for a radicand below -1e-12 (scaled).
double reduced_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p);

/// Value and exact gradient (q1, q2, l1, l2) by forward-mode differentiation.
gas::ValueGradient<4> reduced_hamiltonian_jet(const gas::GasSpec& spec, const ControlBudget& budget,
                                              const PhasePoint& p);

/// Gradient through the envelope theorem: dH/dz = d/dz H(q, lambda, u*) at the
/// optimal control u* held fixed.
std::array<double, 4> reduced_hamiltonian_gradient_envelope(const gas::GasSpec& spec, const ControlBudget& budget,
                                                            const PhasePoint& p);

/// Work rate alpha(Y) = p dv(Y) = -(4 e^2 / (n^2 R)) u1 in chart (e, v).
double work_rate_ev(const gas::GasSpec& spec, double e, double v, const ControlVector& u);

/// Costates in chart (e, v) from costates in chart (q1, q2): lambda_x = J^T lambda_q.
std::pair<double, double> costates_to_ev(const gas::GasSpec& spec, double e, double v, double l1, double l2);

/// alpha(Y) + lambda_e Y^e + lambda_v Y^v with Y = u1 Y1 + u2 Y2 (ideal gas fields).
double hamiltonian_ev(const gas::GasSpec& spec, double e, double v, double lambda_e, double lambda_v,
                      const ControlVector& u);

/// Control that realizes the velocity (dq1/dt, dq2/dt) = (u2, q2 u2 / q1 + u1).
ControlVector control_from_velocity(double q1, double q2, double dq1, double dq2);

} // namespace thermopt::control
