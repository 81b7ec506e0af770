#include "thermopt/control.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "thermopt/errors.hpp"

namespace thermopt::control {

namespace {

void require_q1(double q1)
{
    if (!(q1 > 0.0) || !std::isfinite(q1)) throw DomainError("control: q1 must be positive");
}

double wrap_angle(double tau)
{
    constexpr double pi = std::numbers::pi;
    tau = std::fmod(tau, 2.0 * pi);
    if (tau <= -pi) tau += 2.0 * pi;
    if (tau > pi) tau -= 2.0 * pi;
    return tau;
}

} // namespace

ControlBudget make_budget(double delta)
{
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("control: delta must be positive");
    return ControlBudget{delta};
}

QPair to_q(const gas::GasSpec& spec, double e, double v)
{
    if (!(e > 0.0) || !(v > 0.0)) throw DomainError("control: to_q needs e > 0 and v > 0");
    const double q1 = spec.n * spec.R / (2.0 * e);
    return {q1, -q1 * std::log(v)};
}

EVPair from_q(const gas::GasSpec& spec, double q1, double q2)
{
    require_q1(q1);
    return {spec.n * spec.R / (2.0 * q1), std::exp(-q2 / q1)};
}

double ellipse_value(const gas::GasSpec& spec, const ControlVector& u)
{
    return 4.0 * u.u1 * u.u1 / (spec.n * spec.n * spec.R) + 2.0 * u.u2 * u.u2 / (spec.n * spec.R);
}

ControlVector control_on_boundary(const gas::GasSpec& spec, const ControlBudget& budget, double tau)
{
    return {0.5 * spec.n * std::sqrt(spec.R * budget.delta) * std::cos(tau),
            std::sqrt(0.5 * spec.n * spec.R * budget.delta) * std::sin(tau)};
}

double pontryagin_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p,
                              const ControlVector& u)
{
    require_q1(p.q1);
    if (ellipse_value(spec, u) > budget.delta * (1.0 + 1e-9)) {
        throw DomainError("control: control vector outside the admissible ellipse");
    }
    return -spec.R * u.u1 / (p.q1 * p.q1) + p.l1 * u.u2 + p.l2 * (p.q2 * u.u2 / p.q1 + u.u1);
}

double boundary_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p, double tau)
{
    require_q1(p.q1);
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    const double q1 = p.q1;
    return (std::sqrt(2.0 * n * R * d) * q1 * (q1 * p.l1 + p.q2 * p.l2) * std::sin(tau) +
            std::sqrt(R * d) * n * (q1 * q1 * p.l2 - R) * std::cos(tau)) /
           (2.0 * q1 * q1);
}

TauStar tau_star(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    require_q1(p.q1);
    constexpr double pi = std::numbers::pi;
    const double q1 = p.q1;
    const double numer = std::sqrt(2.0) * q1 * (q1 * p.l1 + p.q2 * p.l2);
    const double denom = std::sqrt(spec.n) * (spec.R - q1 * q1 * p.l2);

    TauStar out;
    if (numer == 0.0 && denom == 0.0) {
        out.degenerate = true;
        out.tau = 0.0;
        out.value = boundary_hamiltonian(spec, budget, p, 0.0);
        return out;
    }
    if (denom == 0.0) {
        // Only the sin term survives; its coefficient has the sign of numer.
        out.tau = numer > 0.0 ? 0.5 * pi : -0.5 * pi;
        out.value = boundary_hamiltonian(spec, budget, p, out.tau);
        return out;
    }
    const double base = pi - std::atan(numer / denom);
    const double cand[2] = {wrap_angle(base), wrap_angle(base + pi)};
    const double h0 = boundary_hamiltonian(spec, budget, p, cand[0]);
    const double h1 = boundary_hamiltonian(spec, budget, p, cand[1]);
    out.tau = h0 >= h1 ? cand[0] : cand[1];
    out.value = std::max(h0, h1);
    return out;
}

double reduced_hamiltonian(const gas::GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    require_q1(p.q1);
    const double n = spec.n;
    const double R = spec.R;
    const double q1 = p.q1;
    const double q1s = q1 * q1;
    const double terms[] = {n * q1s * q1s * p.l2 * p.l2,
                            2.0 * q1s * q1s * p.l1 * p.l1,
                            4.0 * q1s * q1 * p.q2 * p.l1 * p.l2,
                            2.0 * q1s * p.q2 * p.q2 * p.l2 * p.l2,
                            -2.0 * R * n * q1s * p.l2,
                            R * R * n};
    double rad = 0.0;
    double scale = 1.0;
    for (double t : terms) {
        rad += t;
        scale = std::max(scale, std::abs(t));
    }
    if (rad < -1e-12 * scale) {
        throw NumericalInconsistencyError("control: negative radicand " + std::to_string(rad) +
                                          " in the reduced Hamiltonian");
    }
    rad = std::max(rad, 0.0);
    return std::sqrt(n * R * budget.delta * rad) / (2.0 * q1s);
}

gas::ValueGradient<4> reduced_hamiltonian_jet(const gas::GasSpec& spec, const ControlBudget& budget,
                                              const PhasePoint& p)
{
    require_q1(p.q1);
    using J = Jet<4>;
    const J h = reduced_hamiltonian_expr(spec, budget.delta, J::variable(p.q1, 0), J::variable(p.q2, 1),
                                         J::variable(p.l1, 2), J::variable(p.l2, 3));
    return {h.v, h.d};
}

std::array<double, 4> reduced_hamiltonian_gradient_envelope(const gas::GasSpec& spec, const ControlBudget& budget,
                                                            const PhasePoint& p)
{
    const auto ts = tau_star(spec, budget, p);
    const auto u = control_on_boundary(spec, budget, ts.tau);
    const double q1 = p.q1;
    return {2.0 * spec.R * u.u1 / (q1 * q1 * q1) - p.l2 * p.q2 * u.u2 / (q1 * q1),
            p.l2 * u.u2 / q1,
            u.u2,
            p.q2 * u.u2 / q1 + u.u1};
}

double work_rate_ev(const gas::GasSpec& spec, double e, double /*v*/, const ControlVector& u)
{
    return -4.0 * e * e * u.u1 / (spec.n * spec.n * spec.R);
}

std::pair<double, double> costates_to_ev(const gas::GasSpec& spec, double e, double v, double l1, double l2)
{
    const double nR = spec.n * spec.R;
    const double q1 = nR / (2.0 * e);
    const double dq1_de = -nR / (2.0 * e * e);
    const double dq2_de = nR * std::log(v) / (2.0 * e * e);
    const double dq2_dv = -q1 / v;
    return {l1 * dq1_de + l2 * dq2_de, l2 * dq2_dv};
}

double hamiltonian_ev(const gas::GasSpec& spec, double e, double v, double lambda_e, double lambda_v,
                      const ControlVector& u)
{
    const auto fields = gas::process_fields(spec, e, v);
    const double ye = u.u1 * fields.y1.coeff_e + u.u2 * fields.y2.coeff_e;
    const double yv = u.u1 * fields.y1.coeff_v + u.u2 * fields.y2.coeff_v;
    return work_rate_ev(spec, e, v, u) + lambda_e * ye + lambda_v * yv;
}

ControlVector control_from_velocity(double q1, double q2, double dq1, double dq2)
{
    require_q1(q1);
    return {dq2 - q2 * dq1 / q1, dq1};
}

} // namespace thermopt::control
