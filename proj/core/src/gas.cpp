#include "thermopt/gas.hpp"

#include <algorithm>
#include <cmath>

#include "thermopt/errors.hpp"

namespace thermopt::gas {

namespace {

void require_positive(double x, const char* what)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string("gas: ") + what + " must be positive and finite");
    }
}

template <std::size_t N, typename Point>
ValueGradient<N> central_differences(const std::function<double(const Point&)>& f, const Point& x)
{
    ValueGradient<N> out;
    out.value = f(x);
    const auto c = x.coords();
    for (std::size_t i = 0; i < N; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(c[i]));
        auto plus = c;
        auto minus = c;
        plus[i] += h;
        minus[i] -= h;
        out.grad[i] = (f(Point::from(plus)) - f(Point::from(minus))) / (2.0 * h);
    }
    return out;
}

StatePoint finish(double e, double v, double p, double T, double s)
{
    return StatePoint{e, v, p, T, s, e - T * s + p * v};
}

} // namespace

std::string to_string(GasKind kind)
{
    switch (kind) {
    case GasKind::Ideal: return "ideal";
    case GasKind::VanDerWaals: return "vdw";
    case GasKind::VirialFirstOrder: return "virial1";
    }
    return "unknown";
}

GasKind gas_kind_from_string(const std::string& name)
{
    if (name == "ideal") return GasKind::Ideal;
    if (name == "vdw") return GasKind::VanDerWaals;
    if (name == "virial1") return GasKind::VirialFirstOrder;
    throw ValidationError("unknown gas kind '" + name + "' (expected ideal|vdw|virial1)");
}

void validate(const GasSpec& spec)
{
    if (!(spec.n > 0.0) || !std::isfinite(spec.n)) throw DomainError("gas: n must be positive");
    if (!(spec.R > 0.0) || !std::isfinite(spec.R)) throw DomainError("gas: R must be positive");
    if (!(spec.a >= 0.0) || !std::isfinite(spec.a)) throw DomainError("gas: a must be non-negative");
    if (!(spec.b >= 0.0) || !std::isfinite(spec.b)) throw DomainError("gas: b must be non-negative");
    if (spec.kind == GasKind::Ideal && (spec.a != 0.0 || spec.b != 0.0)) {
        throw DomainError("gas: an ideal gas has a = b = 0");
    }
}

GasSpec make_gas(GasKind kind, double n, double R, double a, double b)
{
    GasSpec spec{kind, n, R, a, b};
    validate(spec);
    return spec;
}

double virial_A1(const GasSpec& spec, double T)
{
    require_positive(T, "T");
    return spec.b - spec.a / (spec.R * T);
}

StatePoint state_ideal(const GasSpec& spec, double e, double v)
{
    if (spec.kind != GasKind::Ideal) throw DomainError("gas: state_ideal needs an ideal gas");
    require_positive(e, "e");
    require_positive(v, "v");
    const double T = 2.0 * e / (spec.n * spec.R);
    const double p = spec.R * T / v;
    const double s = spec.R * (0.5 * spec.n * std::log(e) + std::log(v));
    return finish(e, v, p, T, s);
}

StatePoint state_vdw(const GasSpec& spec, double T, double v)
{
    if (spec.kind != GasKind::VanDerWaals) throw DomainError("gas: state_vdw needs a van der Waals gas");
    require_positive(T, "T");
    require_positive(v, "v");
    if (!(v > spec.b)) throw DomainError("gas: van der Waals state needs v > b");
    const double p = spec.R * T / (v - spec.b) - spec.a / (v * v);
    const double e = 0.5 * spec.n * spec.R * T - spec.a / v;
    const double s = spec.R * (0.5 * spec.n * std::log(T) + std::log(v - spec.b));
    return finish(e, v, p, T, s);
}

StatePoint state_virial(const GasSpec& spec, double T, double v)
{
    if (spec.kind != GasKind::VirialFirstOrder) throw DomainError("gas: state_virial needs a virial1 gas");
    require_positive(T, "T");
    require_positive(v, "v");
    const double a1 = virial_A1(spec, T);
    const double p = spec.R * T / v * (1.0 + a1 / v);
    const double e = 0.5 * spec.n * spec.R * T - spec.a / v;
    const double s = spec.R * (0.5 * spec.n * std::log(T) + std::log(v)) - spec.R * spec.b / v;
    return finish(e, v, p, T, s);
}

StatePoint state_from_ev(const GasSpec& spec, double e, double v)
{
    switch (spec.kind) {
    case GasKind::Ideal: return state_ideal(spec, e, v);
    case GasKind::VanDerWaals:
    case GasKind::VirialFirstOrder: {
        require_positive(v, "v");
        const double T = 2.0 * (e + spec.a / v) / (spec.n * spec.R);
        if (!(T > 0.0)) throw DomainError("gas: (e, v) gives a non-positive temperature");
        return spec.kind == GasKind::VanDerWaals ? state_vdw(spec, T, v) : state_virial(spec, T, v);
    }
    }
    throw DomainError("gas: unknown kind");
}

bool QuadraticForm2::negative_definite() const
{
    // Sylvester's criterion for -m.
    return m(0, 0) < 0.0 && m.determinant() > 0.0;
}

QuadraticForm2 kappa_ideal(const GasSpec& spec, double e, double v)
{
    if (spec.kind != GasKind::Ideal) throw DomainError("gas: kappa_ideal needs an ideal gas");
    require_positive(e, "e");
    require_positive(v, "v");
    QuadraticForm2 k;
    k.chart = Chart::EnergyVolume;
    k.m(0, 0) = -spec.n * spec.R / (2.0 * e * e);
    k.m(1, 1) = -spec.R / (v * v);
    return k;
}

QuadraticForm2 kappa_vdw(const GasSpec& spec, double T, double v)
{
    if (spec.kind != GasKind::VanDerWaals) throw DomainError("gas: kappa_vdw needs a van der Waals gas");
    require_positive(T, "T");
    if (!(v > spec.b)) throw DomainError("gas: van der Waals kappa needs v > b");
    const double vb = v - spec.b;
    QuadraticForm2 k;
    k.chart = Chart::TemperatureVolume;
    k.m(0, 0) = -spec.R * spec.n / (2.0 * T * T);
    k.m(1, 1) = -(v * v * v * spec.R * T - 2.0 * spec.a * vb * vb) / (v * v * v * T * vb * vb);
    return k;
}

bool applicability(const GasSpec& spec, const StatePoint& point)
{
    switch (spec.kind) {
    case GasKind::Ideal: return kappa_ideal(spec, point.e, point.v).negative_definite();
    case GasKind::VanDerWaals: return kappa_vdw(spec, point.T, point.v).negative_definite();
    case GasKind::VirialFirstOrder:
        return massieu_planck_eval(massieu_potential(spec), spec, point.v, point.T).applicable;
    }
    return false;
}

ThermoFunction with_fd_gradient(std::function<double(const ThermoPoint&)> f)
{
    return [f = std::move(f)](const ThermoPoint& x) { return central_differences<4>(f, x); };
}

ContactFunction with_fd_gradient(std::function<double(const ContactPoint&)> f)
{
    return [f = std::move(f)](const ContactPoint& x) { return central_differences<5>(f, x); };
}

double poisson_bracket_thermo(const ThermoFunction& f, const ThermoFunction& g, const ThermoPoint& x)
{
    const auto fj = f(x);
    const auto gj = g(x);
    enum { E, V, P, T };
    const auto& df = fj.grad;
    const auto& dg = gj.grad;
    return 0.5 * (x.p * x.T * (df[P] * dg[E] - df[E] * dg[P]) +
                  x.T * x.T * (df[T] * dg[E] - df[E] * dg[T]) +
                  x.T * (df[V] * dg[P] - df[P] * dg[V]));
}

std::pair<ThermoFunction, ThermoFunction> state_equations(const GasSpec& spec)
{
    validate(spec);
    const double n = spec.n;
    const double R = spec.R;
    const double a = spec.a;
    const double b = spec.b;

    // f2 = e - (n/2) R T + a / v for every model (a = 0 for ideal gases).
    ThermoFunction f2 = [=](const ThermoPoint& x) {
        ValueGradient<4> out;
        out.value = x.e - 0.5 * n * R * x.T + a / x.v;
        out.grad = {1.0, -a / (x.v * x.v), 0.0, -0.5 * n * R};
        return out;
    };

    ThermoFunction f1;
    switch (spec.kind) {
    case GasKind::Ideal:
        f1 = [=](const ThermoPoint& x) {
            ValueGradient<4> out;
            out.value = x.p * x.v - R * x.T;
            out.grad = {0.0, x.p, x.v, -R};
            return out;
        };
        break;
    case GasKind::VanDerWaals:
        f1 = [=](const ThermoPoint& x) {
            ValueGradient<4> out;
            const double v2 = x.v * x.v;
            out.value = (x.p + a / v2) * (x.v - b) - R * x.T;
            out.grad = {0.0, x.p + a / v2 - 2.0 * a * (x.v - b) / (v2 * x.v), x.v - b, -R};
            return out;
        };
        break;
    case GasKind::VirialFirstOrder:
        // p - RT/v - RTb/v^2 + a/v^2
        f1 = [=](const ThermoPoint& x) {
            ValueGradient<4> out;
            const double v2 = x.v * x.v;
            const double v3 = v2 * x.v;
            out.value = x.p - R * x.T / x.v - R * x.T * b / v2 + a / v2;
            out.grad = {0.0, R * x.T / v2 + 2.0 * R * x.T * b / v3 - 2.0 * a / v3, 1.0,
                        -R / x.v - R * b / v2};
            return out;
        };
        break;
    }
    return {f1, f2};
}

MassieuPotential massieu_potential(const GasSpec& spec)
{
    validate(spec);
    const double n = spec.n;
    const double R = spec.R;
    const double a = spec.a;
    const double b = spec.b;
    switch (spec.kind) {
    case GasKind::Ideal:
        return [=](double v, double T) {
            PotentialJet j;
            j.phi = std::log(v) + 0.5 * n * std::log(T);
            j.phi_v = 1.0 / v;
            j.phi_T = 0.5 * n / T;
            j.phi_vv = -1.0 / (v * v);
            j.phi_TT = -0.5 * n / (T * T);
            return j;
        };
    case GasKind::VanDerWaals:
        return [=](double v, double T) {
            PotentialJet j;
            const double vb = v - b;
            j.phi = std::log(vb) + 0.5 * n * std::log(T) + a / (R * T * v);
            j.phi_v = 1.0 / vb - a / (R * T * v * v);
            j.phi_T = 0.5 * n / T - a / (R * T * T * v);
            j.phi_vv = -1.0 / (vb * vb) + 2.0 * a / (R * T * v * v * v);
            j.phi_vT = a / (R * T * T * v * v);
            j.phi_TT = -0.5 * n / (T * T) + 2.0 * a / (R * T * T * T * v);
            return j;
        };
    case GasKind::VirialFirstOrder:
        // A1(T) = b - a/(RT); phi = ln v + (n/2) ln T - b/v + a/(RTv)
        return [=](double v, double T) {
            PotentialJet j;
            j.phi = std::log(v) + 0.5 * n * std::log(T) - b / v + a / (R * T * v);
            j.phi_v = 1.0 / v + b / (v * v) - a / (R * T * v * v);
            j.phi_T = 0.5 * n / T - a / (R * T * T * v);
            j.phi_vv = -1.0 / (v * v) - 2.0 * b / (v * v * v) + 2.0 * a / (R * T * v * v * v);
            j.phi_vT = a / (R * T * T * v * v);
            j.phi_TT = -0.5 * n / (T * T) + 2.0 * a / (R * T * T * T * v);
            return j;
        };
    }
    throw DomainError("gas: unknown kind");
}

MassieuEvaluation massieu_planck_eval(const MassieuPotential& phi, const GasSpec& spec, double v, double T)
{
    require_positive(T, "T");
    require_positive(v, "v");
    if (spec.kind == GasKind::VanDerWaals && !(v > spec.b)) {
        throw DomainError("gas: van der Waals potential needs v > b");
    }
    const PotentialJet j = phi(v, T);
    MassieuEvaluation out;
    out.p = spec.R * T * j.phi_v;
    out.e = spec.R * T * T * j.phi_T;
    out.thermal_term = j.phi_TT + 2.0 * j.phi_T / T;
    out.phi_vv = j.phi_vv;
    out.applicable = out.thermal_term > 0.0 && out.phi_vv < 0.0;
    out.kappa.chart = Chart::TemperatureVolume;
    out.kappa.m(0, 0) = -spec.R * out.thermal_term;
    out.kappa.m(1, 1) = spec.R * out.phi_vv;
    return out;
}

ContactVector contact_field(const ContactFunction& f, const ContactPoint& x)
{
    require_positive(x.T, "T");
    const auto j = f(x);
    enum { S, E, V, P, T };
    const auto& g = j.grad;
    ContactVector out;
    out.de = x.T * (x.p * g[P] + x.T * g[T]);
    out.dv = -x.T * g[P];
    out.ds = j.value + x.T * g[T];
    out.dp = x.T * (g[V] - x.p * g[E]);
    out.dT = -x.T * (g[S] + x.T * g[E]);
    return out;
}

ProcessFields process_fields(const GasSpec& spec, double e, double v)
{
    validate(spec);
    require_positive(v, "v");
    const double n = spec.n;
    const double R = spec.R;
    ProcessFields out;
    switch (spec.kind) {
    case GasKind::Ideal:
        require_positive(e, "e");
        out.y1 = {0.0, -2.0 * e * v / (n * R)};
        out.y2 = {-2.0 * e * e / (n * R), 0.0};
        return out;
    case GasKind::VirialFirstOrder: {
        const double a = spec.a;
        const double w = e * v + a;
        if (!(w > 0.0)) throw DomainError("gas: virial process fields need e v + a > 0");
        out.y1 = {-2.0 * a * w / (R * v * v * n), -2.0 * w / (R * n)};
        out.y2 = {-2.0 * w * w / (n * R * v * v), 0.0};
        return out;
    }
    case GasKind::VanDerWaals: break;
    }
    throw DomainError("gas: process fields are defined for ideal and virial1 gases");
}

} // namespace thermopt::gas
