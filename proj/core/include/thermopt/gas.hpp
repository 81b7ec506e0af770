#pragma once

// Thermodynamic states of gases in specific variables (e, v) with the derived
// intensive quantities, the quadratic form kappa that decides applicability,
// the Poisson bracket on R^4(e, v, p, T), Massieu-Planck potentials, contact
// vector fields on R^5(s, e, v, p, T) and the process fields Y1, Y2.

#include <array>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace thermopt::gas {

enum class GasKind { Ideal, VanDerWaals, VirialFirstOrder };

std::string to_string(GasKind kind);
GasKind gas_kind_from_string(const std::string& name);

struct GasSpec {
    GasKind kind = GasKind::Ideal;
    double n = 3.0; ///< degrees of freedom
    double R = 1.0; ///< gas constant
    double a = 0.0; ///< interaction
    double b = 0.0; ///< covolume
};

/// Validated constructor: n > 0, R > 0, a, b >= 0 and a = b = 0 for ideal gases.
GasSpec make_gas(GasKind kind, double n, double R, double a = 0.0, double b = 0.0);
void validate(const GasSpec& spec);

/// First virial coefficient A1(T) = b - a/(RT).
double virial_A1(const GasSpec& spec, double T);

struct StatePoint {
    double e = 0.0;
    double v = 0.0;
    double p = 0.0;
    double T = 0.0;
    double s = 0.0;
    double gamma = 0.0; ///< chemical potential e - Ts + pv
};

StatePoint state_ideal(const GasSpec& spec, double e, double v);
StatePoint state_vdw(const GasSpec& spec, double T, double v);
/// Closed by phi = ln v + (n/2) ln T - A1(T)/v; s = R ln(T^{n/2} v) - R b / v.
StatePoint state_virial(const GasSpec& spec, double T, double v);
/// State of any model from the extensive pair (e, v).
StatePoint state_from_ev(const GasSpec& spec, double e, double v);

enum class Chart { EnergyVolume, TemperatureVolume };

struct QuadraticForm2 {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    Chart chart = Chart::EnergyVolume;

    bool negative_definite() const;
};

QuadraticForm2 kappa_ideal(const GasSpec& spec, double e, double v);
QuadraticForm2 kappa_vdw(const GasSpec& spec, double T, double v);

/// True iff kappa is strictly negative definite at the point.
bool applicability(const GasSpec& spec, const StatePoint& point);

// --- functions with gradients -------------------------------------------

template <std::size_t N>
struct ValueGradient {
    double value = 0.0;
    std::array<double, N> grad{};
};

/// Point of R^4 ordered (e, v, p, T).
struct ThermoPoint {
    double e = 0.0;
    double v = 0.0;
    double p = 0.0;
    double T = 0.0;

    std::array<double, 4> coords() const { return {e, v, p, T}; }
    static ThermoPoint from(const std::array<double, 4>& c) { return {c[0], c[1], c[2], c[3]}; }
};

using ThermoFunction = std::function<ValueGradient<4>(const ThermoPoint&)>;

/// Wraps a value-only function with central-difference gradients, step
/// 1e-6 * max(1, |coordinate|).
ThermoFunction with_fd_gradient(std::function<double(const ThermoPoint&)> f);

/// [f, g] = 1/2 (pT(f_p g_e - f_e g_p) + T^2 (f_T g_e - f_e g_T) + T (f_v g_p - f_p g_v)).
double poisson_bracket_thermo(const ThermoFunction& f, const ThermoFunction& g, const ThermoPoint& x);

/// State equations (f1, f2) of the model in the form p - A(v,T), e - B(v,T)
/// (the ideal gas uses f1 = pv - RT).
std::pair<ThermoFunction, ThermoFunction> state_equations(const GasSpec& spec);

// --- Massieu-Planck potentials -------------------------------------------

struct PotentialJet {
    double phi = 0.0;
    double phi_v = 0.0;
    double phi_T = 0.0;
    double phi_vv = 0.0;
    double phi_vT = 0.0;
    double phi_TT = 0.0;
};

using MassieuPotential = std::function<PotentialJet(double v, double T)>;

/// ideal: ln v + (n/2) ln T; vdW: ln(v-b) + (n/2) ln T + a/(RTv);
/// virial: ln v + (n/2) ln T - A1(T)/v.
MassieuPotential massieu_potential(const GasSpec& spec);

struct MassieuEvaluation {
    double p = 0.0;
    double e = 0.0;
    double thermal_term = 0.0; ///< phi_TT + 2 phi_T / T, must be > 0
    double phi_vv = 0.0;       ///< must be < 0
    bool applicable = false;
    QuadraticForm2 kappa;      ///< R(-(thermal_term) dT^2 + phi_vv dv^2), chart (T, v)
};

MassieuEvaluation massieu_planck_eval(const MassieuPotential& phi, const GasSpec& spec, double v, double T);

// --- contact vector fields -------------------------------------------------

/// Point of R^5 ordered (s, e, v, p, T).
struct ContactPoint {
    double s = 0.0;
    double e = 0.0;
    double v = 0.0;
    double p = 0.0;
    double T = 0.0;

    std::array<double, 5> coords() const { return {s, e, v, p, T}; }
    static ContactPoint from(const std::array<double, 5>& c) { return {c[0], c[1], c[2], c[3], c[4]}; }
};

using ContactFunction = std::function<ValueGradient<5>(const ContactPoint&)>;

ContactFunction with_fd_gradient(std::function<double(const ContactPoint&)> f);

struct ContactVector {
    double de = 0.0;
    double dv = 0.0;
    double ds = 0.0;
    double dp = 0.0;
    double dT = 0.0;

    /// Components in the coordinate order (s, e, v, p, T).
    std::array<double, 5> in_point_order() const { return {ds, de, dv, dp, dT}; }
};

/// X_f = T(p f_p + T f_T) d_e - T f_p d_v + (f + T f_T) d_s + T(f_v - p f_e) d_p - T(f_s + T f_e) d_T.
ContactVector contact_field(const ContactFunction& f, const ContactPoint& x);

// --- process fields --------------------------------------------------------

struct TangentField {
    double coeff_e = 0.0;
    double coeff_v = 0.0;
};

struct ProcessFields {
    TangentField y1;
    TangentField y2;
};

/// Y1, Y2 on the state manifold in chart (e, v). Defined for ideal and
/// first-order virial gases. Y3 vanishes identically and is not returned.
ProcessFields process_fields(const GasSpec& spec, double e, double v);

} // namespace thermopt::gas
