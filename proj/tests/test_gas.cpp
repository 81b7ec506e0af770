#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermopt/errors.hpp"
#include "thermopt/gas.hpp"

using namespace thermopt;
using namespace thermopt::gas;

namespace {

const GasSpec kIdeal = make_gas(GasKind::Ideal, 3, 1);
const GasSpec kVdw = make_gas(GasKind::VanDerWaals, 3, 1, 1.0, 0.1);

ThermoPoint on_manifold(const StatePoint& s) { return {s.e, s.v, s.p, s.T}; }

// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i with central differences in (e, v).
std::array<double, 2> fd_commutator(const GasSpec& spec, double e, double v, double h)
{
    auto y1 = [&](double ee, double vv) {
        const auto f = process_fields(spec, ee, vv).y1;
        return std::array<double, 2>{f.coeff_e, f.coeff_v};
    };
    auto y2 = [&](double ee, double vv) {
        const auto f = process_fields(spec, ee, vv).y2;
        return std::array<double, 2>{f.coeff_e, f.coeff_v};
    };
    const auto a = y1(e, v);
    const auto b = y2(e, v);
    std::array<double, 2> out{};
    for (int i = 0; i < 2; ++i) {
        const double dy2_de = (y2(e + h, v)[i] - y2(e - h, v)[i]) / (2 * h);
        const double dy2_dv = (y2(e, v + h)[i] - y2(e, v - h)[i]) / (2 * h);
        const double dy1_de = (y1(e + h, v)[i] - y1(e - h, v)[i]) / (2 * h);
        const double dy1_dv = (y1(e, v + h)[i] - y1(e, v - h)[i]) / (2 * h);
        out[i] = a[0] * dy2_de + a[1] * dy2_dv - b[0] * dy1_de - b[1] * dy1_dv;
    }
    return out;
}

} // namespace

TEST_CASE("gas specification validation")
{
    CHECK_THROWS_AS(make_gas(GasKind::Ideal, 3, 1, 0.5, 0.0), DomainError);
    CHECK_THROWS_AS(make_gas(GasKind::VanDerWaals, -1, 1, 0.5, 0.1), DomainError);
    CHECK_THROWS_AS(make_gas(GasKind::VanDerWaals, 3, 0, 0.5, 0.1), DomainError);
    CHECK_THROWS_AS(gas_kind_from_string("steam"), ValidationError);
    CHECK(gas_kind_from_string(to_string(GasKind::VirialFirstOrder)) == GasKind::VirialFirstOrder);
    CHECK(virial_A1(kVdw, 2.0) == doctest::Approx(0.1 - 0.5));
}

TEST_CASE("ideal gas states")
{
    const auto s = state_ideal(kIdeal, 1.0, 1.0);
    CHECK(s.T == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.p == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(s.s) < 1e-15);
    CHECK(std::abs(s.gamma - (s.e - s.T * s.s + s.p * s.v)) < 1e-12);

    // s = R ((n/2) ln e + ln v): e = 1, v = exp(1) gives 1 and e = v = exp(1) gives 5/2.
    CHECK(state_ideal(kIdeal, 1.0, std::exp(1.0)).s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(state_ideal(kIdeal, std::exp(1.0), std::exp(1.0)).s == doctest::Approx(2.5).epsilon(1e-14));

    CHECK_THROWS_AS(state_ideal(kIdeal, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(state_ideal(kIdeal, 1.0, -1.0), DomainError);
}

TEST_CASE("van der Waals states")
{
    const auto s = state_vdw(kVdw, 1.0, 1.0);
    CHECK(s.p == doctest::Approx(1.0 / 0.9 - 1.0).epsilon(1e-14));
    CHECK(s.e == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(state_vdw(kVdw, 1.0, 0.1), DomainError);

    // a = b = 0: same p, e, T as the ideal gas; entropy differs by the
    // constant (n/2) R ln(nR/2) because the ideal chart uses ln e.
    const auto zero = make_gas(GasKind::VanDerWaals, 3, 1, 0.0, 0.0);
    for (double T : {0.3, 1.0, 4.0}) {
        for (double v : {0.5, 2.0}) {
            const auto a = state_vdw(zero, T, v);
            const auto b = state_ideal(kIdeal, 1.5 * T, v);
            CHECK(std::abs(a.p - b.p) < 1e-12);
            CHECK(std::abs(a.e - b.e) < 1e-12);
            CHECK(std::abs(a.T - b.T) < 1e-12);
            CHECK(std::abs((b.s - a.s) - 1.5 * std::log(1.5)) < 1e-12);
        }
    }
}

TEST_CASE("state_from_ev inverts the energy relation")
{
    const auto s = state_from_ev(kVdw, 0.5, 1.0);
    CHECK(s.T == doctest::Approx(1.0).epsilon(1e-14));
    const auto vir = make_gas(GasKind::VirialFirstOrder, 3, 1, 0.2, 0.05);
    const auto t = state_from_ev(vir, 1.0, 2.0);
    CHECK(t.e == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("virial states satisfy the first and second law")
{
    const auto vir = make_gas(GasKind::VirialFirstOrder, 3, 1, 0.4, 0.2);
    const double h = 1e-6;
    for (double T : {0.8, 1.5}) {
        for (double v : {1.0, 3.0}) {
            // ds = (de + p dv)/T along T and v separately.
            const auto c = state_virial(vir, T, v);
            const auto tp = state_virial(vir, T + h, v);
            const auto tm = state_virial(vir, T - h, v);
            const auto vp = state_virial(vir, T, v + h);
            const auto vm = state_virial(vir, T, v - h);
            CHECK(std::abs((tp.s - tm.s) - (tp.e - tm.e) / c.T) < 1e-9);
            CHECK(std::abs((vp.s - vm.s) - ((vp.e - vm.e) + c.p * 2 * h) / c.T) < 1e-9);
        }
    }
}

TEST_CASE("quadratic forms and applicability")
{
    const auto k = kappa_ideal(kIdeal, 1.0, 1.0);
    CHECK(k.m(0, 0) == doctest::Approx(-1.5));
    CHECK(k.m(1, 1) == doctest::Approx(-1.0));
    CHECK(k.negative_definite());
    CHECK(kappa_ideal(kIdeal, 2.0, 1.0).m(0, 0) == doctest::Approx(-1.5 / 4));

    const auto zero = make_gas(GasKind::VanDerWaals, 3, 1, 0.0, 0.0);
    CHECK(kappa_vdw(zero, 2.0, 3.0).m(1, 1) == doctest::Approx(-1.0 / 9.0));

    const double boundary = 2.0 * 1.0 * 0.9 * 0.9 / 1.0;
    CHECK(boundary == doctest::Approx(1.62));
    CHECK(std::abs(kappa_vdw(kVdw, boundary, 1.0).m(1, 1)) < 1e-14);
    CHECK(kappa_vdw(kVdw, 1.7, 1.0).m(1, 1) < 0.0);
    CHECK(applicability(kVdw, state_vdw(kVdw, 1.7, 1.0)));
    CHECK_FALSE(applicability(kVdw, state_vdw(kVdw, 1.5, 1.0)));
    CHECK_FALSE(applicability(kVdw, state_vdw(kVdw, boundary, 1.0)));
    CHECK(applicability(kIdeal, state_ideal(kIdeal, 0.01, 100.0)));
}

TEST_CASE("thermodynamic bracket of state equations")
{
    auto [f1, f2] = state_equations(kIdeal);
    const auto x = on_manifold(state_ideal(kIdeal, 1.3, 0.7));
    CHECK(poisson_bracket_thermo(f1, f1, x) == 0.0);
    CHECK(std::abs(poisson_bracket_thermo(f1, f2, x)) < 1e-12);
    // Off the manifold the ideal bracket is T f1 / 2.
    ThermoPoint off{1.3, 0.7, 2.0, 0.9};
    CHECK(poisson_bracket_thermo(f1, f2, off) == doctest::Approx(0.5 * off.T * (off.p * off.v - off.T)));

    auto [g1, g2] = state_equations(kVdw);
    const auto y = on_manifold(state_vdw(kVdw, 2.0, 1.5));
    CHECK(std::abs(poisson_bracket_thermo(g1, g2, y)) < 1e-12);

    // f1 = p - T v, f2 = e - T v violate the compatibility condition: the
    // bracket is T^2 / 2 on their common zero set.
    auto h1 = with_fd_gradient([](const ThermoPoint& z) { return z.p - z.T * z.v; });
    auto h2 = with_fd_gradient([](const ThermoPoint& z) { return z.e - z.T * z.v; });
    const ThermoPoint z{2.0 * 0.5, 0.5, 2.0 * 0.5, 2.0};
    CHECK(poisson_bracket_thermo(h1, h2, z) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("Massieu-Planck reconstruction")
{
    const auto ideal = massieu_planck_eval(massieu_potential(kIdeal), kIdeal, 2.0, 1.0);
    CHECK(ideal.p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ideal.e == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(ideal.phi_vv == doctest::Approx(-0.25));
    CHECK(ideal.thermal_term == doctest::Approx(1.5));
    CHECK(ideal.applicable);

    const auto phi = massieu_potential(kVdw);
    for (double T : {0.5, 2.0}) {
        for (double v : {0.3, 1.0, 4.0}) {
            const auto m = massieu_planck_eval(phi, kVdw, v, T);
            const auto s = state_vdw(kVdw, T, v);
            CHECK(std::abs(m.p - s.p) < 1e-12);
            CHECK(std::abs(m.e - s.e) < 1e-12);
            CHECK(m.applicable == applicability(kVdw, s));
        }
    }
}

TEST_CASE("contact vector fields")
{
    auto zero = with_fd_gradient([](const ContactPoint&) { return 0.0; });
    const ContactPoint x{0.3, 1.0, 2.0, 0.5, 1.0};
    const auto z = contact_field(zero, x);
    for (double c : z.in_point_order()) CHECK(c == 0.0);

    auto entropy = with_fd_gradient([](const ContactPoint& p) { return p.s; });
    const auto f = contact_field(entropy, ContactPoint{0, 1, 1, 1, 1});
    CHECK(std::abs(f.de) < 1e-12);
    CHECK(std::abs(f.dv) < 1e-12);
    CHECK(std::abs(f.ds) < 1e-12);
    CHECK(std::abs(f.dp) < 1e-12);
    CHECK(f.dT == doctest::Approx(-1.0).epsilon(1e-10));

    // Tangency: X_f(f) = f f_s vanishes where f = pv - RT = 0.
    auto fn = [](const ContactPoint& p) { return p.p * p.v - p.T; };
    auto field = with_fd_gradient(fn);
    const ContactPoint on{0.2, 1.5, 2.0, 0.5, 1.0};
    const auto X = contact_field(field, on).in_point_order();
    const auto g = field(on).grad;
    double dir = 0.0;
    for (int i = 0; i < 5; ++i) dir += X[i] * g[i];
    CHECK(std::abs(dir) < 1e-10);
}

TEST_CASE("process fields")
{
    const auto f = process_fields(kIdeal, 1.0, 1.0);
    CHECK(f.y1.coeff_e == 0.0);
    CHECK(f.y1.coeff_v == doctest::Approx(-2.0 / 3.0));
    CHECK(f.y2.coeff_e == doctest::Approx(-2.0 / 3.0));
    CHECK(f.y2.coeff_v == 0.0);

    const auto vir0 = make_gas(GasKind::VirialFirstOrder, 3, 1, 0.0, 0.3);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int i = 0; i < 50; ++i) {
        const double e = u(rng);
        const double v = u(rng);
        const auto a = process_fields(vir0, e, v);
        const auto b = process_fields(kIdeal, e, v);
        CHECK(std::abs(a.y1.coeff_e - b.y1.coeff_e) <= 1e-14 * (1 + std::abs(b.y1.coeff_e)));
        CHECK(std::abs(a.y1.coeff_v - b.y1.coeff_v) <= 1e-14 * (1 + std::abs(b.y1.coeff_v)));
        CHECK(std::abs(a.y2.coeff_e - b.y2.coeff_e) <= 1e-14 * (1 + std::abs(b.y2.coeff_e)));
        CHECK(std::abs(a.y2.coeff_v - b.y2.coeff_v) <= 1e-14 * (1 + std::abs(b.y2.coeff_v)));

        const auto c = fd_commutator(kIdeal, e, v, 1e-5);
        const double k = 2.0 * e / 3.0;
        CHECK(std::abs(c[0] - k * b.y1.coeff_e) < 1e-6);
        CHECK(std::abs(c[1] - k * b.y1.coeff_v) < 1e-6);
    }
    CHECK_THROWS_AS(process_fields(kVdw, 1.0, 1.0), DomainError);
}
