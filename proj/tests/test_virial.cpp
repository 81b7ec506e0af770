#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermopt/dynamics.hpp"
#include "thermopt/errors.hpp"
#include "thermopt/virial.hpp"

using namespace thermopt;
using namespace thermopt::virial;

namespace {

const gas::GasSpec kGas = testing_support::ideal3();
const ControlBudget kBudget{1.0};

// Direct transcription of the correction formulas in long double.
long double reference_Ha(const PhasePoint& p)
{
    const long double n = 3, R = 1, d = 1;
    const long double h = control::reduced_hamiltonian(kGas, kBudget, p);
    return std::exp((long double)p.q2 / p.q1) *
           ((long double)p.q1 * p.q1 * (R * d * n * n * n * p.l2 * p.l2 - 8 * h * h) - R * R * p.l2 * n * n * n * d) /
           (4 * p.q1 * n * R * h);
}

long double reference_Hb(const PhasePoint& p)
{
    const long double n = 3, R = 1, d = 1;
    const long double h = control::reduced_hamiltonian(kGas, kBudget, p);
    return std::exp((long double)p.q2 / p.q1) * R * d * n * n * p.l2 * (R - (long double)p.l2 * p.q1 * p.q1) /
           (4 * h * p.q1 * p.q1);
}

} // namespace

TEST_CASE("first-order corrections of H")
{
    CHECK(correction_Ha(kGas, kBudget, {1.0, 0.0, 0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(correction_Hb(kGas, kBudget, {1.0, 0.3, 0.2, 0.0}) == 0.0);
    CHECK(std::abs(correction_Hb(kGas, kBudget, {2.0, 0.3, 0.2, 0.25})) < 1e-15);

    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i) {
        const auto p = testing_support::random_phase_point(rng);
        CHECK(std::abs(correction_Ha(kGas, kBudget, p) - (double)reference_Ha(p)) < 1e-12 * (1 + std::abs((double)reference_Ha(p))));
        CHECK(std::abs(correction_Hb(kGas, kBudget, p) - (double)reference_Hb(p)) < 1e-12 * (1 + std::abs((double)reference_Hb(p))));
        const auto j = correction_jet(kGas, kBudget, Correction::A, p);
        CHECK(j.value == doctest::Approx(correction_Ha(kGas, kBudget, p)).epsilon(1e-14));
    }
}

TEST_CASE("denominator guard")
{
    // H vanishes where the radicand does: q1 = 1, q2 = 0, l1 = 0, l2 = R / q1^2.
    const PhasePoint zero{1.0, 0.0, 0.0, 1.0};
    CHECK(control::reduced_hamiltonian(kGas, kBudget, zero) < 1e-10);
    CHECK_THROWS_AS(correction_Ha(kGas, kBudget, zero), NearSingularError);
    CHECK_THROWS_AS(correction_Hb(kGas, kBudget, zero), NearSingularError);
}

TEST_CASE("perturbed Hamiltonian")
{
    const PhasePoint p{1.3, -0.2, 0.4, 0.1};
    const double h = control::reduced_hamiltonian(kGas, kBudget, p);
    CHECK(perturbed_hamiltonian({kGas, kBudget, 0.0, 0.0}, p) == h);
    const double one = perturbed_hamiltonian({kGas, kBudget, 0.01, 0.0}, p) - h;
    const double two = perturbed_hamiltonian({kGas, kBudget, 0.02, 0.0}, p) - h;
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
    CHECK(one / 0.01 == doctest::Approx(correction_Ha(kGas, kBudget, p)).epsilon(1e-10));

    const PerturbedHamiltonian ph{kGas, kBudget, 0.01, 0.02};
    const auto f = perturbed_hamiltonian_function(ph);
    const auto fd = dynamics::with_fd_gradient([&](const PhasePoint& x) { return perturbed_hamiltonian(ph, x); });
    const auto a = f(p);
    const auto b = fd(p);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a.grad[i] - b.grad[i]) < 1e-7);

    const auto traj = dynamics::flow(f, p, 5.0);
    double drift = 0.0;
    const double h0 = perturbed_hamiltonian(ph, p);
    for (const auto& x : traj.states) drift = std::max(drift, std::abs(perturbed_hamiltonian(ph, x) - h0) / std::abs(h0));
    CHECK(drift <= 1e-8);
}

TEST_CASE("angle chart round trip")
{
    for (const InvariantLevels lv : {InvariantLevels{1.0, 0.5}, InvariantLevels{0.2, 2.0}}) {
        const angles::InvariantManifold m(kGas, kBudget, lv);
        const double lo = m.positive_roots().front();
        const double hi = m.positive_roots().size() > 1 ? m.positive_roots()[1] : 3.0 * lo;
        for (int branch : {1, -1}) {
            const AngleChart chart(kGas, kBudget, lv, 0.5 * (lo + hi), branch);
            for (double f : {0.05, 0.3, 0.7, 0.95}) {
                const double q1 = lo + f * (hi - lo);
                const double q2 = 0.3 - f;
                const auto w = chart.to_angles(q1, q2);
                const auto back = chart.from_angles(w[0], w[1]);
                CHECK(std::abs(back[0] - q1) < 1e-8);
                CHECK(std::abs(back[1] - q2) < 1e-8);
            }
            const auto range = chart.omega1_range();
            const double outside = std::isfinite(range[0]) ? range[0] - 1.0 : range[1] + 1.0;
            CHECK_THROWS_AS(chart.from_angles(outside, 0.0), ChartError);
        }
    }
}

TEST_CASE("second integral corrections")
{
    const InvariantLevels lv{1.0, 0.5};
    const AngleChart chart(kGas, kBudget, lv, 2.0, 1);
    const double base = chart.omega1_range()[0];
    CHECK(correction_G(chart, Correction::A, {0.3, 0.3}, 0.1) == 0.0);
    CHECK_THROWS_AS(correction_G(chart, Correction::A, {0.0, 0.3}, 0.1, 8), DomainError);

    // dG/dOmega1 = dH_a/dOmega2.
    const double w1 = base + 0.7;
    const double w2 = 0.1;
    const double h = 1e-4;
    const double gp = correction_G(chart, Correction::A, {base + 0.1, w1 + h}, w2);
    const double gm = correction_G(chart, Correction::A, {base + 0.1, w1 - h}, w2);
    const auto p = chart.phase_point(w1, w2);
    CHECK(std::abs((gp - gm) / (2 * h) - omega2_derivative(kGas, kBudget, Correction::A, p)) < 1e-5);

    // dH_a/dOmega2 from moving Omega2 through the chart inverse.
    const double s = 1e-5;
    const double up = correction_Ha(kGas, kBudget, chart.phase_point(w1, w2 + s));
    const double dn = correction_Ha(kGas, kBudget, chart.phase_point(w1, w2 - s));
    CHECK(std::abs((up - dn) / (2 * s) - omega2_derivative(kGas, kBudget, Correction::A, p)) < 1e-6);

    // Refining the grid leaves the value unchanged.
    const double coarse = correction_G(chart, Correction::B, {base + 0.1, base + 1.0}, w2, 16);
    const double fine = correction_G(chart, Correction::B, {base + 0.1, base + 1.0}, w2, 32);
    CHECK(std::abs(coarse - fine) < 1e-10);

    // Additivity over adjacent ranges.
    const double left = correction_G(chart, Correction::A, {base + 0.1, base + 0.5}, w2);
    const double right = correction_G(chart, Correction::A, {base + 0.5, base + 1.0}, w2);
    const double whole = correction_G(chart, Correction::A, {base + 0.1, base + 1.0}, w2);
    CHECK(std::abs(left + right - whole) < 1e-10);
}

TEST_CASE("mixed partials of G_a in angle coordinates")
{
    const InvariantLevels lv{1.0, 0.5};
    const AngleChart chart(kGas, kBudget, lv, 2.0, 1);
    const double base = chart.omega1_range()[0];
    auto g = [&](double w1, double w2) { return correction_G(chart, Correction::A, {base + 0.1, w1}, w2); };
    const double h = 1e-3;
    const double w1 = base + 0.7;
    const double w2 = 0.1;
    // d/dOmega2 (dG/dOmega1) against d/dOmega1 (dG/dOmega2), both by central differences.
    auto d1 = [&](double b) { return (g(w1 + h, b) - g(w1 - h, b)) / (2 * h); };
    auto d2 = [&](double a) { return (g(a, w2 + h) - g(a, w2 - h)) / (2 * h); };
    const double m12 = (d1(w2 + h) - d1(w2 - h)) / (2 * h);
    const double m21 = (d2(w1 + h) - d2(w1 - h)) / (2 * h);
    CHECK(std::abs(m12 - m21) < 1e-4);
}

TEST_CASE("order of the commutator of the corrected integrals")
{
    const std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4};
    const auto r = commutation_order_check(kGas, kBudget, {1.5, 0.0}, eps);
    CHECK(r.corrected.slope >= 1.8);
    CHECK(r.corrected.slope <= 2.2);
    CHECK(r.uncorrected.slope >= 0.8);
    CHECK(r.uncorrected.slope <= 1.2);
    CHECK_FALSE(r.corrected.floor_limited);

    CHECK_THROWS_AS(commutation_order_check(kGas, kBudget, {1.5, 0.0}, {1e-2, 1e-3}), DomainError);
    CHECK_THROWS_AS(commutation_order_check(kGas, kBudget, {1.5, 0.0}, {1e-3, 1e-2, 1e-4, 1e-5}), DomainError);
}

TEST_CASE("ideal system: the bracket of H and G vanishes")
{
    const InvariantLevels lv{1.5, 0.0};
    const auto r = commutation_order_check(kGas, kBudget, lv, {1e-2, 3e-3, 1e-3, 3e-4});
    const auto h = dynamics::reduced_hamiltonian_function(kGas, kBudget);
    const auto g = dynamics::integral_G_function();
    for (const auto& p : r.points) CHECK(std::abs(dynamics::canonical_bracket(h, g, p)) <= 1e-10);
}

TEST_CASE("log-log slope")
{
    CHECK(log_log_slope({1, 10, 100}, {3, 300, 30000}) == doctest::Approx(2.0).epsilon(1e-14));
}
