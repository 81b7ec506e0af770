#pragma once

// Shared fixtures for the test executables: deterministic random instances
// and independent reference computations.

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "thermopt/angles.hpp"
#include "thermopt/control.hpp"
#include "thermopt/gas.hpp"
#include "thermopt/maxent.hpp"

namespace testing_support {

using namespace thermopt;

inline gas::GasSpec ideal3() { return gas::make_gas(gas::GasKind::Ideal, 3.0, 1.0); }

/// Random discrete instance with k outcomes in dimension d whose target is a
/// strictly positive mixture of the values (hence interior to the hull when
/// the values span R^d affinely).
inline maxent::DiscreteMeasurement random_measurement(std::mt19937_64& rng, int k, int d)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> q(k);
    double sum = 0.0;
    for (auto& x : q) sum += (x = u(rng));
    for (auto& x : q) x /= sum;
    std::vector<Eigen::VectorXd> values;
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x(j) = g(rng);
        values.push_back(x);
    }
    std::vector<double> w(k);
    double wsum = 0.0;
    for (auto& x : w) wsum += (x = u(rng));
    Eigen::VectorXd target = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < k; ++i) target += (w[i] / wsum) * values[i];
    return maxent::make_measurement(q, values, target);
}

/// Phase point with q1 in [0.5, 2.5], other coordinates in [-1, 1].
inline control::PhasePoint random_phase_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.5, 2.5);
    return {pos(rng), u(rng), u(rng), u(rng)};
}

/// Sup-norm distance of two phase points.
inline double distance(const control::PhasePoint& a, const control::PhasePoint& b)
{
    return std::max({std::abs(a.q1 - b.q1), std::abs(a.q2 - b.q2), std::abs(a.l1 - b.l1), std::abs(a.l2 - b.l2)});
}

/// Brute-force maximum of the boundary Hamiltonian over a uniform tau grid.
inline double tau_grid_max(const gas::GasSpec& spec, const control::ControlBudget& budget,
                           const control::PhasePoint& p, int samples)
{
    double best = -1e300;
    for (int i = 0; i < samples; ++i) {
        const double tau = -M_PI + 2.0 * M_PI * i / samples;
        best = std::max(best, control::boundary_hamiltonian(spec, budget, p, tau));
    }
    return best;
}

/// Grid maximum refined by Brent's method inside the best grid cell.
inline double tau_refined_max(const gas::GasSpec& spec, const control::ControlBudget& budget,
                              const control::PhasePoint& p, int samples)
{
    const double step = 2.0 * M_PI / samples;
    double best_tau = -M_PI;
    double best = -1e300;
    for (int i = 0; i < samples; ++i) {
        const double tau = -M_PI + step * i;
        const double v = control::boundary_hamiltonian(spec, budget, p, tau);
        if (v > best) {
            best = v;
            best_tau = tau;
        }
    }
    auto neg = [&](double tau) { return -control::boundary_hamiltonian(spec, budget, p, tau); };
    const auto r = boost::math::tools::brent_find_minima(neg, best_tau - step, best_tau + step, 52);
    return std::max(best, -r.second);
}

} // namespace testing_support
