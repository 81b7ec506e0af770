#pragma once

// Minimal information gain (maximum entropy) measurement on a finite
// probability space. Given base probabilities q_i, values X(w_i) in R^d and a
// target expectation x, find the exponential tilt
//
//     rho_i = exp(<lambda, X_i>) / Z(lambda),   Z = sum_i q_i exp(<lambda, X_i>)
//
// with sum_i rho_i q_i X_i = x. H(lambda) = -ln Z(lambda) is the Hamiltonian
// of the Lagrangian manifold x = -dH/dlambda.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace thermopt::maxent {

struct DiscreteMeasurement {
    std::vector<double> base_probs;
    std::vector<Eigen::VectorXd> values;
    Eigen::VectorXd target;

    std::size_t outcomes() const { return base_probs.size(); }
    std::size_t dimension() const { return static_cast<std::size_t>(target.size()); }
};

/// Validates shapes and the probability simplex (positive, sum 1 within 1e-12).
/// Throws DomainError.
DiscreteMeasurement make_measurement(std::vector<double> base_probs,
                                     std::vector<Eigen::VectorXd> values,
                                     Eigen::VectorXd target);

struct MaxEntSolution {
    Eigen::VectorXd lambda;
    std::vector<double> density;
    double hamiltonian = 0.0;
    double info_gain = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 100;
    double hull_tol = 1e-10;
};

/// ln Z(lambda), evaluated with a max shift; never overflows.
double log_partition_function(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda);

/// Z(lambda). Throws RangeError when Z is not representable as a double.
double partition_function(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda);

/// H(lambda) = -ln Z(lambda).
double hamiltonian(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda);

/// Expectation of X under the tilted measure, i.e. -dH/dlambda.
Eigen::VectorXd tilted_mean(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda);

/// Covariance of X under the tilted measure, i.e. -Hess(H).
Eigen::MatrixXd tilted_covariance(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda);

/// True when the target lies in the interior of the convex hull of the values.
/// Decided by the LP  max t  s.t.  p_i >= t, sum p_i = 1, sum p_i X_i = x,
/// together with a rank check on the affine hull.
bool target_in_hull_interior(const DiscreteMeasurement& m, double tol = 1e-10);

/// Newton iteration on the convex dual ln Z(lambda) - <lambda, x> with
/// backtracking. Throws InfeasibleError or ConvergenceError.
MaxEntSolution solve_lambda(const DiscreteMeasurement& m, const SolveOptions& options = {});

/// I = sum_i rho_i ln(rho_i) q_i.
double information_gain(const DiscreteMeasurement& m, const MaxEntSolution& s);

/// mu_2 - mu_1 (x) mu_1 under p = rho q.
Eigen::MatrixXd variance_matrix(const DiscreteMeasurement& m, const MaxEntSolution& s);

} // namespace thermopt::maxent
