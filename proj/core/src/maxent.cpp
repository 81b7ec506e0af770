#include "thermopt/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "thermopt/errors.hpp"

namespace thermopt::maxent {

namespace {

// Weights w_i = q_i exp(<lambda, X_i> - shift) and the shift itself.
struct ShiftedWeights {
    std::vector<double> w;
    double shift = 0.0;
    double sum = 0.0;
};

ShiftedWeights shifted_weights(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    if (!lambda.allFinite()) {
        throw DomainError("maxent: lambda must be finite");
    }
    const std::size_t k = m.outcomes();
    std::vector<double> dot(k);
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        dot[i] = lambda.dot(m.values[i]);
        shift = std::max(shift, dot[i]);
    }
    ShiftedWeights sw;
    sw.shift = shift;
    sw.w.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        sw.w[i] = m.base_probs[i] * std::exp(dot[i] - shift);
        sw.sum += sw.w[i];
    }
    return sw;
}

// Dense two-phase simplex for  max c^T z  s.t.  A z = b, z >= 0.
// Bland's rule; sized for the tiny hull LPs built below.
class Simplex {
public:
    Simplex(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c)
        : rows_(a.rows()), cols_(a.cols()), c_(std::move(c))
    {
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (b(i) < 0) {
                a.row(i) *= -1.0;
                b(i) = -b(i);
            }
        }
        // Tableau columns: original vars, artificials, rhs.
        t_ = Eigen::MatrixXd::Zero(rows_, cols_ + rows_ + 1);
        t_.leftCols(cols_) = a;
        t_.block(0, cols_, rows_, rows_).setIdentity();
        t_.col(cols_ + rows_) = b;
        basis_.resize(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
    }

    // Returns the optimum or nullopt-like NaN when infeasible.
    double solve()
    {
        const Eigen::Index total = cols_ + rows_;
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
        phase1.tail(rows_).setConstant(-1.0);
        run(phase1, total);
        double infeas = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] >= cols_) infeas += t_(i, total);
        }
        if (infeas > 1e-9 * (1.0 + t_.col(total).cwiseAbs().maxCoeff())) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        drive_out_artificials();
        Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
        phase2.head(cols_) = c_;
        run(phase2, cols_);
        double obj = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] < cols_) obj += c_(basis_[i]) * t_(i, total);
        }
        return obj;
    }

private:
    void pivot(Eigen::Index r, Eigen::Index col)
    {
        t_.row(r) /= t_(r, col);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (i != r && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(r);
        }
        basis_[r] = col;
    }

    // Maximize cost over columns [0, allowed).
    void run(const Eigen::VectorXd& cost, Eigen::Index allowed)
    {
        const Eigen::Index rhs = cols_ + rows_;
        constexpr double eps = 1e-12;
        for (int iter = 0; iter < 10000; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed && enter < 0; ++j) {
                if (std::find(basis_.begin(), basis_.end(), j) != basis_.end()) continue;
                double reduced = cost(j);
                for (Eigen::Index i = 0; i < rows_; ++i) reduced -= cost(basis_[i]) * t_(i, j);
                if (reduced > eps) enter = j;
            }
            if (enter < 0) return;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows_; ++i) {
                if (t_(i, enter) > eps) {
                    const double ratio = t_(i, rhs) / t_(i, enter);
                    if (ratio < best - eps ||
                        (leave >= 0 && std::abs(ratio - best) <= eps && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return; // unbounded; cannot happen for the hull LP
            pivot(leave, enter);
        }
    }

    void drive_out_artificials()
    {
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] < cols_) continue;
            for (Eigen::Index j = 0; j < cols_; ++j) {
                if (std::abs(t_(i, j)) > 1e-10 &&
                    std::find(basis_.begin(), basis_.end(), j) == basis_.end()) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    Eigen::Index rows_;
    Eigen::Index cols_;
    Eigen::VectorXd c_;
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
};

} // namespace

DiscreteMeasurement make_measurement(std::vector<double> base_probs,
                                     std::vector<Eigen::VectorXd> values,
                                     Eigen::VectorXd target)
{
    if (base_probs.empty()) throw DomainError("maxent: empty sample space");
    if (values.size() != base_probs.size()) {
        throw DomainError("maxent: " + std::to_string(values.size()) + " values for " +
                          std::to_string(base_probs.size()) + " outcomes");
    }
    if (target.size() == 0) throw DomainError("maxent: target must have dimension >= 1");
    double total = 0.0;
    for (double q : base_probs) {
        if (!(q > 0.0) || !std::isfinite(q)) {
            throw DomainError("maxent: base probabilities must be strictly positive");
        }
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("maxent: base probabilities sum to " + std::to_string(total));
    }
    for (const auto& x : values) {
        if (x.size() != target.size() || !x.allFinite()) {
            throw DomainError("maxent: value vectors must be finite and match the target dimension");
        }
    }
    if (!target.allFinite()) throw DomainError("maxent: target must be finite");
    return DiscreteMeasurement{std::move(base_probs), std::move(values), std::move(target)};
}

double log_partition_function(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    const auto sw = shifted_weights(m, lambda);
    return sw.shift + std::log(sw.sum);
}

double partition_function(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    const double log_z = log_partition_function(m, lambda);
    if (log_z > std::log(std::numeric_limits<double>::max())) {
        throw RangeError("maxent: partition function overflows (ln Z = " + std::to_string(log_z) + ")");
    }
    return std::exp(log_z);
}

double hamiltonian(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    return -log_partition_function(m, lambda);
}

Eigen::VectorXd tilted_mean(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    const auto sw = shifted_weights(m, lambda);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dimension()));
    for (std::size_t i = 0; i < m.outcomes(); ++i) mean += (sw.w[i] / sw.sum) * m.values[i];
    return mean;
}

Eigen::MatrixXd tilted_covariance(const DiscreteMeasurement& m, const Eigen::VectorXd& lambda)
{
    const auto sw = shifted_weights(m, lambda);
    const auto d = static_cast<Eigen::Index>(m.dimension());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < m.outcomes(); ++i) mean += (sw.w[i] / sw.sum) * m.values[i];
    // Centered accumulation keeps the result positive semidefinite.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < m.outcomes(); ++i) {
        const Eigen::VectorXd c = m.values[i] - mean;
        cov.noalias() += (sw.w[i] / sw.sum) * c * c.transpose();
    }
    return cov;
}

bool target_in_hull_interior(const DiscreteMeasurement& m, double tol)
{
    const auto d = static_cast<Eigen::Index>(m.dimension());
    const auto k = static_cast<Eigen::Index>(m.outcomes());
    if (k < d + 1) return false;

    Eigen::MatrixXd spread(d, k - 1);
    for (Eigen::Index i = 1; i < k; ++i) spread.col(i - 1) = m.values[i] - m.values[0];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(spread);
    lu.setThreshold(1e-12);
    if (lu.rank() < d) return false;

    // Centered values Y_i = X_i - x; p_i = (s - 1) + r_i with s, r_i >= 0.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d + 1, k + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd y = m.values[i] - m.target;
        sum_y += y;
        a.block(0, i + 1, d, 1) = y;
        a(d, i + 1) = 1.0;
    }
    a.block(0, 0, d, 1) = sum_y;
    a(d, 0) = static_cast<double>(k);
    b.head(d) = sum_y;
    b(d) = 1.0 + static_cast<double>(k);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
    c(0) = 1.0;

    const double s_opt = Simplex(a, b, c).solve();
    if (std::isnan(s_opt)) return false;
    return s_opt - 1.0 > tol;
}

MaxEntSolution solve_lambda(const DiscreteMeasurement& m, const SolveOptions& options)
{
    if (!(options.tol > 0.0)) throw DomainError("maxent: tol must be positive");
    if (!target_in_hull_interior(m, options.hull_tol)) {
        throw InfeasibleError("maxent: target is not in the interior of the convex hull of the values");
    }
    const auto d = static_cast<Eigen::Index>(m.dimension());
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d);

    auto dual = [&](const Eigen::VectorXd& l) { return log_partition_function(m, l) - l.dot(m.target); };

    int iter = 0;
    for (;; ++iter) {
        const Eigen::VectorXd grad = tilted_mean(m, lambda) - m.target;
        if (grad.norm() <= options.tol) break;
        if (iter >= options.max_iterations) {
            throw ConvergenceError("maxent: Newton iteration did not converge in " +
                                   std::to_string(options.max_iterations) + " iterations (residual " +
                                   std::to_string(grad.norm()) + ")");
        }
        const Eigen::MatrixXd hess = tilted_covariance(m, lambda);
        Eigen::VectorXd step = hess.ldlt().solve(-grad);
        if (!step.allFinite()) step = -grad;

        const double f0 = dual(lambda);
        const double slope = grad.dot(step);
        const double gnorm = grad.norm();
        // Near the optimum the dual decrease drops below its rounding error;
        // a halved gradient norm then accepts the step.
        auto acceptable = [&](const Eigen::VectorXd& x, double t) {
            if (dual(x) <= f0 + 1e-4 * t * slope + 1e-14 * (1.0 + std::abs(f0))) return true;
            return (tilted_mean(m, x) - m.target).norm() <= 0.5 * gnorm;
        };
        double t = 1.0;
        Eigen::VectorXd trial = lambda + step;
        while (t > 1e-12 && !acceptable(trial, t)) {
            t *= 0.5;
            trial = lambda + t * step;
        }
        lambda = trial;
    }

    MaxEntSolution s;
    s.iterations = iter;
    s.lambda = lambda;
    const double log_z = log_partition_function(m, lambda);
    s.hamiltonian = -log_z;
    s.density.resize(m.outcomes());
    for (std::size_t i = 0; i < m.outcomes(); ++i) {
        s.density[i] = std::exp(lambda.dot(m.values[i]) - log_z);
    }
    s.info_gain = information_gain(m, s);
    return s;
}

double information_gain(const DiscreteMeasurement& m, const MaxEntSolution& s)
{
    const double log_z = log_partition_function(m, s.lambda);
    double info = 0.0;
    for (std::size_t i = 0; i < m.outcomes(); ++i) {
        const double log_rho = s.lambda.dot(m.values[i]) - log_z;
        info += std::exp(log_rho) * log_rho * m.base_probs[i];
    }
    return info;
}

Eigen::MatrixXd variance_matrix(const DiscreteMeasurement& m, const MaxEntSolution& s)
{
    const auto d = static_cast<Eigen::Index>(m.dimension());
    Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd mu2 = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < m.outcomes(); ++i) {
        const double p = s.density[i] * m.base_probs[i];
        mu1 += p * m.values[i];
        mu2.noalias() += p * m.values[i] * m.values[i].transpose();
    }
    Eigen::MatrixXd var = mu2 - mu1 * mu1.transpose();
    return 0.5 * (var + var.transpose());
}

} // namespace thermopt::maxent
