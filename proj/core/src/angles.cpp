#include "thermopt/angles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "thermopt/dynamics.hpp"
#include "thermopt/errors.hpp"

namespace thermopt::angles {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr unsigned kQuadDepth = 15;

// Real roots of  a q^2 + b q + c  (a != 0), ascending. Returns false when complex.
bool quadratic_roots(double a, double b, double c, std::array<double, 2>& roots, double& disc_out)
{
    const double disc = b * b - 4.0 * a * c;
    disc_out = disc;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    if (b == 0.0) {
        const double r = sq / (2.0 * std::abs(a));
        roots = {-r, r};
        return true;
    }
    const double t = -0.5 * (b + std::copysign(sq, b));
    double r1 = t / a;
    double r2 = c / t;
    if (r1 > r2) std::swap(r1, r2);
    roots = {r1, r2};
    return true;
}

void require_h1(const InvariantLevels& levels)
{
    if (!(levels.h1 > 0.0) || !std::isfinite(levels.h1)) {
        throw DegenerateLevelsError("angles: level h1 must be positive (h1 = " + std::to_string(levels.h1) + ")");
    }
    if (!std::isfinite(levels.h2)) throw DegenerateLevelsError("angles: level h2 must be finite");
}

template <typename F>
double gk_integrate(F f, double a, double b)
{
    if (a == b) return 0.0;
    double error = 0.0;
    // The error estimate is roundoff-limited on short intervals, where one
    // 31-point pass of a smooth integrand is already exact to working precision.
    const bool short_interval = std::abs(b - a) <= 1e-3 * std::max(std::abs(a), std::abs(b));
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, short_interval ? 0 : kQuadDepth,
                                                                          kQuadTol, &error);
}

// Bracketed root of a monotone function on [lo, hi] (f(lo), f(hi) of opposite sign).
template <typename F>
double bracketed_root(F f, double lo, double hi, double flo, double fhi)
{
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    const double floor = 1e-15 * std::max(std::abs(lo), std::abs(hi));
    auto tol = [floor](double x, double y) { return std::abs(x - y) <= std::max(floor, 2e-16 * std::max(std::abs(x), std::abs(y))); };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

} // namespace

InvariantLevels levels_of(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    return {control::reduced_hamiltonian(spec, budget, p), dynamics::integral_G(p)};
}

int branch_of(const PhasePoint& p) { return p.q1 * p.l1 + p.q2 * p.l2 >= 0.0 ? 1 : -1; }

double discriminant_D(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1)
{
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    const double h1 = levels.h1;
    const double h2 = levels.h2;
    const double c4 = 4.0 * h1 * h1;
    const double c2 = -d * R * n * n * h2 * h2;
    const double c1 = 2.0 * d * R * R * n * n * h2;
    const double c0 = -d * R * R * R * n * n;
    return 2.0 * R * d * n * ((((c4 * q1) * q1 + c2) * q1 + c1) * q1 + c0);
}

int component_count_formula(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels)
{
    const double h2sq = levels.h2 * levels.h2;
    return h2sq * h2sq * budget.delta * spec.n * spec.n - 64.0 * spec.R * levels.h1 * levels.h1 >= 0.0 ? 3 : 2;
}

int component_count_by_roots(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels)
{
    require_h1(levels);
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    const double lead = 4.0 * levels.h1 * levels.h1;
    // Monic quartic q^4 + m2 q^2 + m1 q + m0.
    const double m2 = -d * R * n * n * levels.h2 * levels.h2 / lead;
    const double m1 = 2.0 * d * R * R * n * n * levels.h2 / lead;
    const double m0 = -d * R * R * R * n * n / lead;
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(3, 2) = 1.0;
    companion(0, 3) = -m0;
    companion(1, 3) = -m1;
    companion(2, 3) = -m2;
    companion(3, 3) = 0.0;
    const Eigen::EigenSolver<Eigen::Matrix4d> es(companion, false);
    std::vector<double> roots;
    for (int i = 0; i < 4; ++i) {
        const auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
    }
    std::sort(roots.begin(), roots.end());

    auto positive = [&](double q) { return discriminant_D(spec, budget, levels, q) > 0.0; };
    if (roots.empty()) return positive(0.0) ? 1 : 0;
    int count = 0;
    const double span = 1.0 + std::abs(roots.front()) + std::abs(roots.back());
    if (positive(roots.front() - span)) ++count;
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        if (roots[i + 1] > roots[i] && positive(0.5 * (roots[i] + roots[i + 1]))) ++count;
    }
    if (positive(roots.back() + span)) ++count;
    return count;
}

int component_count(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels)
{
    require_h1(levels);
    const int formula = component_count_formula(spec, budget, levels);
    const double h2sq = levels.h2 * levels.h2;
    const double lhs = h2sq * h2sq * budget.delta * spec.n * spec.n;
    const double rhs = 64.0 * spec.R * levels.h1 * levels.h1;
    // On the equality boundary D has a double root and numerical root counting
    // cannot resolve the touching point; the formula is authoritative there.
    if (std::abs(lhs - rhs) <= 1e-9 * (lhs + rhs)) return formula;
    const int counted = component_count_by_roots(spec, budget, levels);
    if (counted != formula) {
        throw InternalConsistencyError("angles: component count " + std::to_string(formula) +
                                       " from the level relation, " + std::to_string(counted) +
                                       " from the roots of D");
    }
    return formula;
}

std::vector<double> singular_set(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels)
{
    const InvariantManifold m(spec, budget, levels);
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    for (double r : m.positive_roots()) {
        const double t1 = 4.0 * levels.h1 * levels.h1 * r * r * r * r;
        const double t2 = d * R * n * n * (R - levels.h2 * r) * (R - levels.h2 * r);
        const double scale = 2.0 * R * d * n * std::max({t1, t2, 1.0});
        if (std::abs(discriminant_D(spec, budget, levels, r)) > 1e-9 * scale) {
            throw InternalConsistencyError("angles: root " + std::to_string(r) + " of D fails its residual check");
        }
    }
    return m.positive_roots();
}

std::array<double, 2> lambda_on_M(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                                  double q1, double q2, int branch)
{
    if (!(q1 > 0.0)) throw DomainError("angles: q1 must be positive");
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    double D = discriminant_D(spec, budget, levels, q1);
    const double t1 = 4.0 * levels.h1 * levels.h1 * q1 * q1 * q1 * q1;
    const double t2 = d * R * n * n * (R - levels.h2 * q1) * (R - levels.h2 * q1);
    const double scale = 2.0 * R * d * n * std::max({t1, t2, 1.0});
    if (D < -1e-12 * scale) {
        throw OffManifoldError("angles: D(q1) = " + std::to_string(D) + " < 0; (q1, q2) is not under M");
    }
    D = std::max(D, 0.0);
    const double sign = branch >= 0 ? 1.0 : -1.0;
    const double l1 = (-2.0 * levels.h2 * R * d * n * q2 + sign * std::sqrt(D)) / (2.0 * R * n * d * q1 * q1);
    return {l1, levels.h2 / q1};
}

// ---------------------------------------------------------------------------

InvariantManifold::InvariantManifold(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels)
    : spec_(spec), budget_(budget), levels_(levels)
{
    require_h1(levels);
    const double n = spec.n;
    const double R = spec.R;
    const double d = budget.delta;
    k_ = 2.0 * R * d * n;
    lead_ = 2.0 * levels.h1;
    c_ = n * std::sqrt(d * R);
    double disc = 0.0;
    // 4 h1^2 q^4 - c^2 (R - h2 q)^2 = (2h1 q^2 + c h2 q - c R)(2h1 q^2 - c h2 q + c R)
    quadratic_roots(lead_, c_ * levels.h2, -c_ * R, a_roots_, disc);
    b_real_ = quadratic_roots(lead_, -c_ * levels.h2, c_ * R, b_roots_, disc);
    if (!b_real_) {
        b_roots_ = {c_ * levels.h2 / (2.0 * lead_), std::sqrt(-disc) / (2.0 * lead_)};
    }
    std::vector<double> roots(a_roots_.begin(), a_roots_.end());
    if (b_real_) roots.insert(roots.end(), b_roots_.begin(), b_roots_.end());
    std::sort(roots.begin(), roots.end());
    for (double r : roots) {
        if (!(r > 0.0)) continue;
        if (!positive_roots_.empty() && std::abs(r - positive_roots_.back()) <= 1e-12 * std::max(1.0, r)) continue;
        positive_roots_.push_back(r);
    }
}

double InvariantManifold::discriminant(double q1) const
{
    const double fa = lead_ * (q1 - a_roots_[0]) * (q1 - a_roots_[1]);
    const double fb = b_real_ ? lead_ * (q1 - b_roots_[0]) * (q1 - b_roots_[1])
                              : lead_ * ((q1 - b_roots_[0]) * (q1 - b_roots_[0]) + b_roots_[1] * b_roots_[1]);
    return k_ * fa * fb;
}

double InvariantManifold::reduced(double q, double root) const
{
    double fa;
    double fb;
    if (root == a_roots_[0] || root == a_roots_[1]) {
        const double other = root == a_roots_[0] ? a_roots_[1] : a_roots_[0];
        fa = lead_ * (q - other);
        fb = b_real_ ? lead_ * (q - b_roots_[0]) * (q - b_roots_[1])
                     : lead_ * ((q - b_roots_[0]) * (q - b_roots_[0]) + b_roots_[1] * b_roots_[1]);
    } else {
        const double other = root == b_roots_[0] ? b_roots_[1] : b_roots_[0];
        fa = lead_ * (q - a_roots_[0]) * (q - a_roots_[1]);
        fb = lead_ * (q - other);
    }
    return k_ * fa * fb;
}

ComponentChart InvariantManifold::chart_at(double q1, int branch) const
{
    if (!(q1 > 0.0)) throw DomainError("angles: q1 must be positive");
    if (!(discriminant(q1) > 0.0)) {
        throw ChartError("angles: D(" + std::to_string(q1) + ") <= 0, no chart of M over this q1");
    }
    ComponentChart chart;
    chart.branch = branch >= 0 ? 1 : -1;
    bool have_lo = false;
    for (double r : positive_roots_) {
        if (r < q1) {
            chart.lo = r;
            have_lo = true;
        } else if (r > q1) {
            chart.hi = r;
            break;
        }
    }
    if (!have_lo) throw ChartError("angles: no turning point below q1");
    const bool double_b = b_real_ && std::abs(b_roots_[0] - b_roots_[1]) <= 1e-10 * std::max(1.0, std::abs(b_roots_[1]));
    auto is_b = [&](double r) { return b_real_ && (r == b_roots_[0] || r == b_roots_[1]); };
    if (double_b && (is_b(chart.lo) || (chart.bounded() && is_b(chart.hi)))) {
        throw DegenerateLevelsError("angles: chart endpoint is a double root of D");
    }
    return chart;
}

std::array<double, 2> InvariantManifold::lambda_at(double q1, double q2, int branch) const
{
    return lambda_on_M(spec_, budget_, levels_, q1, q2, branch);
}

double InvariantManifold::integral(Weight w, const ComponentChart& chart, double a, double b) const
{
    if (a == b) return 0.0;
    if (a > b) return -integral(w, chart, b, a);
    const double tol = 1e-12 * std::max(1.0, std::abs(chart.lo));
    if (a < chart.lo - tol || (chart.bounded() && b > chart.hi + tol)) {
        throw ChartError("angles: integration interval leaves the chart (crosses a root of D)");
    }
    a = std::max(a, chart.lo);
    if (chart.bounded()) b = std::min(b, chart.hi);

    const double n = spec_.n;
    const double R = spec_.R;
    const double d = budget_.delta;
    const double h1 = levels_.h1;
    const double h2 = levels_.h2;
    auto weight = [&](double q) {
        return w == Weight::Energy ? 4.0 * h1 * q * q : n * n * R * d * (R - h2 * q) / q;
    };

    const double lo = chart.lo;
    auto left_piece = [&](double x, double y) {
        // q = lo + u^2, sqrt(D) = u sqrt(D / (q - lo))
        auto f = [&](double u) {
            const double q = lo + u * u;
            return 2.0 * weight(q) / std::sqrt(reduced(q, lo));
        };
        return gk_integrate(f, std::sqrt(x - lo), std::sqrt(y - lo));
    };
    if (!chart.bounded()) return left_piece(a, b);

    const double hi = chart.hi;
    auto right_piece = [&](double x, double y) {
        // q = hi - u^2, sqrt(D) = u sqrt(D / (hi - q))
        auto f = [&](double u) {
            const double q = hi - u * u;
            return 2.0 * weight(q) / std::sqrt(-reduced(q, hi));
        };
        return gk_integrate(f, std::sqrt(hi - y), std::sqrt(hi - x));
    };
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    if (a < mid) total += left_piece(a, std::min(b, mid));
    if (b > mid) total += right_piece(std::max(a, mid), b);
    return total;
}

double InvariantManifold::energy_weighted_integral(const ComponentChart& chart, double a, double b,
                                                   const std::function<double(double)>& g, int panels) const
{
    if (a == b) return 0.0;
    if (a > b) return -energy_weighted_integral(chart, b, a, g, panels);
    if (panels < 1) throw DomainError("angles: at least one quadrature panel is needed");
    const double tol = 1e-12 * std::max(1.0, std::abs(chart.lo));
    if (a < chart.lo - tol || (chart.bounded() && b > chart.hi + tol)) {
        throw ChartError("angles: integration interval leaves the chart (crosses a root of D)");
    }
    a = std::max(a, chart.lo);
    if (chart.bounded()) b = std::min(b, chart.hi);
    const double h1 = levels_.h1;
    using Rule = boost::math::quadrature::gauss<double, 8>;
    auto composite = [&](auto f, double u0, double u1) {
        double sum = 0.0;
        const double w = (u1 - u0) / panels;
        for (int i = 0; i < panels; ++i) sum += Rule::integrate(f, u0 + i * w, i + 1 == panels ? u1 : u0 + (i + 1) * w);
        return sum;
    };
    const double lo = chart.lo;
    auto left_piece = [&](double x, double y) {
        auto f = [&](double u) {
            const double q = lo + u * u;
            return g(q) * 8.0 * h1 * q * q / std::sqrt(reduced(q, lo));
        };
        return composite(f, std::sqrt(x - lo), std::sqrt(y - lo));
    };
    if (!chart.bounded()) return left_piece(a, b);
    const double hi = chart.hi;
    auto right_piece = [&](double x, double y) {
        auto f = [&](double u) {
            const double q = hi - u * u;
            return g(q) * 8.0 * h1 * q * q / std::sqrt(-reduced(q, hi));
        };
        return composite(f, std::sqrt(hi - y), std::sqrt(hi - x));
    };
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    if (a < mid) total += left_piece(a, std::min(b, mid));
    if (b > mid) total += right_piece(std::max(a, mid), b);
    return total;
}

double InvariantManifold::integral1(const ComponentChart& chart, double a, double b) const
{
    return integral(Weight::Energy, chart, a, b);
}

double InvariantManifold::integral2(const ComponentChart& chart, double a, double b) const
{
    return integral(Weight::Volume, chart, a, b);
}

double InvariantManifold::omega1(const ComponentChart& chart, double q1_ref, double q1) const
{
    return chart.branch * integral1(chart, q1_ref, q1);
}

double InvariantManifold::omega2(const ComponentChart& chart, double q1_ref, double q1, double q2) const
{
    return q2 / q1 + chart.branch * integral2(chart, q1_ref, q1);
}

double InvariantManifold::time_to_turn(const ComponentChart& chart, double q1) const
{
    if (chart.branch > 0) {
        return chart.bounded() ? integral1(chart, q1, chart.hi) : std::numeric_limits<double>::infinity();
    }
    return integral1(chart, chart.lo, q1);
}

double InvariantManifold::advance_q1(const ComponentChart& chart, double q1, double dt) const
{
    if (dt < 0.0) throw DomainError("angles: advance_q1 needs dt >= 0");
    if (dt == 0.0) return q1;
    const double turn = time_to_turn(chart, q1);
    if (dt > turn * (1.0 + 1e-12)) {
        throw ChartError("angles: time step passes the turning point of the chart");
    }
    if (chart.branch > 0 && chart.bounded()) {
        const double hi = chart.hi;
        auto f = [&](double u) { return integral1(chart, q1, hi - u * u) - dt; };
        const double umax = std::sqrt(hi - q1);
        return hi - std::pow(bracketed_root(f, 0.0, umax, turn - dt, -dt), 2);
    }
    const double lo = chart.lo;
    if (chart.branch > 0) {
        auto f = [&](double u) { return integral1(chart, q1, lo + u * u) - dt; };
        double u0 = std::sqrt(q1 - lo);
        double u1 = std::max(2.0 * u0, u0 + 1.0);
        double f1 = f(u1);
        for (int k = 0; f1 < 0.0 && k < 200; ++k) {
            u0 = u1;
            u1 *= 2.0;
            f1 = f(u1);
        }
        if (f1 < 0.0) throw ChartError("angles: unbounded leg could not be bracketed");
        return lo + std::pow(bracketed_root(f, u0, u1, f(u0), f1), 2);
    }
    auto f = [&](double u) { return integral1(chart, lo + u * u, q1) - dt; };
    const double umax = std::sqrt(q1 - lo);
    return lo + std::pow(bracketed_root(f, 0.0, umax, turn - dt, -dt), 2);
}

double omega1(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_ref,
              double q1, int branch)
{
    const InvariantManifold m(spec, budget, levels);
    const auto chart = m.chart_at(q1_ref, branch);
    if (!(q1 >= chart.lo && (!chart.bounded() || q1 <= chart.hi))) {
        throw ChartError("angles: q1 and q1_ref lie in different charts");
    }
    return m.omega1(chart, q1_ref, q1);
}

double omega2(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels, double q1_ref,
              double q1, double q2, int branch)
{
    const InvariantManifold m(spec, budget, levels);
    const auto chart = m.chart_at(q1_ref, branch);
    if (!(q1 >= chart.lo && (!chart.bounded() || q1 <= chart.hi))) {
        throw ChartError("angles: q1 and q1_ref lie in different charts");
    }
    return m.omega2(chart, q1_ref, q1, q2);
}

AngleSolution solve_by_angles(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                              const PhasePoint& start, double t, const AngleSolveOptions& options)
{
    if (!(t >= 0.0)) throw DomainError("angles: solve_by_angles needs t >= 0");
    const auto actual = levels_of(spec, budget, start);
    if (std::abs(actual.h1 - levels.h1) > 1e-8 * std::max(1.0, levels.h1) ||
        std::abs(actual.h2 - levels.h2) > 1e-8 * std::max(1.0, std::abs(levels.h2))) {
        throw OffManifoldError("angles: start point is not on the requested level set");
    }
    const InvariantManifold m(spec, budget, levels);
    auto chart = m.chart_at(start.q1, branch_of(start));

    AngleSolution out;
    double q1 = start.q1;
    double ratio = start.q2 / start.q1; // Omega2 - s int f2, tracked leg by leg
    double remaining = t;
    while (remaining > 0.0) {
        const double turn = m.time_to_turn(chart, q1);
        if (remaining <= turn) {
            const double next = m.advance_q1(chart, q1, remaining);
            ratio -= chart.branch * m.integral2(chart, q1, next);
            q1 = next;
            break;
        }
        if (!options.continue_across_turns) {
            throw ChartError("angles: turning point reached after " + std::to_string(t - remaining + turn));
        }
        const double root = chart.branch > 0 ? chart.hi : chart.lo;
        ratio -= chart.branch * m.integral2(chart, q1, root);
        q1 = root;
        remaining -= turn;
        chart.branch = -chart.branch;
        ++out.flips;
    }
    const double q2 = ratio * q1;
    const auto lambda = m.lambda_at(q1, q2, chart.branch);
    out.point = PhasePoint{q1, q2, lambda[0], lambda[1]};
    out.branch = chart.branch;
    return out;
}

} // namespace thermopt::angles
