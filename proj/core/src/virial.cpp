#include "thermopt/virial.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "thermopt/errors.hpp"

namespace thermopt::virial {

namespace {

void guard(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    if (!(p.q1 > 0.0)) throw DomainError("virial: q1 must be positive");
    const double h = control::reduced_hamiltonian(spec, budget, p);
    if (!(h > kHamiltonianGuard)) {
        throw NearSingularError("virial: H = " + std::to_string(h) + " is below the denominator guard");
    }
}

double root_in(const std::function<double(double)>& f, double lo, double hi)
{
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw ChartError("virial: chart inversion lost its bracket");
    const double floor = 1e-15 * std::max(std::abs(lo), std::abs(hi));
    auto tol = [floor](double x, double y) {
        return std::abs(x - y) <= std::max(floor, 2e-16 * std::max(std::abs(x), std::abs(y)));
    };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

// Signed Omega1-integral of dH/dOmega2 from q_from to q_to along the curve of
// fixed Omega2 through (q_anchor, ratio_anchor = q2/q1 there).
double integrate_along(const angles::InvariantManifold& m, const angles::ComponentChart& chart, Correction which,
                       double q_anchor, double ratio_anchor, double q_from, double q_to, int n_grid)
{
    const int s = chart.branch;
    const auto& spec = m.spec();
    const auto& budget = m.budget();
    auto g = [&](double q) {
        const double ratio = ratio_anchor - s * m.integral2(chart, q_anchor, q);
        const double q2 = ratio * q;
        const auto l = m.lambda_at(q, q2, s);
        return omega2_derivative(spec, budget, which, PhasePoint{q, q2, l[0], l[1]});
    };
    return s * m.energy_weighted_integral(chart, q_from, q_to, g, n_grid);
}

} // namespace

gas::ValueGradient<4> correction_jet(const GasSpec& spec, const ControlBudget& budget, Correction which,
                                     const PhasePoint& p)
{
    guard(spec, budget, p);
    using J = Jet<4>;
    const J q1 = J::variable(p.q1, 0);
    const J q2 = J::variable(p.q2, 1);
    const J l1 = J::variable(p.l1, 2);
    const J l2 = J::variable(p.l2, 3);
    const J v = which == Correction::A ? correction_Ha_expr(spec, budget.delta, q1, q2, l1, l2)
                                       : correction_Hb_expr(spec, budget.delta, q1, q2, l1, l2);
    return {v.v, v.d};
}

double correction_Ha(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    guard(spec, budget, p);
    return correction_Ha_expr(spec, budget.delta, p.q1, p.q2, p.l1, p.l2);
}

double correction_Hb(const GasSpec& spec, const ControlBudget& budget, const PhasePoint& p)
{
    guard(spec, budget, p);
    return correction_Hb_expr(spec, budget.delta, p.q1, p.q2, p.l1, p.l2);
}

double perturbed_hamiltonian(const PerturbedHamiltonian& ph, const PhasePoint& p)
{
    const double h = control::reduced_hamiltonian(ph.base, ph.budget, p);
    if (ph.a == 0.0 && ph.b == 0.0) return h;
    double out = h;
    if (ph.a != 0.0) out += ph.a * correction_Ha(ph.base, ph.budget, p);
    if (ph.b != 0.0) out += ph.b * correction_Hb(ph.base, ph.budget, p);
    return out;
}

dynamics::PhaseFunction perturbed_hamiltonian_function(const PerturbedHamiltonian& ph)
{
    return [ph](const PhasePoint& p) {
        auto out = control::reduced_hamiltonian_jet(ph.base, ph.budget, p);
        for (const auto& [coef, which] : {std::pair{ph.a, Correction::A}, std::pair{ph.b, Correction::B}}) {
            if (coef == 0.0) continue;
            const auto c = correction_jet(ph.base, ph.budget, which, p);
            out.value += coef * c.value;
            for (int i = 0; i < 4; ++i) out.grad[i] += coef * c.grad[i];
        }
        return out;
    };
}

double omega2_derivative(const GasSpec& spec, const ControlBudget& budget, Correction which, const PhasePoint& p)
{
    const auto j = correction_jet(spec, budget, which, p);
    return p.q1 * j.grad[1] - p.l2 * j.grad[2];
}

// ---------------------------------------------------------------------------

AngleChart::AngleChart(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                       double q1_seed, int branch)
    : manifold_(spec, budget, levels), chart_(manifold_.chart_at(q1_seed, branch))
{
    ref_ = chart_.default_reference();
}

AngleChart::AngleChart(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                       double q1_seed, int branch, double q1_ref)
    : manifold_(spec, budget, levels), chart_(manifold_.chart_at(q1_seed, branch)), ref_(q1_ref)
{
    if (!chart_.contains(q1_ref)) throw ChartError("virial: reference point outside the chart");
}

std::array<double, 2> AngleChart::to_angles(double q1, double q2) const
{
    return {manifold_.omega1(chart_, ref_, q1), manifold_.omega2(chart_, ref_, q1, q2)};
}

std::array<double, 2> AngleChart::omega1_range() const
{
    const double at_lo = manifold_.omega1(chart_, ref_, chart_.lo);
    const double at_hi = chart_.bounded() ? manifold_.omega1(chart_, ref_, chart_.hi)
                                          : chart_.branch * std::numeric_limits<double>::infinity();
    return {std::min(at_lo, at_hi), std::max(at_lo, at_hi)};
}

std::array<double, 2> AngleChart::from_angles(double omega1, double omega2) const
{
    const auto range = omega1_range();
    const double slack = 1e-12 * std::max(1.0, std::abs(omega1));
    if (!(omega1 >= range[0] - slack && omega1 <= range[1] + slack)) {
        throw ChartError("virial: Omega1 = " + std::to_string(omega1) + " is outside the chart");
    }
    // Omega1 = s I1(ref, q1); solve I1(ref, q1) = target in endpoint-regularized variables.
    const double target = chart_.branch * omega1;
    const double lo = chart_.lo;
    double q1;
    if (target <= 0.0) {
        auto f = [&](double u) { return manifold_.integral1(chart_, ref_, lo + u * u) - target; };
        q1 = lo + std::pow(root_in(f, 0.0, std::sqrt(ref_ - lo)), 2);
    } else if (chart_.bounded()) {
        const double hi = chart_.hi;
        auto f = [&](double u) { return manifold_.integral1(chart_, ref_, hi - u * u) - target; };
        q1 = hi - std::pow(root_in(f, 0.0, std::sqrt(hi - ref_)), 2);
    } else {
        auto f = [&](double u) { return manifold_.integral1(chart_, ref_, lo + u * u) - target; };
        double u0 = std::sqrt(ref_ - lo);
        double u1 = 2.0 * u0 + 1.0;
        for (int k = 0; f(u1) < 0.0; ++k) {
            if (k > 200) throw ChartError("virial: Omega1 could not be bracketed");
            u0 = u1;
            u1 *= 2.0;
        }
        q1 = lo + std::pow(root_in(f, u0, u1), 2);
    }
    const double q2 = q1 * (omega2 - chart_.branch * manifold_.integral2(chart_, ref_, q1));
    return {q1, q2};
}

PhasePoint AngleChart::phase_point(double omega1, double omega2) const
{
    const auto q = from_angles(omega1, omega2);
    const auto l = manifold_.lambda_at(q[0], q[1], chart_.branch);
    return {q[0], q[1], l[0], l[1]};
}

double correction_G(const AngleChart& chart, Correction which, std::array<double, 2> omega1_range, double omega2,
                    int n_grid)
{
    if (n_grid < 16) throw DomainError("virial: correction_G needs n_grid >= 16");
    if (omega1_range[0] == omega1_range[1]) return 0.0;
    const auto qa = chart.from_angles(omega1_range[0], omega2);
    const auto qb = chart.from_angles(omega1_range[1], omega2);
    return integrate_along(chart.manifold(), chart.chart(), which, qa[0], qa[1] / qa[0], qa[0], qb[0], n_grid);
}

double correction_G_at(const GasSpec& spec, const ControlBudget& budget, Correction which, const PhasePoint& p,
                       int n_grid)
{
    const auto levels = angles::levels_of(spec, budget, p);
    const angles::InvariantManifold m(spec, budget, levels);
    const auto chart = m.chart_at(p.q1, angles::branch_of(p));
    return integrate_along(m, chart, which, p.q1, p.q2 / p.q1, chart.lo, p.q1, n_grid);
}

// ---------------------------------------------------------------------------

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw DomainError("virial: slope fit needs matching samples");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

std::vector<PhasePoint> sample_points(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                                      int count, std::uint64_t seed)
{
    const angles::InvariantManifold m(spec, budget, levels);
    const auto& roots = m.positive_roots();
    std::vector<std::array<double, 2>> intervals;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double lo = roots[i];
        const double hi = i + 1 < roots.size() ? roots[i + 1] : 4.0 * lo;
        if (m.discriminant(0.5 * (lo + hi)) > 0.0) intervals.push_back({lo, hi});
    }
    if (intervals.empty()) throw ChartError("virial: level set has no chart with q1 > 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PhasePoint> points;
    for (int i = 0; i < count; ++i) {
        const auto& iv = intervals[static_cast<std::size_t>(i) % intervals.size()];
        const double q1 = iv[0] + (iv[1] - iv[0]) * (0.2 + 0.6 * unit(rng));
        const double q2 = -0.5 + unit(rng);
        const int branch = i % 2 == 0 ? 1 : -1;
        const auto l = m.lambda_at(q1, q2, branch);
        points.push_back({q1, q2, l[0], l[1]});
    }
    return points;
}

std::array<double, 4> fd_gradient(const std::function<double(const PhasePoint&)>& f, const PhasePoint& p, double rel)
{
    std::array<double, 4> g{};
    const auto c = p.coords();
    for (int i = 0; i < 4; ++i) {
        const double h = rel * std::max(1.0, std::abs(c[i]));
        auto plus = c;
        auto minus = c;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (f(PhasePoint::from(plus)) - f(PhasePoint::from(minus))) / (2.0 * h);
    }
    return g;
}

double bracket(const std::array<double, 4>& f, const std::array<double, 4>& g)
{
    return f[0] * g[2] - f[2] * g[0] + f[1] * g[3] - f[3] * g[1];
}

} // namespace

OrderCheck commutation_order_check(const GasSpec& spec, const ControlBudget& budget, const InvariantLevels& levels,
                                   const std::vector<double>& eps, const OrderCheckOptions& options)
{
    if (eps.size() < 4) throw DomainError("virial: order check needs at least four eps values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1]))) {
            throw DomainError("virial: eps values must be positive and decreasing");
        }
    }
    const double norm = std::hypot(options.direction[0], options.direction[1]);
    if (!(norm > 0.0)) throw DomainError("virial: direction must be nonzero");
    const double da = options.direction[0] / norm;
    const double db = options.direction[1] / norm;

    OrderCheck out;
    out.points = sample_points(spec, budget, levels, options.points, options.seed);

    struct PointData {
        std::array<double, 4> h, hp, g, gp;
    };
    std::vector<PointData> data;
    for (const auto& p : out.points) {
        PointData d{};
        d.h = control::reduced_hamiltonian_jet(spec, budget, p).grad;
        const auto ha = correction_jet(spec, budget, Correction::A, p).grad;
        const auto hb = correction_jet(spec, budget, Correction::B, p).grad;
        d.g = {p.l2, 0.0, 0.0, p.q1};
        auto gp = [&](const PhasePoint& x) {
            return da * correction_G_at(spec, budget, Correction::A, x, options.n_grid) +
                   db * correction_G_at(spec, budget, Correction::B, x, options.n_grid);
        };
        const auto ggrad = fd_gradient(gp, p, options.fd_step);
        for (int i = 0; i < 4; ++i) {
            d.hp[i] = da * ha[i] + db * hb[i];
            d.gp[i] = ggrad[i];
        }
        data.push_back(d);
    }

    for (auto* report : {&out.corrected, &out.uncorrected}) {
        report->direction = {da, db};
        report->eps = eps;
    }
    for (double e : eps) {
        double sum_c = 0.0;
        double sum_u = 0.0;
        for (const auto& d : data) {
            std::array<double, 4> hv{};
            std::array<double, 4> gv{};
            for (int i = 0; i < 4; ++i) {
                hv[i] = d.h[i] + e * d.hp[i];
                gv[i] = d.g[i] + e * d.gp[i];
            }
            const double bc = bracket(hv, gv);
            const double bu = bracket(hv, d.g);
            sum_c += bc * bc;
            sum_u += bu * bu;
        }
        const double count = static_cast<double>(data.size());
        out.corrected.bracket_norms.push_back(std::sqrt(sum_c / count));
        out.uncorrected.bracket_norms.push_back(std::sqrt(sum_u / count));
    }
    for (auto* report : {&out.corrected, &out.uncorrected}) {
        const auto& norms = report->bracket_norms;
        report->floor_limited = std::all_of(norms.begin(), norms.end(), [](double v) { return v < 1e-13; });
        report->slope = report->floor_limited ? 0.0 : log_log_slope(report->eps, norms);
    }
    return out;
}

} // namespace thermopt::virial
