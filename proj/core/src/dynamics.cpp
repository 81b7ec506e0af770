#include "thermopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "thermopt/errors.hpp"
#include "thermopt/io.hpp"

namespace thermopt::dynamics {

namespace {

using State = std::array<double, 4>;

// Canonical vector field X_H = (H_l1, H_l2, -H_q1, -H_q2).
std::optional<State> vector_field(const PhaseFunction& h, const State& y, double* value = nullptr)
{
    gas::ValueGradient<4> j;
    try {
        j = h(PhasePoint::from(y));
    } catch (const Error&) {
        return std::nullopt;
    }
    State f{j.grad[2], j.grad[3], -j.grad[0], -j.grad[1]};
    for (double c : f) {
        if (!std::isfinite(c)) return std::nullopt;
    }
    if (value) *value = j.value;
    return f;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
    State y;
    State f_end;
    double err = 0.0;
    bool ok = false;
};

StepResult dopri_step(const PhaseFunction& h, const State& y, const State& k1, double dt, double tol)
{
    StepResult r;
    auto stage = [&](std::initializer_list<std::pair<double, const State*>> terms) {
        State s = y;
        for (const auto& [coef, k] : terms) {
            for (std::size_t i = 0; i < 4; ++i) s[i] += dt * coef * (*k)[i];
        }
        return s;
    };
    const auto k2 = vector_field(h, stage({{a21, &k1}}));
    if (!k2) return r;
    const auto k3 = vector_field(h, stage({{a31, &k1}, {a32, &*k2}}));
    if (!k3) return r;
    const auto k4 = vector_field(h, stage({{a41, &k1}, {a42, &*k2}, {a43, &*k3}}));
    if (!k4) return r;
    const auto k5 = vector_field(h, stage({{a51, &k1}, {a52, &*k2}, {a53, &*k3}, {a54, &*k4}}));
    if (!k5) return r;
    const auto k6 = vector_field(h, stage({{a61, &k1}, {a62, &*k2}, {a63, &*k3}, {a64, &*k4}, {a65, &*k5}}));
    if (!k6) return r;
    r.y = stage({{b1, &k1}, {b3, &*k3}, {b4, &*k4}, {b5, &*k5}, {b6, &*k6}});
    const auto k7 = vector_field(h, r.y);
    if (!k7) return r;
    r.f_end = *k7;
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double err =
            dt * (e1 * k1[i] + e3 * (*k3)[i] + e4 * (*k4)[i] + e5 * (*k5)[i] + e6 * (*k6)[i] + e7 * (*k7)[i]);
        const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(r.y[i])));
        acc += (err / sc) * (err / sc);
    }
    r.err = std::sqrt(acc / 4.0);
    r.ok = std::isfinite(r.err);
    return r;
}

void record(Trajectory& traj, const PhaseFunction& h, double t, const State& y, const State& f)
{
    traj.times.push_back(t);
    traj.states.push_back(PhasePoint::from(y));
    traj.rates.push_back(f);
    traj.hamiltonian.push_back(h(PhasePoint::from(y)).value);
}

void finalize_drifts(Trajectory& traj)
{
    if (traj.states.empty()) return;
    const double h0 = traj.hamiltonian.front();
    const double g0 = integral_G(traj.states.front());
    const double h_scale = h0 != 0.0 ? std::abs(h0) : 1.0;
    const double g_scale = std::max(1.0, std::abs(g0));
    traj.h_drift = 0.0;
    traj.g_drift = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        traj.h_drift = std::max(traj.h_drift, std::abs(traj.hamiltonian[i] - h0) / h_scale);
        traj.g_drift = std::max(traj.g_drift, std::abs(integral_G(traj.states[i]) - g0) / g_scale);
    }
}

// Integral over [x0 + from, x0 + to] of the quadratic through three samples.
double quadratic_piece(const double x[3], const double f[3], double from, double to)
{
    const double h0 = x[1] - x[0];
    const double h1 = x[2] - x[1];
    const double d1 = (f[1] - f[0]) / h0;
    const double d2 = ((f[2] - f[1]) / h1 - d1) / (h0 + h1);
    auto antiderivative = [&](double s) {
        return f[0] * s + d1 * s * s / 2.0 + d2 * (s * s * s / 3.0 - h0 * s * s / 2.0);
    };
    return antiderivative(to) - antiderivative(from);
}

} // namespace

PhaseFunction with_fd_gradient(std::function<double(const PhasePoint&)> f)
{
    return [f = std::move(f)](const PhasePoint& x) {
        gas::ValueGradient<4> out;
        out.value = f(x);
        const auto c = x.coords();
        for (std::size_t i = 0; i < 4; ++i) {
            const double step = 1e-6 * std::max(1.0, std::abs(c[i]));
            auto plus = c;
            auto minus = c;
            plus[i] += step;
            minus[i] -= step;
            out.grad[i] = (f(PhasePoint::from(plus)) - f(PhasePoint::from(minus))) / (2.0 * step);
        }
        return out;
    };
}

PhaseFunction reduced_hamiltonian_function(const gas::GasSpec& spec, const control::ControlBudget& budget)
{
    return [spec, budget](const PhasePoint& x) { return control::reduced_hamiltonian_jet(spec, budget, x); };
}

PhaseFunction negated(PhaseFunction h)
{
    return [h = std::move(h)](const PhasePoint& x) {
        auto j = h(x);
        j.value = -j.value;
        for (double& g : j.grad) g = -g;
        return j;
    };
}

Trajectory flow(const PhaseFunction& h, const PhasePoint& start, double t0, const FlowOptions& options)
{
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw DomainError("flow: t0 must be positive");
    if (!(options.tol > 0.0)) throw DomainError("flow: tol must be positive");

    Trajectory traj;
    State y = start.coords();
    auto f = vector_field(h, y);
    if (!f) throw DomainError("flow: Hamiltonian cannot be evaluated at the start point");
    record(traj, h, 0.0, y, *f);

    std::vector<double> outputs;
    if (options.samples > 0) {
        for (std::size_t i = 1; i <= options.samples; ++i) {
            outputs.push_back(t0 * static_cast<double>(i) / static_cast<double>(options.samples));
        }
    } else {
        outputs.push_back(t0);
    }

    const double min_step = options.min_step * std::max(1.0, t0);
    double t = 0.0;
    double dt = std::min(1e-3 * std::max(1.0, t0), outputs.front());
    std::size_t next = 0;
    std::size_t steps = 0;
    while (next < outputs.size()) {
        const double target = outputs[next];
        bool clipped = false;
        double step = dt;
        if (t + step >= target - 1e-14 * std::max(1.0, t0)) {
            step = target - t;
            clipped = true;
        }
        if (++steps > options.max_steps || step < min_step) {
            traj.truncated = true;
            break;
        }
        const auto r = dopri_step(h, y, *f, step, options.tol);
        if (!r.ok || r.err > 1.0) {
            ++traj.rejected_steps;
            const double fac = r.ok ? std::max(0.2, 0.9 * std::pow(r.err, -0.2)) : 0.25;
            dt = step * fac;
            if (dt < min_step) {
                traj.truncated = true;
                break;
            }
            continue;
        }
        ++traj.accepted_steps;
        t = clipped ? target : t + step;
        y = r.y;
        *f = r.f_end;
        const double fac = r.err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(r.err, -0.2))) : 5.0;
        // Keep the proposed step when the last one was shortened by clipping.
        dt = clipped ? std::max(dt, step * fac) : step * fac;
        if (clipped) {
            record(traj, h, t, y, *f);
            ++next;
        } else if (options.samples == 0) {
            record(traj, h, t, y, *f);
        }
    }
    finalize_drifts(traj);
    return traj;
}

double canonical_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& x)
{
    const auto fj = f(x);
    const auto gj = g(x);
    return fj.grad[0] * gj.grad[2] - fj.grad[2] * gj.grad[0] + fj.grad[1] * gj.grad[3] - fj.grad[3] * gj.grad[1];
}

double integral_G(const PhasePoint& x) { return x.q1 * x.l2; }

PhaseFunction integral_G_function()
{
    return [](const PhasePoint& x) {
        gas::ValueGradient<4> out;
        out.value = x.q1 * x.l2;
        out.grad = {x.l2, 0.0, 0.0, x.q1};
        return out;
    };
}

Trajectory make_path(std::vector<double> times, std::vector<PhasePoint> states,
                     std::vector<std::array<double, 4>> rates)
{
    if (times.size() != states.size() || times.size() != rates.size()) {
        throw DomainError("make_path: times, states and rates must have equal length");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw DomainError("make_path: times must be strictly increasing");
    }
    Trajectory traj;
    traj.times = std::move(times);
    traj.states = std::move(states);
    traj.rates = std::move(rates);
    return traj;
}

std::vector<double> cumulative_work(const gas::GasSpec& spec, const Trajectory& traj)
{
    const std::size_t n = traj.size();
    if (n < 3) {
        throw InsufficientSamplesError("work: need at least 3 samples, got " + std::to_string(n));
    }
    // Integrand p(t) dv/dt with dv/dt from the stored velocities.
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& z = traj.states[i];
        const auto ev = control::from_q(spec, z.q1, z.q2);
        const double p = gas::state_from_ev(spec, ev.e, ev.v).p;
        const double dq1 = traj.rates[i][0];
        const double dq2 = traj.rates[i][1];
        const double dv = ev.v * (-dq2 / z.q1 + z.q2 * dq1 / (z.q1 * z.q1));
        integrand[i] = p * dv;
    }
    std::vector<double> cum(n, 0.0);
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double x[3] = {traj.times[i], traj.times[i + 1], traj.times[i + 2]};
        const double f[3] = {integrand[i], integrand[i + 1], integrand[i + 2]};
        const double h0 = x[1] - x[0];
        const double total = x[2] - x[0];
        cum[i + 1] = cum[i] + quadratic_piece(x, f, 0.0, h0);
        cum[i + 2] = cum[i] + quadratic_piece(x, f, 0.0, total);
    }
    if (i + 1 < n) {
        // One interval left over: quadratic through the last three samples.
        const double x[3] = {traj.times[n - 3], traj.times[n - 2], traj.times[n - 1]};
        const double f[3] = {integrand[n - 3], integrand[n - 2], integrand[n - 1]};
        cum[n - 1] = cum[n - 2] + quadratic_piece(x, f, x[1] - x[0], x[2] - x[0]);
    }
    return cum;
}

double work_functional(const gas::GasSpec& spec, const Trajectory& traj)
{
    return cumulative_work(spec, traj).back();
}

void attach_work(const gas::GasSpec& spec, Trajectory& traj) { traj.work = cumulative_work(spec, traj); }

namespace {

struct ShootAttempt {
    bool converged = false;
    std::array<double, 2> lambda{};
    double residual = std::numeric_limits<double>::infinity();
};

class ShootingMap {
public:
    ShootingMap(const ShootingProblem& problem, const ShootOptions& options)
        : problem_(problem), options_(options),
          h_(reduced_hamiltonian_function(problem.spec, problem.budget)),
          q_start_(control::to_q(problem.spec, problem.x_start.e, problem.x_start.v)),
          q_end_(control::to_q(problem.spec, problem.x_end.e, problem.x_end.v))
    {
    }

    // Endpoint mismatch in q coordinates, or nullopt when the flow fails.
    std::optional<std::array<double, 2>> mismatch(const std::array<double, 2>& lambda) const
    {
        FlowOptions fo = options_.flow;
        fo.samples = 1;
        const PhasePoint start{q_start_.q1, q_start_.q2, lambda[0], lambda[1]};
        Trajectory tr;
        try {
            tr = flow(h_, start, problem_.t0, fo);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (tr.truncated) return std::nullopt;
        const auto& z = tr.states.back();
        return std::array<double, 2>{z.q1 - q_end_.q1, z.q2 - q_end_.q2};
    }

    // Relative endpoint error in (e, v).
    double relative_residual(const PhasePoint& end) const
    {
        const auto ev = control::from_q(problem_.spec, end.q1, end.q2);
        const double de = ev.e - problem_.x_end.e;
        const double dv = ev.v - problem_.x_end.v;
        const double scale = std::hypot(problem_.x_end.e, problem_.x_end.v);
        return std::hypot(de, dv) / scale;
    }

    double relative_residual(const std::array<double, 2>& m) const
    {
        return relative_residual(PhasePoint{q_end_.q1 + m[0], q_end_.q2 + m[1], 0.0, 0.0});
    }

    ShootAttempt newton(std::array<double, 2> lambda) const
    {
        ShootAttempt out;
        auto m = mismatch(lambda);
        if (!m) return out;
        for (int iter = 0; iter < options_.max_newton; ++iter) {
            const double res = relative_residual(*m);
            if (res <= options_.tol) {
                out.converged = true;
                out.lambda = lambda;
                out.residual = res;
                return out;
            }
            double jac[2][2];
            for (int j = 0; j < 2; ++j) {
                auto shifted = lambda;
                const double step = 1e-6 * (1.0 + std::abs(lambda[j]));
                shifted[j] += step;
                const auto mj = mismatch(shifted);
                if (!mj) return out;
                jac[0][j] = ((*mj)[0] - (*m)[0]) / step;
                jac[1][j] = ((*mj)[1] - (*m)[1]) / step;
            }
            const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if (!std::isfinite(det) || det == 0.0) return out;
            const std::array<double, 2> dir{-(jac[1][1] * (*m)[0] - jac[0][1] * (*m)[1]) / det,
                                            -(-jac[1][0] * (*m)[0] + jac[0][0] * (*m)[1]) / det};
            const double norm0 = std::hypot((*m)[0], (*m)[1]);
            double t = 1.0;
            bool accepted = false;
            for (int k = 0; k < 30; ++k, t *= 0.5) {
                const std::array<double, 2> trial{lambda[0] + t * dir[0], lambda[1] + t * dir[1]};
                const auto mt = mismatch(trial);
                if (mt && std::hypot((*mt)[0], (*mt)[1]) < norm0) {
                    lambda = trial;
                    m = mt;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                out.lambda = lambda;
                out.residual = relative_residual(*m);
                out.converged = out.residual <= options_.tol;
                return out;
            }
        }
        out.lambda = lambda;
        out.residual = relative_residual(*m);
        out.converged = out.residual <= options_.tol;
        return out;
    }

    Trajectory full_trajectory(const std::array<double, 2>& lambda) const
    {
        const PhasePoint start{q_start_.q1, q_start_.q2, lambda[0], lambda[1]};
        Trajectory tr = flow(h_, start, problem_.t0, options_.flow);
        attach_work(problem_.spec, tr);
        return tr;
    }

private:
    const ShootingProblem& problem_;
    const ShootOptions& options_;
    PhaseFunction h_;
    control::QPair q_start_;
    control::QPair q_end_;
};

} // namespace

ShootResult shoot(const ShootingProblem& problem, const ShootOptions& options)
{
    gas::validate(problem.spec);
    if (!(problem.t0 > 0.0)) throw DomainError("shoot: t0 must be positive");
    if (!(options.tol > 0.0)) throw DomainError("shoot: tol must be positive");
    for (const auto& x : {problem.x_start, problem.x_end}) {
        if (!gas::applicability(problem.spec, gas::state_from_ev(problem.spec, x.e, x.v))) {
            throw DomainError("shoot: endpoints must lie in the applicable domain");
        }
    }
    const ShootingMap map(problem, options);

    auto finish = [&](const ShootAttempt& a) {
        ShootResult r;
        r.lambda0 = a.lambda;
        r.traj = map.full_trajectory(a.lambda);
        r.residual = map.relative_residual(r.traj.states.back());
        r.work = r.traj.work.back();
        return r;
    };

    const ShootAttempt origin = map.newton({0.0, 0.0});
    if (origin.converged) {
        ShootResult r = finish(origin);
        r.from_origin = true;
        r.converged_starts = 1;
        return r;
    }

    const int g = std::max(options.grid, 2);
    std::vector<std::array<double, 2>> starts;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const double l1 = -options.grid_half_width + 2.0 * options.grid_half_width * i / (g - 1);
            const double l2 = -options.grid_half_width + 2.0 * options.grid_half_width * j / (g - 1);
            starts.push_back({l1, l2});
        }
    }
    std::vector<ShootAttempt> attempts(starts.size());
    if (options.parallel) {
        // One task per grid row; results land in fixed slots so aggregation
        // order does not depend on completion order.
        std::vector<std::future<void>> tasks;
        for (int i = 0; i < g; ++i) {
            tasks.push_back(std::async(std::launch::async, [&, i] {
                for (int j = 0; j < g; ++j) attempts[i * g + j] = map.newton(starts[i * g + j]);
            }));
        }
        for (auto& t : tasks) t.get();
    } else {
        for (std::size_t k = 0; k < starts.size(); ++k) attempts[k] = map.newton(starts[k]);
    }

    std::vector<ShootResult> solutions;
    for (const auto& a : attempts) {
        if (!a.converged) continue;
        const bool seen = std::any_of(solutions.begin(), solutions.end(), [&](const ShootResult& s) {
            return std::hypot(s.lambda0[0] - a.lambda[0], s.lambda0[1] - a.lambda[1]) <=
                   1e-6 * (1.0 + std::hypot(a.lambda[0], a.lambda[1]));
        });
        if (!seen) solutions.push_back(finish(a));
    }
    const std::size_t converged =
        static_cast<std::size_t>(std::count_if(attempts.begin(), attempts.end(), [](const auto& a) { return a.converged; }));
    if (solutions.empty()) {
        throw UnreachableEndpointError("shoot: no costate reaches the endpoint from any of " +
                                       std::to_string(starts.size()) + " starts");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < solutions.size(); ++k) {
        if (solutions[k].work > solutions[best].work) best = k;
    }
    ShootResult r = std::move(solutions[best]);
    r.converged_starts = converged;
    r.multiple = solutions.size() > 1;
    return r;
}

void write_trajectory_csv(std::ostream& out, const gas::GasSpec& spec, const Trajectory& traj)
{
    const std::vector<double> work = traj.work.size() == traj.size()
                                         ? traj.work
                                         : (traj.size() >= 3 ? cumulative_work(spec, traj)
                                                             : std::vector<double>(traj.size(), 0.0));
    out << "t,q1,q2,l1,l2,e,v,H,G,J_cum\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& z = traj.states[i];
        const auto ev = control::from_q(spec, z.q1, z.q2);
        const double h = i < traj.hamiltonian.size() ? traj.hamiltonian[i] : 0.0;
        const double row[] = {traj.times[i], z.q1, z.q2, z.l1, z.l2, ev.e, ev.v, h, integral_G(z), work[i]};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            if (c) out << ',';
            out << io::format_double(row[c]);
        }
        out << '\n';
    }
}

} // namespace thermopt::dynamics
