#include <benchmark/benchmark.h>

#include <random>

#include "thermopt/angles.hpp"
#include "thermopt/control.hpp"
#include "thermopt/dynamics.hpp"
#include "thermopt/maxent.hpp"
#include "thermopt/virial.hpp"

using namespace thermopt;

namespace {

const gas::GasSpec kGas = gas::make_gas(gas::GasKind::Ideal, 3.0, 1.0);
const control::ControlBudget kBudget{1.0};

void BM_ReducedHamiltonian(benchmark::State& state)
{
    const control::PhasePoint p{1.2, 0.3, -0.4, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(control::reduced_hamiltonian_jet(kGas, kBudget, p));
}
BENCHMARK(BM_ReducedHamiltonian);

void BM_Flow(benchmark::State& state)
{
    const auto h = dynamics::reduced_hamiltonian_function(kGas, kBudget);
    const control::PhasePoint start{1.2, 0.3, -0.4, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(dynamics::flow(h, start, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_Flow)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Omega1(benchmark::State& state)
{
    const angles::InvariantLevels lv{1.0, 0.5};
    const angles::InvariantManifold m(kGas, kBudget, lv);
    const auto chart = m.chart_at(2.0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(m.omega1(chart, chart.default_reference(), 2.0));
}
BENCHMARK(BM_Omega1)->Unit(benchmark::kMicrosecond);

void BM_CorrectionG(benchmark::State& state)
{
    const control::PhasePoint p{1.5, 0.2, -0.3, 0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(virial::correction_G_at(kGas, kBudget, virial::Correction::A, p));
    }
}
BENCHMARK(BM_CorrectionG)->Unit(benchmark::kMicrosecond);

void BM_MaxentSolve(benchmark::State& state)
{
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> q(k, 1.0 / k);
    std::vector<Eigen::VectorXd> values;
    Eigen::VectorXd target = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < k; ++i) {
        values.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)));
        target += values.back() / k;
    }
    const auto m = maxent::make_measurement(q, values, 0.9 * target + 0.1 * values[0]);
    for (auto _ : state) benchmark::DoNotOptimize(maxent::solve_lambda(m));
}
BENCHMARK(BM_MaxentSolve)->Arg(10)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
