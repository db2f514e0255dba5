// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

// Micro-benchmarks of the optimization inner loop: the composite loss,
// the loss with its reverse-pass gradient, and a complete short Adam
// descent.  One optimizer step costs one loss-plus-gradient evaluation,
// so restarts x steps x that figure predicts end-to-end design time.

#include <benchmark/benchmark.h>

#include <vector>

#include <magtrap/magtrap.hpp>

namespace {

using namespace magtrap;

constexpr double bench_edge = 0.0508;  // [m]
constexpr double bench_remanence = 1.275; // [T]
constexpr double bench_trap = 0.089;   // [m]

TrapProblem bench_problem(int n)
{
    return TrapProblem(
        build_array(n, bench_edge, bench_remanence),
        EvaluationGrid::make_centered(bench_trap, 0.010, 20, 20),
        make_robot_magnet(1.32, 1.5707963267948966e-9), LossConfig{});
}

std::vector<double> bench_angles(int n)
{
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < angles.size(); ++k) {
        angles[k] = normalize_angle_deg(37.0 * static_cast<double>(k + 1));
    }
    return angles;
}

void bench_loss(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const TrapProblem problem = bench_problem(n);
    const std::vector<double> angles = bench_angles(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(problem.evaluate(angles));
    }
}
BENCHMARK(bench_loss)->Arg(2)->Arg(8)->Arg(100)
    ->Unit(benchmark::kMicrosecond);

void bench_loss_gradient(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const TrapProblem problem = bench_problem(n);
    const std::vector<double> angles = bench_angles(n);
    std::vector<double> gradient(angles.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            problem.evaluate_with_gradient(angles, gradient));
    }
}
BENCHMARK(bench_loss_gradient)->Arg(2)->Arg(8)->Arg(100)
    ->Unit(benchmark::kMicrosecond);

void bench_adam_descent_50(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const TrapProblem problem = bench_problem(n);
    const std::vector<double> start = bench_angles(n);
    const ObjectiveFn objective = [&problem](std::span<const double> x,
                                             std::span<double> gradient) {
        return problem.evaluate_with_gradient(x, gradient).total;
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            adam_run(start, objective, AdamConfig{}, 50));
    }
}
BENCHMARK(bench_adam_descent_50)->Arg(2)->Arg(8)
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
