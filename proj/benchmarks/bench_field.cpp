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

// Micro-benchmarks of the field kernels: single-dipole flux, the total
// force on the trapped object at one point, and a full evaluation-grid
// pass.  The per-(point, magnet) kernel cost dominates everything the
// optimizer and the analysis tools do, so these numbers bound both.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <magtrap/magtrap.hpp>

namespace {

using namespace magtrap;

constexpr double bench_edge = 0.0508;  // [m]
constexpr double bench_remanence = 1.275; // [T]
constexpr double bench_trap = 0.089;   // [m]

RobotMagnet bench_robot()
{
    return make_robot_magnet(1.32, 1.5707963267948966e-9);
}

// An n-magnet array with a deterministic spread of rotation angles.
MagnetArray bench_array(int n)
{
    MagnetArray array = build_array(n, bench_edge, bench_remanence);
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < angles.size(); ++k) {
        angles[k] = normalize_angle_deg(37.0 * static_cast<double>(k + 1));
    }
    array.set_angles_deg(angles);
    return array;
}

void bench_flux_density_single(benchmark::State& state)
{
    const Magnet magnet = make_magnet(Eigen::Vector3d::Zero(), bench_edge,
                                      bench_remanence, 341.0);
    const Eigen::Vector3d point(0.0, bench_trap, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flux_density_single(point, magnet));
    }
}
BENCHMARK(bench_flux_density_single);

void bench_force_total(benchmark::State& state)
{
    const MagnetArray array = bench_array(static_cast<int>(state.range(0)));
    const RobotMagnet robot = bench_robot();
    const Eigen::Vector3d point(0.001, bench_trap, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(force_total(point, array, robot));
    }
}
BENCHMARK(bench_force_total)->Arg(2)->Arg(8)->Arg(100);

void bench_evaluate_grid(benchmark::State& state)
{
    const MagnetArray array = bench_array(static_cast<int>(state.range(0)));
    const RobotMagnet robot = bench_robot();
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(bench_trap, 0.010, 20, 20);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_grid(array, grid, robot));
    }
}
BENCHMARK(bench_evaluate_grid)->Arg(2)->Arg(8)->Arg(100)
    ->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
