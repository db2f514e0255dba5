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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <doctest.h>

#include <magtrap/objective.hpp>
#include <magtrap/reference_loss.hpp>
#include <magtrap/trap_problem.hpp>

using namespace magtrap;

namespace {

const RobotMagnet robot = make_robot_magnet(1.32,
                                            cylinder_volume(0.001, 0.002));

LossConfig composite_config()
{
    LossConfig config;
    config.lambda1 = 1.0;
    config.lambda2 = 1.0;
    config.force_target = 0.06;
    return config;
}

std::vector<double> random_angles(std::mt19937_64& rng, int count)
{
    std::vector<double> angles(count);
    for (double& a : angles) {
        a = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 360.0;
    }
    return angles;
}

} // namespace

TEST_CASE("problem evaluation matches the composed loss pipeline")
{
    const MagnetArray array = build_array(2, 0.0508, 1.275, 0.0, 0.120);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.089, 0.010, 20, 20);
    const LossConfig config = composite_config();
    const TrapProblem problem(array, grid, robot, config);

    for (auto angles : { std::vector<double>{ 341.0, 19.0 },
                         std::vector<double>{ 120.0, 275.0 },
                         std::vector<double>{ 0.0, 0.0 } }) {
        MagnetArray rotated = array;
        rotated.set_angles_deg(angles);
        const LossBreakdown composed =
            total_loss(rotated, grid, robot, config);
        const LossBreakdown fast = problem.evaluate(angles);
        CHECK(fast.total == doctest::Approx(composed.total).epsilon(1e-14));
        CHECK(fast.direction
              == doctest::Approx(composed.direction).epsilon(1e-14));
        CHECK(fast.magnitude
              == doctest::Approx(composed.magnitude).epsilon(1e-12));
        CHECK(fast.force_sum
              == doctest::Approx(composed.force_sum).epsilon(1e-14));
    }
}

TEST_CASE("gradient evaluation reports the same loss as plain evaluation")
{
    const MagnetArray array = build_array(4, 0.0508, 1.275);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.15, 0.010, 12, 12);
    const TrapProblem problem(array, grid, robot, composite_config());
    const std::vector<double> angles{ 10.0, 350.0, 200.0, 77.0 };
    std::vector<double> gradient(4);
    const LossBreakdown with = problem.evaluate_with_gradient(angles, gradient);
    const LossBreakdown without = problem.evaluate(angles);
    CHECK(with.total == without.total);
    CHECK(with.direction == without.direction);
    CHECK(with.magnitude == without.magnitude);
}

TEST_CASE("analytic gradient agrees with extended-precision differences")
{
    std::mt19937_64 rng(42);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.089, 0.010, 20, 20);
    const LossConfig config = composite_config();

    for (int count : { 2, 4, 8 }) {
        const MagnetArray array = build_array(count, 0.0508, 1.275);
        const TrapProblem problem(array, grid, robot, config);
        for (int trial = 0; trial < 5; ++trial) {
            const std::vector<double> angles = random_angles(rng, count);
            std::vector<double> analytic(count);
            (void)problem.evaluate_with_gradient(angles, analytic);
            const std::vector<double> reference =
                finite_difference_gradient(array, grid, robot, config,
                                           angles);
            for (int k = 0; k < count; ++k) {
                if (std::abs(reference[k]) < 1e-12) {
                    continue;
                }
                CHECK(std::abs(analytic[k] - reference[k])
                      <= 1e-6 * std::abs(reference[k]));
            }
        }
    }
}

TEST_CASE("gradient is antisymmetric on the symmetric solution pair")
{
    // The two-magnet loss obeys L(a1, a2) = L(360 - a2, 360 - a1); on a
    // self-symmetric pair (a, 360 - a) the gradient components must be
    // mirror images.
    const MagnetArray array = build_array(2, 0.0508, 1.275, 0.0, 0.120);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.089, 0.010, 20, 20);
    LossConfig config;
    config.lambda1 = 1.0;
    config.lambda2 = 0.0;
    const TrapProblem problem(array, grid, robot, config);
    std::vector<double> gradient(2);
    (void)problem.evaluate_with_gradient(std::vector<double>{ 341.0, 19.0 },
                                         gradient);
    CHECK(gradient[0]
          == doctest::Approx(-gradient[1]).epsilon(1e-12));
}

#ifdef _OPENMP
TEST_CASE("loss and gradient are bitwise thread-count independent")
{
    const MagnetArray array = build_array(8, 0.0508, 1.275);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.2, 0.010, 20, 20);
    const TrapProblem problem(array, grid, robot, composite_config());
    const std::vector<double> angles{ 11.0, 52.0, 93.0, 134.0,
                                      175.0, 216.0, 257.0, 298.0 };

    const int saved = omp_get_max_threads();
    std::vector<double> g1(8);
    std::vector<double> g4(8);
    omp_set_num_threads(1);
    const LossBreakdown l1 = problem.evaluate_with_gradient(angles, g1);
    omp_set_num_threads(4);
    const LossBreakdown l4 = problem.evaluate_with_gradient(angles, g4);
    omp_set_num_threads(saved);

    CHECK(l1.total == l4.total);
    CHECK(l1.direction == l4.direction);
    CHECK(l1.magnitude == l4.magnitude);
    CHECK(g1 == g4);
}
#endif

TEST_CASE("loss weight updates validate and take effect")
{
    const MagnetArray array = build_array(2, 0.0508, 1.275, 0.0, 0.120);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.089, 0.010, 20, 20);
    TrapProblem problem(array, grid, robot, composite_config());
    const std::vector<double> angles{ 341.0, 19.0 };

    problem.set_loss_weights(1.0, 0.0);
    const LossBreakdown direction_only = problem.evaluate(angles);
    CHECK(direction_only.total == direction_only.direction);

    problem.set_force_target(direction_only.force_sum);
    problem.set_loss_weights(0.0, 1.0);
    const LossBreakdown magnitude_only = problem.evaluate(angles);
    CHECK(magnitude_only.total
          == doctest::Approx(0.0).scale(1e-12));

    CHECK_THROWS_AS(problem.set_loss_weights(-1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("array_with_angles reproduces the rotated geometry")
{
    const MagnetArray array = build_array(2, 0.0508, 1.275, 0.0, 0.120);
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(0.089, 0.010, 20, 20);
    const TrapProblem problem(array, grid, robot, composite_config());
    const MagnetArray rotated =
        problem.array_with_angles(std::vector<double>{ 341.0, 19.0 });
    CHECK(rotated.angles_deg() == std::vector<double>{ 341.0, 19.0 });
    CHECK(rotated.magnets[0].center == array.magnets[0].center);
}

TEST_CASE("a grid point on a magnet is rejected at construction")
{
    // Custom geometry putting one magnet center in the evaluation plane,
    // exactly on a grid point.
    const std::vector<Magnet> magnets{
        make_magnet({ 0.005, 0.089, 0.0 }, 0.01, 1.0),
        make_magnet({ 0.0, 0.0, -0.06 }, 0.01, 1.0)
    };
    const MagnetArray array = MagnetArray::from_magnets(magnets);
    const std::vector<Eigen::Vector3d> points{ { 0.005, 0.089, 0.0 } };
    const EvaluationGrid grid =
        EvaluationGrid::from_points(points, { 0.0, 0.089, 0.0 });
    CHECK_THROWS_AS(
        TrapProblem(array, grid, robot, composite_config()),
        singularity_error);
}
