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

#include <magtrap/optimize.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <magtrap/constants.hpp>
#include <magtrap/field.hpp>

namespace magtrap {

namespace {

// Uniform draw from [0, 360).  Hand-rolled from the raw generator
// output because std::uniform_real_distribution is implementation-
// defined — seeds must reproduce bit-identical runs everywhere.
double uniform_angle(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 360.0;
}

std::vector<double> normalized(std::vector<double> angles_deg)
{
    for (double& angle : angles_deg) {
        angle = normalize_angle_deg(angle);
    }
    return angles_deg;
}

} // namespace

void validate(const RestartPolicy& policy)
{
    if (policy.restarts_per_round < 1) {
        throw std::invalid_argument("need at least one restart per round");
    }
    if (policy.steps < 1) {
        throw std::invalid_argument("need at least one optimization step");
    }
    if (!(policy.accuracy_threshold > 0.0)
        || policy.accuracy_threshold > 1.0) {
        throw std::invalid_argument(
            "accuracy threshold must lie in (0, 1]");
    }
    if (policy.threshold_decrement < 0.0) {
        throw std::invalid_argument(
            "threshold decrement must be non-negative");
    }
    if (policy.max_rounds < 1) {
        throw std::invalid_argument("need at least one round");
    }
}

std::vector<double> canonicalize_gauge(std::vector<double> angles_deg)
{
    angles_deg = normalized(std::move(angles_deg));
    for (double angle : angles_deg) {
        const double c = std::cos(degrees_to_radians(angle));
        if (std::abs(c) <= 1e-9) {
            continue; // moment along +/-Y; this magnet cannot anchor
        }
        if (c < 0.0) {
            for (double& a : angles_deg) {
                a = normalize_angle_deg(a + 180.0);
            }
        }
        break;
    }
    return angles_deg;
}

std::vector<double> loss_gradient(const std::vector<double>& angles_deg,
                                  const MagnetArray& array,
                                  const EvaluationGrid& grid,
                                  const RobotMagnet& robot,
                                  const LossConfig& config)
{
    const TrapProblem problem(array, grid, robot, config);
    std::vector<double> gradient(angles_deg.size());
    (void)problem.evaluate_with_gradient(angles_deg, gradient);
    return gradient;
}

OptimizationReport
multi_restart(const TrapProblem& problem, const AdamConfig& adam,
              const RestartPolicy& policy,
              const std::optional<std::vector<double>>& warm_start_deg)
{
    validate(adam);
    validate(policy);
    const std::size_t n = problem.magnet_count();
    if (warm_start_deg && warm_start_deg->size() != n) {
        throw std::invalid_argument("warm start has "
                                    + std::to_string(warm_start_deg->size())
                                    + " angles for " + std::to_string(n)
                                    + " magnets");
    }

    const auto start_time = std::chrono::steady_clock::now();
    std::mt19937_64 rng(policy.seed);

    OptimizationReport report;
    report.seed = policy.seed;

    // Buffers reused by the radian-space objective closure.  Adam runs
    // on radians: with the default learning rate each early step moves
    // a coordinate by about 0.05 rad (~2.9 degrees), which converges
    // within the default step budget; in degree space the same rate
    // would crawl.
    std::vector<double> degrees(n);
    std::vector<double> gradient_deg(n);
    const ObjectiveFn objective =
        [&problem, &degrees, &gradient_deg](std::span<const double> x_rad,
                                            std::span<double> grad_rad) {
            for (std::size_t i = 0; i < x_rad.size(); ++i) {
                degrees[i] = radians_to_degrees(x_rad[i]);
            }
            const LossBreakdown breakdown =
                problem.evaluate_with_gradient(degrees, gradient_deg);
            for (std::size_t i = 0; i < grad_rad.size(); ++i) {
                grad_rad[i] = gradient_deg[i] * (180.0 / pi);
            }
            return breakdown.total;
        };

    bool stop = false;
    for (int round = 1; round <= policy.max_rounds && !stop; ++round) {
        const double threshold =
            policy.accuracy_threshold
            - static_cast<double>(round - 1) * policy.threshold_decrement;
        report.rounds_executed = round;

        for (int index = 1; index <= policy.restarts_per_round; ++index) {
            RestartRecord record;
            record.round = round;
            record.index = index;
            record.threshold = threshold;

            const bool use_warm =
                warm_start_deg && round == 1 && index == 1;
            record.warm_start = use_warm;
            if (use_warm) {
                record.initial_angles_deg = *warm_start_deg;
            } else {
                record.initial_angles_deg.resize(n);
                for (double& angle : record.initial_angles_deg) {
                    angle = uniform_angle(rng);
                }
            }

            std::vector<double> x0(n);
            for (std::size_t i = 0; i < n; ++i) {
                x0[i] = degrees_to_radians(record.initial_angles_deg[i]);
            }

            try {
                AdamRunResult run =
                    adam_run(std::move(x0), objective, adam, policy.steps);
                if (!run.finite) {
                    record.failed = true;
                } else {
                    record.final_angles_deg.resize(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        record.final_angles_deg[i] = normalize_angle_deg(
                            radians_to_degrees(run.x[i]));
                    }
                    const LossBreakdown breakdown =
                        problem.evaluate(record.final_angles_deg);
                    record.loss = breakdown.total;
                    record.direction_loss = breakdown.direction;
                    record.magnitude_loss = breakdown.magnitude;
                    record.accuracy = breakdown.accuracy();
                    record.loss_history = std::move(run.loss_history);
                }
            } catch (const degenerate_field_error&) {
                record.failed = true;
            } catch (const singularity_error&) {
                record.failed = true;
            }
            if (record.failed) {
                record.loss = std::numeric_limits<double>::quiet_NaN();
                record.direction_loss = record.loss;
                record.magnitude_loss = record.loss;
                record.accuracy = 0.0;
            }

            report.restarts.push_back(std::move(record));
            ++report.restarts_executed;

            const RestartRecord& finished = report.restarts.back();
            if (!finished.failed && finished.accuracy > threshold) {
                report.threshold_met = true;
                stop = true;
                break;
            }
        }
    }

    // Best finished restart by loss; earlier restart wins ties.
    std::size_t best = report.restarts.size();
    for (std::size_t i = 0; i < report.restarts.size(); ++i) {
        if (report.restarts[i].failed) {
            continue;
        }
        if (best == report.restarts.size()
            || report.restarts[i].loss < report.restarts[best].loss) {
            best = i;
        }
    }

    if (best == report.restarts.size()) {
        report.success = false;
        report.loss = std::numeric_limits<double>::quiet_NaN();
        report.direction_loss = report.loss;
        report.magnitude_loss = report.loss;
        report.accuracy = 0.0;
        report.force_sum = 0.0;
    } else {
        report.success = true;
        report.angles_deg =
            canonicalize_gauge(report.restarts[best].final_angles_deg);
        // Re-evaluate at exactly the reported (canonical) angles so the
        // published numbers and angles agree to the last bit.
        const LossBreakdown breakdown =
            problem.evaluate(report.angles_deg);
        report.loss = breakdown.total;
        report.direction_loss = breakdown.direction;
        report.magnitude_loss = breakdown.magnitude;
        report.accuracy = breakdown.accuracy();
        report.force_sum = breakdown.force_sum;
    }

    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_time)
                         .count();
    return report;
}

OptimizationReport multi_restart(const MagnetArray& array,
                                 const EvaluationGrid& grid,
                                 const RobotMagnet& robot,
                                 const LossConfig& config,
                                 const AdamConfig& adam,
                                 const RestartPolicy& policy)
{
    const TrapProblem problem(array, grid, robot, config);
    return multi_restart(problem, adam, policy);
}

TuneResult tune_force_target(const MagnetArray& array,
                             const EvaluationGrid& grid,
                             const RobotMagnet& robot, double gamma,
                             const AdamConfig& adam,
                             const RestartPolicy& policy)
{
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("gamma must be positive, got "
                                    + std::to_string(gamma));
    }

    LossConfig direction_only;
    direction_only.lambda1 = 1.0;
    direction_only.lambda2 = 0.0;
    TrapProblem problem(array, grid, robot, direction_only);

    TuneResult result;
    result.stage1 = multi_restart(problem, adam, policy);
    if (!result.stage1.success) {
        throw std::runtime_error(
            "force-target tuning aborted: every stage-1 restart failed");
    }

    result.force_target = gamma * result.stage1.force_sum;
    problem.set_loss_weights(1.0, 1.0);
    problem.set_force_target(result.force_target);

    RestartPolicy stage2_policy = policy;
    stage2_policy.seed = policy.seed + 1;
    result.stage2 = multi_restart(problem, adam, stage2_policy,
                                  result.stage1.angles_deg);
    return result;
}

BruteForceResult brute_force_2mag(const MagnetArray& array,
                                  const EvaluationGrid& grid,
                                  const RobotMagnet& robot,
                                  double resolution_deg)
{
    if (array.size() != 2) {
        throw std::invalid_argument(
            "the exhaustive oracle handles exactly 2 magnets, got "
            + std::to_string(array.size()));
    }
    if (!(resolution_deg > 0.0)) {
        throw std::invalid_argument("resolution must be positive");
    }
    const double ratio = 360.0 / resolution_deg;
    const auto samples = static_cast<int>(std::llround(ratio));
    if (std::abs(ratio - samples) > 1e-9) {
        throw std::invalid_argument("resolution must divide 360, got "
                                    + std::to_string(resolution_deg));
    }

    LossConfig direction_only;
    direction_only.lambda1 = 1.0;
    direction_only.lambda2 = 0.0;
    const TrapProblem problem(array, grid, robot, direction_only);

    BruteForceResult result;
    result.samples_per_axis = samples;
    result.surface.resize(static_cast<std::size_t>(samples) * samples);

    // Rows are independent; each writes its own slice.  The argmin scan
    // below is serial and index-ordered, so ties and results do not
    // depend on the thread count.  Cells whose evaluation fails (for
    // instance a vanishing flux at some angle pair) become NaN and are
    // skipped by the scan; exceptions must not cross the parallel
    // region.
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < samples; ++i1) {
        const double alpha1 = resolution_deg * i1;
        for (int i2 = 0; i2 < samples; ++i2) {
            const double angles[2] = { alpha1, resolution_deg * i2 };
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                value = problem.evaluate(angles).direction;
            } catch (const std::exception&) {
                // leave the cell as NaN
            }
            result.surface[static_cast<std::size_t>(i1) * samples + i2] =
                value;
        }
    }

    std::size_t best = result.surface.size();
    for (std::size_t i = 0; i < result.surface.size(); ++i) {
        if (std::isnan(result.surface[i])) {
            continue;
        }
        if (best == result.surface.size()
            || result.surface[i] < result.surface[best]) {
            best = i;
        }
    }
    if (best == result.surface.size()) {
        throw std::runtime_error("every oracle cell failed to evaluate");
    }
    result.best_alpha1_deg =
        resolution_deg * static_cast<double>(best / samples);
    result.best_alpha2_deg =
        resolution_deg * static_cast<double>(best % samples);
    result.best_direction_loss = result.surface[best];
    return result;
}

} // namespace magtrap
