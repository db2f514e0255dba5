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

#include <magtrap/objective.hpp>

#include <numeric>
#include <stdexcept>
#include <string>

namespace magtrap {

void validate(const LossConfig& config)
{
    if (config.lambda1 < 0.0 || config.lambda2 < 0.0) {
        throw std::invalid_argument("loss weights must be non-negative");
    }
    if (config.lambda1 == 0.0 && config.lambda2 == 0.0) {
        throw std::invalid_argument(
            "at least one loss weight must be positive");
    }
    if (config.force_target < 0.0) {
        throw std::invalid_argument("force target must be non-negative, got "
                                    + std::to_string(config.force_target));
    }
    if (!(config.zero_force_epsilon > 0.0)) {
        throw std::invalid_argument(
            "zero-force epsilon must be positive, got "
            + std::to_string(config.zero_force_epsilon));
    }
}

TargetField build_target(const EvaluationGrid& grid)
{
    TargetField target;
    target.directions.reserve(grid.size());
    for (const Eigen::Vector3d& point : grid.points) {
        const Eigen::Vector3d to_trap = grid.trap_point - point;
        target.directions.push_back(to_trap / to_trap.norm());
    }
    return target;
}

std::size_t NormalizedField::degenerate_count() const
{
    return static_cast<std::size_t>(
        std::accumulate(degenerate.begin(), degenerate.end(), 0L));
}

NormalizedField normalize_output(const ForceField& field,
                                 double zero_force_epsilon)
{
    NormalizedField output;
    output.directions.reserve(field.forces.size());
    output.degenerate.assign(field.forces.size(), 0);
    for (std::size_t i = 0; i < field.forces.size(); ++i) {
        const double norm = field.forces[i].norm();
        if (norm <= zero_force_epsilon) {
            output.directions.push_back(Eigen::Vector3d::Zero());
            output.degenerate[i] = 1;
        } else {
            output.directions.push_back(field.forces[i] / norm);
        }
    }
    return output;
}

double direction_loss(const NormalizedField& output,
                      const TargetField& target, double degenerate_penalty)
{
    if (output.directions.size() != target.directions.size()) {
        throw std::invalid_argument(
            "output and target field sizes differ: "
            + std::to_string(output.directions.size()) + " vs "
            + std::to_string(target.directions.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < output.directions.size(); ++i) {
        if (output.degenerate[i] != 0) {
            // A direction-less point is maximally wrong: the target's
            // unit norm plus the penalty, totaling the loss ceiling.
            sum += target.directions[i].squaredNorm() + degenerate_penalty;
        } else {
            sum += (output.directions[i] - target.directions[i])
                       .squaredNorm();
        }
    }
    return sum / static_cast<double>(output.directions.size());
}

double magnitude_loss(const ForceField& field, double force_target)
{
    double total = 0.0;
    for (const Eigen::Vector3d& force : field.forces) {
        total += force.norm();
    }
    const double deviation = total - force_target;
    return deviation * deviation;
}

double accuracy_from_direction_loss(double l1)
{
    return 1.0 - l1 / 4.0;
}

double accuracy(const NormalizedField& output, const TargetField& target)
{
    return accuracy_from_direction_loss(direction_loss(output, target));
}

LossBreakdown total_loss(const MagnetArray& array, const EvaluationGrid& grid,
                         const RobotMagnet& robot, const LossConfig& config)
{
    validate(config);
    const ForceField field = evaluate_grid(array, grid, robot);
    const TargetField target = build_target(grid);
    const NormalizedField output =
        normalize_output(field, config.zero_force_epsilon);

    LossBreakdown breakdown;
    breakdown.direction =
        direction_loss(output, target, config.degenerate_penalty);
    breakdown.magnitude = magnitude_loss(field, config.force_target);
    for (const Eigen::Vector3d& force : field.forces) {
        breakdown.force_sum += force.norm();
    }
    breakdown.total = config.lambda1 * breakdown.direction
                      + config.lambda2 * breakdown.magnitude;
    return breakdown;
}

} // namespace magtrap
