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

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <magtrap/field.hpp>
#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>

// The trap objective: a direction term that points every force vector
// at the trap, plus a magnitude term that pulls the grid-total force
// toward a prescribed value.
namespace magtrap {

// Weights and targets of the composite loss
//   L = lambda1 * L1 + lambda2 * L2
// with
//   L1 = mean_ij || F_ij/||F_ij|| - T_ij ||^2          (direction)
//   L2 = ( sum_ij ||F_ij|| - force_target )^2          (magnitude)
// L2 uses the grid-total (not the mean) of force norms, so force_target
// is resolution-dependent by construction.
struct LossConfig {
    double lambda1 = 1.0;
    double lambda2 = 0.0;
    double force_target = 0.0; // desired total force over the grid [N]

    // Force norms at or below this are treated as direction-less; such
    // points contribute ||target||^2 + degenerate_penalty to L1 (the
    // loss maximum, 4) and zero gradient, keeping the loss finite.
    double zero_force_epsilon = 1e-18; // [N]
    double degenerate_penalty = 3.0;
};

// Throws std::invalid_argument unless lambda1, lambda2 >= 0 (not both
// zero) and force_target >= 0.
void validate(const LossConfig& config);

// Unit vectors pointing from each grid point toward the trap.
struct TargetField {
    std::vector<Eigen::Vector3d> directions;
};

// T_ij = (trap - point_ij) / ||trap - point_ij||.
[[nodiscard]] TargetField build_target(const EvaluationGrid& grid);

// Force directions F/||F||; zero-force points become the zero vector
// and are flagged degenerate.
struct NormalizedField {
    std::vector<Eigen::Vector3d> directions;
    std::vector<std::uint8_t> degenerate;

    [[nodiscard]] std::size_t degenerate_count() const;
};

[[nodiscard]] NormalizedField
normalize_output(const ForceField& field, double zero_force_epsilon = 1e-18);

// Mean squared direction mismatch, in [0, 4] for unit inputs.
// Degenerate points contribute ||target||^2 + degenerate_penalty each.
[[nodiscard]] double direction_loss(const NormalizedField& output,
                                    const TargetField& target,
                                    double degenerate_penalty = 3.0);

// (sum ||F|| - force_target)^2.
[[nodiscard]] double magnitude_loss(const ForceField& field,
                                    double force_target);

// accuracy = 1 - L1/4 = (1 + mean cosine similarity) / 2, in [0, 1].
[[nodiscard]] double accuracy_from_direction_loss(double l1);

[[nodiscard]] double accuracy(const NormalizedField& output,
                              const TargetField& target);

// All loss components of one evaluation.
struct LossBreakdown {
    double total = 0.0;
    double direction = 0.0; // L1
    double magnitude = 0.0; // L2
    double force_sum = 0.0; // sum of force norms [N]

    [[nodiscard]] double accuracy() const
    {
        return accuracy_from_direction_loss(direction);
    }
};

// Full objective for an array with its stored angles: evaluate the
// grid, normalize, and combine the loss terms.
[[nodiscard]] LossBreakdown total_loss(const MagnetArray& array,
                                       const EvaluationGrid& grid,
                                       const RobotMagnet& robot,
                                       const LossConfig& config);

} // namespace magtrap
