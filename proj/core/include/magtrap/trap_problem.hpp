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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>
#include <magtrap/objective.hpp>

// A fixed (array layout, grid, object) triple with precomputed geometry,
// exposing the loss and its exact angle gradient for the optimizer.
//
// Only the rotation angles vary during optimization, so everything that
// depends purely on positions — separation vectors, their unit
// directions, and the 1/d^3 and 1/d^4 kernel prefactors — is computed
// once per problem instead of once per step.
namespace magtrap {

class TrapProblem {
public:
    // Copies the inputs; `array` provides the layout and per-magnet
    // moment magnitudes, its stored angles are ignored in favor of the
    // angle vectors passed to evaluate().
    TrapProblem(MagnetArray array, EvaluationGrid grid, RobotMagnet robot,
                LossConfig config);

    [[nodiscard]] std::size_t magnet_count() const
    {
        return array_.size();
    }
    [[nodiscard]] std::size_t point_count() const { return grid_.size(); }
    [[nodiscard]] const MagnetArray& array() const { return array_; }
    [[nodiscard]] const EvaluationGrid& grid() const { return grid_; }
    [[nodiscard]] const RobotMagnet& robot() const { return robot_; }
    [[nodiscard]] const LossConfig& config() const { return config_; }
    [[nodiscard]] const TargetField& target() const { return target_; }

    // The loss weights and force target may change between optimization
    // stages without invalidating the precomputed geometry.
    void set_loss_weights(double lambda1, double lambda2);
    void set_force_target(double force_target);

    // Loss at the given angles [degrees].  Throws
    // degenerate_field_error if the flux vanishes at a grid point.
    [[nodiscard]] LossBreakdown
    evaluate(std::span<const double> angles_deg) const;

    // Loss plus exact gradient dL/d(angle) [per degree], obtained by a
    // hand-derived reverse pass through the force and flux kernels.
    // `gradient_deg` must have magnet_count() elements.
    LossBreakdown evaluate_with_gradient(std::span<const double> angles_deg,
                                         std::span<double> gradient_deg) const;

    // The array with the given angles written into it (for field dumps
    // and analysis of a candidate solution).
    [[nodiscard]] MagnetArray
    array_with_angles(std::span<const double> angles_deg) const;

private:
    MagnetArray array_;
    EvaluationGrid grid_;
    RobotMagnet robot_;
    LossConfig config_;
    TargetField target_;

    // Flattened per-(point, magnet) geometry, index p * n_magnets + k.
    std::vector<Eigen::Vector3d> rhat_;
    std::vector<double> flux_coeff_;  // mu0 / (4 pi d^3)
    std::vector<double> force_coeff_; // 3 mu0 / (4 pi d^4)
    std::vector<double> moment_magnitude_; // per magnet, Br l^3 / mu0
    double object_moment_magnitude_ = 0.0; // Br V / mu0

    template <bool WithGradient>
    LossBreakdown evaluate_impl(std::span<const double> angles_deg,
                                std::span<double> gradient_deg) const;
};

} // namespace magtrap
