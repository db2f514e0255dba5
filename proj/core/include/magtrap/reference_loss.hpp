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

#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>
#include <magtrap/objective.hpp>

// An independent long-double transcription of the loss, used as the
// finite-difference oracle for gradient conformance checks.
//
// It shares no code or precomputed tables with TrapProblem: plain
// per-point loops straight from the dipole formulas, evaluated in
// extended precision.  Central differences of the double-precision loss
// bottom out at a noise floor of roughly eps * L / (2h), which for
// small gradient components is the same order as the values being
// checked; the extended-precision evaluation removes that noise without
// changing what is being compared.
namespace magtrap {

// Loss at the given angles [degrees], all arithmetic in long double.
[[nodiscard]] long double
reference_loss(const MagnetArray& array, const EvaluationGrid& grid,
               const RobotMagnet& robot, const LossConfig& config,
               std::span<const double> angles_deg);

// Central-difference gradient [per degree] of reference_loss.
[[nodiscard]] std::vector<double> finite_difference_gradient(
    const MagnetArray& array, const EvaluationGrid& grid,
    const RobotMagnet& robot, const LossConfig& config,
    std::span<const double> angles_deg, double step_deg = 1e-5);

} // namespace magtrap
