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

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

// The in-plane evaluation grid on which the trap objective is scored.
namespace magtrap {

// Minimum allowed distance between any grid point and the trap point.
// The target direction (trap - point)/||trap - point|| is undefined at
// the trap itself, so grids that contain it are rejected outright.
inline constexpr double grid_trap_epsilon = 1e-9; // [m]

// A rectangular set of z = 0 points centered on the trap point
// (0, y_trap, 0).  Points are ordered row-major: y varies in the outer
// loop, x in the inner loop.
struct EvaluationGrid {
    std::vector<Eigen::Vector3d> points; // [m], all with z = 0
    int nx = 0;                          // columns (distinct x values)
    int ny = 0;                          // rows (distinct y values)
    double half_width = 0.0;             // square half-width [m]
    Eigen::Vector3d trap_point = Eigen::Vector3d::Zero();

    [[nodiscard]] std::size_t size() const { return points.size(); }

    // nx-by-ny points evenly spaced over [-w, w]^2 around the trap at
    // (0, y_trap, 0).  Requires nx, ny >= 2 and w > 0; even resolutions
    // never place a point on the trap, odd ones are rejected when the
    // center point would coincide with it.
    [[nodiscard]] static EvaluationGrid
    make_centered(double y_trap, double half_width, int nx, int ny);

    // Wraps an explicit z = 0 point set (single points, irregular
    // layouts).  nx/ny are recorded as given for bookkeeping; points
    // must stay clear of the trap by grid_trap_epsilon.
    [[nodiscard]] static EvaluationGrid
    from_points(std::vector<Eigen::Vector3d> points,
                const Eigen::Vector3d& trap_point, int nx = 0, int ny = 0);
};

// Evenly spaced samples over [lo, hi], endpoints included (n >= 2).
[[nodiscard]] std::vector<double> linspace(double lo, double hi, int n);

} // namespace magtrap
