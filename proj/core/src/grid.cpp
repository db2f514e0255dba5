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

#include <magtrap/grid.hpp>

#include <stdexcept>
#include <string>

namespace magtrap {

std::vector<double> linspace(double lo, double hi, int n)
{
    if (n < 2) {
        throw std::invalid_argument("linspace needs at least 2 samples, got "
                                    + std::to_string(n));
    }
    std::vector<double> values(static_cast<std::size_t>(n));
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] = lo + step * i;
    }
    values.back() = hi; // exact endpoint regardless of rounding
    return values;
}

namespace {

void check_clear_of_trap(const std::vector<Eigen::Vector3d>& points,
                         const Eigen::Vector3d& trap_point)
{
    for (std::size_t i = 0; i < points.size(); ++i) {
        if ((points[i] - trap_point).norm() < grid_trap_epsilon) {
            throw std::invalid_argument(
                "grid point " + std::to_string(i)
                + " coincides with the trap point; the target direction "
                  "is undefined there");
        }
    }
}

} // namespace

EvaluationGrid EvaluationGrid::make_centered(double y_trap,
                                             double half_width, int nx,
                                             int ny)
{
    if (!(half_width > 0.0)) {
        throw std::invalid_argument("grid half-width must be positive, got "
                                    + std::to_string(half_width));
    }
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument(
            "grid resolution must be at least 2x2; use from_points for "
            "degenerate layouts");
    }

    const Eigen::Vector3d trap{ 0.0, y_trap, 0.0 };
    const std::vector<double> xs = linspace(-half_width, half_width, nx);
    const std::vector<double> ys =
        linspace(y_trap - half_width, y_trap + half_width, ny);

    EvaluationGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.half_width = half_width;
    grid.trap_point = trap;
    grid.points.reserve(static_cast<std::size_t>(nx) * ny);
    for (double y : ys) {
        for (double x : xs) {
            grid.points.emplace_back(x, y, 0.0);
        }
    }
    check_clear_of_trap(grid.points, trap);
    return grid;
}

EvaluationGrid EvaluationGrid::from_points(std::vector<Eigen::Vector3d> points,
                                           const Eigen::Vector3d& trap_point,
                                           int nx, int ny)
{
    if (points.empty()) {
        throw std::invalid_argument("grid needs at least one point");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].z() != 0.0) {
            throw std::invalid_argument("grid point " + std::to_string(i)
                                        + " is off the z = 0 plane");
        }
    }
    check_clear_of_trap(points, trap_point);

    EvaluationGrid grid;
    grid.points = std::move(points);
    grid.nx = nx;
    grid.ny = ny;
    grid.half_width = 0.0;
    grid.trap_point = trap_point;
    return grid;
}

} // namespace magtrap
