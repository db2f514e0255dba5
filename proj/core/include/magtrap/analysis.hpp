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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include <magtrap/adam.hpp>
#include <magtrap/field.hpp>
#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>
#include <magtrap/optimize.hpp>

// Trap characterization: where the trap actually sits, how strong it
// is, how round it is, and how all of that changes with distance.
namespace magtrap {

// Mean (x, y) of the grid points whose in-plane force magnitude is
// within tie_band (relative) of the grid minimum — "the points with the
// lowest force".  With an exact zero at the trap this is the trap
// center; for a constant field every point ties and the centroid is
// returned.
[[nodiscard]] Eigen::Vector2d trap_center(const ForceField& field,
                                          const EvaluationGrid& grid,
                                          double tie_band = 0.05);

// Mean force norm over grid points within `radius` (in-plane) of
// `center`.  Throws std::invalid_argument when no point qualifies.
[[nodiscard]] double avg_force_in_radius(const ForceField& field,
                                         const EvaluationGrid& grid,
                                         const Eigen::Vector2d& center,
                                         double radius);

struct AspectRatioOptions {
    double force_threshold = 1e-4; // low-force cutoff [N] (0.1 mN)
    int resolution = 81;           // fine grid points per axis
    double half_width = 0.010;     // fine grid half-width [m]
};

struct AspectRatioResult {
    double ratio = 1.0;   // major / minor axis extent, >= 1
    bool truncated = false; // low-force region touches the grid edge
    int region_cells = 0; // size of the connected low-force region
    double min_force = 0.0; // smallest force norm on the fine grid [N]
};

// Shape of the low-force region around the trap at (0, trap_distance):
// evaluates ||F|| on a fine grid, takes the connected region of
// below-threshold cells containing the minimum-force cell, and returns
// the ratio of its axis-aligned extents (the region is axis-aligned by
// the array's mirror symmetry).  A region touching the grid border is
// flagged truncated — its true extent exceeds the evaluated area.
// Throws std::runtime_error if no cell is below the threshold.
[[nodiscard]] AspectRatioResult
trap_aspect_ratio(const MagnetArray& array, const RobotMagnet& robot,
                  double trap_distance,
                  const AspectRatioOptions& options = {});

// Location y [m] on the line (0, y, 0) where the flux z-component
// changes sign: the scan over [y_low, y_high] (scan_samples intervals)
// brackets the first sign change, bisection refines it to `tolerance`.
// Throws std::runtime_error when no sign change is found in range.
[[nodiscard]] double bz_zero_crossing(const MagnetArray& array, double y_low,
                                      double y_high, int scan_samples = 256,
                                      double tolerance = 1e-6);

// One full optimization per (magnet count, trap distance) pair, with
// trap metrics of the optimized solution.
struct SweepOptions {
    std::vector<double> distances;  // trap distances [m], in sweep order
    std::vector<int> magnet_counts; // even counts, outer loop

    double edge_length = 0.0508; // [m]
    double remanence = 1.275;    // [T]
    double extra_spacing = 0.0;  // [m]
    std::optional<double> pitch_override; // [m]
    RobotMagnet robot{ 1.32, 1.5707963267948966e-9 };

    int grid_nx = 20;
    int grid_ny = 20;
    double half_width = 0.010; // [m]

    AdamConfig adam;
    RestartPolicy policy; // per-row seed = policy.seed + row index

    double avg_force_radius = 0.010; // [m], centered on the trap point
    AspectRatioOptions aspect;
    int smoothing_window = 5; // centered moving average over distances
};

struct SweepRow {
    double distance = 0.0; // [m]
    int n_magnets = 0;
    std::vector<double> angles_deg; // canonical solution branch
    double loss = 0.0;
    double accuracy = 0.0;
    double avg_force = 0.0;    // [N]
    double aspect_ratio = 0.0;
    double aspect_ratio_smoothed = 0.0;
    bool truncated = false;
    bool failed = false; // optimization or analysis failed; row kept
    double seconds = 0.0;
};

// Optimizes every (count, distance) pair with lambda2 = 0 (the trap
// direction objective; magnitude and shape are measured afterward, not
// optimized).  Within one magnet count, each distance warm-starts from
// the previous solution so the angle columns trace continuous branches;
// the warm start falls back to random restarts automatically when its
// accuracy misses the threshold.  Failures are recorded per row and the
// sweep continues.
[[nodiscard]] std::vector<SweepRow> distance_sweep(const SweepOptions& options);

// Centered moving average of the aspect_ratio column within each magnet
// count (window shrinks at the ends); applied by distance_sweep, exposed
// for tests.
void smooth_aspect_ratios(std::vector<SweepRow>& rows, int window);

} // namespace magtrap
