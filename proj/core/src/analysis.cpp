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

#include <magtrap/analysis.hpp>

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include <magtrap/objective.hpp>
#include <magtrap/trap_problem.hpp>

namespace magtrap {

Eigen::Vector2d trap_center(const ForceField& field,
                            const EvaluationGrid& grid, double tie_band)
{
    if (field.forces.empty() || field.forces.size() != grid.size()) {
        throw std::invalid_argument(
            "force field and grid sizes differ or are empty");
    }
    if (tie_band < 0.0) {
        throw std::invalid_argument("tie band must be non-negative");
    }

    // In-plane magnitude: the trap is a planar feature, the out-of-plane
    // force component does not move the object on its support plane.
    std::vector<double> magnitude(grid.size());
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        magnitude[i] = std::hypot(field.forces[i].x(), field.forces[i].y());
        lowest = std::min(lowest, magnitude[i]);
    }

    const double cutoff = (1.0 + tie_band) * lowest;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (magnitude[i] <= cutoff) {
            sum += grid.points[i].head<2>();
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

double avg_force_in_radius(const ForceField& field,
                           const EvaluationGrid& grid,
                           const Eigen::Vector2d& center, double radius)
{
    if (field.forces.size() != grid.size()) {
        throw std::invalid_argument("force field and grid sizes differ");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("radius must be positive");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if ((grid.points[i].head<2>() - center).norm() <= radius) {
            sum += field.forces[i].norm();
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument(
            "no grid point within the averaging radius");
    }
    return sum / static_cast<double>(count);
}

AspectRatioResult trap_aspect_ratio(const MagnetArray& array,
                                    const RobotMagnet& robot,
                                    double trap_distance,
                                    const AspectRatioOptions& options)
{
    if (options.resolution < 2) {
        throw std::invalid_argument("fine grid needs at least 2x2 points");
    }
    if (!(options.force_threshold > 0.0)) {
        throw std::invalid_argument("force threshold must be positive");
    }

    const int res = options.resolution;
    const double w = options.half_width;
    const std::vector<double> xs = linspace(-w, w, res);
    const std::vector<double> ys =
        linspace(trap_distance - w, trap_distance + w, res);

    std::vector<Eigen::Vector3d> points;
    points.reserve(static_cast<std::size_t>(res) * res);
    for (double y : ys) {
        for (double x : xs) {
            points.emplace_back(x, y, 0.0);
        }
    }
    const ForceField field = evaluate_points(array, points, robot);

    std::vector<double> norms(field.forces.size());
    std::size_t lowest = 0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        norms[i] = field.forces[i].norm();
        if (norms[i] < norms[lowest]) {
            lowest = i;
        }
    }

    AspectRatioResult result;
    result.min_force = norms[lowest];
    if (norms[lowest] > options.force_threshold) {
        throw std::runtime_error(
            "no fine-grid cell is below the force threshold "
            + std::to_string(options.force_threshold)
            + " N; there is no low-force region to measure");
    }

    // Flood-fill the 4-connected below-threshold region containing the
    // minimum-force cell (the trap), tracking its index bounding box.
    const auto col = [res](std::size_t i) {
        return static_cast<int>(i) % res;
    };
    const auto row = [res](std::size_t i) {
        return static_cast<int>(i) / res;
    };
    std::vector<std::uint8_t> visited(norms.size(), 0);
    std::deque<std::size_t> frontier{ lowest };
    visited[lowest] = 1;
    int min_col = col(lowest);
    int max_col = min_col;
    int min_row = row(lowest);
    int max_row = min_row;
    while (!frontier.empty()) {
        const std::size_t cell = frontier.front();
        frontier.pop_front();
        ++result.region_cells;
        const int c = col(cell);
        const int r = row(cell);
        min_col = std::min(min_col, c);
        max_col = std::max(max_col, c);
        min_row = std::min(min_row, r);
        max_row = std::max(max_row, r);

        const int neighbor_cols[4] = { c - 1, c + 1, c, c };
        const int neighbor_rows[4] = { r, r, r - 1, r + 1 };
        for (int j = 0; j < 4; ++j) {
            const int nc = neighbor_cols[j];
            const int nr = neighbor_rows[j];
            if (nc < 0 || nc >= res || nr < 0 || nr >= res) {
                continue;
            }
            const auto ni =
                static_cast<std::size_t>(nr) * res + nc;
            if (visited[ni] == 0 && norms[ni] <= options.force_threshold) {
                visited[ni] = 1;
                frontier.push_back(ni);
            }
        }
    }

    result.truncated = min_col == 0 || max_col == res - 1 || min_row == 0
                       || max_row == res - 1;

    const double spacing = 2.0 * w / static_cast<double>(res - 1);
    const double extent_x = spacing * (max_col - min_col + 1);
    const double extent_y = spacing * (max_row - min_row + 1);
    result.ratio = extent_x > extent_y ? extent_x / extent_y
                                       : extent_y / extent_x;
    return result;
}

double bz_zero_crossing(const MagnetArray& array, double y_low, double y_high,
                        int scan_samples, double tolerance)
{
    if (!(y_high > y_low)) {
        throw std::invalid_argument("scan range is empty");
    }
    if (scan_samples < 1) {
        throw std::invalid_argument("need at least one scan interval");
    }
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("tolerance must be positive");
    }

    const auto bz = [&array](double y) {
        return flux_density_total({ 0.0, y, 0.0 }, array).z();
    };

    // Bracket the first sign change along the scan line.
    double lo = y_low;
    double f_lo = bz(lo);
    if (f_lo == 0.0) {
        return lo;
    }
    double hi = lo;
    bool bracketed = false;
    const double step =
        (y_high - y_low) / static_cast<double>(scan_samples);
    for (int i = 1; i <= scan_samples; ++i) {
        hi = (i == scan_samples) ? y_high : y_low + step * i;
        const double f_hi = bz(hi);
        if (f_hi == 0.0) {
            return hi;
        }
        if (std::signbit(f_lo) != std::signbit(f_hi)) {
            bracketed = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if (!bracketed) {
        throw std::runtime_error(
            "flux z-component does not change sign in the scanned range");
    }

    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = bz(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void smooth_aspect_ratios(std::vector<SweepRow>& rows, int window)
{
    if (window < 1) {
        throw std::invalid_argument("smoothing window must be positive");
    }
    const int half = window / 2;

    // Rows are grouped by magnet count in sweep order; smooth each run
    // independently with a centered window that shrinks at the ends and
    // skips rows without a defined ratio.
    const auto has_ratio = [](const SweepRow& row) {
        return !row.failed && std::isfinite(row.aspect_ratio);
    };
    std::size_t run_start = 0;
    while (run_start < rows.size()) {
        std::size_t run_end = run_start;
        while (run_end < rows.size()
               && rows[run_end].n_magnets == rows[run_start].n_magnets) {
            ++run_end;
        }
        for (std::size_t i = run_start; i < run_end; ++i) {
            if (!has_ratio(rows[i])) {
                rows[i].aspect_ratio_smoothed =
                    std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            double sum = 0.0;
            int count = 0;
            for (std::size_t j = std::max(run_start, i - std::min(i, static_cast<std::size_t>(half)));
                 j < std::min(run_end, i + static_cast<std::size_t>(half) + 1);
                 ++j) {
                if (has_ratio(rows[j])) {
                    sum += rows[j].aspect_ratio;
                    ++count;
                }
            }
            rows[i].aspect_ratio_smoothed = sum / count;
        }
        run_start = run_end;
    }
}

std::vector<SweepRow> distance_sweep(const SweepOptions& options)
{
    if (options.distances.empty() || options.magnet_counts.empty()) {
        throw std::invalid_argument(
            "sweep needs at least one distance and one magnet count");
    }
    validate(options.adam);
    validate(options.policy);

    std::vector<SweepRow> rows;
    rows.reserve(options.distances.size() * options.magnet_counts.size());
    std::uint64_t row_index = 0;

    for (int count : options.magnet_counts) {
        const MagnetArray array =
            build_array(count, options.edge_length, options.remanence,
                        options.extra_spacing, options.pitch_override);
        std::optional<std::vector<double>> warm;

        for (double distance : options.distances) {
            const auto row_start = std::chrono::steady_clock::now();
            SweepRow row;
            row.distance = distance;
            row.n_magnets = count;

            try {
                const EvaluationGrid grid = EvaluationGrid::make_centered(
                    distance, options.half_width, options.grid_nx,
                    options.grid_ny);
                LossConfig direction_only;
                direction_only.lambda1 = 1.0;
                direction_only.lambda2 = 0.0;
                const TrapProblem problem(array, grid, options.robot,
                                          direction_only);

                RestartPolicy row_policy = options.policy;
                row_policy.seed = options.policy.seed + row_index;

                // Continue the angle branch from the previous distance:
                // polish the warm start alone first and only fall back to
                // the full random-restart protocol when its accuracy drops
                // below the stopping threshold.
                OptimizationReport report;
                bool solved_by_warm = false;
                if (warm) {
                    RestartPolicy warm_only = row_policy;
                    warm_only.restarts_per_round = 1;
                    warm_only.max_rounds = 1;
                    report =
                        multi_restart(problem, options.adam, warm_only, warm);
                    solved_by_warm =
                        report.success
                        && report.accuracy > row_policy.accuracy_threshold;
                }
                if (!solved_by_warm) {
                    report = multi_restart(problem, options.adam, row_policy,
                                           warm);
                }
                if (!report.success) {
                    throw std::runtime_error("every restart failed");
                }

                row.angles_deg = report.angles_deg;
                row.loss = report.loss;
                row.accuracy = report.accuracy;
                warm = report.angles_deg;

                const MagnetArray solved =
                    problem.array_with_angles(report.angles_deg);
                const ForceField field =
                    evaluate_grid(solved, grid, options.robot);
                row.avg_force = avg_force_in_radius(
                    field, grid, Eigen::Vector2d{ 0.0, distance },
                    options.avg_force_radius);
                try {
                    const AspectRatioResult aspect = trap_aspect_ratio(
                        solved, options.robot, distance, options.aspect);
                    row.aspect_ratio = aspect.ratio;
                    row.truncated = aspect.truncated;
                } catch (const std::runtime_error&) {
                    // No below-threshold region at this distance; the row
                    // itself is still a valid solution.
                    row.aspect_ratio =
                        std::numeric_limits<double>::quiet_NaN();
                }
            } catch (const std::exception&) {
                row.failed = true;
                row.loss = std::numeric_limits<double>::quiet_NaN();
                row.accuracy = std::numeric_limits<double>::quiet_NaN();
                row.avg_force = std::numeric_limits<double>::quiet_NaN();
                row.aspect_ratio = std::numeric_limits<double>::quiet_NaN();
                warm.reset(); // do not chain from a failed point
            }

            row.seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - row_start)
                              .count();
            rows.push_back(std::move(row));
            ++row_index;
        }
    }

    smooth_aspect_ratios(rows, options.smoothing_window);
    return rows;
}

} // namespace magtrap
