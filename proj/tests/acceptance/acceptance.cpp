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

// End-to-end acceptance checks for the trap-design library.  Where the
// unit tests pin down individual functions, these checks reproduce the
// headline results: the reference two-magnet solution, agreement with
// the exhaustive oracle, the physical consistency of the field and
// force models, the distance-sweep trends, and the scaled-up
// hundred-magnet runs.
//
// Each check prints exactly one line,
//
//     [PASS] <number> <name>: <measured values>
//     [FAIL] <number> <name>: <measured values or error>
//
// and the process exits nonzero if any executed check fails.  With no
// arguments every check runs in order; otherwise the arguments select
// check numbers (1-10), e.g. `magtrap_acceptance 7` or
// `magtrap_acceptance 8 9 10`.  Checks 8-10 share the ten-position
// hundred-magnet optimization, which runs once per process.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <magtrap/magtrap.hpp>

namespace {

using namespace magtrap;

// ---------------------------------------------------------------------
// Shared fixtures and small helpers
// ---------------------------------------------------------------------

// The reference problem: two 50.8 mm cubes of 1.275 T remanence at
// 120 mm pitch, trap at y = 89 mm, scored on a 20 x 20 grid spanning
// +/-10 mm around the trap.  Its known solution pair is (341, 19)
// degrees.
constexpr double reference_edge = 0.0508;     // [m]
constexpr double reference_remanence = 1.275; // [T]
constexpr double reference_pitch = 0.120;     // [m]
constexpr double reference_trap = 0.089;      // [m]
constexpr double reference_alpha1 = 341.0;    // [deg]
constexpr double reference_alpha2 = 19.0;     // [deg]

MagnetArray reference_array()
{
    return build_array(2, reference_edge, reference_remanence, 0.0,
                       reference_pitch);
}

EvaluationGrid reference_grid()
{
    return EvaluationGrid::make_centered(reference_trap, 0.010, 20, 20);
}

// 1 mm diameter x 2 mm cylindrical magnet of 1.32 T remanence: the
// trapped object used throughout.  The volume is the exact double used
// by the library defaults (SweepOptions, CLI); spelling it identically
// keeps every check evaluating bit-identical forces, since even a
// one-ulp difference diverges over hundreds of optimizer steps.
RobotMagnet standard_robot()
{
    return make_robot_magnet(1.32, 1.5707963267948966e-9);
}

// Shortest distance between two angles on the circle [degrees].
double circular_distance_deg(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

// True when `angles` matches the reference pair within `tol` degrees,
// in either magnet order (the layout is symmetric under relabeling).
bool matches_reference_pair(const std::vector<double>& angles, double tol)
{
    if (angles.size() != 2) {
        return false;
    }
    const bool straight =
        circular_distance_deg(angles[0], reference_alpha1) <= tol
        && circular_distance_deg(angles[1], reference_alpha2) <= tol;
    const bool swapped =
        circular_distance_deg(angles[0], reference_alpha2) <= tol
        && circular_distance_deg(angles[1], reference_alpha1) <= tol;
    return straight || swapped;
}

// Compact significant-digit formatting for the per-check report lines.
std::string num(double value, int digits = 4)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
    return buffer;
}

std::string pair_str(const std::vector<double>& angles)
{
    return "(" + num(angles.at(0), 6) + ", " + num(angles.at(1), 6) + ")";
}

// Uniform angle in [0, 360) from 53 random bits, matching the draw the
// optimizer uses for its restarts.
double uniform_angle(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 360.0;
}

Eigen::Vector3d random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = { gauss(rng), gauss(rng), gauss(rng) };
    } while (v.norm() < 1e-6);
    return v.normalized();
}

struct CheckResult {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------
// 1. Angle reproduction
// ---------------------------------------------------------------------

// The default two-stage tuning run on the reference problem must land
// within 3 degrees of the known solution pair (341, 19) or its swap.
CheckResult check_angle_reproduction()
{
    const TuneResult tuned =
        tune_force_target(reference_array(), reference_grid(),
                          standard_robot(), 1.5, AdamConfig{},
                          RestartPolicy{});
    const std::vector<double>& angles = tuned.stage2.angles_deg;
    const bool ok =
        tuned.stage2.success && matches_reference_pair(angles, 3.0);
    return { ok, "tuned angles " + pair_str(angles) + " deg vs reference ("
                     + num(reference_alpha1) + ", " + num(reference_alpha2)
                     + ") +/- 3, accuracy "
                     + num(tuned.stage2.accuracy) };
}

// ---------------------------------------------------------------------
// 2. Brute-force oracle agreement
// ---------------------------------------------------------------------

// An exhaustive 1-degree scan of the two-magnet direction loss bounds
// what the gradient optimizer must reach: its direction loss may exceed
// the scan minimum by at most 1e-4 (it normally does better, since the
// scan is confined to the 1-degree lattice), and the scan argmin must
// itself sit within 1.5 degrees of the reference pair.
CheckResult check_oracle_agreement()
{
    const MagnetArray array = reference_array();
    const EvaluationGrid grid = reference_grid();
    const RobotMagnet robot = standard_robot();

    const BruteForceResult oracle = brute_force_2mag(array, grid, robot, 1.0);
    const std::vector<double> argmin = canonicalize_gauge(
        { oracle.best_alpha1_deg, oracle.best_alpha2_deg });

    // Direction-only optimization; the threshold sits above the best
    // reachable accuracy, so every round runs and the best loss wins.
    const LossConfig direction_only;
    RestartPolicy policy;
    policy.accuracy_threshold = 0.95;
    const OptimizationReport report = multi_restart(
        array, grid, robot, direction_only, AdamConfig{}, policy);

    const bool loss_ok =
        report.success
        && report.direction_loss <= oracle.best_direction_loss + 1e-4;
    const bool argmin_ok = matches_reference_pair(argmin, 1.5);
    return { loss_ok && argmin_ok,
             "optimizer L1 " + num(report.direction_loss, 6)
                 + " vs scan minimum " + num(oracle.best_direction_loss, 6)
                 + " + 1e-4, scan argmin " + pair_str(argmin) + " deg" };
}

// ---------------------------------------------------------------------
// 3. Flux sign change
// ---------------------------------------------------------------------

// At the reference solution the flux z-component along the line
// (0, y, 0) must change sign at y = 60 +/- 5 mm.
CheckResult check_flux_sign_change()
{
    MagnetArray array = reference_array();
    array.set_angles_deg({ reference_alpha1, reference_alpha2 });
    const double y = bz_zero_crossing(array, reference_trap / 4.0,
                                      1.5 * reference_trap);
    const double y_mm = meters_to_millimeters(y);
    return { std::abs(y_mm - 60.0) <= 5.0,
             "flux z-component crosses zero at y = " + num(y_mm)
                 + " mm (expected 60 +/- 5 mm)" };
}

// ---------------------------------------------------------------------
// 4. Gradient conformance
// ---------------------------------------------------------------------

// The hand-derived loss gradient must match extended-precision central
// differences componentwise to 1e-5 relative, over 50 random angle
// vectors each for 2-, 4-, and 8-magnet arrays, with both loss terms
// active.  Components below 1e-12 are skipped (relative error is
// undefined near zero).
CheckResult check_gradient_conformance()
{
    const EvaluationGrid grid = reference_grid();
    const RobotMagnet robot = standard_robot();
    LossConfig loss;
    loss.lambda1 = 1.0;
    loss.lambda2 = 1.0;
    loss.force_target = 0.06;

    double worst = 0.0;
    int compared = 0;
    for (const int count : { 2, 4, 8 }) {
        const MagnetArray array =
            build_array(count, reference_edge, reference_remanence);
        std::mt19937_64 rng(4000 + static_cast<std::uint64_t>(count));
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> angles(count);
            for (double& a : angles) {
                a = uniform_angle(rng);
            }
            const std::vector<double> analytic =
                loss_gradient(angles, array, grid, robot, loss);
            const std::vector<double> reference = finite_difference_gradient(
                array, grid, robot, loss, angles, 1e-5);
            for (int k = 0; k < count; ++k) {
                if (std::abs(reference[k]) < 1e-12) {
                    continue;
                }
                worst = std::max(worst,
                                 std::abs(analytic[k] - reference[k])
                                     / std::abs(reference[k]));
                ++compared;
            }
        }
    }
    return { worst <= 1e-5, "max relative gradient error " + num(worst)
                                + " over " + std::to_string(compared)
                                + " components (tolerance 1e-5)" };
}

// ---------------------------------------------------------------------
// 5. Force-law exponent
// ---------------------------------------------------------------------

// The closed-form dipole force must equal the finite-difference
// gradient of m_obj . B with the object moment held fixed (1e-6
// relative at 20 random configurations), and the on-axis force of a
// single magnet must decay as distance^-4.
CheckResult check_force_law()
{
    std::mt19937_64 rng(5001);
    std::uniform_real_distribution<double> radius(0.08, 0.20);
    const double kappa = standard_robot().moment_magnitude();
    constexpr double h = 1e-6; // FD step [m]

    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Magnet magnet =
            make_magnet(Eigen::Vector3d::Zero(), reference_edge,
                        reference_remanence, uniform_angle(rng));
        const Eigen::Vector3d point = radius(rng) * random_unit(rng);
        const Eigen::Vector3d moment = kappa * random_unit(rng);

        const Eigen::Vector3d force = force_single(point, magnet, moment);
        Eigen::Vector3d fd;
        for (int i = 0; i < 3; ++i) {
            Eigen::Vector3d lo = point;
            Eigen::Vector3d hi = point;
            lo[i] -= h;
            hi[i] += h;
            fd[i] = (moment.dot(flux_density_single(hi, magnet))
                     - moment.dot(flux_density_single(lo, magnet)))
                    / (2.0 * h);
        }
        worst = std::max(worst, (force - fd).norm() / force.norm());
    }

    // Log-log slope of the on-axis force magnitude over 50-500 mm.
    const Magnet axial = make_magnet(Eigen::Vector3d::Zero(),
                                     reference_edge, reference_remanence);
    const Eigen::Vector3d moment(0.0, 0.0, kappa);
    const int samples = 20;
    std::vector<double> log_r(samples);
    std::vector<double> log_f(samples);
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / (samples - 1);
        const double r = 0.05 * std::pow(10.0, t); // 0.05 to 0.5 m
        const Eigen::Vector3d point(0.0, 0.0, r);
        log_r[k] = std::log(r);
        log_f[k] = std::log(force_single(point, axial, moment).norm());
    }
    double mean_r = 0.0;
    double mean_f = 0.0;
    for (int k = 0; k < samples; ++k) {
        mean_r += log_r[k];
        mean_f += log_f[k];
    }
    mean_r /= samples;
    mean_f /= samples;
    double cov = 0.0;
    double var = 0.0;
    for (int k = 0; k < samples; ++k) {
        cov += (log_r[k] - mean_r) * (log_f[k] - mean_f);
        var += (log_r[k] - mean_r) * (log_r[k] - mean_r);
    }
    const double slope = cov / var;

    const bool ok = worst <= 1e-6 && std::abs(slope + 4.0) <= 0.01;
    return { ok, "max FD mismatch " + num(worst)
                     + " (tolerance 1e-6), on-axis log-log slope "
                     + num(slope, 6) + " (expected -4 +/- 0.01)" };
}

// ---------------------------------------------------------------------
// 6. Field invariants
// ---------------------------------------------------------------------

// A superposition of dipole fields is divergence- and curl-free away
// from the sources, and the array geometry forces two exact mirror
// symmetries of the force field: across the x = 0 plane (moments have
// no x-component) and under reflecting the array through the z = 0
// plane with all rotations negated.
CheckResult check_field_invariants()
{
    std::mt19937_64 rng(6001);

    MagnetArray array = reference_array();
    array.set_angles_deg({ uniform_angle(rng), uniform_angle(rng) });

    // Divergence and curl from central differences of the Jacobian.
    constexpr double h = 1e-5; // [m]
    double worst_div = 0.0;
    double worst_curl = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double r = 0.15 + 0.25 * (static_cast<double>(rng() >> 11)
                                        * 0x1.0p-53);
        const Eigen::Vector3d point = r * random_unit(rng);
        Eigen::Matrix3d jacobian; // jacobian(i, j) = dB_i / dx_j
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d lo = point;
            Eigen::Vector3d hi = point;
            lo[j] -= h;
            hi[j] += h;
            jacobian.col(j) = (flux_density_total(hi, array)
                               - flux_density_total(lo, array))
                              / (2.0 * h);
        }
        const double flux_norm = flux_density_total(point, array).norm();
        const double divergence = jacobian.trace();
        const Eigen::Vector3d curl(jacobian(2, 1) - jacobian(1, 2),
                                   jacobian(0, 2) - jacobian(2, 0),
                                   jacobian(1, 0) - jacobian(0, 1));
        worst_div = std::max(worst_div,
                             std::abs(divergence) * h / flux_norm);
        worst_curl = std::max(worst_curl, curl.norm() * h / flux_norm);
    }
    const bool differential_ok = worst_div <= 1e-6 && worst_curl <= 1e-6;

    // Mirror symmetry across x = 0: F_x odd, F_y even.
    const EvaluationGrid grid = reference_grid();
    const RobotMagnet robot = standard_robot();
    const ForceField field = evaluate_grid(array, grid, robot);
    double max_force = 0.0;
    for (const Eigen::Vector3d& f : field.forces) {
        max_force = std::max(max_force, f.norm());
    }
    double worst_mirror = 0.0;
    for (int row = 0; row < grid.ny; ++row) {
        for (int col = 0; col < grid.nx; ++col) {
            const std::size_t p = static_cast<std::size_t>(row) * grid.nx
                                  + col;
            const std::size_t q = static_cast<std::size_t>(row) * grid.nx
                                  + (grid.nx - 1 - col);
            worst_mirror = std::max(
                worst_mirror, std::abs(field.forces[p].x()
                                       + field.forces[q].x()));
            worst_mirror = std::max(
                worst_mirror, std::abs(field.forces[p].y()
                                       - field.forces[q].y()));
        }
    }
    const bool mirror_ok = worst_mirror <= 1e-10 * max_force;

    // Reflecting the array through z = 0 while negating every rotation
    // angle leaves the in-plane force on the z = 0 grid unchanged.
    const int count = 4;
    MagnetArray upright =
        build_array(count, reference_edge, reference_remanence);
    std::vector<double> angles(count);
    for (double& a : angles) {
        a = uniform_angle(rng);
    }
    upright.set_angles_deg(angles);
    MagnetArray reflected =
        build_array(count, reference_edge, reference_remanence);
    std::vector<double> negated(count);
    for (int i = 0; i < count; ++i) {
        negated[i] = normalize_angle_deg(360.0 - angles[count - 1 - i]);
    }
    reflected.set_angles_deg(negated);
    const ForceField field_up = evaluate_grid(upright, grid, robot);
    const ForceField field_re = evaluate_grid(reflected, grid, robot);
    double max_force_up = 0.0;
    for (const Eigen::Vector3d& f : field_up.forces) {
        max_force_up = std::max(max_force_up, f.norm());
    }
    double worst_reflect = 0.0;
    for (std::size_t p = 0; p < field_up.forces.size(); ++p) {
        worst_reflect = std::max(worst_reflect,
                                 std::abs(field_up.forces[p].x()
                                          - field_re.forces[p].x()));
        worst_reflect = std::max(worst_reflect,
                                 std::abs(field_up.forces[p].y()
                                          - field_re.forces[p].y()));
    }
    const bool reflect_ok = worst_reflect <= 1e-10 * max_force_up;

    return { differential_ok && mirror_ok && reflect_ok,
             "scaled |div B| " + num(worst_div) + ", |curl B| "
                 + num(worst_curl) + " (tolerance 1e-6); mirror residual "
                 + num(worst_mirror / max_force)
                 + ", reflection residual "
                 + num(worst_reflect / max_force_up)
                 + " (tolerance 1e-10)" };
}

// ---------------------------------------------------------------------
// 7. Distance-sweep trends
// ---------------------------------------------------------------------

// Sweep configuration frozen for this check.  The small learning rate
// and generous step budget keep the warm-started solutions of
// successive distances on one smooth branch; the 0.70 acceptance
// threshold admits the far end of the sweep, where even the best
// two-magnet solution drops to about 0.72 accuracy.
SweepOptions sweep_configuration()
{
    SweepOptions options;
    options.distances = linspace(0.020, 0.130, 23);
    options.magnet_counts = { 2, 4, 6, 8 };
    options.adam.learning_rate = 0.01;
    options.policy.restarts_per_round = 6;
    options.policy.steps = 500;
    options.policy.accuracy_threshold = 0.70;
    options.policy.threshold_decrement = 0.05;
    options.policy.max_rounds = 3;
    options.policy.seed = 77;
    return options;
}

// Unwraps an angle sequence (adding multiples of 360 to minimize the
// jump from the previous value) and returns the largest absolute step.
double max_unwrapped_step(const std::vector<double>& raw)
{
    double previous = raw.at(0);
    double worst = 0.0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        const double candidate =
            raw[i] + 360.0 * std::round((previous - raw[i]) / 360.0);
        worst = std::max(worst, std::abs(candidate - previous));
        previous = candidate;
    }
    return worst;
}

// (a) The two-magnet average trap force decreases strictly with
// distance.  (b) The two-magnet angle columns trace continuous
// branches once unwrapped, and rotating every magnet by +180 degrees
// yields the twin branch with an identical loss.  (c) Four magnets trap
// rounder than two, and six versus eight are nearly identical:
// pointwise on the smoothed aspect-ratio column, at every distance
// where all four counts have finite untruncated ratios.
CheckResult check_sweep_trends()
{
    const SweepOptions options = sweep_configuration();
    const std::vector<SweepRow> rows = distance_sweep(options);

    std::vector<std::vector<const SweepRow*>> by_count;
    for (const int count : options.magnet_counts) {
        std::vector<const SweepRow*> group;
        for (const SweepRow& row : rows) {
            if (row.n_magnets == count) {
                group.push_back(&row);
            }
        }
        if (group.size() != options.distances.size()) {
            return { false, "sweep returned " + std::to_string(group.size())
                                + " rows for " + std::to_string(count)
                                + " magnets, expected "
                                + std::to_string(options.distances.size()) };
        }
        by_count.push_back(std::move(group));
    }
    for (const auto& group : by_count) {
        for (const SweepRow* row : group) {
            if (row->failed) {
                return { false, "sweep row failed at "
                                    + num(row->distance * 1e3) + " mm, "
                                    + std::to_string(row->n_magnets)
                                    + " magnets" };
            }
        }
    }
    const std::vector<const SweepRow*>& two = by_count[0];

    // (a) Strictly decreasing average force for two magnets.
    bool decreasing = true;
    for (std::size_t i = 1; i < two.size(); ++i) {
        decreasing = decreasing && two[i]->avg_force < two[i - 1]->avg_force;
    }

    // (b) Branch continuity plus the 180-degree twin.
    std::vector<double> alpha1;
    std::vector<double> alpha2;
    for (const SweepRow* row : two) {
        alpha1.push_back(row->angles_deg.at(0));
        alpha2.push_back(row->angles_deg.at(1));
    }
    const double worst_step =
        std::max(max_unwrapped_step(alpha1), max_unwrapped_step(alpha2));
    const bool continuous = worst_step < 20.0;

    MagnetArray twin_array = build_array(2, options.edge_length,
                                         options.remanence);
    const LossConfig direction_only;
    double worst_twin_gap = 0.0;
    for (const SweepRow* row : two) {
        const EvaluationGrid grid = EvaluationGrid::make_centered(
            row->distance, options.half_width, options.grid_nx,
            options.grid_ny);
        twin_array.set_angles_deg(row->angles_deg);
        const double base =
            total_loss(twin_array, grid, options.robot, direction_only)
                .direction;
        twin_array.set_angles_deg({ row->angles_deg[0] + 180.0,
                                    row->angles_deg[1] + 180.0 });
        const double twin =
            total_loss(twin_array, grid, options.robot, direction_only)
                .direction;
        worst_twin_gap = std::max(worst_twin_gap, std::abs(twin - base));
    }
    const bool twin_ok = worst_twin_gap <= 1e-12;

    // (c) Roundness ordering on the matched smoothed aspect ratios.
    int matched = 0;
    bool rounder4 = true;
    bool close68 = true;
    for (std::size_t i = 0; i < options.distances.size(); ++i) {
        bool usable = true;
        for (const auto& group : by_count) {
            usable = usable && !group[i]->truncated
                     && std::isfinite(group[i]->aspect_ratio_smoothed);
        }
        if (!usable) {
            continue;
        }
        ++matched;
        const double r2 = by_count[0][i]->aspect_ratio_smoothed;
        const double r4 = by_count[1][i]->aspect_ratio_smoothed;
        const double r6 = by_count[2][i]->aspect_ratio_smoothed;
        const double r8 = by_count[3][i]->aspect_ratio_smoothed;
        rounder4 = rounder4 && std::abs(r4 - 1.0) < std::abs(r2 - 1.0);
        close68 = close68 && std::abs(r6 - r8) < std::abs(r2 - r4);
    }
    const bool aspect_ok = matched >= 3 && rounder4 && close68;

    const bool ok = decreasing && continuous && twin_ok && aspect_ok;
    return { ok, "avg force " + num(two.front()->avg_force) + " -> "
                     + num(two.back()->avg_force) + " N "
                     + (decreasing ? "strictly decreasing" : "NOT monotone")
                     + "; max unwrapped angle step " + num(worst_step)
                     + " deg; twin-branch loss gap " + num(worst_twin_gap)
                     + "; roundness ordering on " + std::to_string(matched)
                     + " matched distances "
                     + (aspect_ok ? "holds" : "VIOLATED") };
}

// ---------------------------------------------------------------------
// 8.-10. Hundred-magnet runs, trap centering, determinism
// ---------------------------------------------------------------------

// Scaled-down array: one hundred 1 mm cubes (1.4 mm pitch), traps at
// ten stand-off distances between 5 and 20 mm, scored on a 20 x 20 grid
// spanning +/-2 mm around each trap (the evaluation window scales with
// the workspace).  One round of 20 restarts x 300 steps per position,
// stopping early above 0.95 accuracy.
constexpr int scaled_count = 100;
constexpr double scaled_edge = 0.001;     // [m]
constexpr double scaled_half_width = 0.002; // [m]

std::vector<double> scaled_traps()
{
    return linspace(0.005, 0.020, 10);
}

RestartPolicy scaled_policy(std::size_t position)
{
    RestartPolicy policy;
    policy.restarts_per_round = 20;
    policy.steps = 300;
    policy.accuracy_threshold = 0.95;
    policy.max_rounds = 1;
    policy.seed = 7000 + position;
    return policy;
}

OptimizationReport run_scaled_position(const MagnetArray& array, double trap,
                                       std::size_t position)
{
    const EvaluationGrid grid =
        EvaluationGrid::make_centered(trap, scaled_half_width, 20, 20);
    return multi_restart(array, grid, standard_robot(), LossConfig{},
                         AdamConfig{}, scaled_policy(position));
}

// The ten reports, computed once per process and shared by checks 8-10.
const std::vector<OptimizationReport>& scaled_reports()
{
    static const std::vector<OptimizationReport> reports = [] {
        const MagnetArray array =
            build_array(scaled_count, scaled_edge, reference_remanence);
        const std::vector<double> traps = scaled_traps();
        std::vector<OptimizationReport> out;
        out.reserve(traps.size());
        for (std::size_t i = 0; i < traps.size(); ++i) {
            out.push_back(run_scaled_position(array, traps[i], i));
        }
        return out;
    }();
    return reports;
}

// Every position must reach 0.85 accuracy within its 120 s budget.
CheckResult check_scaling()
{
    const std::vector<OptimizationReport>& reports = scaled_reports();
    double min_accuracy = 1.0;
    double max_seconds = 0.0;
    bool all_success = true;
    for (const OptimizationReport& report : reports) {
        all_success = all_success && report.success;
        min_accuracy = std::min(min_accuracy, report.accuracy);
        max_seconds = std::max(max_seconds, report.seconds);
    }
    const bool ok = all_success && min_accuracy >= 0.85
                    && max_seconds <= 120.0;
    return { ok, "10 positions, 100 magnets: min accuracy "
                     + num(min_accuracy) + " (floor 0.85), slowest "
                     + num(max_seconds) + " s (budget 120 s)" };
}

// The realized trap center must sit within one fine-grid cell (0.16 mm)
// of the requested position in at least 8 of the 10 runs, and any miss
// must be displaced toward the array, never away from it.
CheckResult check_trap_centering()
{
    const std::vector<OptimizationReport>& reports = scaled_reports();
    const std::vector<double> traps = scaled_traps();
    MagnetArray array =
        build_array(scaled_count, scaled_edge, reference_remanence);
    const RobotMagnet robot = standard_robot();

    const int fine_points = 26;
    const double spacing =
        2.0 * scaled_half_width / (fine_points - 1); // 0.16 mm
    int within = 0;
    bool misses_toward_array = true;
    double worst_offset = 0.0;
    for (std::size_t i = 0; i < traps.size(); ++i) {
        array.set_angles_deg(reports[i].angles_deg);
        const EvaluationGrid fine = EvaluationGrid::make_centered(
            traps[i], scaled_half_width, fine_points, fine_points);
        const ForceField field = evaluate_grid(array, fine, robot);
        const Eigen::Vector2d center = trap_center(field, fine);
        const double dx = center.x();
        const double dy = center.y() - traps[i];
        worst_offset = std::max(worst_offset, std::hypot(dx, dy));
        if (std::abs(dx) <= spacing && std::abs(dy) <= spacing) {
            ++within;
        } else {
            // The array sits at y = 0, so "toward the array" is dy < 0.
            misses_toward_array = misses_toward_array && dy < 0.0;
        }
    }
    const bool ok = within >= 8 && misses_toward_array;
    return { ok, std::to_string(within) + "/10 trap centers within one "
                     + num(spacing * 1e3, 3) + " mm cell, largest offset "
                     + num(worst_offset * 1e3, 3) + " mm, misses "
                     + (misses_toward_array ? "toward the array"
                                            : "AWAY from the array") };
}

// Re-running the tuning of check 1 and the ten positions of check 8
// with the same seeds must reproduce the serialized reports byte for
// byte once the wall-clock "seconds" fields are removed.
CheckResult check_determinism()
{
    const ConfigEcho echo{ { "check", "determinism" } };

    const auto tune_json = [&echo] {
        const TuneResult tuned =
            tune_force_target(reference_array(), reference_grid(),
                              standard_robot(), 1.5, AdamConfig{},
                              RestartPolicy{});
        return strip_seconds_keys(tune_to_json(tuned, echo, true));
    };
    const bool tune_identical = tune_json() == tune_json();

    const std::vector<OptimizationReport>& reports = scaled_reports();
    const std::vector<double> traps = scaled_traps();
    const MagnetArray array =
        build_array(scaled_count, scaled_edge, reference_remanence);
    bool scaled_identical = true;
    for (std::size_t i = 0; i < traps.size(); ++i) {
        const OptimizationReport repeat =
            run_scaled_position(array, traps[i], i);
        const std::string first =
            strip_seconds_keys(report_to_json(reports[i], echo, true));
        const std::string second =
            strip_seconds_keys(report_to_json(repeat, echo, true));
        scaled_identical = scaled_identical && first == second;
    }

    const bool ok = tune_identical && scaled_identical;
    return { ok, std::string("tuning report ")
                     + (tune_identical ? "byte-identical" : "DIFFERS")
                     + " across reruns; 10 position reports "
                     + (scaled_identical ? "byte-identical" : "DIFFER") };
}

// ---------------------------------------------------------------------

struct Check {
    int number = 0;
    const char* name = "";
    CheckResult (*run)();
};

constexpr Check checks[] = {
    { 1, "angle reproduction", check_angle_reproduction },
    { 2, "brute-force oracle agreement", check_oracle_agreement },
    { 3, "flux sign change", check_flux_sign_change },
    { 4, "gradient conformance", check_gradient_conformance },
    { 5, "force-law exponent", check_force_law },
    { 6, "field invariants", check_field_invariants },
    { 7, "distance-sweep trends", check_sweep_trends },
    { 8, "hundred-magnet scaling", check_scaling },
    { 9, "trap-center alignment", check_trap_centering },
    { 10, "determinism", check_determinism },
};

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        try {
            selected.push_back(std::stoi(argv[i]));
        } catch (const std::exception&) {
            selected.push_back(-1);
        }
        if (selected.back() < 1 || selected.back() > 10) {
            std::cerr << "usage: magtrap_acceptance [check numbers 1-10]\n";
            return 2;
        }
    }
    if (selected.empty()) {
        for (const Check& check : checks) {
            selected.push_back(check.number);
        }
    }

    bool all_pass = true;
    for (const int number : selected) {
        for (const Check& check : checks) {
            if (check.number != number) {
                continue;
            }
            CheckResult result;
            try {
                result = check.run();
            } catch (const std::exception& error) {
                result = { false, std::string("unhandled error: ")
                                      + error.what() };
            }
            std::cout << (result.pass ? "[PASS] " : "[FAIL] ")
                      << check.number << " " << check.name << ": "
                      << result.detail << "\n";
            all_pass = all_pass && result.pass;
        }
    }
    return all_pass ? 0 : 1;
}
