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
#include <optional>
#include <vector>

#include <magtrap/adam.hpp>
#include <magtrap/trap_problem.hpp>

// Multi-restart angle optimization with accuracy-threshold stopping,
// plus the exhaustive two-magnet oracle used to validate it.
namespace magtrap {

// Restart protocol: up to max_rounds rounds of up to restarts_per_round
// random starts each.  A round stops the whole protocol as soon as one
// restart's final accuracy strictly exceeds the round's threshold; each
// new round lowers the threshold by threshold_decrement (absolute).
struct RestartPolicy {
    int restarts_per_round = 5; // k
    int steps = 300;            // Adam updates per restart
    double accuracy_threshold = 0.9;
    double threshold_decrement = 0.1;
    int max_rounds = 3; // c
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument on out-of-range fields.
void validate(const RestartPolicy& policy);

// Outcome of one restart.
struct RestartRecord {
    int round = 0;       // 1-based
    int index = 0;       // 1-based within the round
    double threshold = 0.0;
    bool warm_start = false; // seeded from a caller-provided solution
    bool failed = false;     // non-finite loss/gradient or a field error
    std::vector<double> initial_angles_deg;
    std::vector<double> final_angles_deg;
    double loss = 0.0;
    double direction_loss = 0.0;
    double magnitude_loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> loss_history; // steps + 1 entries when finite
};

// Best solution plus full restart provenance.
struct OptimizationReport {
    // Best angles, normalized to [0, 360) and gauge-canonicalized (see
    // canonicalize_gauge); loss fields are re-evaluated at exactly
    // these angles.
    std::vector<double> angles_deg;
    double loss = 0.0;
    double direction_loss = 0.0;
    double magnitude_loss = 0.0;
    double accuracy = 0.0;
    double force_sum = 0.0; // [N]

    bool success = false;       // at least one restart finished
    bool threshold_met = false; // some restart beat its round threshold
    int restarts_executed = 0;
    int rounds_executed = 0;
    double seconds = 0.0; // wall-clock duration (excluded from
                          // determinism comparisons)
    std::uint64_t seed = 0;
    std::vector<RestartRecord> restarts;
};

// Rotating every magnet by +180 degrees flips every array moment, hence
// the flux and the object moment flip together — the force field, loss,
// and trap are exactly unchanged.  Reported solutions fix this gauge:
// the first magnet whose moment has |cos| > 1e-9 gets cos >= 0.
// (This is also why two solution branches exist for any trap position:
// they are the same trap, 180 degrees apart.)
[[nodiscard]] std::vector<double>
canonicalize_gauge(std::vector<double> angles_deg);

// Exact gradient of the composite loss at `angles_deg` [per degree].
[[nodiscard]] std::vector<double>
loss_gradient(const std::vector<double>& angles_deg,
              const MagnetArray& array, const EvaluationGrid& grid,
              const RobotMagnet& robot, const LossConfig& config);

// Runs the restart protocol on `problem`.  Initial angles are drawn
// uniformly from [0, 360) per magnet, from a single generator seeded
// once — the i-th executed restart always sees the same draw for a
// given seed.  If `warm_start_deg` is given it replaces the random draw
// of the very first restart (no generator draw is consumed).
// The best-loss solution over all finished restarts wins (ties: first).
[[nodiscard]] OptimizationReport multi_restart(
    const TrapProblem& problem, const AdamConfig& adam,
    const RestartPolicy& policy,
    const std::optional<std::vector<double>>& warm_start_deg = std::nullopt);

// Convenience overload constructing the TrapProblem internally.
[[nodiscard]] OptimizationReport
multi_restart(const MagnetArray& array, const EvaluationGrid& grid,
              const RobotMagnet& robot, const LossConfig& config,
              const AdamConfig& adam, const RestartPolicy& policy);

// Two-stage force-target tuning: stage 1 optimizes direction only
// (lambda2 = 0); the total force of its solution, scaled by gamma,
// becomes the stage-2 force target with lambda1 = lambda2 = 1.  Stage 2
// warm-starts from the stage-1 solution (and uses seed + 1 for its own
// random draws, keeping the stages' draws independent).
struct TuneResult {
    double force_target = 0.0; // [N]
    OptimizationReport stage1;
    OptimizationReport stage2;
};

[[nodiscard]] TuneResult
tune_force_target(const MagnetArray& array, const EvaluationGrid& grid,
                  const RobotMagnet& robot, double gamma,
                  const AdamConfig& adam, const RestartPolicy& policy);

// Exhaustive direction-loss scan over the (alpha1, alpha2) grid at the
// given resolution [degrees] for two-magnet arrays — the brute-force
// oracle that bounds what the gradient optimizer should reach.
struct BruteForceResult {
    double best_alpha1_deg = 0.0;
    double best_alpha2_deg = 0.0;
    double best_direction_loss = 0.0;
    int samples_per_axis = 0;
    // Row-major: surface[i1 * samples_per_axis + i2] is the direction
    // loss at (i1 * resolution, i2 * resolution).
    std::vector<double> surface;
};

// Requires exactly two magnets and a resolution that divides 360.
[[nodiscard]] BruteForceResult
brute_force_2mag(const MagnetArray& array, const EvaluationGrid& grid,
                 const RobotMagnet& robot, double resolution_deg);

} // namespace magtrap
