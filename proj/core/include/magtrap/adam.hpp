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

#include <functional>
#include <span>
#include <vector>

// Adam: first-order stochastic-gradient optimizer with bias-corrected
// running moment estimates.  Used here as a plain deterministic
// gradient descent (the objective is exact, not sampled).
namespace magtrap {

struct AdamConfig {
    double learning_rate = 0.05;
    double beta1 = 0.9;  // first-moment decay
    double beta2 = 0.999; // second-moment decay
    double epsilon = 1e-8; // denominator fuzz
};

// Throws std::invalid_argument unless 0 <= beta < 1 for both betas and
// learning_rate > 0.
void validate(const AdamConfig& config);

// Mutable optimizer state; one slot per parameter.
struct AdamState {
    AdamConfig config;
    int step = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    explicit AdamState(const AdamConfig& config, std::size_t dimension);
};

// One Adam update in place:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   x <- x - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
void adam_step(AdamState& state, std::span<double> x,
               std::span<const double> gradient);

// Objective: fills `gradient` (same length as x) and returns the loss.
using ObjectiveFn =
    std::function<double(std::span<const double> x, std::span<double> gradient)>;

struct AdamRunResult {
    std::vector<double> x;
    // Loss at the start plus after each step: steps + 1 entries.
    std::vector<double> loss_history;
    // False if a non-finite loss or gradient aborted the run early.
    bool finite = true;
};

// Runs exactly `steps` updates from x0 (fewer only if a non-finite
// value aborts the run).  Deterministic in its inputs.
[[nodiscard]] AdamRunResult adam_run(std::vector<double> x0,
                                     const ObjectiveFn& objective,
                                     const AdamConfig& config, int steps);

} // namespace magtrap
