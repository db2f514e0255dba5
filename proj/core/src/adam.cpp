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

#include <magtrap/adam.hpp>

#include <cmath>
#include <stdexcept>

namespace magtrap {

void validate(const AdamConfig& config)
{
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0
        || config.beta2 >= 1.0) {
        throw std::invalid_argument("betas must lie in [0, 1)");
    }
    if (!(config.epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
}

AdamState::AdamState(const AdamConfig& config, std::size_t dimension)
    : config(config), first_moment(dimension, 0.0),
      second_moment(dimension, 0.0)
{
    validate(config);
}

void adam_step(AdamState& state, std::span<double> x,
               std::span<const double> gradient)
{
    if (x.size() != state.first_moment.size()
        || gradient.size() != state.first_moment.size()) {
        throw std::invalid_argument(
            "parameter/gradient size does not match the Adam state");
    }
    ++state.step;
    const AdamConfig& cfg = state.config;
    const double bias1 = 1.0 - std::pow(cfg.beta1, state.step);
    const double bias2 = 1.0 - std::pow(cfg.beta2, state.step);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double g = gradient[i];
        state.first_moment[i] =
            cfg.beta1 * state.first_moment[i] + (1.0 - cfg.beta1) * g;
        state.second_moment[i] =
            cfg.beta2 * state.second_moment[i] + (1.0 - cfg.beta2) * g * g;
        const double corrected_m = state.first_moment[i] / bias1;
        const double corrected_v = state.second_moment[i] / bias2;
        x[i] -= cfg.learning_rate * corrected_m
                / (std::sqrt(corrected_v) + cfg.epsilon);
    }
}

AdamRunResult adam_run(std::vector<double> x0, const ObjectiveFn& objective,
                       const AdamConfig& config, int steps)
{
    if (steps < 1) {
        throw std::invalid_argument("Adam needs at least one step");
    }

    AdamRunResult result;
    result.x = std::move(x0);
    result.loss_history.reserve(static_cast<std::size_t>(steps) + 1);

    AdamState state(config, result.x.size());
    std::vector<double> gradient(result.x.size());

    const auto all_finite = [](double loss, std::span<const double> g) {
        if (!std::isfinite(loss)) {
            return false;
        }
        for (double value : g) {
            if (!std::isfinite(value)) {
                return false;
            }
        }
        return true;
    };

    for (int step = 0; step < steps; ++step) {
        const double loss = objective(result.x, gradient);
        if (!all_finite(loss, gradient)) {
            result.finite = false;
            return result;
        }
        result.loss_history.push_back(loss);
        adam_step(state, result.x, gradient);
    }

    // Loss at the final iterate; the gradient is discarded.
    const double final_loss = objective(result.x, gradient);
    if (!std::isfinite(final_loss)) {
        result.finite = false;
        return result;
    }
    result.loss_history.push_back(final_loss);
    return result;
}

} // namespace magtrap
