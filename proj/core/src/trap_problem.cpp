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

#include <magtrap/trap_problem.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include <magtrap/constants.hpp>
#include <magtrap/field.hpp>

namespace magtrap {

TrapProblem::TrapProblem(MagnetArray array, EvaluationGrid grid,
                         RobotMagnet robot, LossConfig config)
    : array_(std::move(array)), grid_(std::move(grid)), robot_(robot),
      config_(config), target_(build_target(grid_))
{
    validate(config_);
    if (array_.magnets.empty()) {
        throw std::invalid_argument("trap problem needs at least one magnet");
    }

    const std::size_t n = array_.size();
    const std::size_t p_count = grid_.size();
    rhat_.resize(p_count * n);
    flux_coeff_.resize(p_count * n);
    force_coeff_.resize(p_count * n);
    moment_magnitude_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Magnet& magnet = array_.magnets[k];
        moment_magnitude_[k] =
            magnet.remanence * std::pow(magnet.edge_length, 3) / mu0;
    }
    object_moment_magnitude_ = robot_.moment_magnitude();

    for (std::size_t p = 0; p < p_count; ++p) {
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::Vector3d r =
                grid_.points[p] - array_.magnets[k].center;
            const double d = r.norm();
            if (d <= singularity_epsilon) {
                throw singularity_error(
                    "grid point " + std::to_string(p)
                    + " coincides with magnet " + std::to_string(k));
            }
            const std::size_t idx = p * n + k;
            rhat_[idx] = r / d;
            flux_coeff_[idx] = mu0 / (4.0 * pi * std::pow(d, 3));
            force_coeff_[idx] = 3.0 * mu0 / (4.0 * pi * std::pow(d, 4));
        }
    }
}

void TrapProblem::set_loss_weights(double lambda1, double lambda2)
{
    LossConfig updated = config_;
    updated.lambda1 = lambda1;
    updated.lambda2 = lambda2;
    validate(updated);
    config_ = updated;
}

void TrapProblem::set_force_target(double force_target)
{
    LossConfig updated = config_;
    updated.force_target = force_target;
    validate(updated);
    config_ = updated;
}

MagnetArray TrapProblem::array_with_angles(
    std::span<const double> angles_deg) const
{
    MagnetArray result = array_;
    result.set_angles_deg(
        std::vector<double>(angles_deg.begin(), angles_deg.end()));
    return result;
}

LossBreakdown TrapProblem::evaluate(std::span<const double> angles_deg) const
{
    return evaluate_impl<false>(angles_deg, {});
}

LossBreakdown
TrapProblem::evaluate_with_gradient(std::span<const double> angles_deg,
                                    std::span<double> gradient_deg) const
{
    if (gradient_deg.size() != array_.size()) {
        throw std::invalid_argument("gradient span has "
                                    + std::to_string(gradient_deg.size())
                                    + " slots for "
                                    + std::to_string(array_.size())
                                    + " magnets");
    }
    return evaluate_impl<true>(angles_deg, gradient_deg);
}

// One fused pass over the grid.
//
// Forward, per point p (object moment magnitude kappa, target T):
//   t_k = rhat_k . m_k
//   B   = sum_k cb_k (3 t_k rhat_k - m_k)        cb_k = mu0/(4 pi d^3)
//   m_o = kappa * B/||B||
//   F   = sum_k cf_k (s_k m_k + t_k m_o          cf_k = 3 mu0/(4 pi d^4)
//                     + (q_k - 5 t_k s_k) rhat_k)
//         with s_k = rhat_k . m_o,  q_k = m_k . m_o
//   L1 += ||F/||F|| - T||^2 / P,   S += ||F||
// and L = lambda1 L1 + lambda2 (S - force_target)^2.
//
// Reverse: the angle only enters through m_k(angle), so
//   dL/da_k = sum_p (A_k g + G_k w) . m_k'
// where g = dL/dF is the force cotangent, A_k = dF/dm_k (direct path),
// and G_k w routes the indirect path through the flux: G_k = dB/dm_k =
// cb_k (3 rhat rhat^T - I), w = J^T u with J = dm_o/dB =
// kappa (I - Bhat Bhat^T)/||B|| and u = (dF/dm_o)^T g.  All of A_k,
// G_k, J and dF/dm_o are symmetric, so no transposes appear below.
//
// The magnitude term's cotangent is 2 lambda2 (S - force_target) Fhat,
// but S is a whole-grid sum not known inside the pass.  Linearity in g
// saves the day: each point records two gradient rows — one for the
// direction term with g1 = lambda1 * (2/P)((Fhat.T)Fhat - T)/||F||, one
// for the raw magnitude direction g2 = Fhat — and the global factor
// multiplies the second row sum afterwards.  Every output lands in a
// per-point slot and the final reduction runs in fixed point order, so
// results are bitwise identical for any thread count.
template <bool WithGradient>
LossBreakdown
TrapProblem::evaluate_impl(std::span<const double> angles_deg,
                           std::span<double> gradient_deg) const
{
    const std::size_t n = array_.size();
    const std::size_t p_count = grid_.size();
    if (angles_deg.size() != n) {
        throw std::invalid_argument(
            "angle vector has " + std::to_string(angles_deg.size())
            + " entries for " + std::to_string(n) + " magnets");
    }

    const double lambda1 = config_.lambda1;
    const double lambda2 = config_.lambda2;
    const bool want_direction_rows = WithGradient && lambda1 != 0.0;
    const bool want_magnitude_rows = WithGradient && lambda2 != 0.0;
    const double kappa = object_moment_magnitude_;

    // Moments and their angle derivatives (per radian), shared by all
    // points.
    std::vector<Eigen::Vector3d> m(n);
    std::vector<Eigen::Vector3d> dm(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = degrees_to_radians(angles_deg[k]);
        const double mu = moment_magnitude_[k];
        m[k] = { 0.0, -mu * std::sin(a), mu * std::cos(a) };
        dm[k] = { 0.0, -mu * std::cos(a), -mu * std::sin(a) };
    }

    // Per-point slots, reduced serially below.
    std::vector<double> direction_terms(p_count);
    std::vector<double> force_norms(p_count);
    std::vector<std::uint8_t> flux_degenerate(p_count, 0);
    std::vector<double> rows1;
    std::vector<double> rows2;
    if (want_direction_rows) {
        rows1.resize(p_count * n);
    }
    if (want_magnitude_rows) {
        rows2.resize(p_count * n);
    }

#pragma omp parallel for schedule(static) if (p_count * n > 1024)
    for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(p_count);
         ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        const std::size_t base = p * n;

        Eigen::Vector3d flux = Eigen::Vector3d::Zero();
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::Vector3d& rhat = rhat_[base + k];
            flux += flux_coeff_[base + k]
                    * (3.0 * rhat.dot(m[k]) * rhat - m[k]);
        }
        const double flux_norm = flux.norm();
        if (flux_norm <= flux_direction_epsilon) {
            flux_degenerate[p] = 1;
            continue;
        }
        const Eigen::Vector3d bhat = flux / flux_norm;
        const Eigen::Vector3d m_o = kappa * bhat;

        Eigen::Vector3d force = Eigen::Vector3d::Zero();
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::Vector3d& rhat = rhat_[base + k];
            const double t = rhat.dot(m[k]);
            const double s = rhat.dot(m_o);
            const double q = m[k].dot(m_o);
            force += force_coeff_[base + k]
                     * (s * m[k] + t * m_o + (q - 5.0 * t * s) * rhat);
        }
        const double force_norm = force.norm();
        force_norms[p] = force_norm;

        const Eigen::Vector3d& target = target_.directions[p];
        if (force_norm <= config_.zero_force_epsilon) {
            // Direction-less point: fixed maximal penalty, no gradient.
            direction_terms[p] =
                target.squaredNorm() + config_.degenerate_penalty;
            continue;
        }
        const Eigen::Vector3d fhat = force / force_norm;
        direction_terms[p] = (fhat - target).squaredNorm();

        if constexpr (WithGradient) {
            const Eigen::Vector3d g1 =
                lambda1 * (2.0 / static_cast<double>(p_count))
                * (fhat.dot(target) * fhat - target) / force_norm;

            for (int which = 0; which < 2; ++which) {
                const bool active = (which == 0) ? want_direction_rows
                                                 : want_magnitude_rows;
                if (!active) {
                    continue;
                }
                const Eigen::Vector3d& g = (which == 0) ? g1 : fhat;
                std::vector<double>& rows = (which == 0) ? rows1 : rows2;

                // u = (dF/dm_o) g, summed over magnets.
                Eigen::Vector3d u = Eigen::Vector3d::Zero();
                for (std::size_t k = 0; k < n; ++k) {
                    const Eigen::Vector3d& rhat = rhat_[base + k];
                    const double t = rhat.dot(m[k]);
                    const double rg = rhat.dot(g);
                    u += force_coeff_[base + k]
                         * (t * g + rg * m[k]
                            + (m[k].dot(g) - 5.0 * t * rg) * rhat);
                }
                // w = J u with J = kappa (I - bhat bhat^T)/||B||.
                const Eigen::Vector3d w =
                    (kappa / flux_norm) * (u - bhat.dot(u) * bhat);

                for (std::size_t k = 0; k < n; ++k) {
                    const Eigen::Vector3d& rhat = rhat_[base + k];
                    const double s = rhat.dot(m_o);
                    const double rg = rhat.dot(g);
                    const double rd = rhat.dot(dm[k]);
                    const double direct =
                        force_coeff_[base + k]
                        * (s * g.dot(dm[k]) + rg * m_o.dot(dm[k])
                           + m_o.dot(g) * rd - 5.0 * s * rg * rd);
                    const double through_flux =
                        flux_coeff_[base + k]
                        * (3.0 * rhat.dot(w) * rd - w.dot(dm[k]));
                    rows[base + k] = direct + through_flux;
                }
            }
        }
    }

    for (std::size_t p = 0; p < p_count; ++p) {
        if (flux_degenerate[p] != 0) {
            throw degenerate_field_error(
                "flux density vanishes at grid point " + std::to_string(p)
                + "; the object's orientation is undefined");
        }
    }

    LossBreakdown breakdown;
    double direction_sum = 0.0;
    for (std::size_t p = 0; p < p_count; ++p) {
        direction_sum += direction_terms[p];
        breakdown.force_sum += force_norms[p];
    }
    breakdown.direction = direction_sum / static_cast<double>(p_count);
    const double deviation = breakdown.force_sum - config_.force_target;
    breakdown.magnitude = deviation * deviation;
    breakdown.total =
        lambda1 * breakdown.direction + lambda2 * breakdown.magnitude;

    if constexpr (WithGradient) {
        const double magnitude_factor = 2.0 * lambda2 * deviation;
        for (std::size_t k = 0; k < n; ++k) {
            double per_radian = 0.0;
            if (want_direction_rows) {
                double sum = 0.0;
                for (std::size_t p = 0; p < p_count; ++p) {
                    sum += rows1[p * n + k];
                }
                per_radian += sum;
            }
            if (want_magnitude_rows) {
                double sum = 0.0;
                for (std::size_t p = 0; p < p_count; ++p) {
                    sum += rows2[p * n + k];
                }
                per_radian += magnitude_factor * sum;
            }
            gradient_deg[k] = per_radian * (pi / 180.0);
        }
    }
    return breakdown;
}

template LossBreakdown
TrapProblem::evaluate_impl<false>(std::span<const double>,
                                  std::span<double>) const;
template LossBreakdown
TrapProblem::evaluate_impl<true>(std::span<const double>,
                                 std::span<double>) const;

} // namespace magtrap
