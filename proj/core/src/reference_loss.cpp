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

#include <magtrap/reference_loss.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace magtrap {

namespace {

// Minimal extended-precision 3-vector; deliberately not Eigen so this
// path shares nothing with the production evaluator.
struct Vec3 {
    long double x = 0.0L;
    long double y = 0.0L;
    long double z = 0.0L;
};

Vec3 operator+(const Vec3& a, const Vec3& b)
{
    return { a.x + b.x, a.y + b.y, a.z + b.z };
}

Vec3 operator-(const Vec3& a, const Vec3& b)
{
    return { a.x - b.x, a.y - b.y, a.z - b.z };
}

Vec3 operator*(long double s, const Vec3& v)
{
    return { s * v.x, s * v.y, s * v.z };
}

long double dot(const Vec3& a, const Vec3& b)
{
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

long double norm(const Vec3& v)
{
    return std::sqrt(dot(v, v));
}

constexpr long double pi_l = std::numbers::pi_v<long double>;
constexpr long double mu0_l = 4.0e-7L * pi_l;

} // namespace

long double reference_loss(const MagnetArray& array,
                           const EvaluationGrid& grid,
                           const RobotMagnet& robot,
                           const LossConfig& config,
                           std::span<const double> angles_deg)
{
    const std::size_t n = array.size();
    if (angles_deg.size() != n) {
        throw std::invalid_argument("angle count does not match magnet count");
    }

    std::vector<Vec3> moments(n);
    std::vector<Vec3> centers(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Magnet& magnet = array.magnets[k];
        const long double mu = static_cast<long double>(magnet.remanence)
                               * static_cast<long double>(magnet.edge_length)
                               * magnet.edge_length * magnet.edge_length
                               / mu0_l;
        const long double a =
            static_cast<long double>(angles_deg[k]) * pi_l / 180.0L;
        moments[k] = { 0.0L, -mu * std::sin(a), mu * std::cos(a) };
        centers[k] = { magnet.center.x(), magnet.center.y(),
                       magnet.center.z() };
    }
    const long double kappa = static_cast<long double>(robot.remanence)
                              * robot.volume / mu0_l;

    long double direction_sum = 0.0L;
    long double force_norm_sum = 0.0L;

    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Vec3 point{ grid.points[p].x(), grid.points[p].y(),
                          grid.points[p].z() };
        const Vec3 trap{ grid.trap_point.x(), grid.trap_point.y(),
                         grid.trap_point.z() };
        const Vec3 to_trap = trap - point;
        const Vec3 target = (1.0L / norm(to_trap)) * to_trap;

        Vec3 flux;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec3 r = point - centers[k];
            const long double d = norm(r);
            const Vec3 rhat = (1.0L / d) * r;
            const long double coeff = mu0_l / (4.0L * pi_l * d * d * d);
            flux = flux
                   + coeff
                         * ((3.0L * dot(rhat, moments[k])) * rhat
                            - moments[k]);
        }
        const long double flux_norm = norm(flux);
        if (flux_norm <= static_cast<long double>(flux_direction_epsilon)) {
            throw degenerate_field_error(
                "flux density vanishes at grid point " + std::to_string(p));
        }
        const Vec3 object_moment = (kappa / flux_norm) * flux;

        Vec3 force;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec3 r = point - centers[k];
            const long double d = norm(r);
            const Vec3 rhat = (1.0L / d) * r;
            const long double coeff =
                3.0L * mu0_l / (4.0L * pi_l * d * d * d * d);
            const long double t = dot(rhat, moments[k]);
            const long double s = dot(rhat, object_moment);
            const long double q = dot(moments[k], object_moment);
            force = force
                    + coeff
                          * (s * moments[k] + t * object_moment
                             + (q - 5.0L * t * s) * rhat);
        }
        const long double force_norm = norm(force);
        force_norm_sum += force_norm;
        if (force_norm <= static_cast<long double>(config.zero_force_epsilon)) {
            direction_sum += dot(target, target)
                             + static_cast<long double>(
                                 config.degenerate_penalty);
        } else {
            const Vec3 diff = (1.0L / force_norm) * force - target;
            direction_sum += dot(diff, diff);
        }
    }

    const long double l1 =
        direction_sum / static_cast<long double>(grid.size());
    const long double deviation =
        force_norm_sum - static_cast<long double>(config.force_target);
    return static_cast<long double>(config.lambda1) * l1
           + static_cast<long double>(config.lambda2) * deviation * deviation;
}

std::vector<double> finite_difference_gradient(
    const MagnetArray& array, const EvaluationGrid& grid,
    const RobotMagnet& robot, const LossConfig& config,
    std::span<const double> angles_deg, double step_deg)
{
    std::vector<double> perturbed(angles_deg.begin(), angles_deg.end());
    std::vector<double> gradient(angles_deg.size());
    for (std::size_t k = 0; k < angles_deg.size(); ++k) {
        const double original = perturbed[k];
        perturbed[k] = original + step_deg;
        const long double above =
            reference_loss(array, grid, robot, config, perturbed);
        perturbed[k] = original - step_deg;
        const long double below =
            reference_loss(array, grid, robot, config, perturbed);
        perturbed[k] = original;
        gradient[k] = static_cast<double>(
            (above - below) / (2.0L * static_cast<long double>(step_deg)));
    }
    return gradient;
}

} // namespace magtrap
