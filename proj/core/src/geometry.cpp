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

#include <magtrap/geometry.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include <magtrap/constants.hpp>

namespace magtrap {

double normalize_angle_deg(double angle_deg)
{
    double normalized = std::fmod(angle_deg, 360.0);
    if (normalized < 0.0) {
        normalized += 360.0;
    }
    // fmod(-1e-16, 360) + 360 rounds to 360 exactly; fold it back.
    if (normalized >= 360.0) {
        normalized = 0.0;
    }
    return normalized;
}

Magnet make_magnet(const Eigen::Vector3d& center, double edge_length,
                   double remanence, double angle_deg)
{
    if (!(edge_length > 0.0)) {
        throw std::invalid_argument("magnet edge length must be positive, got "
                                    + std::to_string(edge_length));
    }
    if (!(remanence > 0.0)) {
        throw std::invalid_argument("magnet remanence must be positive, got "
                                    + std::to_string(remanence));
    }
    return Magnet{ center, edge_length, remanence,
                   normalize_angle_deg(angle_deg) };
}

double RobotMagnet::moment_magnitude() const
{
    return remanence * volume / mu0;
}

RobotMagnet make_robot_magnet(double remanence, double volume)
{
    if (!(remanence > 0.0)) {
        throw std::invalid_argument("object remanence must be positive, got "
                                    + std::to_string(remanence));
    }
    if (!(volume > 0.0)) {
        throw std::invalid_argument("object volume must be positive, got "
                                    + std::to_string(volume));
    }
    return RobotMagnet{ remanence, volume };
}

double cylinder_volume(double diameter, double length)
{
    if (!(diameter > 0.0) || !(length > 0.0)) {
        throw std::invalid_argument(
            "cylinder diameter and length must be positive");
    }
    return pi * 0.25 * diameter * diameter * length;
}

std::vector<double> MagnetArray::angles_deg() const
{
    std::vector<double> angles;
    angles.reserve(magnets.size());
    for (const Magnet& magnet : magnets) {
        angles.push_back(magnet.angle_deg);
    }
    return angles;
}

void MagnetArray::set_angles_deg(const std::vector<double>& angles)
{
    if (angles.size() != magnets.size()) {
        throw std::invalid_argument(
            "angle count " + std::to_string(angles.size())
            + " does not match magnet count "
            + std::to_string(magnets.size()));
    }
    for (std::size_t k = 0; k < magnets.size(); ++k) {
        magnets[k].angle_deg = normalize_angle_deg(angles[k]);
    }
}

MagnetArray MagnetArray::from_magnets(std::vector<Magnet> magnets,
                                      double pitch, double extra_spacing)
{
    if (magnets.empty()) {
        throw std::invalid_argument("array needs at least one magnet");
    }
    for (Magnet& magnet : magnets) {
        // Re-validate and normalize in case of hand-built structs.
        magnet = make_magnet(magnet.center, magnet.edge_length,
                             magnet.remanence, magnet.angle_deg);
    }
    return MagnetArray{ std::move(magnets), pitch, extra_spacing };
}

MagnetArray build_array(int n, double edge_length, double remanence,
                        double extra_spacing,
                        std::optional<double> pitch_override)
{
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("magnet count must be even and >= 2, got "
                                    + std::to_string(n));
    }
    if (!(edge_length > 0.0)) {
        throw std::invalid_argument("magnet edge length must be positive, got "
                                    + std::to_string(edge_length));
    }
    if (extra_spacing < 0.0) {
        throw std::invalid_argument("extra spacing must be non-negative, got "
                                    + std::to_string(extra_spacing));
    }

    const double face_diagonal = std::sqrt(2.0) * edge_length;
    double pitch = face_diagonal + extra_spacing;
    if (pitch_override) {
        // Any closer and adjacent cubes could touch while rotating.
        if (*pitch_override < face_diagonal) {
            throw std::invalid_argument(
                "pitch override " + std::to_string(*pitch_override)
                + " m is below the face-diagonal bound "
                + std::to_string(face_diagonal) + " m");
        }
        pitch = *pitch_override;
    }

    // Symmetric ladder, ordered by descending z: +z side first.
    std::vector<Magnet> magnets;
    magnets.reserve(static_cast<std::size_t>(n));
    for (int k = n / 2; k >= 1; --k) {
        const double z = (2 * k - 1) * 0.5 * pitch;
        magnets.push_back(
            make_magnet(Eigen::Vector3d{ 0.0, 0.0, z }, edge_length,
                        remanence));
    }
    for (int k = 1; k <= n / 2; ++k) {
        const double z = -(2 * k - 1) * 0.5 * pitch;
        magnets.push_back(
            make_magnet(Eigen::Vector3d{ 0.0, 0.0, z }, edge_length,
                        remanence));
    }
    return MagnetArray{ std::move(magnets), pitch, extra_spacing };
}

Eigen::Vector3d moment_vector(const Magnet& magnet)
{
    const double mu =
        magnet.remanence * std::pow(magnet.edge_length, 3) / mu0;
    const double angle = degrees_to_radians(magnet.angle_deg);
    return { 0.0, -mu * std::sin(angle), mu * std::cos(angle) };
}

Eigen::Vector3d moment_angle_derivative(const Magnet& magnet)
{
    const double mu =
        magnet.remanence * std::pow(magnet.edge_length, 3) / mu0;
    const double angle = degrees_to_radians(magnet.angle_deg);
    return { 0.0, -mu * std::cos(angle), -mu * std::sin(angle) };
}

} // namespace magtrap
