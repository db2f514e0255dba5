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

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

// Magnet array layout and the mapping from rotation angles to magnetic
// moment vectors.
//
// An array is a line of even-count cubic magnets on the Z-axis, placed
// symmetrically about the origin.  Each magnet rotates about the X-axis
// only; its moment therefore stays in the YZ-plane.  The rotation angle
// is the one free parameter per magnet that the optimizer adjusts.
namespace magtrap {

// One cubic permanent magnet, modeled as a point dipole at its center.
struct Magnet {
    Eigen::Vector3d center = Eigen::Vector3d::Zero(); // [m]
    double edge_length = 0.0;                         // cube edge [m]
    double remanence = 0.0;                           // [T]
    double angle_deg = 0.0; // rotation about +X from +Z, in [0, 360)
};

// The magnetic object being trapped.  Only its moment magnitude
// Br*V/mu0 and the local field direction matter; see robot_moment().
struct RobotMagnet {
    double remanence = 0.0; // [T]
    double volume = 0.0;    // [m^3]

    // Moment magnitude Br*V/mu0 [A*m^2].
    [[nodiscard]] double moment_magnitude() const;
};

// An ordered line of magnets (largest z first) plus the placement
// parameters they were built from.
struct MagnetArray {
    std::vector<Magnet> magnets;
    double pitch = 0.0;         // center-to-center spacing [m]
    double extra_spacing = 0.0; // extra gap s beyond the face diagonal [m]

    [[nodiscard]] std::size_t size() const { return magnets.size(); }

    [[nodiscard]] std::vector<double> angles_deg() const;

    // Replaces all rotation angles (degrees; normalized to [0, 360)).
    // Throws std::invalid_argument on length mismatch.
    void set_angles_deg(const std::vector<double>& angles);

    // Builds an array from explicit magnets without the even-count and
    // symmetric-placement checks of build_array.  Intended for tests
    // and single-magnet field studies; optimization entry points expect
    // build_array output.
    [[nodiscard]] static MagnetArray
    from_magnets(std::vector<Magnet> magnets, double pitch = 0.0,
                 double extra_spacing = 0.0);
};

// Maps any angle to the canonical [0, 360) range.
[[nodiscard]] double normalize_angle_deg(double angle_deg);

// Validating constructor for a single magnet; normalizes the angle.
// Throws std::invalid_argument for non-positive edge length or remanence.
[[nodiscard]] Magnet make_magnet(const Eigen::Vector3d& center,
                                 double edge_length, double remanence,
                                 double angle_deg = 0.0);

// Validating constructor for the trapped object's magnet.
// Throws std::invalid_argument for non-positive remanence or volume.
[[nodiscard]] RobotMagnet make_robot_magnet(double remanence, double volume);

// Volume of a cylindrical magnet [m^3] from diameter and length [m].
[[nodiscard]] double cylinder_volume(double diameter, double length);

// Places n magnets (n even, >= 2) on the Z-axis symmetrically about the
// origin: magnet k = 1..n/2 on each side sits at z = +/-(2k-1)/2 * pitch.
// The default pitch is the face diagonal sqrt(2)*edge_length plus
// extra_spacing, the closest spacing at which freely rotating cubes
// cannot touch.  A pitch_override below that bound is rejected.
// All angles start at 0.  Magnets are ordered by descending z.
[[nodiscard]] MagnetArray
build_array(int n, double edge_length, double remanence,
            double extra_spacing = 0.0,
            std::optional<double> pitch_override = std::nullopt);

// Magnetic moment of one array magnet [A*m^2]: the +Z reference moment
// of magnitude Br*l^3/mu0 rotated by angle_deg about +X, i.e.
// mu * (0, -sin a, cos a).  The x-component is always zero.
[[nodiscard]] Eigen::Vector3d moment_vector(const Magnet& magnet);

// Derivative of moment_vector with respect to the rotation angle,
// per radian: mu * (0, -cos a, -sin a).
[[nodiscard]] Eigen::Vector3d moment_angle_derivative(const Magnet& magnet);

} // namespace magtrap
