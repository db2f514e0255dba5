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
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>

// Point-dipole flux density and dipole-dipole force evaluation — the
// numerical core shared by the optimizer and the trap analysis.
//
// Every array magnet is a point dipole.  The trapped object's moment is
// not a free variable: it aligns with the local flux density direction
// (a freely suspended magnet turns into the field), so its moment is
// recomputed from the total field at every evaluation point.
namespace magtrap {

// Evaluation at (numerically) zero distance from a dipole center.
class singularity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flux density too weak to define the trapped object's orientation.
class degenerate_field_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Distance below which a point counts as sitting on a dipole center.
inline constexpr double singularity_epsilon = 1e-15; // [m]

// Flux norm below which the object's moment direction is undefined.
inline constexpr double flux_direction_epsilon = 1e-12; // [T]

// The point-dipole model is a far-field approximation; evaluations
// closer to a cube than proximity_factor times its space diagonal
// (sqrt(3) * edge) are counted as proximity warnings, not errors —
// analysis sweeps may probe close to the array and must not abort.
inline constexpr double proximity_factor = 1.5;

// Counters describing how trustworthy an evaluation was.
struct FieldDiagnostics {
    std::size_t pair_count = 0;      // (point, magnet) pairs evaluated
    std::size_t proximity_pairs = 0; // pairs inside the validity bound

    void merge(const FieldDiagnostics& other)
    {
        pair_count += other.pair_count;
        proximity_pairs += other.proximity_pairs;
    }
};

// Flux density [T] of a single magnet at `point`:
//   mu0 / (4 pi ||r||^3) * (3 rhat rhat^T - I) * m,   r = point - center.
// Throws singularity_error when ||r|| <= singularity_epsilon.
[[nodiscard]] Eigen::Vector3d
flux_density_single(const Eigen::Vector3d& point, const Magnet& magnet,
                    FieldDiagnostics* diag = nullptr);

// Superposed flux density [T] of all array magnets (fixed summation
// order: array order).
[[nodiscard]] Eigen::Vector3d
flux_density_total(const Eigen::Vector3d& point, const MagnetArray& array,
                   FieldDiagnostics* diag = nullptr);

// Moment [A*m^2] of the trapped object at `point`: magnitude Br*V/mu0
// along the local flux direction.  Throws degenerate_field_error when
// ||B|| <= flux_direction_epsilon.
[[nodiscard]] Eigen::Vector3d
robot_moment(const Eigen::Vector3d& point, const MagnetArray& array,
             const RobotMagnet& robot, FieldDiagnostics* diag = nullptr);

// Force [N] of one array magnet on a fixed object moment at `point`:
//   3 mu0 / (4 pi ||r||^4) * ( (rhat.m_obj) m + (rhat.m) m_obj
//                              + (m.m_obj - 5 (rhat.m)(rhat.m_obj)) rhat ).
// This is the gradient force d(m_obj . B)/d(point) of the dipole flux
// above, with the object moment held fixed.
[[nodiscard]] Eigen::Vector3d
force_single(const Eigen::Vector3d& point, const Magnet& magnet,
             const Eigen::Vector3d& object_moment,
             FieldDiagnostics* diag = nullptr);

// Total force [N] on the trapped object at `point`: the object moment
// is derived once from the total flux there, then single-magnet forces
// are summed in array order.
[[nodiscard]] Eigen::Vector3d
force_total(const Eigen::Vector3d& point, const MagnetArray& array,
            const RobotMagnet& robot, FieldDiagnostics* diag = nullptr);

// Force and flux at one point in a single pass (shares the flux
// evaluation between the object moment and the force sum).
struct PointSample {
    Eigen::Vector3d force = Eigen::Vector3d::Zero(); // [N]
    Eigen::Vector3d flux = Eigen::Vector3d::Zero();  // [T]
};

[[nodiscard]] PointSample sample_point(const Eigen::Vector3d& point,
                                       const MagnetArray& array,
                                       const RobotMagnet& robot,
                                       FieldDiagnostics* diag = nullptr);

// Forces and flux densities over a point set, in point order.
struct ForceField {
    std::vector<Eigen::Vector3d> forces; // [N]
    std::vector<Eigen::Vector3d> fluxes; // [T]
    std::vector<Eigen::Vector3d> points; // evaluation points [m]
    FieldDiagnostics diagnostics;
};

// Evaluates force and flux at every grid point.  Point order matches
// grid order and results are bitwise independent of the number of
// threads (each point is an independent fixed-order sum).  A per-point
// failure aborts with the offending point identified in the message.
[[nodiscard]] ForceField evaluate_grid(const MagnetArray& array,
                                       const EvaluationGrid& grid,
                                       const RobotMagnet& robot);

// Same as evaluate_grid for an explicit point list (fine analysis
// grids, field dumps on arbitrary planes).
[[nodiscard]] ForceField
evaluate_points(const MagnetArray& array,
                const std::vector<Eigen::Vector3d>& points,
                const RobotMagnet& robot);

} // namespace magtrap
