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

#include <magtrap/field.hpp>

#include <cmath>
#include <sstream>

#include <magtrap/constants.hpp>

namespace magtrap {

namespace {

// Separation geometry shared by the flux and force kernels.
struct Separation {
    Eigen::Vector3d rhat;
    double distance;
};

Separation separation(const Eigen::Vector3d& point, const Magnet& magnet,
                      FieldDiagnostics* diag)
{
    const Eigen::Vector3d r = point - magnet.center;
    const double d = r.norm();
    if (d <= singularity_epsilon) {
        std::ostringstream msg;
        msg << "field evaluation at a magnet center: point (" << point.x()
            << ", " << point.y() << ", " << point.z() << ") m";
        throw singularity_error(msg.str());
    }
    if (diag != nullptr) {
        ++diag->pair_count;
        const double bound =
            proximity_factor * std::sqrt(3.0) * magnet.edge_length;
        if (d < bound) {
            ++diag->proximity_pairs;
        }
    }
    return { r / d, d };
}

Eigen::Vector3d flux_kernel(const Separation& sep,
                            const Eigen::Vector3d& moment)
{
    const double coeff = mu0 / (4.0 * pi * std::pow(sep.distance, 3));
    return coeff
           * (3.0 * sep.rhat.dot(moment) * sep.rhat - moment);
}

Eigen::Vector3d force_kernel(const Separation& sep,
                             const Eigen::Vector3d& moment,
                             const Eigen::Vector3d& object_moment)
{
    const double coeff =
        3.0 * mu0 / (4.0 * pi * std::pow(sep.distance, 4));
    const double rm = sep.rhat.dot(moment);
    const double ro = sep.rhat.dot(object_moment);
    const double mo = moment.dot(object_moment);
    return coeff
           * (ro * moment + rm * object_moment
              + (mo - 5.0 * rm * ro) * sep.rhat);
}

Eigen::Vector3d object_moment_from_flux(const Eigen::Vector3d& point,
                                        const Eigen::Vector3d& flux,
                                        const RobotMagnet& robot)
{
    const double norm = flux.norm();
    if (norm <= flux_direction_epsilon) {
        std::ostringstream msg;
        msg << "flux density " << norm << " T at point (" << point.x()
            << ", " << point.y() << ", " << point.z()
            << ") m is too weak to define the object's orientation";
        throw degenerate_field_error(msg.str());
    }
    return (robot.moment_magnitude() / norm) * flux;
}

} // namespace

Eigen::Vector3d flux_density_single(const Eigen::Vector3d& point,
                                    const Magnet& magnet,
                                    FieldDiagnostics* diag)
{
    return flux_kernel(separation(point, magnet, diag),
                       moment_vector(magnet));
}

Eigen::Vector3d flux_density_total(const Eigen::Vector3d& point,
                                   const MagnetArray& array,
                                   FieldDiagnostics* diag)
{
    Eigen::Vector3d flux = Eigen::Vector3d::Zero();
    for (const Magnet& magnet : array.magnets) {
        flux += flux_density_single(point, magnet, diag);
    }
    return flux;
}

Eigen::Vector3d robot_moment(const Eigen::Vector3d& point,
                             const MagnetArray& array,
                             const RobotMagnet& robot,
                             FieldDiagnostics* diag)
{
    return object_moment_from_flux(point, flux_density_total(point, array, diag),
                                   robot);
}

Eigen::Vector3d force_single(const Eigen::Vector3d& point,
                             const Magnet& magnet,
                             const Eigen::Vector3d& object_moment,
                             FieldDiagnostics* diag)
{
    return force_kernel(separation(point, magnet, diag),
                        moment_vector(magnet), object_moment);
}

PointSample sample_point(const Eigen::Vector3d& point,
                         const MagnetArray& array, const RobotMagnet& robot,
                         FieldDiagnostics* diag)
{
    PointSample sample;
    sample.flux = flux_density_total(point, array, diag);
    const Eigen::Vector3d object_moment =
        object_moment_from_flux(point, sample.flux, robot);
    for (const Magnet& magnet : array.magnets) {
        // The proximity/pair counters were already advanced by the flux
        // pass over the same pairs; do not double-count here.
        sample.force += force_kernel(separation(point, magnet, nullptr),
                                     moment_vector(magnet), object_moment);
    }
    return sample;
}

Eigen::Vector3d force_total(const Eigen::Vector3d& point,
                            const MagnetArray& array,
                            const RobotMagnet& robot, FieldDiagnostics* diag)
{
    return sample_point(point, array, robot, diag).force;
}

namespace {

ForceField evaluate_impl(const MagnetArray& array,
                         const std::vector<Eigen::Vector3d>& points,
                         const RobotMagnet& robot)
{
    if (array.magnets.empty()) {
        throw std::invalid_argument("cannot evaluate an empty magnet array");
    }
    const std::size_t count = points.size();

    ForceField field;
    field.points = points;
    field.forces.resize(count);
    field.fluxes.resize(count);

    // Each point gets disjoint output slots and its own diagnostics
    // accumulator; the serial merge below keeps the result independent
    // of the thread count.  Exceptions cannot cross the parallel
    // region, so per-point errors are collected and rethrown after.
    std::vector<FieldDiagnostics> diags(count);
    std::vector<std::string> errors(count);
    bool failed = false;

#pragma omp parallel for schedule(static) if (count > 64)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
        const auto p = static_cast<std::size_t>(i);
        try {
            const PointSample sample =
                sample_point(points[p], array, robot, &diags[p]);
            field.forces[p] = sample.force;
            field.fluxes[p] = sample.flux;
        } catch (const std::exception& error) {
            errors[p] = error.what();
            failed = true;
        }
    }

    if (failed) {
        for (std::size_t p = 0; p < count; ++p) {
            if (!errors[p].empty()) {
                throw std::runtime_error("evaluation failed at point "
                                         + std::to_string(p) + ": "
                                         + errors[p]);
            }
        }
    }
    for (const FieldDiagnostics& diag : diags) {
        field.diagnostics.merge(diag);
    }
    return field;
}

} // namespace

ForceField evaluate_grid(const MagnetArray& array, const EvaluationGrid& grid,
                         const RobotMagnet& robot)
{
    return evaluate_impl(array, grid.points, robot);
}

ForceField evaluate_points(const MagnetArray& array,
                           const std::vector<Eigen::Vector3d>& points,
                           const RobotMagnet& robot)
{
    return evaluate_impl(array, points, robot);
}

} // namespace magtrap
