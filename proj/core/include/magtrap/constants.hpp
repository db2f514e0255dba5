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

#include <numbers>

// Physical constants and unit helpers.  All library code works in SI
// units (meter, tesla, ampere-square-meter, newton); millimeters and
// degrees appear only at interfaces that are explicitly labeled as such.
namespace magtrap {

// Vacuum permeability [N/A^2].
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;

inline constexpr double pi = std::numbers::pi;

[[nodiscard]] constexpr double degrees_to_radians(double degrees)
{
    return degrees * (pi / 180.0);
}

[[nodiscard]] constexpr double radians_to_degrees(double radians)
{
    return radians * (180.0 / pi);
}

[[nodiscard]] constexpr double millimeters_to_meters(double mm)
{
    return mm * 1e-3;
}

[[nodiscard]] constexpr double meters_to_millimeters(double m)
{
    return m * 1e3;
}

} // namespace magtrap
