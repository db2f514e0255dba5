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

#include <string>
#include <utility>
#include <vector>

#include <magtrap/analysis.hpp>
#include <magtrap/field.hpp>
#include <magtrap/optimize.hpp>

// Serialization: CSV tables for fields and sweeps, JSON for reports.
// All numbers use the shortest representation that round-trips exactly,
// so identical values always serialize to identical bytes.
namespace magtrap {

// Ordered key/value pairs echoed into every output so each artifact
// records the configuration that produced it.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// Shortest exact decimal form of a double ("nan"/"inf" spelled out).
[[nodiscard]] std::string format_double(double value);

// Force-field CSV: one `# key = value` comment line per echo entry,
// then the header
//   x_mm,y_mm,z_mm,Fx_N,Fy_N,Fz_N,Bx_T,By_T,Bz_T
// and one row per point in field order.  Coordinates are emitted in
// millimeters, forces and flux in SI.
[[nodiscard]] std::string field_to_csv(const ForceField& field,
                                       const ConfigEcho& echo);

// Sweep CSV: config echo comments, then
//   distance_mm,n_magnets,alpha_1_deg..alpha_N_deg,loss,accuracy,
//   avg_force_N,aspect_ratio,aspect_ratio_smoothed,truncated_flag,seconds
// with N = the largest magnet count in the table; rows with fewer
// magnets leave the surplus angle cells empty.
[[nodiscard]] std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                                       const ConfigEcho& echo);

// Optimization report as pretty-printed JSON.  Durations live under
// keys named "seconds" (the only non-deterministic fields); loss
// histories are included only on request.
[[nodiscard]] std::string report_to_json(const OptimizationReport& report,
                                         const ConfigEcho& echo,
                                         bool include_history = false);

// Two-stage tuning result (stage reports nested under "stage1"/"stage2").
[[nodiscard]] std::string tune_to_json(const TuneResult& result,
                                       const ConfigEcho& echo,
                                       bool include_history = false);

// Removes every "seconds" key, at any depth, from a JSON document —
// the preprocessing step for byte-level determinism comparisons.
[[nodiscard]] std::string strip_seconds_keys(const std::string& json_text);

// Writes `content` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& content);

} // namespace magtrap
