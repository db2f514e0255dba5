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

#include <magtrap/io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

#include <magtrap/constants.hpp>

namespace magtrap {

namespace {

using ordered_json = nlohmann::ordered_json;

void append_echo_comments(std::string& out, const ConfigEcho& echo)
{
    for (const auto& [key, value] : echo) {
        out += "# ";
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
}

ordered_json echo_to_json(const ConfigEcho& echo)
{
    ordered_json config = ordered_json::object();
    for (const auto& [key, value] : echo) {
        config[key] = value;
    }
    return config;
}

ordered_json restart_to_json(const RestartRecord& restart,
                             bool include_history)
{
    ordered_json j;
    j["round"] = restart.round;
    j["index"] = restart.index;
    j["threshold"] = restart.threshold;
    j["warm_start"] = restart.warm_start;
    j["failed"] = restart.failed;
    j["initial_angles_deg"] = restart.initial_angles_deg;
    j["final_angles_deg"] = restart.final_angles_deg;
    j["loss"] = restart.loss;
    j["direction_loss"] = restart.direction_loss;
    j["magnitude_loss"] = restart.magnitude_loss;
    j["accuracy"] = restart.accuracy;
    if (include_history) {
        j["loss_history"] = restart.loss_history;
    }
    return j;
}

ordered_json report_to_json_object(const OptimizationReport& report,
                                   bool include_history)
{
    ordered_json j;
    j["angles_deg"] = report.angles_deg;
    j["loss"] = report.loss;
    j["direction_loss"] = report.direction_loss;
    j["magnitude_loss"] = report.magnitude_loss;
    j["accuracy"] = report.accuracy;
    j["force_sum"] = report.force_sum;
    j["success"] = report.success;
    j["threshold_met"] = report.threshold_met;
    j["restarts_executed"] = report.restarts_executed;
    j["rounds_executed"] = report.rounds_executed;
    j["seed"] = report.seed;
    j["seconds"] = report.seconds;
    ordered_json restarts = ordered_json::array();
    for (const RestartRecord& restart : report.restarts) {
        restarts.push_back(restart_to_json(restart, include_history));
    }
    j["restarts"] = std::move(restarts);
    return j;
}

void erase_seconds(ordered_json& node)
{
    if (node.is_object()) {
        node.erase("seconds");
        for (auto& [key, child] : node.items()) {
            erase_seconds(child);
        }
    } else if (node.is_array()) {
        for (auto& child : node) {
            erase_seconds(child);
        }
    }
}

} // namespace

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0.0 ? "inf" : "-inf";
    }
    char buffer[32];
    const auto [end, ec] =
        std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("formatting a double failed");
    }
    return { buffer, end };
}

std::string field_to_csv(const ForceField& field, const ConfigEcho& echo)
{
    std::string out;
    append_echo_comments(out, echo);
    out += "x_mm,y_mm,z_mm,Fx_N,Fy_N,Fz_N,Bx_T,By_T,Bz_T\n";
    for (std::size_t i = 0; i < field.points.size(); ++i) {
        const Eigen::Vector3d& p = field.points[i];
        const Eigen::Vector3d& f = field.forces[i];
        const Eigen::Vector3d& b = field.fluxes[i];
        out += format_double(meters_to_millimeters(p.x()));
        out += ',';
        out += format_double(meters_to_millimeters(p.y()));
        out += ',';
        out += format_double(meters_to_millimeters(p.z()));
        for (int c = 0; c < 3; ++c) {
            out += ',';
            out += format_double(f[c]);
        }
        for (int c = 0; c < 3; ++c) {
            out += ',';
            out += format_double(b[c]);
        }
        out += '\n';
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                         const ConfigEcho& echo)
{
    std::size_t max_angles = 0;
    for (const SweepRow& row : rows) {
        max_angles = std::max(max_angles,
                              static_cast<std::size_t>(row.n_magnets));
    }

    std::string out;
    append_echo_comments(out, echo);
    out += "distance_mm,n_magnets";
    for (std::size_t k = 1; k <= max_angles; ++k) {
        out += ",alpha_" + std::to_string(k) + "_deg";
    }
    out += ",loss,accuracy,avg_force_N,aspect_ratio,aspect_ratio_smoothed,"
           "truncated_flag,seconds\n";

    for (const SweepRow& row : rows) {
        out += format_double(meters_to_millimeters(row.distance));
        out += ',';
        out += std::to_string(row.n_magnets);
        for (std::size_t k = 0; k < max_angles; ++k) {
            out += ',';
            if (k < row.angles_deg.size()) {
                out += format_double(row.angles_deg[k]);
            }
        }
        out += ',';
        out += format_double(row.loss);
        out += ',';
        out += format_double(row.accuracy);
        out += ',';
        out += format_double(row.avg_force);
        out += ',';
        out += format_double(row.aspect_ratio);
        out += ',';
        out += format_double(row.aspect_ratio_smoothed);
        out += ',';
        out += row.truncated ? '1' : '0';
        out += ',';
        out += format_double(row.seconds);
        out += '\n';
    }
    return out;
}

std::string report_to_json(const OptimizationReport& report,
                           const ConfigEcho& echo, bool include_history)
{
    ordered_json j;
    j["config"] = echo_to_json(echo);
    j.update(report_to_json_object(report, include_history));
    return j.dump(2) + "\n";
}

std::string tune_to_json(const TuneResult& result, const ConfigEcho& echo,
                         bool include_history)
{
    ordered_json j;
    j["config"] = echo_to_json(echo);
    j["force_target"] = result.force_target;
    j["stage1"] = report_to_json_object(result.stage1, include_history);
    j["stage2"] = report_to_json_object(result.stage2, include_history);
    return j.dump(2) + "\n";
}

std::string strip_seconds_keys(const std::string& json_text)
{
    ordered_json j = ordered_json::parse(json_text);
    erase_seconds(j);
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << content;
    out.close();
    if (!out) {
        throw std::runtime_error("writing '" + path + "' failed");
    }
}

} // namespace magtrap
