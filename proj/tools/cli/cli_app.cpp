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

#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include <magtrap/magtrap.hpp>

namespace magtrap {

namespace {

// All user-facing lengths are millimeters and all angles degrees; the
// library works in SI.  This struct is the mm/degree boundary.
struct RunConfig {
    int n_magnets = 2;
    double edge_mm = 50.8;
    double remanence = 1.275; // [T]
    double spacing_mm = 0.0;
    std::optional<double> pitch_mm; // overrides face-diagonal + spacing

    double trap_mm = 89.0;
    int grid_nx = 20;
    int grid_ny = 20;
    double half_width_mm = 10.0;

    double robot_remanence = 1.32;                 // [T]
    double robot_volume_mm3 = 1.5707963267948966;  // 1 mm dia x 2 mm cyl

    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double gamma = 1.5;
    std::optional<double> yhat; // explicit force target [N]

    AdamConfig adam;
    RestartPolicy policy;

    int threads = 0;         // 0 = library default
    std::string config_path; // optional key=value defaults file
};

MagnetArray array_from(const RunConfig& cfg)
{
    std::optional<double> pitch;
    if (cfg.pitch_mm) {
        pitch = millimeters_to_meters(*cfg.pitch_mm);
    }
    return build_array(cfg.n_magnets, millimeters_to_meters(cfg.edge_mm),
                       cfg.remanence, millimeters_to_meters(cfg.spacing_mm),
                       pitch);
}

EvaluationGrid grid_from(const RunConfig& cfg)
{
    return EvaluationGrid::make_centered(
        millimeters_to_meters(cfg.trap_mm),
        millimeters_to_meters(cfg.half_width_mm), cfg.grid_nx, cfg.grid_ny);
}

RobotMagnet robot_from(const RunConfig& cfg)
{
    return make_robot_magnet(cfg.robot_remanence,
                             cfg.robot_volume_mm3 * 1e-9);
}

double resolved_pitch_mm(const RunConfig& cfg)
{
    return cfg.pitch_mm ? *cfg.pitch_mm
                        : std::sqrt(2.0) * cfg.edge_mm + cfg.spacing_mm;
}

void apply_threads(const RunConfig& cfg)
{
#ifdef _OPENMP
    if (cfg.threads > 0) {
        omp_set_num_threads(cfg.threads);
    }
#else
    (void)cfg;
#endif
}

ConfigEcho base_echo(const std::string& command, const RunConfig& cfg)
{
    ConfigEcho echo;
    const auto put = [&echo](const std::string& key, const std::string& v) {
        echo.emplace_back(key, v);
    };
    const auto put_d = [&put](const std::string& key, double v) {
        put(key, format_double(v));
    };
    put("command", command);
    put("n_magnets", std::to_string(cfg.n_magnets));
    put_d("edge_mm", cfg.edge_mm);
    put_d("remanence_T", cfg.remanence);
    put_d("extra_spacing_mm", cfg.spacing_mm);
    put_d("pitch_mm", resolved_pitch_mm(cfg));
    put_d("trap_mm", cfg.trap_mm);
    put("grid_nx", std::to_string(cfg.grid_nx));
    put("grid_ny", std::to_string(cfg.grid_ny));
    put_d("half_width_mm", cfg.half_width_mm);
    put_d("robot_remanence_T", cfg.robot_remanence);
    put_d("robot_volume_mm3", cfg.robot_volume_mm3);
    put_d("lambda1", cfg.lambda1);
    put_d("lambda2", cfg.lambda2);
    put_d("gamma", cfg.gamma);
    if (cfg.yhat) {
        put_d("force_target_N", *cfg.yhat);
    }
    put_d("learning_rate", cfg.adam.learning_rate);
    put_d("beta1", cfg.adam.beta1);
    put_d("beta2", cfg.adam.beta2);
    put_d("adam_epsilon", cfg.adam.epsilon);
    put("restarts_per_round", std::to_string(cfg.policy.restarts_per_round));
    put("steps", std::to_string(cfg.policy.steps));
    put_d("accuracy_threshold", cfg.policy.accuracy_threshold);
    put_d("threshold_decrement", cfg.policy.threshold_decrement);
    put("max_rounds", std::to_string(cfg.policy.max_rounds));
    put("seed", std::to_string(cfg.policy.seed));
    put("threads", std::to_string(cfg.threads));
    return echo;
}

std::string join_doubles(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_double(values[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(values[i]);
    }
    return out;
}

// "-" or "" means stdout.
void write_or_print(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        write_text_file(path, content);
    }
}

void warn_proximity(const FieldDiagnostics& diag)
{
    if (diag.proximity_pairs > 0) {
        std::cerr << "warning: " << diag.proximity_pairs << " of "
                  << diag.pair_count
                  << " point-magnet evaluations are closer than 1.5x the "
                     "cube space diagonal; the point-dipole model loses "
                     "accuracy at such distances\n";
    }
}

// Distance lists come either as an explicit comma list ("20,45,70") or
// as a linspace range "start:stop:count", all in millimeters.
std::vector<double> parse_distance_range(const std::string& text)
{
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        double start = 0.0;
        double stop = 0.0;
        int count = 0;
        char sep1 = 0;
        char sep2 = 0;
        std::istringstream in(text);
        if (!(in >> start >> sep1 >> stop >> sep2 >> count) || sep1 != ':'
            || sep2 != ':' || !in.eof()) {
            throw std::invalid_argument(
                "bad distance range '" + text + "' (want start:stop:count)");
        }
        if (count < 1) {
            throw std::invalid_argument("distance count must be >= 1");
        }
        if (count == 1) {
            return { start };
        }
        return linspace(start, stop, count);
    }
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || token.empty()) {
            throw std::invalid_argument("bad distance value '" + token + "'");
        }
        values.push_back(value);
    }
    if (values.empty()) {
        throw std::invalid_argument("empty distance list");
    }
    return values;
}

int run_optimize(const RunConfig& cfg, bool include_history,
                 const std::string& dump_field_path, const std::string& out)
{
    const MagnetArray array = array_from(cfg);
    const EvaluationGrid grid = grid_from(cfg);
    const RobotMagnet robot = robot_from(cfg);
    ConfigEcho echo = base_echo("optimize", cfg);

    std::string json;
    std::vector<double> final_angles;
    bool success = false;
    if (cfg.lambda2 == 0.0 || cfg.yhat) {
        // Direct run: the composite loss exactly as configured.
        echo.emplace_back("mode", "direct");
        LossConfig loss;
        loss.lambda1 = cfg.lambda1;
        loss.lambda2 = cfg.lambda2;
        loss.force_target = cfg.yhat.value_or(0.0);
        const OptimizationReport report =
            multi_restart(array, grid, robot, loss, cfg.adam, cfg.policy);
        json = report_to_json(report, echo, include_history);
        final_angles = report.angles_deg;
        success = report.success;
    } else {
        // Default: derive the force target from a direction-only stage.
        echo.emplace_back("mode", "tuned");
        const TuneResult tuned = tune_force_target(
            array, grid, robot, cfg.gamma, cfg.adam, cfg.policy);
        json = tune_to_json(tuned, echo, include_history);
        final_angles = tuned.stage2.angles_deg;
        success = tuned.stage2.success;
    }
    write_or_print(out, json);

    if (success && !final_angles.empty()) {
        MagnetArray solved = array;
        solved.set_angles_deg(final_angles);
        const ForceField field = evaluate_grid(solved, grid, robot);
        warn_proximity(field.diagnostics);
        if (!dump_field_path.empty()) {
            write_text_file(dump_field_path, field_to_csv(field, echo));
        }
    }
    return success ? 0 : 1;
}

bool inside_any_magnet(const Eigen::Vector3d& point,
                       const MagnetArray& array)
{
    for (const Magnet& magnet : array.magnets) {
        const Eigen::Vector3d d = (point - magnet.center).cwiseAbs();
        if ((d.array() <= 0.5 * magnet.edge_length).all()) {
            return true;
        }
    }
    return false;
}

int run_field(const RunConfig& cfg, const std::vector<double>& angles,
              const std::string& plane, double ymin_mm, double ymax_mm,
              double zmin_mm, double zmax_mm, const std::string& out)
{
    MagnetArray array = array_from(cfg);
    if (!angles.empty()) {
        array.set_angles_deg(angles);
    }
    const RobotMagnet robot = robot_from(cfg);

    std::vector<Eigen::Vector3d> points;
    if (plane == "xy") {
        points = grid_from(cfg).points;
    } else { // yz at x = 0
        const std::vector<double> ys =
            linspace(millimeters_to_meters(ymin_mm),
                     millimeters_to_meters(ymax_mm), cfg.grid_ny);
        const std::vector<double> zs =
            linspace(millimeters_to_meters(zmin_mm),
                     millimeters_to_meters(zmax_mm), cfg.grid_nx);
        for (double y : ys) {
            for (double z : zs) {
                points.emplace_back(0.0, y, z);
            }
        }
    }

    // Unlike grid evaluation, the field dump degrades gracefully: points
    // inside a magnet volume (where the dipole model is meaningless) or
    // on a degenerate spot become nan rows instead of aborting the dump.
    ForceField field;
    field.points = points;
    field.forces.reserve(points.size());
    field.fluxes.reserve(points.size());
    const Eigen::Vector3d invalid =
        Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
    for (const Eigen::Vector3d& p : points) {
        if (inside_any_magnet(p, array)) {
            field.forces.push_back(invalid);
            field.fluxes.push_back(invalid);
            continue;
        }
        try {
            const PointSample sample =
                sample_point(p, array, robot, &field.diagnostics);
            field.forces.push_back(sample.force);
            field.fluxes.push_back(sample.flux);
        } catch (const std::runtime_error&) {
            field.forces.push_back(invalid);
            field.fluxes.push_back(invalid);
        }
    }

    ConfigEcho echo = base_echo("field", cfg);
    echo.emplace_back("plane", plane);
    echo.emplace_back("angles_deg", join_doubles(array.angles_deg()));
    if (plane == "yz") {
        echo.emplace_back("ymin_mm", format_double(ymin_mm));
        echo.emplace_back("ymax_mm", format_double(ymax_mm));
        echo.emplace_back("zmin_mm", format_double(zmin_mm));
        echo.emplace_back("zmax_mm", format_double(zmax_mm));
    }
    warn_proximity(field.diagnostics);
    write_or_print(out, field_to_csv(field, echo));
    return 0;
}

int run_sweep(const RunConfig& cfg, const std::string& distance_range,
              const std::vector<int>& counts, int smoothing_window,
              double avg_radius_mm, const AspectRatioOptions& aspect,
              const std::string& out)
{
    const std::vector<double> distances_mm =
        parse_distance_range(distance_range);

    SweepOptions options;
    options.distances.reserve(distances_mm.size());
    for (double d : distances_mm) {
        options.distances.push_back(millimeters_to_meters(d));
    }
    options.magnet_counts = counts;
    options.edge_length = millimeters_to_meters(cfg.edge_mm);
    options.remanence = cfg.remanence;
    options.extra_spacing = millimeters_to_meters(cfg.spacing_mm);
    if (cfg.pitch_mm) {
        options.pitch_override = millimeters_to_meters(*cfg.pitch_mm);
    }
    options.robot = robot_from(cfg);
    options.grid_nx = cfg.grid_nx;
    options.grid_ny = cfg.grid_ny;
    options.half_width = millimeters_to_meters(cfg.half_width_mm);
    options.adam = cfg.adam;
    options.policy = cfg.policy;
    options.avg_force_radius = millimeters_to_meters(avg_radius_mm);
    options.aspect = aspect;
    options.smoothing_window = smoothing_window;

    const std::vector<SweepRow> rows = distance_sweep(options);

    ConfigEcho echo = base_echo("sweep", cfg);
    echo.emplace_back("distances_mm", distance_range);
    echo.emplace_back("magnet_counts", join_ints(counts));
    echo.emplace_back("smoothing_window", std::to_string(smoothing_window));
    echo.emplace_back("avg_force_radius_mm", format_double(avg_radius_mm));
    echo.emplace_back("aspect_force_threshold_N",
                      format_double(aspect.force_threshold));
    echo.emplace_back("aspect_resolution",
                      std::to_string(aspect.resolution));
    echo.emplace_back("aspect_half_width_mm",
                      format_double(meters_to_millimeters(aspect.half_width)));
    write_or_print(out, sweep_to_csv(rows, echo));

    const auto failed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [](const SweepRow& row) { return row.failed; }));
    if (failed > 0) {
        std::cerr << "warning: " << failed << " of " << rows.size()
                  << " sweep rows failed\n";
    }
    return failed == rows.size() ? 1 : 0;
}

int run_analyze(const RunConfig& cfg, const std::vector<double>& angles,
                double bz_min_mm, double bz_max_mm,
                const AspectRatioOptions& aspect, const std::string& out)
{
    if (angles.empty()) {
        throw std::runtime_error("analyze needs --angles (or angles= in a "
                                 "--config file)");
    }
    MagnetArray array = array_from(cfg);
    array.set_angles_deg(angles);
    const EvaluationGrid grid = grid_from(cfg);
    const RobotMagnet robot = robot_from(cfg);
    const double trap_m = millimeters_to_meters(cfg.trap_mm);

    const ForceField field = evaluate_grid(array, grid, robot);
    warn_proximity(field.diagnostics);

    LossConfig direction_only;
    direction_only.lambda1 = 1.0;
    direction_only.lambda2 = 0.0;
    const LossBreakdown loss = total_loss(array, grid, robot, direction_only);
    const Eigen::Vector2d center = trap_center(field, grid);
    const double avg_force = avg_force_in_radius(
        field, grid, Eigen::Vector2d{ 0.0, trap_m },
        millimeters_to_meters(10.0));

    nlohmann::ordered_json j;
    {
        nlohmann::ordered_json config = nlohmann::ordered_json::object();
        for (const auto& [key, value] : base_echo("analyze", cfg)) {
            config[key] = value;
        }
        j["config"] = std::move(config);
    }
    j["angles_deg"] = angles;
    j["direction_loss"] = loss.direction;
    j["accuracy"] = loss.accuracy();
    j["force_sum_N"] = loss.force_sum;
    j["trap_center_mm"] = { meters_to_millimeters(center.x()),
                            meters_to_millimeters(center.y()) };
    j["trap_offset_mm"] = { meters_to_millimeters(center.x()),
                            meters_to_millimeters(center.y() - trap_m) };
    j["avg_force_N"] = avg_force;
    try {
        const AspectRatioResult shape =
            trap_aspect_ratio(array, robot, trap_m, aspect);
        j["aspect_ratio"] = { { "ratio", shape.ratio },
                              { "truncated", shape.truncated },
                              { "region_cells", shape.region_cells },
                              { "min_force_N", shape.min_force } };
    } catch (const std::runtime_error&) {
        j["aspect_ratio"] = nullptr; // no below-threshold region
    }
    try {
        j["bz_zero_crossing_mm"] = meters_to_millimeters(bz_zero_crossing(
            array, millimeters_to_meters(bz_min_mm),
            millimeters_to_meters(bz_max_mm)));
    } catch (const std::runtime_error&) {
        j["bz_zero_crossing_mm"] = nullptr; // no sign change in range
    }
    j["proximity_pairs"] = field.diagnostics.proximity_pairs;
    j["pair_count"] = field.diagnostics.pair_count;

    write_or_print(out, j.dump(2) + "\n");
    return 0;
}

int run_gradcheck(const RunConfig& cfg, int trials,
                  const std::vector<int>& counts, double step_deg,
                  double tolerance)
{
    std::mt19937_64 rng(cfg.policy.seed);
    const auto uniform_angle = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 360.0;
    };

    const EvaluationGrid grid = grid_from(cfg);
    const RobotMagnet robot = robot_from(cfg);
    // Both loss terms active so the check covers the full gradient path.
    LossConfig loss;
    loss.lambda1 = 1.0;
    loss.lambda2 = 1.0;
    loss.force_target = 0.06;

    double worst = 0.0;
    for (int count : counts) {
        RunConfig sized = cfg;
        sized.n_magnets = count;
        const MagnetArray array = array_from(sized);
        double count_worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> angles(count);
            for (double& a : angles) {
                a = uniform_angle();
            }
            const std::vector<double> analytic =
                loss_gradient(angles, array, grid, robot, loss);
            const std::vector<double> reference =
                finite_difference_gradient(array, grid, robot, loss, angles,
                                           step_deg);
            for (int k = 0; k < count; ++k) {
                if (std::abs(reference[k]) < 1e-12) {
                    continue; // relative error undefined near zero
                }
                count_worst = std::max(
                    count_worst, std::abs(analytic[k] - reference[k])
                                     / std::abs(reference[k]));
            }
        }
        std::cout << "n=" << count << " trials=" << trials
                  << " max_rel_err=" << format_double(count_worst) << "\n";
        worst = std::max(worst, count_worst);
    }

    const bool ok = worst <= tolerance;
    std::cout << "gradcheck " << (ok ? "PASS" : "FAIL") << " (max "
              << format_double(worst) << ", tolerance "
              << format_double(tolerance) << ")\n";
    return ok ? 0 : 1;
}

int run_oracle(const RunConfig& cfg, double resolution_deg,
               const std::string& out)
{
    const MagnetArray array = array_from(cfg);
    const EvaluationGrid grid = grid_from(cfg);
    const RobotMagnet robot = robot_from(cfg);

    const BruteForceResult result =
        brute_force_2mag(array, grid, robot, resolution_deg);

    ConfigEcho echo = base_echo("oracle", cfg);
    echo.emplace_back("resolution_deg", format_double(resolution_deg));
    echo.emplace_back("best_alpha1_deg", format_double(result.best_alpha1_deg));
    echo.emplace_back("best_alpha2_deg", format_double(result.best_alpha2_deg));
    echo.emplace_back("best_direction_loss",
                      format_double(result.best_direction_loss));

    std::string csv;
    for (const auto& [key, value] : echo) {
        csv += "# " + key + " = " + value + "\n";
    }
    csv += "alpha1_deg,alpha2_deg,direction_loss\n";
    const int samples = result.samples_per_axis;
    for (int i1 = 0; i1 < samples; ++i1) {
        for (int i2 = 0; i2 < samples; ++i2) {
            csv += format_double(i1 * resolution_deg);
            csv += ',';
            csv += format_double(i2 * resolution_deg);
            csv += ',';
            csv += format_double(
                result.surface[static_cast<std::size_t>(i1) * samples + i2]);
            csv += '\n';
        }
    }
    write_or_print(out, csv);

    std::cerr << "oracle minimum: alpha1=" << format_double(result.best_alpha1_deg)
              << " alpha2=" << format_double(result.best_alpha2_deg)
              << " direction_loss="
              << format_double(result.best_direction_loss) << "\n";
    return 0;
}

void add_array_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("-n,--magnets", cfg.n_magnets,
                    "Number of magnets in the array (even, >= 2)")
        ->capture_default_str();
    cmd->add_option("--edge", cfg.edge_mm, "Cube edge length [mm]")
        ->capture_default_str();
    cmd->add_option("--remanence", cfg.remanence, "Magnet remanence [T]")
        ->capture_default_str();
    cmd->add_option("--spacing", cfg.spacing_mm,
                    "Extra spacing between adjacent magnets [mm]")
        ->capture_default_str();
    cmd->add_option("--pitch", cfg.pitch_mm,
                    "Center-to-center pitch override [mm]; at least the "
                    "face diagonal");
}

void add_grid_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--trap", cfg.trap_mm,
                    "Trap distance from the array axis [mm]")
        ->capture_default_str();
    cmd->add_option("--half-width", cfg.half_width_mm,
                    "Evaluation area half-width [mm]")
        ->capture_default_str();
    cmd->add_option("--grid-nx", cfg.grid_nx, "Grid points along x")
        ->capture_default_str();
    cmd->add_option("--grid-ny", cfg.grid_ny, "Grid points along y")
        ->capture_default_str();
}

void add_robot_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--robot-remanence", cfg.robot_remanence,
                    "Trapped object remanence [T]")
        ->capture_default_str();
    cmd->add_option("--robot-volume", cfg.robot_volume_mm3,
                    "Trapped object magnet volume [mm^3]")
        ->capture_default_str();
}

void add_optimizer_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--lambda1", cfg.lambda1,
                    "Weight of the direction loss (direct runs)")
        ->capture_default_str();
    cmd->add_option("--lambda2", cfg.lambda2,
                    "Weight of the magnitude loss; 0 selects a pure "
                    "direction run (direct runs)")
        ->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma,
                    "Force-target scale applied to the stage-1 force sum "
                    "in tuned runs")
        ->capture_default_str();
    cmd->add_option("--yhat", cfg.yhat,
                    "Explicit force target [N]: the grid-total force the "
                    "magnitude loss pulls toward (its meaning changes "
                    "with grid resolution); skips tuning");
    cmd->add_option("--learning-rate", cfg.adam.learning_rate,
                    "Adam learning rate")
        ->capture_default_str();
    cmd->add_option("--beta1", cfg.adam.beta1, "Adam first-moment decay")
        ->capture_default_str();
    cmd->add_option("--beta2", cfg.adam.beta2, "Adam second-moment decay")
        ->capture_default_str();
    cmd->add_option("--adam-epsilon", cfg.adam.epsilon,
                    "Adam denominator guard")
        ->capture_default_str();
    cmd->add_option("--restarts", cfg.policy.restarts_per_round,
                    "Random restarts per round")
        ->capture_default_str();
    cmd->add_option("--steps", cfg.policy.steps,
                    "Optimization steps per restart")
        ->capture_default_str();
    cmd->add_option("--threshold", cfg.policy.accuracy_threshold,
                    "Accuracy that stops the restart search")
        ->capture_default_str();
    cmd->add_option("--decrement", cfg.policy.threshold_decrement,
                    "Threshold reduction per extra round")
        ->capture_default_str();
    cmd->add_option("--rounds", cfg.policy.max_rounds,
                    "Maximum rounds of restarts")
        ->capture_default_str();
}

void add_run_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--seed", cfg.policy.seed,
                    "Seed for the restart angle draws")
        ->capture_default_str();
    cmd->add_option("--threads", cfg.threads,
                    "Cap on evaluation threads (0 = default)")
        ->capture_default_str();
    cmd->add_option("--config", cfg.config_path,
                    "Read option defaults from a key=value file; "
                    "command-line flags win");
}

// Expands a key=value config file into command-line tokens for options
// the user did not pass explicitly.  Keys use the long option name
// without the leading dashes; '#' starts a comment.
std::vector<std::string> config_file_tokens(const std::string& path,
                                            const CLI::App& cmd)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }

    const auto trim = [](std::string text) {
        const auto begin = text.find_first_not_of(" \t\r");
        const auto end = text.find_last_not_of(" \t\r");
        return begin == std::string::npos
                   ? std::string{}
                   : text.substr(begin, end - begin + 1);
    };

    std::vector<std::string> tokens;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) {
            line.erase(comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto equals = line.find('=');
        if (equals == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_number)
                                     + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, equals));
        std::string value = trim(line.substr(equals + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')
            && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (key == "config") {
            throw std::runtime_error(path + ":" + std::to_string(line_number)
                                     + ": config files cannot nest");
        }
        const std::string name =
            (key.size() == 1 ? "-" : "--") + key;
        const CLI::Option* option = cmd.get_option_no_throw(name);
        if (option == nullptr) {
            throw std::runtime_error(path + ":" + std::to_string(line_number)
                                     + ": unknown option '" + key + "' for "
                                     + cmd.get_name());
        }
        if (option->count() > 0) {
            continue; // explicitly given on the command line
        }
        tokens.push_back(name + "=" + value);
    }
    return tokens;
}

} // namespace

int run_cli(std::vector<std::string> args)
{
    CLI::App app{ "Designs linear arrays of rotatable cubic magnets whose "
                  "combined field traps a small magnet at a chosen "
                  "stand-off distance, and analyzes the resulting trap." };
    app.require_subcommand(1);

    RunConfig cfg;

    // --- optimize ---------------------------------------------------
    auto* optimize = app.add_subcommand(
        "optimize", "Optimize rotation angles for a trap at --trap; by "
                    "default tunes a force target from a direction-only "
                    "stage, then optimizes the composite loss");
    add_array_options(optimize, cfg);
    add_grid_options(optimize, cfg);
    add_robot_options(optimize, cfg);
    add_optimizer_options(optimize, cfg);
    add_run_options(optimize, cfg);
    bool opt_history = false;
    std::string opt_dump_field;
    std::string opt_out;
    optimize->add_flag("--history", opt_history,
                       "Include per-step loss histories in the report");
    optimize->add_option("--dump-field", opt_dump_field,
                         "Also write the optimized force field as CSV");
    optimize->add_option("-o,--output", opt_out,
                         "Report path (default: stdout)");

    // --- field ------------------------------------------------------
    auto* field = app.add_subcommand(
        "field", "Evaluate force and flux on a grid without optimizing");
    add_array_options(field, cfg);
    add_grid_options(field, cfg);
    add_robot_options(field, cfg);
    add_run_options(field, cfg);
    std::vector<double> field_angles;
    std::string field_plane = "xy";
    double field_ymin = 20.0;
    double field_ymax = 130.0;
    double field_zmin = -120.0;
    double field_zmax = 120.0;
    std::string field_out;
    field->add_option("--angles", field_angles,
                      "Rotation angles [deg], comma-separated, one per "
                      "magnet (default: all 0)")
        ->delimiter(',');
    field->add_option("--plane", field_plane,
                      "Evaluation plane: xy (z=0, centered on the trap) "
                      "or yz (x=0)")
        ->check(CLI::IsMember({ "xy", "yz" }))
        ->capture_default_str();
    field->add_option("--ymin", field_ymin, "yz plane: smallest y [mm]")
        ->capture_default_str();
    field->add_option("--ymax", field_ymax, "yz plane: largest y [mm]")
        ->capture_default_str();
    field->add_option("--zmin", field_zmin, "yz plane: smallest z [mm]")
        ->capture_default_str();
    field->add_option("--zmax", field_zmax, "yz plane: largest z [mm]")
        ->capture_default_str();
    field->add_option("-o,--output", field_out,
                      "CSV path (default: stdout)");

    // --- sweep ------------------------------------------------------
    auto* sweep = app.add_subcommand(
        "sweep", "Optimize a trap at each (magnet count, distance) pair "
                 "and tabulate trap metrics");
    add_array_options(sweep, cfg);
    add_grid_options(sweep, cfg);
    add_robot_options(sweep, cfg);
    add_optimizer_options(sweep, cfg);
    add_run_options(sweep, cfg);
    std::string sweep_distances = "20:130:100";
    std::vector<int> sweep_counts{ 2 };
    int sweep_window = 5;
    double sweep_avg_radius = 10.0;
    AspectRatioOptions sweep_aspect;
    double sweep_aspect_half_width = 10.0;
    std::string sweep_out;
    sweep->add_option("--distances", sweep_distances,
                      "Trap distances [mm]: start:stop:count or a comma "
                      "list")
        ->capture_default_str();
    sweep->add_option("--counts", sweep_counts,
                      "Magnet counts, comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--window", sweep_window,
                      "Centered smoothing window for the aspect column")
        ->capture_default_str();
    sweep->add_option("--avg-radius", sweep_avg_radius,
                      "Radius of the force-average disk [mm]")
        ->capture_default_str();
    sweep->add_option("--aspect-threshold", sweep_aspect.force_threshold,
                      "Low-force cutoff defining the trap region [N]")
        ->capture_default_str();
    sweep->add_option("--aspect-resolution", sweep_aspect.resolution,
                      "Fine-grid points per axis for the trap region")
        ->capture_default_str();
    sweep->add_option("--aspect-half-width", sweep_aspect_half_width,
                      "Fine-grid half-width around the trap [mm]")
        ->capture_default_str();
    sweep->add_option("-o,--output", sweep_out,
                      "CSV path (default: stdout)");

    // --- analyze ----------------------------------------------------
    auto* analyze = app.add_subcommand(
        "analyze", "Trap metrics (center, strength, shape, flux sign "
                   "change) for given angles");
    add_array_options(analyze, cfg);
    add_grid_options(analyze, cfg);
    add_robot_options(analyze, cfg);
    add_run_options(analyze, cfg);
    std::vector<double> analyze_angles;
    double bz_min = 0.0;
    double bz_max = 0.0;
    AspectRatioOptions analyze_aspect;
    double analyze_aspect_half_width = 10.0;
    std::string analyze_out;
    // Checked in run_analyze rather than marked required so the angles
    // can also come from a --config file.
    analyze->add_option("--angles", analyze_angles,
                        "Rotation angles [deg], comma-separated, one per "
                        "magnet")
        ->delimiter(',');
    analyze->add_option("--bz-scan-min", bz_min,
                        "Flux sign-change scan start [mm] (default: "
                        "trap/4)");
    analyze->add_option("--bz-scan-max", bz_max,
                        "Flux sign-change scan end [mm] (default: "
                        "1.5*trap)");
    analyze->add_option("--aspect-threshold",
                        analyze_aspect.force_threshold,
                        "Low-force cutoff defining the trap region [N]")
        ->capture_default_str();
    analyze->add_option("--aspect-resolution", analyze_aspect.resolution,
                        "Fine-grid points per axis for the trap region")
        ->capture_default_str();
    analyze->add_option("--aspect-half-width", analyze_aspect_half_width,
                        "Fine-grid half-width around the trap [mm]")
        ->capture_default_str();
    analyze->add_option("-o,--output", analyze_out,
                        "JSON path (default: stdout)");

    // --- gradcheck --------------------------------------------------
    auto* gradcheck = app.add_subcommand(
        "gradcheck", "Compare the analytic loss gradient against "
                     "high-precision central differences on random "
                     "angle vectors");
    add_array_options(gradcheck, cfg);
    add_grid_options(gradcheck, cfg);
    add_robot_options(gradcheck, cfg);
    add_run_options(gradcheck, cfg);
    int gc_trials = 50;
    std::vector<int> gc_counts{ 2, 4, 8 };
    double gc_step = 1e-5;
    double gc_tolerance = 1e-5;
    gradcheck->add_option("--trials", gc_trials,
                          "Random angle vectors per magnet count")
        ->capture_default_str();
    gradcheck->add_option("--counts", gc_counts,
                          "Magnet counts to check, comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    gradcheck->add_option("--step", gc_step,
                          "Central-difference step [deg]")
        ->capture_default_str();
    gradcheck->add_option("--tolerance", gc_tolerance,
                          "Largest acceptable relative error")
        ->capture_default_str();

    // --- oracle -----------------------------------------------------
    auto* oracle = app.add_subcommand(
        "oracle", "Exhaustive direction-loss scan over both angles of a "
                  "two-magnet array");
    add_array_options(oracle, cfg);
    add_grid_options(oracle, cfg);
    add_robot_options(oracle, cfg);
    add_run_options(oracle, cfg);
    double oracle_resolution = 1.0;
    std::string oracle_out;
    oracle->add_option("--resolution", oracle_resolution,
                       "Scan step [deg]; must divide 360")
        ->capture_default_str();
    oracle->add_option("-o,--output", oracle_out,
                       "Surface CSV path (default: stdout)");

    try {
        std::vector<std::string> reversed = args;
        std::reverse(reversed.begin(), reversed.end());
        app.parse(std::move(reversed));
        if (!cfg.config_path.empty()) {
            // CLI11 only processes config files registered on the root
            // app, so merge subcommand config files by hand: turn unset
            // keys into extra tokens and parse again.
            const std::vector<std::string> extra =
                config_file_tokens(cfg.config_path,
                                   *app.get_subcommands().front());
            if (!extra.empty()) {
                std::vector<std::string> merged = args;
                merged.insert(merged.end(), extra.begin(), extra.end());
                std::reverse(merged.begin(), merged.end());
                app.parse(std::move(merged));
            }
        }
    } catch (const CLI::ParseError& error) {
        return app.exit(error);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }

    try {
        apply_threads(cfg);
        if (*optimize) {
            return run_optimize(cfg, opt_history, opt_dump_field, opt_out);
        }
        if (*field) {
            return run_field(cfg, field_angles, field_plane, field_ymin,
                             field_ymax, field_zmin, field_zmax, field_out);
        }
        if (*sweep) {
            sweep_aspect.half_width =
                millimeters_to_meters(sweep_aspect_half_width);
            return run_sweep(cfg, sweep_distances, sweep_counts,
                             sweep_window, sweep_avg_radius, sweep_aspect,
                             sweep_out);
        }
        if (*analyze) {
            analyze_aspect.half_width =
                millimeters_to_meters(analyze_aspect_half_width);
            if (bz_min == 0.0) {
                bz_min = cfg.trap_mm / 4.0;
            }
            if (bz_max == 0.0) {
                bz_max = 1.5 * cfg.trap_mm;
            }
            return run_analyze(cfg, analyze_angles, bz_min, bz_max,
                               analyze_aspect, analyze_out);
        }
        if (*gradcheck) {
            return run_gradcheck(cfg, gc_trials, gc_counts, gc_step,
                                 gc_tolerance);
        }
        if (*oracle) {
            return run_oracle(cfg, oracle_resolution, oracle_out);
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace magtrap
