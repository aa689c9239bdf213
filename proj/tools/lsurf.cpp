// lsurf: shooting, classification, parameter search, and mesh export for
// rotationally symmetric lambda-hypersurface profile curves.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lambdasurf/classify.hpp"
#include "lambdasurf/formulations.hpp"
#include "lambdasurf/geometry.hpp"
#include "lambdasurf/io.hpp"
#include "lambdasurf/ode.hpp"
#include "lambdasurf/search.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoBracket = 3;
constexpr int kExitPrecisionLimit = 4;
constexpr int kExitStepFailure = 5;

std::set<std::string> config_overrides;

struct RunConfig {
  lambdasurf::Params params;
  lambdasurf::IntegratorControls controls;
  std::string out_dir;
  std::string config_file;
  bool report_flipped = false;
};

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--n", cfg.params.n, "Dimension n of the hypersurface")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.params.lambda, "Constant lambda")
      ->capture_default_str();
  cmd->add_option("--rel-tol", cfg.controls.rel_tol, "Relative step tolerance")
      ->capture_default_str();
  cmd->add_option("--abs-tol", cfg.controls.abs_tol, "Absolute step tolerance")
      ->capture_default_str();
  cmd->add_option("--s-max", cfg.controls.s_max, "Arc length budget")
      ->capture_default_str();
  cmd->add_option("--r-max", cfg.controls.r_max, "Escape radius")
      ->capture_default_str();
  cmd->add_option("--x-max", cfg.controls.x_max, "Axial escape bound")
      ->capture_default_str();
  cmd->add_option("--event-tol", cfg.controls.event_tol,
                  "Event localization tolerance in s")
      ->capture_default_str();
  cmd->add_option("--max-steps", cfg.controls.max_steps, "Step budget")
      ->capture_default_str();
  cmd->add_option("--sample-spacing", cfg.controls.sample_spacing,
                  "Fixed output sample spacing (0 = automatic)")
      ->capture_default_str();
  cmd->add_flag("--report-flipped", cfg.report_flipped,
                "Report lambda, H and the curvatures with the normal reversed");
  cmd->add_option("--out", cfg.out_dir, "Output directory")->required();
  cmd->add_option("--config", cfg.config_file,
                  "key=value configuration file (flags take precedence)");
}

// Applies `key=value` lines for keys matching the common option names
// (without leading dashes). Flags set on the command line win.
void apply_config_file(CLI::App* cmd, RunConfig& cfg) {
  std::ifstream in(cfg.config_file);
  if (!in)
    throw lambdasurf::ConfigError("cannot open config file " + cfg.config_file);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw lambdasurf::ConfigError("config line " + std::to_string(lineno) +
                                    " is not key=value");
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (cmd->count("--" + key) > 0) continue;  // explicit flag wins

    auto as_double = [&] { return std::stod(value); };
    if (key == "n") cfg.params.n = std::stoi(value);
    else if (key == "lambda") cfg.params.lambda = as_double();
    else if (key == "rel-tol") cfg.controls.rel_tol = as_double();
    else if (key == "abs-tol") cfg.controls.abs_tol = as_double();
    else if (key == "s-max") cfg.controls.s_max = as_double();
    else if (key == "r-max") cfg.controls.r_max = as_double();
    else if (key == "x-max") cfg.controls.x_max = as_double();
    else if (key == "event-tol") cfg.controls.event_tol = as_double();
    else if (key == "max-steps") cfg.controls.max_steps = std::stoll(value);
    else if (key == "sample-spacing") cfg.controls.sample_spacing = as_double();
    else if (key == "report-flipped") cfg.report_flipped = value != "0" && value != "false";
    else
      throw lambdasurf::ConfigError("unknown config key '" + key + "'");
    config_overrides.insert(key);
  }
}

// Flags > config file > defaults; escape defaults depend on (n, lambda) and
// are applied only when not set some other way.
void finalize_controls(CLI::App* cmd, RunConfig& cfg) {
  if (!cfg.config_file.empty()) apply_config_file(cmd, cfg);
  lambdasurf::validate(cfg.params);
  auto defaults = lambdasurf::IntegratorControls::defaults_for(cfg.params);
  if (cmd->count("--r-max") == 0 && !config_overrides.count("r-max"))
    cfg.controls.r_max = defaults.r_max;
  if (cmd->count("--x-max") == 0 && !config_overrides.count("x-max"))
    cfg.controls.x_max = defaults.x_max;
  cfg.controls.validate();
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["n"] = cfg.params.n;
  j["lambda"] = cfg.params.lambda;
  j["rel_tol"] = cfg.controls.rel_tol;
  j["abs_tol"] = cfg.controls.abs_tol;
  j["s_max"] = cfg.controls.s_max;
  j["r_max"] = cfg.controls.r_max;
  j["x_max"] = cfg.controls.x_max;
  j["event_tol"] = cfg.controls.event_tol;
  j["max_steps"] = cfg.controls.max_steps;
  j["sample_spacing"] = cfg.controls.sample_spacing;
  j["report_flipped"] = cfg.report_flipped;
  j["deterministic"] = true;  // runs are random-free by construction
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << content;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    ordered_json extra_config,
                    const std::vector<std::string>& files) {
  ordered_json manifest;
  manifest["command"] = command;
  ordered_json conf = config_json(cfg);
  for (auto& [k, v] : extra_config.items()) conf[k] = v;
  manifest["config"] = conf;
  manifest["files"] = files;
  write_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

double reported_lambda(const RunConfig& cfg) {
  return cfg.report_flipped ? -cfg.params.lambda : cfg.params.lambda;
}

void write_curve_outputs(const RunConfig& cfg, const lambdasurf::ProfileCurve& curve,
                         const std::string& stem, int segments,
                         std::size_t profile_points,
                         std::vector<std::string>& files) {
  namespace ls = lambdasurf;
  ls::ProfileCurve coarse = ls::resample(curve, profile_points);
  {
    std::ostringstream os;
    ls::write_profile_csv(os, coarse, cfg.params, cfg.report_flipped);
    write_file(fs::path(cfg.out_dir) / (stem + ".csv"), os.str());
    files.push_back(stem + ".csv");
  }
  if (cfg.params.n == 2) {
    std::ostringstream os;
    ls::write_obj(os, ls::revolve_mesh(coarse, segments));
    write_file(fs::path(cfg.out_dir) / (stem + ".obj"), os.str());
    files.push_back(stem + ".obj");
  }
}

int run_shoot(const RunConfig& cfg, double delta) {
  namespace ls = lambdasurf;
  ls::Trajectory traj = ls::integrate(delta, cfg.params, cfg.controls);

  std::vector<std::string> files;
  {
    std::ostringstream os;
    ls::write_trajectory_csv(os, traj);
    write_file(fs::path(cfg.out_dir) / "trajectory.csv", os.str());
    files.push_back("trajectory.csv");
  }
  write_file(fs::path(cfg.out_dir) / "events.json",
             ls::events_json(traj) + "\n");
  files.push_back("events.json");
  {
    std::ostringstream os;
    ls::write_profile_csv(os, ls::curve_from_trajectory(traj), cfg.params,
                          cfg.report_flipped);
    write_file(fs::path(cfg.out_dir) / "profile.csv", os.str());
    files.push_back("profile.csv");
  }

  ordered_json extra;
  extra["delta"] = delta;
  extra["termination"] = ls::to_string(traj.termination);
  extra["reported_lambda"] = reported_lambda(cfg);
  write_manifest(cfg, "shoot", extra, files);

  return traj.termination == ls::Termination::step_failure ? kExitStepFailure
                                                           : kExitOk;
}

int run_find_cylinder(const RunConfig& cfg, double tol, int segments,
                      std::size_t profile_points) {
  namespace ls = lambdasurf;
  ls::SearchResult result =
      ls::find_cylinder_delta(cfg.params, tol, cfg.controls);

  std::vector<std::string> files;
  write_file(fs::path(cfg.out_dir) / "cylinder_search.json",
             ls::search_report_json(result) + "\n");
  files.push_back("cylinder_search.json");
  write_curve_outputs(cfg, ls::curve_from_trajectory(result.trajectory),
                      "cylinder_profile", segments, profile_points, files);

  ordered_json extra;
  extra["tol"] = tol;
  extra["delta_star"] = result.delta_star;
  extra["reported_lambda"] = reported_lambda(cfg);
  write_manifest(cfg, "find-cylinder", extra, files);
  return kExitOk;
}

int run_find_torus(const RunConfig& cfg, double tol, int segments,
                   std::size_t profile_points) {
  namespace ls = lambdasurf;
  auto [lower, upper] = ls::find_torus_deltas(cfg.params, tol, cfg.controls);

  ls::ProfileCurve curve1 = ls::reflect_close(lower.trajectory);
  ls::ProfileCurve curve2 = ls::reflect_close(upper.trajectory);
  auto r_range = [](const ls::ProfileCurve& curve) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& q : curve.points) {
      lo = std::min(lo, q.r);
      hi = std::max(hi, q.r);
    }
    return std::pair{lo, hi};
  };
  auto [lo1, hi1] = r_range(curve1);
  auto [lo2, hi2] = r_range(curve2);

  std::vector<std::string> files;
  ordered_json report;
  report["torus_lower"] =
      ordered_json::parse(ls::search_report_json(lower));
  report["torus_lower"]["r_range"] = {lo1, hi1};
  report["torus_upper"] =
      ordered_json::parse(ls::search_report_json(upper));
  report["torus_upper"]["r_range"] = {lo2, hi2};
  // the tori are non-congruent: distinct delta and distinct r-ranges
  report["comparison"] = {
      {"delta_gap", upper.delta_star - lower.delta_star},
      {"min_r_gap", std::fabs(lo1 - lo2)},
      {"max_r_gap", std::fabs(hi1 - hi2)},
  };
  write_file(fs::path(cfg.out_dir) / "torus_search.json",
             report.dump(2) + "\n");
  files.push_back("torus_search.json");

  write_curve_outputs(cfg, curve1, "torus1", segments, profile_points, files);
  write_curve_outputs(cfg, curve2, "torus2", segments, profile_points, files);

  ordered_json extra;
  extra["tol"] = tol;
  extra["delta_t1"] = lower.delta_star;
  extra["delta_t2"] = upper.delta_star;
  extra["segments"] = segments;
  extra["reported_lambda"] = reported_lambda(cfg);
  write_manifest(cfg, "find-torus", extra, files);
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, int grid, double delta_min,
              double delta_max) {
  namespace ls = lambdasurf;
  double r_lambda = ls::cylinder_radius(cfg.params);
  if (delta_min <= 0.0) delta_min = 0.02 * r_lambda;
  if (delta_max <= 0.0) delta_max = 0.99 * r_lambda;
  std::vector<double> deltas(grid);
  for (int i = 0; i < grid; ++i)
    deltas[i] = grid == 1 ? delta_min
                          : delta_min + (delta_max - delta_min) * i / (grid - 1);

  auto rows = ls::sweep(cfg.params, deltas, cfg.controls);
  std::ostringstream os;
  ls::write_sweep_csv(os, rows);
  write_file(fs::path(cfg.out_dir) / "sweep.csv", os.str());

  ordered_json extra;
  extra["grid"] = grid;
  extra["delta_min"] = delta_min;
  extra["delta_max"] = delta_max;
  write_manifest(cfg, "sweep", extra, {"sweep.csv"});
  return kExitOk;
}

int run_scan(const RunConfig& cfg, const std::vector<double>& lambdas) {
  namespace ls = lambdasurf;
  ls::ScanTable table =
      ls::lambda_threshold_scan(cfg.params.n, lambdas, cfg.controls);

  std::ostringstream csv;
  csv << "lambda,cylinder_found,tori_found\n";
  for (const auto& row : table.rows)
    csv << ls::fmt17(row.lambda) << ',' << (row.cylinder_found ? 1 : 0) << ','
        << (row.tori_found ? 1 : 0) << '\n';
  write_file(fs::path(cfg.out_dir) / "scan.csv", csv.str());

  ordered_json j;
  j["n"] = table.n;
  j["rows"] = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json r;
    r["lambda"] = row.lambda;
    r["cylinder_found"] = row.cylinder_found;
    r["tori_found"] = row.tori_found;
    if (!row.cylinder_note.empty()) r["cylinder_note"] = row.cylinder_note;
    if (!row.tori_note.empty()) r["tori_note"] = row.tori_note;
    j["rows"].push_back(r);
  }
  j["c1_lower_estimate"] = table.c1_lower_estimate;
  j["c2_lower_estimate"] = table.c2_lower_estimate;
  j["estimate_note"] =
      "empirical lower bounds from the scanned grid, not analytic constants";
  write_file(fs::path(cfg.out_dir) / "scan.json", j.dump(2) + "\n");

  ordered_json extra;
  extra["lambdas"] = lambdas;
  write_manifest(cfg, "scan", extra, {"scan.csv", "scan.json"});
  return kExitOk;
}

void print_error_json(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Shooting-method toolkit for rotationally symmetric "
      "lambda-hypersurfaces (profile-curve integration, type "
      "classification, critical-parameter search, mesh export)"};
  app.require_subcommand(1);

  RunConfig cfg;
  double delta = 0.5;
  double tol_cyl = 1e-10;
  double tol_torus = 1e-12;
  int grid = 50;
  double delta_min = 0.0, delta_max = 0.0;
  int segments = 64;
  std::size_t profile_points = 1024;
  std::vector<double> lambdas;

  CLI::App* shoot = app.add_subcommand("shoot", "Integrate one shot");
  shoot->add_option("--delta", delta, "Initial radius")->required();
  add_common_options(shoot, cfg);

  CLI::App* fcyl = app.add_subcommand(
      "find-cylinder", "Locate delta_c (cylinder-type critical shot)");
  fcyl->add_option("--tol", tol_cyl, "Bracket tolerance in delta")
      ->capture_default_str();
  fcyl->add_option("--segments", segments, "Mesh segments")
      ->capture_default_str();
  fcyl->add_option("--profile-points", profile_points,
                   "Profile resampling for exports")
      ->capture_default_str();
  add_common_options(fcyl, cfg);

  CLI::App* ftor = app.add_subcommand(
      "find-torus", "Locate delta_t1 and delta_t2 (closed torus profiles)");
  ftor->add_option("--tol", tol_torus, "Bracket tolerance in delta")
      ->capture_default_str();
  ftor->add_option("--segments", segments, "Mesh segments")
      ->capture_default_str();
  ftor->add_option("--profile-points", profile_points,
                   "Profile resampling for exports")
      ->capture_default_str();
  add_common_options(ftor, cfg);

  CLI::App* swp = app.add_subcommand("sweep", "Classify a grid of deltas");
  swp->add_option("--grid", grid, "Number of deltas")->capture_default_str();
  swp->add_option("--delta-min", delta_min, "Lowest delta (default 0.02 R)");
  swp->add_option("--delta-max", delta_max, "Highest delta (default 0.99 R)");
  add_common_options(swp, cfg);

  CLI::App* scan = app.add_subcommand(
      "scan", "Scan a lambda grid for cylinder/tori existence");
  scan->add_option("--lambdas", lambdas, "Comma-separated lambda grid")
      ->required()
      ->delimiter(',');
  add_common_options(scan, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    finalize_controls(cmd, cfg);
    fs::create_directories(cfg.out_dir);
    if (cmd == shoot) {
      if (!(delta > 0.0)) throw lambdasurf::DomainError("--delta must be > 0");
      return run_shoot(cfg, delta);
    }
    if (cmd == fcyl) return run_find_cylinder(cfg, tol_cyl, segments, profile_points);
    if (cmd == ftor) return run_find_torus(cfg, tol_torus, segments, profile_points);
    if (cmd == swp) return run_sweep(cfg, grid, delta_min, delta_max);
    if (cmd == scan) return run_scan(cfg, lambdas);
    return kExitUsage;
  } catch (const lambdasurf::NoBracketError& e) {
    print_error_json("no-bracket", e.what());
    return kExitNoBracket;
  } catch (const lambdasurf::PrecisionLimitError& e) {
    print_error_json("precision-limit", e.what());
    return kExitPrecisionLimit;
  } catch (const lambdasurf::DistinctRootsError& e) {
    print_error_json("precision-limit", e.what());
    return kExitPrecisionLimit;
  } catch (const lambdasurf::DomainError& e) {
    print_error_json("usage", e.what());
    return kExitUsage;
  } catch (const lambdasurf::ConfigError& e) {
    print_error_json("usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
    return kExitUsage;
  }
}
