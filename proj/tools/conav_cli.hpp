#pragma once

// Command-line pipeline: validate, map, eval, grid, simulate.
// Exit codes: 0 success, 1 domain failure, 2 I/O, parse or usage failure.

#include <conav/conav.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace conav::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string workspace_path;
  std::size_t n_nodes = 0;  // 0: the file's n_nodes (256 when absent)
  double koebe_tol = 1e-13;
  int max_iter = 50;
  std::string kernel_dump_dir;
  std::string out_dir = ".";
  std::string cache_path;  // default <out>/<workspace stem>.cache
  std::string preset;

  int k = 6;
  Complex goal{0.0, 0.0};
  ControlParams ctrl;
  std::vector<double> lambdas;  // dynamic sweep; empty means ctrl.lambda only

  Model model = Model::kinematic;
  std::vector<Complex> starts;

  std::vector<Complex> points;  // eval

  GridSide side = GridSide::workspace;
  std::optional<std::array<double, 4>> bounds;
  std::size_t resolution = 200;
  std::string grid_format = "csv";
};

/// Values filled in by --preset paper-sec6.
inline const std::vector<Complex> kPresetKinematicStarts = {{1.0, 0.6}, {-1.0, 0.6}, {1.0, -0.6}, {0.05, -1.0}};
inline const std::vector<Complex> kPresetDynamicStarts = {{-1.0, 0.1}};
inline const std::vector<double> kPresetLambdas = {0.0, 3.2, 5.0};

inline Complex parse_point(const std::string& s) {
  std::stringstream ss(s);
  double x = 0.0, y = 0.0;
  char comma = 0;
  if (!(ss >> x >> comma >> y) || comma != ',' || !ss.eof())
    throw FormatError("expected a point 'x,y', got '" + s + "'");
  return {x, y};
}

inline json point_json(Complex p) { return json::array({p.real(), p.imag()}); }

inline std::string cache_path(const RunConfig& cfg) {
  if (!cfg.cache_path.empty()) return cfg.cache_path;
  return (fs::path(cfg.out_dir) / (fs::path(cfg.workspace_path).stem().string() + ".cache")).string();
}

inline std::uint64_t config_hash(const WorkspaceFile& wf, const RunConfig& cfg) {
  return workspace_hash(wf.document, wf.n_nodes, cfg.koebe_tol);
}

// Failure raised inside a command with its exit code.
struct CommandFailure {
  int code;
  std::string message;
};

inline WorkspaceFile load_config_workspace(const RunConfig& cfg) {
  if (cfg.workspace_path.empty()) throw CommandFailure{2, "--workspace is required"};
  try {
    return load_workspace(cfg.workspace_path, cfg.n_nodes);
  } catch (const FormatError& e) {
    throw CommandFailure{2, e.what()};
  } catch (const Error& e) {
    throw CommandFailure{1, e.what()};
  }
}

inline CacheContents load_config_cache(const RunConfig& cfg) {
  const auto wf = load_config_workspace(cfg);
  const auto path = cache_path(cfg);
  if (!fs::exists(path)) throw CommandFailure{1, "no cache at " + path + "; run `conav map` first"};
  try {
    return load_cache(path, config_hash(wf, cfg));
  } catch (const StaleCacheError& e) {
    throw CommandFailure{1, std::string(e.what()) + " (run `conav map` again)"};
  } catch (const FormatError& e) {
    throw CommandFailure{2, e.what()};
  }
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const auto wf = load_config_workspace(cfg);
  const auto report = validate_workspace(wf.workspace);
  json j;
  j["workspace"] = cfg.workspace_path;
  j["valid"] = report.valid();
  j["violations"] = json::array();
  for (const auto& v : report.violations)
    j["violations"].push_back({{"kind", to_string(v.kind)}, {"message", v.message}, {"curve_a", v.curve_a},
                               {"curve_b", v.curve_b}});
  out << j.dump(1) << '\n';
  return report.valid() ? 0 : 1;
}

inline int cmd_map(const RunConfig& cfg, std::ostream& out) {
  const auto wf = load_config_workspace(cfg);
  KoebeOptions opts;
  opts.tol = cfg.koebe_tol;
  opts.max_iter = cfg.max_iter;
  opts.kernel_dump_dir = cfg.kernel_dump_dir;
  json j;
  j["workspace"] = cfg.workspace_path;
  j["n_nodes"] = wf.n_nodes;
  j["tol"] = cfg.koebe_tol;
  try {
    if (!opts.kernel_dump_dir.empty()) fs::create_directories(opts.kernel_dump_dir);
    auto [cm, report] = run_koebe(wf.workspace, opts);
    auto sw = fit_circles(cm);
    j["converged"] = true;
    j["iterations"] = cm.n_iterations;
    j["final_delta"] = cm.final_delta;
    j["deltas"] = report.deltas;
    j["ratio_estimates"] = report.ratio_estimates;
    j["external_fit_residual"] = sw.external_fit_residual;
    j["circles"] = json::array();
    for (std::size_t i = 0; i < sw.obstacles.size(); ++i)
      j["circles"].push_back({{"center", point_json(sw.obstacles[i].center)},
                              {"radius", sw.obstacles[i].radius},
                              {"residual", sw.fit_residuals[i]}});
    const auto path = cache_path(cfg);
    try {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      save_cache(path, cm, sw, report, config_hash(wf, cfg), cfg.koebe_tol);
    } catch (const std::exception& e) {
      throw CommandFailure{2, e.what()};
    }
    j["cache"] = path;
  } catch (const NonConvergenceError& e) {
    j["converged"] = false;
    j["error"] = e.what();
    j["deltas"] = e.report().deltas;
    j["ratio_estimates"] = e.report().ratio_estimates;
    out << j.dump(1) << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    throw CommandFailure{2, e.what()};
  } catch (const FormatError& e) {
    throw CommandFailure{2, e.what()};
  } catch (const Error& e) {
    throw CommandFailure{1, e.what()};
  }
  out << j.dump(1) << '\n';
  return 0;
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto cache = load_config_cache(cfg);
  if (cfg.points.empty()) throw CommandFailure{2, "eval needs at least one --point"};
  const auto& cm = cache.map;
  NavParams nav;
  try {
    nav = make_nav_params(cm, cfg.goal, cfg.k);
  } catch (const Error& e) {
    throw CommandFailure{1, e.what()};
  }
  json results = json::array();
  int code = 0;
  for (auto p : cfg.points) {
    json r;
    r["point"] = point_json(p);
    try {
      if (!point_in_free_space(cm.source, p)) throw DomainError("point is not in free space");
      const auto pb = pullback(cm, cache.sphere_world, nav, p);
      const auto jac = jacobian_from_derivative(pb.derivative);
      r["image"] = point_json(pb.image);
      r["derivative"] = point_json(pb.derivative);
      r["jacobian"] = {{jac[0][0], jac[0][1]}, {jac[1][0], jac[1][1]}};
      r["det"] = std::norm(pb.derivative);
      r["phi"] = pb.phi;
      r["pullback_gradient"] = {pb.gradient.x, pb.gradient.y};
      r["near_boundary"] = pb.near_boundary;
    } catch (const Error& e) {
      r["error"] = e.what();
      code = 1;
    }
    results.push_back(std::move(r));
  }
  out << json{{"goal", point_json(cfg.goal)}, {"k", cfg.k}, {"results", results}}.dump(1) << '\n';
  return code;
}

inline int cmd_grid(const RunConfig& cfg, std::ostream& out) {
  const auto cache = load_config_cache(cfg);
  if (cfg.resolution < 2) throw CommandFailure{2, "--resolution must be >= 2"};
  if (cfg.grid_format != "csv" && cfg.grid_format != "json") throw CommandFailure{2, "--format must be csv or json"};
  const auto& cm = cache.map;
  NavParams nav;
  try {
    nav = make_nav_params(cm, cfg.goal, cfg.k);
  } catch (const Error& e) {
    throw CommandFailure{1, e.what()};
  }
  GridSpec spec;
  spec.nx = spec.ny = cfg.resolution;
  if (cfg.bounds) {
    const auto& b = *cfg.bounds;
    spec.x_min = b[0], spec.x_max = b[1], spec.y_min = b[2], spec.y_max = b[3];
  } else if (cfg.side == GridSide::workspace) {
    const auto [lo, hi] = cm.source.external.bounding_box();
    spec.x_min = lo.real(), spec.x_max = hi.real(), spec.y_min = lo.imag(), spec.y_max = hi.imag();
  }
  const auto grid = evaluate_grid(&cm, cache.sphere_world, nav, spec, cfg.side);

  const std::string side_name = cfg.side == GridSide::workspace ? "workspace" : "sphere";
  const auto path = (fs::path(cfg.out_dir) / ("grid_" + side_name + "." + cfg.grid_format)).string();
  try {
    fs::create_directories(cfg.out_dir);
    if (cfg.grid_format == "csv") {
      write_grid_csv(path, grid);
    } else {
      json g;
      g["columns"] = {"x", "y", "phi", "grad_norm"};
      g["nx"] = spec.nx;
      g["ny"] = spec.ny;
      auto& rows = g["rows"] = json::array();
      for (const auto& s : grid)
        rows.push_back({s.x, s.y, s.phi ? json(*s.phi) : json(nullptr), s.phi ? json(s.grad_norm) : json(nullptr)});
      std::ofstream f(path);
      if (!f) throw FormatError("cannot open " + path);
      f << g.dump() << '\n';
    }
  } catch (const std::exception& e) {
    throw CommandFailure{2, e.what()};
  }

  std::size_t valid = 0;
  for (const auto& s : grid) valid += s.phi.has_value();
  const auto argmin = grid_argmin(grid);
  const auto minima = grid_local_minima(grid, spec);
  json j{{"grid", path}, {"side", side_name}, {"nx", spec.nx}, {"ny", spec.ny}, {"valid_points", valid},
         {"local_minima", minima.size()}};
  if (argmin < grid.size()) {
    j["argmin"] = {grid[argmin].x, grid[argmin].y};
    j["min_phi"] = *grid[argmin].phi;
  }
  if (minima.size() > 1) j["warning"] = "more than one grid-local minimum; consider a larger k";
  out << j.dump(1) << '\n';
  return 0;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto cache = load_config_cache(cfg);
  const auto& cm = cache.map;
  const auto& sw = cache.sphere_world;
  NavParams nav;
  try {
    nav = make_nav_params(cm, cfg.goal, cfg.k);
  } catch (const Error& e) {
    throw CommandFailure{1, e.what()};
  }
  std::vector<double> lambdas = cfg.lambdas;
  if (lambdas.empty() || cfg.model == Model::kinematic) lambdas = {cfg.ctrl.lambda};

  json summary;
  summary["model"] = to_string(cfg.model);
  summary["runs"] = json::array();
  int converged = 0;
  try {
    fs::create_directories(cfg.out_dir);
  } catch (const std::exception& e) {
    throw CommandFailure{2, e.what()};
  }
  for (double lambda : lambdas) {
    ControlParams ctrl = cfg.ctrl;
    ctrl.lambda = lambda;
    const auto results = batch_simulate(cm, sw, nav, ctrl, cfg.model, cfg.starts);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      json entry;
      entry["start"] = point_json(r.start);
      if (cfg.model == Model::dynamic) entry["lambda"] = lambda;
      if (!r.trajectory) {
        entry["outcome"] = "error";
        entry["error"] = r.error;
        summary["runs"].push_back(std::move(entry));
        continue;
      }
      std::string name = "traj_" + std::string(to_string(cfg.model)) + "_" + std::to_string(i);
      if (cfg.model == Model::dynamic) {
        std::ostringstream ls;
        ls << lambda;
        name += "_lambda" + ls.str();
      }
      const auto path = (fs::path(cfg.out_dir) / (name + ".csv")).string();
      try {
        write_trajectory_csv(path, *r.trajectory);
      } catch (const std::exception& e) {
        throw CommandFailure{2, e.what()};
      }
      const auto s = trajectory_summary(*r.trajectory, nav, ctrl);
      entry["outcome"] = s["outcome"];
      entry["steps"] = s["steps"];
      entry["min_clearance"] = s["min_clearance"];
      entry["final_error"] = s["final_error"];
      entry["saddle_residual"] = s["saddle_residual"];
      entry["file"] = path;
      if (r.trajectory->outcome == Outcome::converged) ++converged;
      summary["runs"].push_back(std::move(entry));
    }
  }
  summary["converged"] = converged;
  const auto summary_path = (fs::path(cfg.out_dir) / "summary.json").string();
  {
    std::ofstream f(summary_path);
    if (!f) throw CommandFailure{2, "cannot open " + summary_path};
    f << summary.dump(1) << '\n';
  }
  out << summary.dump(1) << '\n';
  return converged > 0 ? 0 : 1;
}

/// Parse argv and run one command. Messages go to err, results to out.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conformal navigation transformation: build, evaluate and simulate"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  std::string goal_str = "0,0";
  std::vector<std::string> start_strs, point_strs;
  std::string model_str = "kinematic", side_str = "workspace";
  std::vector<double> bounds;

  app.add_option("--workspace", cfg.workspace_path, "workspace JSON file");
  app.add_option("--nodes", cfg.n_nodes, "nodes per curve (power of two; default from the file)");
  auto* tol_opt = app.add_option("--tol", cfg.koebe_tol, "iteration tolerance")->capture_default_str();
  app.add_option("--cache", cfg.cache_path, "cache file (default <out>/<workspace>.cache)");
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--preset", cfg.preset, "named parameter set")->check(CLI::IsMember({"paper-sec6"}));
  app.add_option("--max-iter", cfg.max_iter, "maximum iterations")->capture_default_str();
  auto* k_opt = app.add_option("--k", cfg.k, "navigation exponent")->capture_default_str();
  auto* goal_opt = app.add_option("--goal", goal_str, "goal x,y")->capture_default_str();
  auto* gain_opt = app.add_option("--gain", cfg.ctrl.gain_K, "gain K")->capture_default_str();
  auto* mass_opt = app.add_option("--mass", cfg.ctrl.mass_m, "mass m")->capture_default_str();
  auto* lambda_opt = app.add_option("--lambda", cfg.lambdas, "dissipation (repeatable for a sweep)");
  app.add_option("--dt", cfg.ctrl.step_dt, "integration step (0: automatic)")->capture_default_str();
  app.add_option("--max-steps", cfg.ctrl.max_steps, "step limit")->capture_default_str();
  app.add_option("--goal-tol", cfg.ctrl.goal_tol, "goal tolerance")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "check a workspace file");
  auto* map = app.add_subcommand("map", "build the transformation and write the cache");
  map->add_option("--dump-kernels", cfg.kernel_dump_dir, "write every stage's kernel matrices here");
  auto* eval = app.add_subcommand("eval", "evaluate T, J_T and phi at points");
  eval->add_option("--point", point_strs, "x,y (repeatable)");
  auto* grid = app.add_subcommand("grid", "export a navigation-function grid");
  grid->add_option("--side", side_str, "workspace or sphere")->check(CLI::IsMember({"workspace", "sphere"}));
  grid->add_option("--bounds", bounds, "xmin xmax ymin ymax")->expected(4);
  grid->add_option("--resolution", cfg.resolution, "lattice points per axis")->capture_default_str();
  grid->add_option("--format", cfg.grid_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* sim = app.add_subcommand("simulate", "run closed-loop simulations");
  sim->add_option("--model", model_str, "kinematic or dynamic")->check(CLI::IsMember({"kinematic", "dynamic"}));
  auto* start_opt = sim->add_option("--start", start_strs, "x,y (repeatable)");
  sim->add_flag("--allow-nonzero-v0", cfg.ctrl.allow_nonzero_v0, "unsafe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    cfg.goal = parse_point(goal_str);
    for (const auto& s : start_strs) cfg.starts.push_back(parse_point(s));
    for (const auto& s : point_strs) cfg.points.push_back(parse_point(s));
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  cfg.model = model_str == "dynamic" ? Model::dynamic : Model::kinematic;
  cfg.side = side_str == "sphere" ? GridSide::sphere_world : GridSide::workspace;
  if (!bounds.empty()) cfg.bounds = std::array<double, 4>{bounds[0], bounds[1], bounds[2], bounds[3]};
  if (cfg.lambdas.size() == 1) cfg.ctrl.lambda = cfg.lambdas[0];

  if (cfg.preset == "paper-sec6") {
    // explicit flags win over the preset
    if (tol_opt->count() == 0) cfg.koebe_tol = 1e-13;
    if (k_opt->count() == 0) cfg.k = 6;
    if (goal_opt->count() == 0) cfg.goal = {0.0, 0.0};
    if (gain_opt->count() == 0) cfg.ctrl.gain_K = 1.0;
    if (mass_opt->count() == 0) cfg.ctrl.mass_m = 1.0;
    if (lambda_opt->count() == 0) {
      cfg.ctrl.lambda = 3.2;
      if (cfg.model == Model::dynamic) cfg.lambdas = kPresetLambdas;
    }
    if (start_opt->count() == 0)
      cfg.starts = cfg.model == Model::dynamic ? kPresetDynamicStarts : kPresetKinematicStarts;
  }

  try {
    if (*validate) return cmd_validate(cfg, out);
    if (*map) return cmd_map(cfg, out);
    if (*eval) return cmd_eval(cfg, out);
    if (*grid) return cmd_grid(cfg, out);
    if (*sim) {
      if (cfg.starts.empty()) {
        err << "error: no start points (use --start x,y)\n";
        return 1;
      }
      return cmd_simulate(cfg, out);
    }
  } catch (const CommandFailure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace conav::cli
