#include "stochsweep/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochsweep/config_file.hpp"

#ifndef STOCHSWEEP_VERSION
#define STOCHSWEEP_VERSION "0.0.0"
#endif

namespace stochsweep {

const char* library_version() { return STOCHSWEEP_VERSION; }

namespace {

constexpr double kPresetDt = 0.01;
constexpr double kMaxExactInteger = 9007199254740992.0;  // 2^53

TimeGrid grid_with_step(double t0, double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("grid: dt must be > 0");
  if (!(t_final > t0)) throw ValidationError("grid: t_final must exceed t0");
  const double steps = std::round((t_final - t0) / dt);
  if (steps < 1.0) throw ValidationError("grid: dt exceeds the horizon");
  return make_grid(t0, t_final, static_cast<std::size_t>(steps));
}

ExperimentConfig fig_prey_predator_base() {
  ExperimentConfig c;
  c.params = ModelParams{1.0, 7.0, 0.4, 0.37, 0.1, 0.02, 0.02};
  c.initial_state = {5.0, 1.0};
  c.box = AdmissibleBox{10.0, 10.0};
  c.sweep.replicates = 500;
  c.sweep.max_iterations = 100;
  c.sweep.control_tolerance = 1e-4;
  c.sweep.relaxation = 0.5;
  c.seed = 20240607;
  return c;
}

std::size_t to_count(const KeyValueFile& f, const std::string& key, double min_value) {
  const double v = f.number(key);
  if (!(v >= min_value) || v != std::floor(v) || v > kMaxExactInteger) {
    throw ValidationError("config: key '" + key + "' must be an integer >= " +
                          format_number(min_value));
  }
  return static_cast<std::size_t>(v);
}

ProblemTag parse_problem(const std::string& s) {
  if (s == "lq_quality") return ProblemTag::lq_quality;
  if (s == "lq_quantity") return ProblemTag::lq_quantity;
  if (s == "time_optimal") return ProblemTag::time_optimal;
  throw ValidationError("config: problem.kind must be lq_quality, lq_quantity or time_optimal");
}

AdjointBackend parse_backend(const std::string& s) {
  if (s == "pathwise") return AdjointBackend::pathwise;
  if (s == "regression") return AdjointBackend::regression;
  throw ValidationError("config: sweep.backend must be pathwise or regression");
}

CostateMode parse_costate_mode(const std::string& s) {
  if (s == "terminal_condition") return CostateMode::terminal_condition;
  if (s == "initial_shooting") return CostateMode::initial_shooting;
  throw ValidationError("config: sweep.costate_mode must be terminal_condition or initial_shooting");
}

ControlAggregation parse_aggregation(const std::string& s) {
  if (s == "ensemble_mean") return ControlAggregation::ensemble_mean;
  if (s == "per_path_average") return ControlAggregation::per_path_average;
  throw ValidationError("config: sweep.aggregation must be ensemble_mean or per_path_average");
}

PositivityMode parse_positivity(const std::string& s) {
  if (s == "clamp_at_floor") return PositivityMode::clamp_at_floor;
  if (s == "reject") return PositivityMode::reject;
  throw ValidationError("config: sweep.positivity must be clamp_at_floor or reject");
}

const char* to_string(PositivityMode m) {
  return m == PositivityMode::clamp_at_floor ? "clamp_at_floor" : "reject";
}

// Sections the manifest appends after the config echo.
bool is_manifest_only(const std::string& key) {
  return key.rfind("run.", 0) == 0 || key.rfind("convergence.", 0) == 0 ||
         key.rfind("units.", 0) == 0;
}

std::string pair_text(double a, double b) {
  return "[" + format_number(a) + ", " + format_number(b) + "]";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  kind.validate();
  box.validate();
  sweep.validate();
  validate_state(initial_state);
  if (grid.n_steps == 0 || !(grid.t_final > grid.t0)) {
    throw ValidationError("experiment: grid needs t_final > t0 and at least one step");
  }
  if (!(controls.alpha >= 0.0) || !(controls.xi >= 0.0) || !std::isfinite(controls.alpha) ||
      !std::isfinite(controls.xi)) {
    throw ValidationError("experiment: controls must be finite and >= 0");
  }
  if (target) {
    validate_state(*target);
    if (!(target_radius > 0.0) || !std::isfinite(target_radius)) {
      throw ValidationError("experiment: target radius must be > 0");
    }
  }
  if (kind.tag == ProblemTag::time_optimal) {
    if (!target) throw ValidationError("experiment: time_optimal needs a target state");
    if (sweep.costate_mode != CostateMode::initial_shooting) {
      throw ValidationError("experiment: time_optimal needs costate_mode = initial_shooting");
    }
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4"};
  return names;
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c = fig_prey_predator_base();
  c.name = std::string(name);
  if (name == "fig1") {
    c.kind = ProblemKind::lq_quality(CostWeights{1.0, 1.0, 1.0}, 0.1);
    c.controls = {2.0, 0.1};
    c.grid = grid_with_step(0.0, 87.0, kPresetDt);
    c.target = State{7.0, 0.25};
    c.target_radius = 0.5;
  } else if (name == "fig2") {
    c.kind = ProblemKind::lq_quantity(CostWeights{1.0, 1.0, 1.0}, 2.0);
    c.controls = {2.0, 0.1};
    c.grid = grid_with_step(0.0, 84.0, kPresetDt);
    c.target = State{7.0, 0.25};
    c.target_radius = 0.5;
  } else if (name == "fig3") {
    c.kind = ProblemKind::time_optimal();
    c.controls = {2.0, 0.5};
    c.grid = grid_with_step(0.0, 100.0, kPresetDt);
    c.target = State{6.75, 0.3};
    c.target_radius = 0.3;
    c.sweep.costate_mode = CostateMode::initial_shooting;
    c.sweep.costate_boundary = Vec2(0.0, 0.0);
  } else if (name == "fig4") {
    c.kind = ProblemKind::time_optimal();
    c.params = ModelParams{0.7, 5.0, 1.2, 0.19, 0.05, 0.02, 0.02};
    c.initial_state = {4.5, 5.0};
    c.controls = {1.4, 1.4};
    c.grid = grid_with_step(0.0, 100.0, kPresetDt);
    c.target = State{0.26, 7.41};
    c.target_radius = 0.5;
    c.sweep.costate_mode = CostateMode::initial_shooting;
    c.sweep.costate_boundary = Vec2(9.0, -6.0);
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected fig1..fig4)");
  }
  c.kind.fixed_control = c.kind.tag == ProblemTag::lq_quality    ? c.controls.xi
                         : c.kind.tag == ProblemTag::lq_quantity ? c.controls.alpha
                                                                 : 0.0;
  c.sweep.initial_guess = c.controls;
  c.validate();
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  const KeyValueFile f = KeyValueFile::parse(text);
  ExperimentConfig c;
  if (f.contains("preset")) {
    c = preset(f.string("preset"));
  } else {
    c = fig_prey_predator_base();
    c.name = "custom";
    c.grid = grid_with_step(0.0, 87.0, kPresetDt);
  }
  const auto num = [&](const std::string& key, double& field) {
    if (f.contains(key)) field = f.number(key);
  };
  const auto str = [&](const std::string& key) -> std::optional<std::string> {
    if (f.contains(key)) return f.string(key);
    return std::nullopt;
  };

  if (auto s = str("name")) c.name = *s;
  if (f.contains("seed")) c.seed = to_count(f, "seed", 0.0);
  if (auto s = str("output_dir")) c.output_dir = *s;

  if (auto s = str("problem.kind")) c.kind.tag = parse_problem(*s);
  num("problem.A1", c.kind.weights.A1);
  num("problem.A2", c.kind.weights.A2);
  num("problem.A3", c.kind.weights.A3);

  num("model.r", c.params.r);
  num("model.gamma", c.params.gamma);
  num("model.g", c.params.g);
  num("model.m", c.params.m);
  num("model.delta", c.params.delta);
  num("model.sigma1", c.params.sigma1);
  num("model.sigma2", c.params.sigma2);

  num("controls.alpha", c.controls.alpha);
  num("controls.xi", c.controls.xi);
  num("controls.alpha_max", c.box.alpha_max);
  num("controls.xi_max", c.box.xi_max);

  double t0 = c.grid.t0;
  double t_final = c.grid.t_final;
  num("grid.t0", t0);
  num("grid.t_final", t_final);
  if (f.contains("grid.n_steps") && f.contains("grid.dt")) {
    throw ValidationError("config: give either grid.n_steps or grid.dt, not both");
  }
  if (!(t_final > t0)) throw ValidationError("grid: t_final must exceed t0");
  if (f.contains("grid.n_steps")) {
    c.grid = make_grid(t0, t_final, to_count(f, "grid.n_steps", 1.0));
  } else if (f.contains("grid.dt")) {
    c.grid = grid_with_step(t0, t_final, f.number("grid.dt"));
  } else if (t0 != c.grid.t0 || t_final != c.grid.t_final) {
    c.grid = grid_with_step(t0, t_final, c.grid.dt);
  }

  num("state.x0", c.initial_state.x);
  num("state.y0", c.initial_state.y);
  if (f.contains("target.state")) {
    const auto t = f.array("target.state", 2);
    c.target = State{t[0], t[1]};
  }
  num("target.radius", c.target_radius);

  if (f.contains("sweep.replicates")) c.sweep.replicates = to_count(f, "sweep.replicates", 1.0);
  if (f.contains("sweep.max_iterations")) {
    c.sweep.max_iterations = to_count(f, "sweep.max_iterations", 1.0);
  }
  num("sweep.tolerance", c.sweep.control_tolerance);
  num("sweep.relaxation", c.sweep.relaxation);
  if (auto s = str("sweep.backend")) c.sweep.backend = parse_backend(*s);
  if (auto s = str("sweep.costate_mode")) c.sweep.costate_mode = parse_costate_mode(*s);
  if (f.contains("sweep.costate")) {
    const auto p = f.array("sweep.costate", 2);
    c.sweep.costate_boundary = Vec2(p[0], p[1]);
  }
  if (f.contains("sweep.basis_degree")) {
    c.sweep.basis_degree = static_cast<int>(to_count(f, "sweep.basis_degree", 0.0));
  }
  if (auto s = str("sweep.aggregation")) c.sweep.aggregation = parse_aggregation(*s);
  if (auto s = str("sweep.positivity")) c.sweep.positivity.mode = parse_positivity(*s);
  num("sweep.floor", c.sweep.positivity.floor);
  if (f.contains("sweep.threads")) {
    c.sweep.threads = static_cast<unsigned>(to_count(f, "sweep.threads", 0.0));
  }

  std::vector<std::string> unknown;
  for (const std::string& key : f.unused_keys()) {
    const std::size_t space = key.find(' ');
    const std::string bare = key.substr(0, space);
    if (!is_manifest_only(bare)) unknown.push_back("'" + bare + "'" + key.substr(space));
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown key";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }

  c.kind.fixed_control = c.kind.tag == ProblemTag::lq_quality    ? c.controls.xi
                         : c.kind.tag == ProblemTag::lq_quantity ? c.controls.alpha
                                                                 : 0.0;
  c.sweep.initial_guess = c.controls;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "name = \"" << c.name << "\"\n";
  o << "seed = " << c.seed << "\n\n";
  o << "[problem]\n";
  o << "kind = \"" << to_string(c.kind.tag) << "\"\n";
  o << "A1 = " << format_number(c.kind.weights.A1) << "\n";
  o << "A2 = " << format_number(c.kind.weights.A2) << "\n";
  o << "A3 = " << format_number(c.kind.weights.A3) << "\n\n";
  o << "[model]\n";
  o << "r = " << format_number(c.params.r) << "\n";
  o << "gamma = " << format_number(c.params.gamma) << "\n";
  o << "g = " << format_number(c.params.g) << "\n";
  o << "m = " << format_number(c.params.m) << "\n";
  o << "delta = " << format_number(c.params.delta) << "\n";
  o << "sigma1 = " << format_number(c.params.sigma1) << "\n";
  o << "sigma2 = " << format_number(c.params.sigma2) << "\n\n";
  o << "[controls]\n";
  o << "alpha = " << format_number(c.controls.alpha) << "\n";
  o << "xi = " << format_number(c.controls.xi) << "\n";
  o << "alpha_max = " << format_number(c.box.alpha_max) << "\n";
  o << "xi_max = " << format_number(c.box.xi_max) << "\n\n";
  o << "[grid]\n";
  o << "t0 = " << format_number(c.grid.t0) << "\n";
  o << "t_final = " << format_number(c.grid.t_final) << "\n";
  o << "n_steps = " << c.grid.n_steps << "\n\n";
  o << "[state]\n";
  o << "x0 = " << format_number(c.initial_state.x) << "\n";
  o << "y0 = " << format_number(c.initial_state.y) << "\n\n";
  if (c.target) {
    o << "[target]\n";
    o << "state = " << pair_text(c.target->x, c.target->y) << "\n";
    o << "radius = " << format_number(c.target_radius) << "\n\n";
  }
  o << "[sweep]\n";
  o << "replicates = " << c.sweep.replicates << "\n";
  o << "max_iterations = " << c.sweep.max_iterations << "\n";
  o << "tolerance = " << format_number(c.sweep.control_tolerance) << "\n";
  o << "relaxation = " << format_number(c.sweep.relaxation) << "\n";
  o << "backend = \"" << to_string(c.sweep.backend) << "\"\n";
  o << "costate_mode = \"" << to_string(c.sweep.costate_mode) << "\"\n";
  o << "costate = " << pair_text(c.sweep.costate_boundary[0], c.sweep.costate_boundary[1])
    << "\n";
  o << "basis_degree = " << c.sweep.basis_degree << "\n";
  o << "aggregation = \"" << to_string(c.sweep.aggregation) << "\"\n";
  o << "positivity = \"" << to_string(c.sweep.positivity.mode) << "\"\n";
  o << "floor = " << format_number(c.sweep.positivity.floor) << "\n";
  return o.str();
}

void set_time_step(ExperimentConfig& config, double dt) {
  config.grid = grid_with_step(config.grid.t0, config.grid.t_final, dt);
}

void make_deterministic(ExperimentConfig& config) { config.params = config.params.deterministic(); }

std::string RunManifest::to_text() const {
  std::ostringstream o;
  o << config_echo << "\n";
  o << "[run]\n";
  o << "version = \"" << version << "\"\n";
  if (wall_clock_seconds) o << "wall_clock_seconds = " << format_number(*wall_clock_seconds) << "\n";
  o << "converged = " << (converged ? "true" : "false") << "\n";
  o << "iterations = " << iterations << "\n";
  o << "final_change = " << format_number(final_change) << "\n";
  o << "cost_mean = " << format_number(cost.mean) << "\n";
  o << "cost_se = " << format_number(cost.standard_error) << "\n";
  o << "cost_unhit = " << cost.unhit << "\n";
  o << "clamp_fraction = " << format_number(clamp_fraction) << "\n";
  if (hit_fraction) o << "hit_fraction = " << format_number(*hit_fraction) << "\n";
  if (mean_path_hitting_time) {
    o << "mean_path_hitting_time = " << format_number(*mean_path_hitting_time) << "\n";
  }
  o << "regression_fallbacks = " << regression_fallbacks << "\n\n";

  const auto list = [&](const char* key, auto&& field) {
    o << key << " = [";
    for (std::size_t i = 0; i < convergence.size(); ++i) {
      if (i) o << ", ";
      o << field(convergence[i]);
    }
    o << "]\n";
  };
  o << "[convergence]\n";
  list("iteration", [](const IterationRecord& r) { return std::to_string(r.iteration); });
  list("control_change", [](const IterationRecord& r) { return format_number(r.control_change); });
  list("cost_mean", [](const IterationRecord& r) { return format_number(r.cost.mean); });
  list("cost_se", [](const IterationRecord& r) { return format_number(r.cost.standard_error); });
  o << "\n[units]\n";
  o << "time = \"dimensionless\"\n";
  o << "density = \"dimensionless\"\n";
  o << "costate = \"dimensionless\"\n";
  o << "controls = \"dimensionless\"\n";
  return o.str();
}

ExperimentOutcome solve_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutcome out;
  if (config.kind.tag == ProblemTag::time_optimal) {
    out.result = run_time_optimal(config.initial_state, *config.target, config.target_radius,
                                  config.params, config.grid, config.box, config.sweep, config.seed,
                                  config.sweep.costate_boundary);
  } else {
    std::optional<StopRule> report;
    if (config.target) report = StopRule{*config.target, config.target_radius};
    out.result = run_sweep(config.initial_state, config.kind, config.params, config.grid,
                           config.box, config.sweep, config.seed, report);
  }
  const auto stop = std::chrono::steady_clock::now();

  RunManifest& m = out.manifest;
  m.config_echo = config_to_text(config);
  m.version = library_version();
  if (options.record_wall_clock) {
    m.wall_clock_seconds = std::chrono::duration<double>(stop - start).count();
  }
  m.convergence = out.result.history;
  m.clamp_fraction = out.result.clamp_fraction;
  if (out.result.hits) m.hit_fraction = out.result.hits->hit_fraction();
  m.converged = out.result.converged;
  m.iterations = out.result.iterations_used;
  m.final_change = out.result.final_change;
  m.cost = out.result.cost;
  m.mean_path_hitting_time = out.result.hitting_time;
  m.regression_fallbacks = out.result.regression_fallbacks;
  return out;
}

void write_outputs(const ExperimentOutcome& outcome, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SweepResult& r = outcome.result;
  const std::size_t nodes = r.grid.n_nodes();

  std::ostringstream traj;
  traj << "t,x_mean,x_se,y_mean,y_se,p1_mean,p2_mean,alpha,xi\n";
  for (std::size_t i = 0; i < nodes; ++i) {
    const Controls& u = r.control_path[std::min(i, r.control_path.size() - 1)];
    traj << format_number(r.grid.time(i)) << ',' << format_number(r.x.mean[i]) << ','
         << format_number(r.x.se[i]) << ',' << format_number(r.y.mean[i]) << ','
         << format_number(r.y.se[i]) << ',' << format_number(r.p1.mean[i]) << ','
         << format_number(r.p2.mean[i]) << ',' << format_number(u.alpha) << ','
         << format_number(u.xi) << '\n';
  }
  write_file(dir / "trajectories.csv", traj.str());

  std::ostringstream phase;
  phase << "x_mean,y_mean\n";
  for (std::size_t i = 0; i < nodes; ++i) {
    phase << format_number(r.x.mean[i]) << ',' << format_number(r.y.mean[i]) << '\n';
  }
  write_file(dir / "phase.csv", phase.str());

  std::ostringstream conv;
  conv << "iteration,control_change,cost_mean,cost_se\n";
  for (const IterationRecord& rec : r.history) {
    conv << rec.iteration << ',' << format_number(rec.control_change) << ','
         << format_number(rec.cost.mean) << ',' << format_number(rec.cost.standard_error) << '\n';
  }
  write_file(dir / "convergence.csv", conv.str());

  write_file(dir / "manifest.toml", outcome.manifest.to_text());
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentOutcome out = solve_experiment(config, options);
  write_outputs(out, config.output_dir);
  return out;
}

}  // namespace stochsweep
