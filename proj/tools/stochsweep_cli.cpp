#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stochsweep/config_file.hpp"
#include "stochsweep/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNotConverged = 4;

struct SourceOptions {
  std::string preset;
  std::string config_path;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  bool deterministic = false;
  std::string backend;
  std::string out;
  std::optional<unsigned> threads;
  bool timing = false;
};

void add_source_options(CLI::App* cmd, SourceOptions& o) {
  auto* preset = cmd->add_option("--preset", o.preset, "Built-in experiment")
                     ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
  auto* config = cmd->add_option("--config", o.config_path, "Experiment file (key = value)");
  preset->excludes(config);
  config->excludes(preset);
  cmd->add_option("--replicates", o.replicates, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", o.deterministic, "Force sigma1 = sigma2 = 0");
  cmd->add_option("--backend", o.backend, "Adjoint backend")
      ->check(CLI::IsMember({"pathwise", "regression"}));
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
}

stochsweep::ExperimentConfig build_config(const SourceOptions& o) {
  if (o.preset.empty() && o.config_path.empty()) {
    throw stochsweep::ValidationError("one of --preset or --config is required");
  }
  stochsweep::ExperimentConfig c =
      o.preset.empty() ? stochsweep::load_config(o.config_path) : stochsweep::preset(o.preset);
  if (o.replicates) c.sweep.replicates = *o.replicates;
  if (o.seed) c.seed = *o.seed;
  if (o.dt) stochsweep::set_time_step(c, *o.dt);
  if (o.deterministic) stochsweep::make_deterministic(c);
  if (o.backend == "pathwise") c.sweep.backend = stochsweep::AdjointBackend::pathwise;
  if (o.backend == "regression") c.sweep.backend = stochsweep::AdjointBackend::regression;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.threads) c.sweep.threads = *o.threads;
  c.validate();
  return c;
}

int run(const SourceOptions& o) {
  const stochsweep::ExperimentConfig config = build_config(o);
  stochsweep::RunOptions options;
  options.record_wall_clock = o.timing;
  const auto outcome = stochsweep::run_experiment(config, options);
  const auto& r = outcome.result;
  std::cout << "wrote " << config.output_dir.string() << "\n"
            << "iterations " << r.iterations_used << (r.converged ? " (converged)" : " (not converged)")
            << ", final change " << stochsweep::format_number(r.final_change) << "\n"
            << "cost " << stochsweep::format_number(r.cost.mean) << " +/- "
            << stochsweep::format_number(r.cost.standard_error) << "\n";
  if (r.hits) {
    std::cout << "hit fraction " << stochsweep::format_number(r.hits->hit_fraction()) << "\n";
  }
  if (r.hitting_time) {
    std::cout << "mean path reaches target at t = " << stochsweep::format_number(*r.hitting_time)
              << "\n";
  }
  return r.converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic forward-backward sweep for a predator-prey model with additional food"};
  app.set_version_flag("--version", std::string(stochsweep::library_version()));
  app.require_subcommand(1);

  SourceOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Solve an experiment and write CSV outputs");
  add_source_options(run_cmd, run_opts);
  run_cmd->add_flag("--timing", run_opts.timing, "Record wall-clock time in the manifest");

  SourceOptions show_opts;
  auto* show_cmd =
      app.add_subcommand("show-config", "Print the fully resolved experiment configuration");
  add_source_options(show_cmd, show_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*show_cmd) {
      std::cout << stochsweep::config_to_text(build_config(show_opts));
      return kExitOk;
    }
    return run(run_opts);
  } catch (const stochsweep::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const stochsweep::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
