#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bridgenet/errors.hpp"
#include "bridgenet/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitNumerical = 3;

struct CliOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string out_dir;
};

using Command = void (*)(const bridgenet::ExperimentConfig&);

int run(Command command, const CliOptions& opts) {
  bridgenet::ExperimentConfig cfg = bridgenet::load_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.jobs > 0) cfg.jobs = opts.jobs;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  command(cfg);
  return kExitOk;
}

void add_command(CLI::App& app, const std::string& name, const std::string& help,
                 Command command, CliOptions& opts, int& rc) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", opts.config_path, "JSON config file")->required();
  sub->add_option("--seed", opts.seed, "master RNG seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  sub->add_option("--jobs", opts.jobs, "worker threads (overrides config)");
  sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
  sub->callback([command, &opts, &rc] { rc = run(command, opts); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bridgenet: segregation dynamics as a hidden Markov bridge"};
  app.require_subcommand(1);

  CliOptions opts;
  int rc = kExitOk;
  add_command(app, "simulate", "sample bridge trajectories and their graph metrics",
              bridgenet::cmd_simulate, opts, rc);
  add_command(app, "calibrate", "fit the per-state observation noise model",
              bridgenet::cmd_calibrate, opts, rc);
  add_command(app, "evaluate", "paired bridge-vs-baseline filter comparison",
              bridgenet::cmd_evaluate, opts, rc);
  add_command(app, "fit", "EM parameter estimation from observation sequences",
              bridgenet::cmd_fit, opts, rc);
  add_command(app, "polarize", "retweet pipeline: series, fit, and filtered estimates",
              bridgenet::cmd_polarize, opts, rc);
  add_command(app, "metrics-compare", "conductance vs algebraic connectivity over trajectories",
              bridgenet::cmd_metrics_compare, opts, rc);

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bridgenet::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.line_numbers.empty()) {
      std::cerr << "offending lines:";
      for (int line : e.line_numbers) std::cerr << ' ' << line;
      std::cerr << "\n";
    }
    return kExitFormat;
  } catch (const bridgenet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const bridgenet::EmptySeriesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const bridgenet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
