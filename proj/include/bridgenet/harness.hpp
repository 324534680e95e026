#ifndef BRIDGENET_HARNESS_HPP
#define BRIDGENET_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgenet/filtering.hpp"
#include "bridgenet/observation.hpp"

namespace bridgenet {

/// One JSON document drives every command; unknown keys are rejected so a
/// typo cannot silently fall back to a default.
struct ExperimentConfig {
  int m_utilitarian = 10;
  int n_fans = 20;
  int T = 20;
  std::vector<int> n_states = {4, 6, 8, 10};
  double gamma = 0.5;
  double base = 0.25;
  int n_monte_carlo = 500;
  int n_calibration_runs = 500;
  std::uint64_t seed = 0;
  ConductanceMethod conductance_method = ConductanceMethod::sweep;
  NoiseMode noise_mode = NoiseMode::per_state;
  EstimateMode estimate_mode = EstimateMode::mean;
  int jobs = 1;
  std::string out_dir = "out";

  // data-driven commands
  std::string retweet_path;
  std::string seeds_path;
  std::string sequences_path;
  std::string params_path;
  int window_min = 1;
  int window_max = 30;
  int subsample_n = 1;

  // EM controls
  int em_max_iters = 50;
  double em_tol = 1e-7;
  bool em_toeplitz = false;
};

/// Reads and validates the config; throws std::invalid_argument on unknown
/// keys, unreadable files, or out-of-range values (usage errors).
ExperimentConfig load_config(const std::filesystem::path& path);

/// The config with every default materialized; written to each output
/// directory as resolved_config.json.
nlohmann::json resolved_config_json(const ExperimentConfig& cfg);

/// Deterministic seed derivation (splitmix64 mix of master seed and tag) so
/// commands and replications never share RNG streams by accident.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t tag);

/// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Runs fn(0..n-1) on up to `jobs` threads; rethrows the first worker
/// exception. Output ordering is the caller's job (index results slots).
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

void cmd_simulate(const ExperimentConfig& cfg);
void cmd_calibrate(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_fit(const ExperimentConfig& cfg);
void cmd_polarize(const ExperimentConfig& cfg);
void cmd_metrics_compare(const ExperimentConfig& cfg);

}  // namespace bridgenet

#endif
