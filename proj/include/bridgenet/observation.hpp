#ifndef BRIDGENET_OBSERVATION_HPP
#define BRIDGENET_OBSERVATION_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "bridgenet/bridge.hpp"
#include "bridgenet/graph.hpp"
#include "bridgenet/state_space.hpp"

namespace bridgenet {

/// Smallest emission standard deviation the model will carry. Keeps
/// zero-variance calibrations (full observation, frozen states) from
/// producing degenerate likelihoods downstream.
inline constexpr double k_sigma_min = 1e-4;

struct EdgeSampleConfig {
  double gamma = 0.5;  // sampling ratio in (0,1]
  std::uint64_t seed = 0;
};

enum class ConductanceMethod { exact, sweep };

/// Uniform sample of round(gamma * |E|) edges without replacement, on the
/// same vertex set. Throws EmptySampleError when the rounded count is 0.
WeightedGraph sample_edges(const WeightedGraph& g, double gamma, std::mt19937_64& rng);
WeightedGraph sample_edges(const WeightedGraph& g, const EdgeSampleConfig& cfg);

/// Conductance of the sampled subgraph (the raw statistic; the calibrated
/// observation is z = gamma * observed_conductance).
double observed_conductance(const WeightedGraph& sub, ConductanceMethod method);

struct NoiseParams {
  double mu = 0.0;
  double sigma = k_sigma_min;
  long long n_samples = 0;
};

enum class NoiseMode { per_state, pooled };

/// Gaussian residual model for the observation z given the true state:
/// z - value_i ~ N(mu_i, sigma_i^2). Fitted per state with a pooled
/// fallback for under-sampled states.
struct NoiseModel {
  NoiseMode mode = NoiseMode::per_state;
  std::vector<NoiseParams> per_state;
  NoiseParams pooled;
  double gamma = 1.0;

  const NoiseParams& params_for(int state_index) const;
};

struct StateCalibration {
  long long n_samples = 0;
  bool pooled_fallback = false;
  /// Residuals are (numerically) a point mass; a KS test against any
  /// positive-sigma Gaussian would read D = 0.5 no matter the fit, so no
  /// test is run and sigma sits at the floor.
  bool degenerate = false;
  bool ks_tested = false;
  double ks_statistic = 0.0;
  double p_value = 0.0;
  std::vector<double> residuals;  // sorted ascending
};

struct CalibrationReport {
  int n_runs = 0;
  std::vector<StateCalibration> states;
};

/// Monte Carlo noise calibration: simulate n_runs bridge trajectories over
/// the layout's graph, observe z = gamma * conductance(sampled subgraph) at
/// every step, bucket residuals z - value(state) by the true state, and fit
/// per-state Gaussians (pooled fallback under 30 samples). Run r uses seed
/// cfg.seed + r. Throws CalibrationFailedError if every state is
/// under-sampled.
std::pair<NoiseModel, CalibrationReport> calibrate_noise(const CommunityLayout& layout,
                                                         const BridgeProcess& bridge,
                                                         const EdgeSampleConfig& cfg, int n_runs,
                                                         ConductanceMethod method);

/// One-sample Kolmogorov-Smirnov test against N(mu, sigma^2); p-value from
/// the asymptotic Kolmogorov series. Needs >= 8 samples and sigma > 0.
std::pair<double, double> ks_test_gaussian(const std::vector<double>& samples, double mu,
                                           double sigma);

/// Gaussian density of the residual z - value(state_index) under the
/// state's calibrated parameters. Always strictly positive.
double emission_likelihood(double z, int state_index, const StateSpace& space,
                           const NoiseModel& noise);

void write_noise_model(const NoiseModel& model, const std::filesystem::path& path);
NoiseModel read_noise_model(const std::filesystem::path& path);

}  // namespace bridgenet

#endif
