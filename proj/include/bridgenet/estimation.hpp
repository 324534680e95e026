#ifndef BRIDGENET_ESTIMATION_HPP
#define BRIDGENET_ESTIMATION_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "bridgenet/bridge.hpp"
#include "bridgenet/state_space.hpp"
#include "bridgenet/transition.hpp"

namespace bridgenet {

using ObsSeq = std::vector<std::optional<double>>;

/// Everything the EM estimates plus the fixed pin schedule. The emission is
/// the zero-mean Gaussian y_t = value(x_t) + N(0, sigma^2); gaps (nullopt)
/// contribute no emission term.
struct HmbParameters {
  TransitionMatrix P;
  double sigma = 0.1;
  StateSpace space;
  std::vector<BridgeSegment> segments;
  int initial_index = 0;

  BridgeProcess to_bridge() const;
};

struct ForwardResult {
  /// Row t: scaled filtering distribution at time first_time+t (sums to 1).
  Eigen::MatrixXd alpha;
  /// log of the per-step scaling divisor; their sum is the log-likelihood.
  std::vector<double> log_scale;
  double log_likelihood = 0.0;
};

ForwardResult forward(const HmbParameters& theta, const ObsSeq& y);
ForwardResult forward(const BridgeProcess& bridge, double sigma, const ObsSeq& y);

/// Scaled backward variables, consistent with forward up to a per-time
/// constant (rows are max-normalized to dodge overflow on long horizons;
/// the constants cancel in the smoothed quantities).
Eigen::MatrixXd backward(const BridgeProcess& bridge, double sigma, const ObsSeq& y,
                         const ForwardResult& fwd);

struct SmoothedStats {
  /// gamma(t, a) = P(x_t = a | Y); rows sum to 1.
  Eigen::MatrixXd gamma;
  /// xi[t](a, b) = P(x_t = a, x_{t+1} = b | Y); entries sum to 1.
  std::vector<Eigen::MatrixXd> xi;
  double log_likelihood = 0.0;
};

SmoothedStats smooth(const HmbParameters& theta, const ObsSeq& y);
SmoothedStats smooth(const BridgeProcess& bridge, double sigma, const ObsSeq& y);

/// Expected complete-data log-likelihood of theta under stats computed at
/// the current parameters. Returns -infinity when theta's bridge assigns
/// zero probability to a transition the stats require.
double q_function(const HmbParameters& theta, const SmoothedStats& stats, const ObsSeq& y);

struct EmConfig {
  int max_iters = 50;
  double tol = 1e-7;  // stop when the likelihood gain drops below this
  /// Constrain P to the one-parameter Toeplitz family instead of the free
  /// row-stochastic matrix.
  bool toeplitz = false;
  int ascent_steps = 3;  // inner gradient-ascent steps per M-step
};

struct EmResult {
  HmbParameters params;
  /// Accepted total log-likelihood after each iteration; entry 0 is the
  /// starting point. Nondecreasing by construction.
  std::vector<double> likelihood_trace;
};

/// Generalized EM: exact sigma update, projected gradient ascent on the
/// bridge term of Q for P, candidate accepted only if the total data
/// log-likelihood does not decrease. All sequences must share length and
/// the pin schedule of init.
EmResult em_fit(const std::vector<ObsSeq>& sequences, const HmbParameters& init,
                const EmConfig& cfg);

/// JSON round-trip: {"n_states","values","P","sigma","pins":[{"time","state_index"}]}.
/// The first pin is the initial condition; later pins end the segments.
void write_params(const HmbParameters& params, const std::filesystem::path& path);
HmbParameters read_params(const std::filesystem::path& path);

}  // namespace bridgenet

#endif
