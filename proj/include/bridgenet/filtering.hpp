#ifndef BRIDGENET_FILTERING_HPP
#define BRIDGENET_FILTERING_HPP

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <vector>

#include "bridgenet/bridge.hpp"
#include "bridgenet/observation.hpp"

namespace bridgenet {

/// Belief over state indices: nonnegative, sums to 1 within 1e-10.
struct Posterior {
  Eigen::VectorXd probs;
};

Posterior delta_posterior(int n_states, int index);

/// One Bayes step: predict through `transition`, reweight by `likelihoods`,
/// renormalize. Invariant under scaling all likelihoods by a constant.
/// Throws DegenerateLikelihoodError if the normalizer vanishes.
Posterior filter_update(const Posterior& prior, const Eigen::MatrixXd& transition,
                        const Eigen::VectorXd& likelihoods);

/// Bridge filter step t -> t+1: q_j(t+1) propto L_j(z) sum_i B_ij(t) q_i(t).
Posterior hmb_filter_step(const Posterior& prior, double z, int t, const BridgeProcess& bridge,
                          const StateSpace& space, const NoiseModel& noise);

/// Baseline step with the time-homogeneous base chain in place of B(t).
Posterior hmm_filter_step(const Posterior& prior, double z, const TransitionMatrix& p,
                          const StateSpace& space, const NoiseModel& noise);

enum class FilterKind { hmb, hmm };
enum class EstimateMode { mean, map };

/// Posterior sequence aligned with times first_time..first_time+len-1.
/// observations[k] is the measurement at that time (nullopt = gap,
/// prediction-only step); truth holds state indices when known.
struct FilterRun {
  std::vector<Posterior> posteriors;
  std::vector<std::optional<double>> observations;
  std::vector<int> truth;
};

/// Run a filter from a delta at the bridge's initial state. The HMM variant
/// uses the same initial knowledge and the bridge's base chain, so a paired
/// comparison isolates the dynamics model. The time-1 measurement is a
/// no-op on the delta prior and is not applied. observations.size() must
/// not exceed the bridge horizon.
FilterRun run_filter(const std::vector<std::optional<double>>& observations, FilterKind kind,
                     const BridgeProcess& bridge, const NoiseModel& noise);

/// mean: posterior expectation of the state value; map: value of the
/// highest-probability state, ties to the lower index.
double point_estimate(const Posterior& p, const StateSpace& space, EstimateMode mode);

/// Mean squared error of the per-step point estimates against the true
/// state values. Requires truth.
double mse(const FilterRun& run, const StateSpace& space, EstimateMode mode);

/// CSV: t, observation, truth, estimate_mean, estimate_map, q_0..q_{N-1}.
void write_filter_run_csv(const FilterRun& run, const StateSpace& space, int first_time,
                          std::ostream& out);

}  // namespace bridgenet

#endif
