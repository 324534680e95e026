#include "bridgenet/filtering.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bridgenet/errors.hpp"

namespace bridgenet {

Posterior delta_posterior(int n_states, int index) {
  if (index < 0 || index >= n_states) {
    throw std::invalid_argument("delta_posterior: index out of range");
  }
  Posterior p;
  p.probs = Eigen::VectorXd::Zero(n_states);
  p.probs(index) = 1.0;
  return p;
}

Posterior filter_update(const Posterior& prior, const Eigen::MatrixXd& transition,
                        const Eigen::VectorXd& likelihoods) {
  Eigen::VectorXd unnorm =
      (transition.transpose() * prior.probs).cwiseProduct(likelihoods);
  const double norm = unnorm.sum();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateLikelihoodError("filter_update: normalizer vanished");
  }
  Posterior post;
  post.probs = unnorm / norm;
  return post;
}

namespace {

Eigen::VectorXd likelihood_vector(double z, const StateSpace& space, const NoiseModel& noise) {
  Eigen::VectorXd l(space.size());
  for (int j = 0; j < space.size(); ++j) {
    l(j) = emission_likelihood(z, j, space, noise);
  }
  return l;
}

}  // namespace

Posterior hmb_filter_step(const Posterior& prior, double z, int t, const BridgeProcess& bridge,
                          const StateSpace& space, const NoiseModel& noise) {
  const BridgeTransition b = bridge_transition(bridge, t);
  return filter_update(prior, b.probs, likelihood_vector(z, space, noise));
}

Posterior hmm_filter_step(const Posterior& prior, double z, const TransitionMatrix& p,
                          const StateSpace& space, const NoiseModel& noise) {
  return filter_update(prior, p.matrix(), likelihood_vector(z, space, noise));
}

FilterRun run_filter(const std::vector<std::optional<double>>& observations, FilterKind kind,
                     const BridgeProcess& bridge, const NoiseModel& noise) {
  const StateSpace& space = bridge.space();
  const int horizon_len = bridge.horizon() - bridge.first_time() + 1;
  if (observations.empty()) {
    throw std::invalid_argument("run_filter: empty observation sequence");
  }
  if (static_cast<int>(observations.size()) > horizon_len) {
    throw std::invalid_argument("run_filter: more observations than the bridge horizon");
  }
  FilterRun run;
  run.observations = observations;
  run.posteriors.push_back(delta_posterior(space.size(), bridge.initial_index()));

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.size());
  for (std::size_t k = 1; k < observations.size(); ++k) {
    const int t = bridge.first_time() + static_cast<int>(k) - 1;  // step t -> t+1
    const Eigen::VectorXd likelihoods =
        observations[k] ? likelihood_vector(*observations[k], space, noise) : ones;
    const Posterior& prev = run.posteriors.back();
    if (kind == FilterKind::hmb) {
      run.posteriors.push_back(
          filter_update(prev, bridge_transition(bridge, t).probs, likelihoods));
    } else {
      run.posteriors.push_back(filter_update(prev, bridge.base().matrix(), likelihoods));
    }
  }
  return run;
}

double point_estimate(const Posterior& p, const StateSpace& space, EstimateMode mode) {
  if (mode == EstimateMode::mean) {
    double mean = 0.0;
    for (int j = 0; j < space.size(); ++j) mean += p.probs(j) * space.value(j);
    return mean;
  }
  int best = 0;
  for (int j = 1; j < space.size(); ++j) {
    if (p.probs(j) > p.probs(best)) best = j;  // ties keep the lower index
  }
  return space.value(best);
}

double mse(const FilterRun& run, const StateSpace& space, EstimateMode mode) {
  if (run.truth.size() != run.posteriors.size()) {
    throw std::invalid_argument("mse: truth missing or misaligned");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < run.posteriors.size(); ++k) {
    const double err = point_estimate(run.posteriors[k], space, mode) -
                       space.value(run.truth[k]);
    sum += err * err;
  }
  return sum / static_cast<double>(run.posteriors.size());
}

namespace {

void append_double(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

void write_filter_run_csv(const FilterRun& run, const StateSpace& space, int first_time,
                          std::ostream& out) {
  out << "t,observation,truth,estimate_mean,estimate_map";
  for (int j = 0; j < space.size(); ++j) out << ",q_" << j;
  out << "\n";
  for (std::size_t k = 0; k < run.posteriors.size(); ++k) {
    std::string line = std::to_string(first_time + static_cast<int>(k));
    line += ',';
    if (k < run.observations.size() && run.observations[k]) {
      append_double(line, *run.observations[k]);
    }
    line += ',';
    if (k < run.truth.size()) append_double(line, space.value(run.truth[k]));
    line += ',';
    append_double(line, point_estimate(run.posteriors[k], space, EstimateMode::mean));
    line += ',';
    append_double(line, point_estimate(run.posteriors[k], space, EstimateMode::map));
    for (int j = 0; j < space.size(); ++j) {
      line += ',';
      append_double(line, run.posteriors[k].probs(j));
    }
    out << line << "\n";
  }
}

}  // namespace bridgenet
