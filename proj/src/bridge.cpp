#include "bridgenet/bridge.hpp"

#include <stdexcept>
#include <string>

#include "bridgenet/errors.hpp"

namespace bridgenet {

BridgeProcess::BridgeProcess(TransitionMatrix base, StateSpace space,
                             std::vector<BridgeSegment> segments, int initial_index)
    : base_(std::move(base)),
      space_(std::move(space)),
      segments_(std::move(segments)),
      initial_index_(initial_index) {
  if (base_.size() != space_.size()) {
    throw std::invalid_argument("BridgeProcess: base matrix and state space sizes differ");
  }
  if (segments_.empty()) {
    throw std::invalid_argument("BridgeProcess: needs at least one segment");
  }
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& s = segments_[k];
    if (s.start_time >= s.end_time) {
      throw std::invalid_argument("BridgeSegment: start_time must precede end_time");
    }
    if (s.pin_index < 0 || s.pin_index >= space_.size()) {
      throw std::invalid_argument("BridgeSegment: pin_index out of range");
    }
    if (k > 0 && segments_[k - 1].end_time != s.start_time) {
      throw std::invalid_argument("BridgeProcess: segments must be contiguous");
    }
  }
  if (initial_index_ < 0 || initial_index_ >= space_.size()) {
    throw std::invalid_argument("BridgeProcess: initial_index out of range");
  }
  const int max_span = horizon() - first_time();
  powers_ = std::make_shared<const PowerTable>(base_, max_span);
}

BridgeProcess BridgeProcess::standard(TransitionMatrix base, StateSpace space, int T) {
  if (T < 2) {
    throw std::invalid_argument("BridgeProcess::standard: T must be >= 2");
  }
  const int idx_zero = space.index_of_value(0.0);
  const int idx_one = space.index_of_value(1.0);
  std::vector<BridgeSegment> segments{
      {1, T, idx_zero},
      {T, 2 * T - 1, idx_one},
  };
  return BridgeProcess(std::move(base), std::move(space), std::move(segments), idx_one);
}

const BridgeSegment& BridgeProcess::segment_for_transition(int t) const {
  if (t < first_time() || t > horizon() - 1) {
    throw std::out_of_range("bridge transition time " + std::to_string(t) +
                            " outside [" + std::to_string(first_time()) + ", " +
                            std::to_string(horizon() - 1) + "]");
  }
  for (const auto& s : segments_) {
    if (t >= s.start_time && t <= s.end_time - 1) return s;
  }
  throw std::out_of_range("bridge transition time not covered by any segment");
}

BridgeTransition bridge_transition(const BridgeProcess& bridge, int t) {
  const auto& seg = bridge.segment_for_transition(t);
  const int n = bridge.base().size();
  const int c = seg.pin_index;
  const int h = seg.end_time;
  // B_{a,b}(t) = P_{a,b} (P^{h-t-1})_{b,c} / (P^{h-t})_{a,c}: Bayes' rule for
  // the chain conditioned to sit in c at time h.
  const Eigen::MatrixXd& reach_next = bridge.powers().power(h - t - 1);
  const Eigen::MatrixXd& reach_now = bridge.powers().power(h - t);

  BridgeTransition out;
  out.probs = Eigen::MatrixXd::Zero(n, n);
  out.reachable.assign(static_cast<std::size_t>(n), true);
  for (int a = 0; a < n; ++a) {
    const double denom = reach_now(a, c);
    if (denom <= 0.0) {
      out.reachable[static_cast<std::size_t>(a)] = false;
      continue;
    }
    for (int b = 0; b < n; ++b) {
      out.probs(a, b) = bridge.base()(a, b) * reach_next(b, c) / denom;
    }
  }
  return out;
}

Trajectory sample_trajectory(const BridgeProcess& bridge, std::mt19937_64& rng) {
  const int first = bridge.first_time();
  const int last = bridge.horizon();
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(last - first + 1));
  traj.states.push_back(bridge.initial_index());

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = first; t < last; ++t) {
    const BridgeTransition bt = bridge_transition(bridge, t);
    const int a = traj.states.back();
    if (!bt.reachable[static_cast<std::size_t>(a)]) {
      throw UnreachablePinError("sample_trajectory: state " + std::to_string(a) +
                                " cannot reach the pin from time " + std::to_string(t));
    }
    const double u = unif(rng);
    double cum = 0.0;
    int next = bridge.base().size() - 1;
    for (int b = 0; b < bridge.base().size(); ++b) {
      cum += bt.probs(a, b);
      if (u <= cum) {
        next = b;
        break;
      }
    }
    traj.states.push_back(next);
  }
  return traj;
}

Trajectory sample_trajectory(const BridgeProcess& bridge, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_trajectory(bridge, rng);
}

std::vector<Eigen::VectorXd> exact_marginals(const BridgeProcess& bridge) {
  const int n = bridge.base().size();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(bridge.initial_index()) = 1.0;
  std::vector<Eigen::VectorXd> marginals{p};
  for (int t = bridge.first_time(); t < bridge.horizon(); ++t) {
    const BridgeTransition bt = bridge_transition(bridge, t);
    for (int a = 0; a < n; ++a) {
      if (p(a) > 0.0 && !bt.reachable[static_cast<std::size_t>(a)]) {
        throw UnreachablePinError("exact_marginals: mass on a state that cannot reach the pin");
      }
    }
    p = bt.probs.transpose() * p;
    p /= p.sum();  // round-off hygiene; valid rows each sum to 1
    marginals.push_back(p);
  }
  return marginals;
}

}  // namespace bridgenet
