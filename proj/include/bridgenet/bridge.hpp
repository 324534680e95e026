#ifndef BRIDGENET_BRIDGE_HPP
#define BRIDGENET_BRIDGE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "bridgenet/state_space.hpp"
#include "bridgenet/transition.hpp"

namespace bridgenet {

/// One pinned stretch of the bridge: the chain is conditioned to sit in
/// state pin_index at end_time. start_time is where the segment's dynamics
/// begin (the state there is fixed by the previous segment or the initial
/// condition).
struct BridgeSegment {
  int start_time = 0;
  int end_time = 0;
  int pin_index = 0;
};

/// A finite-state Markov chain conditioned on deterministic pins: piecewise,
/// each segment is a Markov bridge whose transitions come from Bayes' rule
/// over the base chain. Times are 1-based; transition t governs the step
/// t -> t+1. Immutable after construction; matrix powers of the base chain
/// are precomputed up to the horizon and shared read-only.
class BridgeProcess {
 public:
  BridgeProcess(TransitionMatrix base, StateSpace space,
                std::vector<BridgeSegment> segments, int initial_index);

  /// The canonical two-segment schedule over times 1..2T-1: start pinned
  /// at value 1, middle pin at value 0 (time T), final pin back at value 1.
  static BridgeProcess standard(TransitionMatrix base, StateSpace space, int T);

  const TransitionMatrix& base() const { return base_; }
  const StateSpace& space() const { return space_; }
  const std::vector<BridgeSegment>& segments() const { return segments_; }
  int initial_index() const { return initial_index_; }

  /// Last pinned time; states exist for t = first_time()..horizon().
  int horizon() const { return segments_.back().end_time; }
  int first_time() const { return segments_.front().start_time; }

  const BridgeSegment& segment_for_transition(int t) const;
  const PowerTable& powers() const { return *powers_; }

 private:
  TransitionMatrix base_;
  StateSpace space_;
  std::vector<BridgeSegment> segments_;
  int initial_index_;
  std::shared_ptr<const PowerTable> powers_;
};

/// Time-t transition matrix of the bridge. Rows whose state cannot reach the
/// active pin in the remaining steps are invalid: all-zero with
/// reachable[a] = false. All valid rows sum to 1.
struct BridgeTransition {
  Eigen::MatrixXd probs;
  std::vector<bool> reachable;
};

BridgeTransition bridge_transition(const BridgeProcess& bridge, int t);

/// Sampled state path; states[k] is the state index at time first_time()+k.
struct Trajectory {
  std::vector<int> states;
};

Trajectory sample_trajectory(const BridgeProcess& bridge, std::mt19937_64& rng);
Trajectory sample_trajectory(const BridgeProcess& bridge, std::uint64_t seed);

/// Exact per-time marginals obtained by propagating the initial delta
/// through the bridge transitions; independent check for the sampler.
std::vector<Eigen::VectorXd> exact_marginals(const BridgeProcess& bridge);

}  // namespace bridgenet

#endif
