#ifndef BRIDGENET_TRANSITION_HPP
#define BRIDGENET_TRANSITION_HPP

#include <Eigen/Dense>
#include <vector>

namespace bridgenet {

/// Row-stochastic square matrix. Construction validates nonnegativity and
/// row sums within 1e-12.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXd entries);

  int size() const { return static_cast<int>(entries_.rows()); }
  double operator()(int a, int b) const { return entries_(a, b); }
  const Eigen::MatrixXd& matrix() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

/// Toeplitz chain of neighbor-biased transitions: unnormalized entry
/// at diagonal offset k is base^|k|, rows normalized to sum 1.
TransitionMatrix make_toeplitz_transition(int n_states, double base = 0.25);

/// P^k by repeated squaring; P^0 is the identity.
TransitionMatrix matrix_power(const TransitionMatrix& p, int k);

/// Immutable table of P^0..P^max_power, shared read-only by bridge
/// transitions, the filter and EM. Built once per (P, horizon).
class PowerTable {
 public:
  PowerTable(const TransitionMatrix& p, int max_power);

  const Eigen::MatrixXd& power(int k) const { return powers_.at(static_cast<std::size_t>(k)); }
  int max_power() const { return static_cast<int>(powers_.size()) - 1; }

 private:
  std::vector<Eigen::MatrixXd> powers_;
};

}  // namespace bridgenet

#endif
