#ifndef BRIDGENET_STATE_SPACE_HPP
#define BRIDGENET_STATE_SPACE_HPP

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace bridgenet {

/// Canonical discrete state grid: n_states equally spaced values
/// 0, 1/(n-1), ..., 1 in ascending order. Index 0 always holds value 0 and
/// index n-1 holds value 1, so pin indices are unambiguous.
class StateSpace {
 public:
  explicit StateSpace(int n_states) {
    if (n_states < 2) {
      throw std::invalid_argument("StateSpace: n_states must be >= 2");
    }
    values_.reserve(static_cast<std::size_t>(n_states));
    for (int i = 0; i < n_states; ++i) {
      values_.push_back(static_cast<double>(i) / (n_states - 1));
    }
  }

  int size() const { return static_cast<int>(values_.size()); }
  double value(int i) const { return values_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& values() const { return values_; }

  int min_index() const { return 0; }
  int max_index() const { return size() - 1; }

  /// Index of the grid value closest to v (ties resolved to the lower index).
  int nearest_index(double v) const {
    int best = 0;
    double best_d = std::abs(v - values_[0]);
    for (int i = 1; i < size(); ++i) {
      const double d = std::abs(v - values_[static_cast<std::size_t>(i)]);
      if (d < best_d) {
        best = i;
        best_d = d;
      }
    }
    return best;
  }

  /// Exact value -> index lookup; throws if v is not a grid value.
  int index_of_value(double v, double tol = 1e-9) const {
    const int i = nearest_index(v);
    if (std::abs(values_[static_cast<std::size_t>(i)] - v) > tol) {
      throw std::invalid_argument("StateSpace: value not on the grid");
    }
    return i;
  }

 private:
  std::vector<double> values_;
};

inline StateSpace make_state_space(int n_states) { return StateSpace(n_states); }

}  // namespace bridgenet

#endif
