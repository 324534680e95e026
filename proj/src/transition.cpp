#include "bridgenet/transition.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgenet {

namespace {
constexpr double kRowSumTol = 1e-12;
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw std::invalid_argument("TransitionMatrix: must be square and nonempty");
  }
  for (int a = 0; a < entries_.rows(); ++a) {
    double sum = 0.0;
    for (int b = 0; b < entries_.cols(); ++b) {
      if (entries_(a, b) < 0.0) {
        throw std::invalid_argument("TransitionMatrix: negative entry");
      }
      sum += entries_(a, b);
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw std::invalid_argument("TransitionMatrix: row does not sum to 1");
    }
  }
}

TransitionMatrix make_toeplitz_transition(int n_states, double base) {
  if (n_states < 2) {
    throw std::invalid_argument("make_toeplitz_transition: n_states must be >= 2");
  }
  if (!(base > 0.0 && base < 1.0)) {
    throw std::invalid_argument("make_toeplitz_transition: base must be in (0,1)");
  }
  Eigen::MatrixXd m(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n_states; ++j) {
      m(i, j) = std::pow(base, std::abs(i - j));
      row_sum += m(i, j);
    }
    m.row(i) /= row_sum;
  }
  return TransitionMatrix(std::move(m));
}

TransitionMatrix matrix_power(const TransitionMatrix& p, int k) {
  if (k < 0) {
    throw std::invalid_argument("matrix_power: k must be >= 0");
  }
  const int n = p.size();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd square = p.matrix();
  int e = k;
  while (e > 0) {
    if (e & 1) result *= square;
    square *= square;
    e >>= 1;
  }
  // Renormalize away accumulated round-off so the result keeps the
  // row-stochastic invariant.
  for (int a = 0; a < n; ++a) {
    result.row(a) /= result.row(a).sum();
  }
  return TransitionMatrix(std::move(result));
}

PowerTable::PowerTable(const TransitionMatrix& p, int max_power) {
  if (max_power < 0) {
    throw std::invalid_argument("PowerTable: max_power must be >= 0");
  }
  const int n = p.size();
  powers_.reserve(static_cast<std::size_t>(max_power) + 1);
  powers_.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int k = 1; k <= max_power; ++k) {
    powers_.push_back(powers_.back() * p.matrix());
  }
}

}  // namespace bridgenet
