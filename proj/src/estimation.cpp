#include "bridgenet/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bridgenet/errors.hpp"
#include "bridgenet/observation.hpp"

namespace bridgenet {

namespace {

constexpr double k_neg_inf = -std::numeric_limits<double>::infinity();

double log_emission(double y, double value, double sigma) {
  const double r = (y - value) / sigma;
  return -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

void validate_sequence(const ObsSeq& y, int horizon_len) {
  if (y.empty()) {
    throw std::invalid_argument("observation sequence is empty");
  }
  if (static_cast<int>(y.size()) > horizon_len) {
    throw std::invalid_argument("observation sequence longer than the bridge horizon");
  }
  for (const auto& v : y) {
    if (v && !std::isfinite(*v)) {
      throw std::invalid_argument("non-finite observation");
    }
  }
}

}  // namespace

BridgeProcess HmbParameters::to_bridge() const {
  return BridgeProcess(P, space, segments, initial_index);
}

ForwardResult forward(const BridgeProcess& bridge, double sigma, const ObsSeq& y) {
  const StateSpace& space = bridge.space();
  const int n = space.size();
  const int len = static_cast<int>(y.size());
  validate_sequence(y, bridge.horizon() - bridge.first_time() + 1);
  if (sigma <= 0.0) {
    throw std::invalid_argument("forward: sigma must be positive");
  }

  ForwardResult res;
  res.alpha.resize(len, n);
  res.log_scale.resize(static_cast<std::size_t>(len));

  Eigen::VectorXd pred = Eigen::VectorXd::Zero(n);
  pred(bridge.initial_index()) = 1.0;
  for (int t = 0; t < len; ++t) {
    if (t > 0) {
      const BridgeTransition b = bridge_transition(bridge, bridge.first_time() + t - 1);
      pred = b.probs.transpose() * res.alpha.row(t - 1).transpose();
    }
    // Max-shifted measurement update: densities enter as exp(logO - m) with
    // m the best log-density over the prediction support, so sigma at the
    // floor cannot underflow the scale.
    double log_shift = 0.0;
    Eigen::VectorXd filt = pred;
    if (y[static_cast<std::size_t>(t)]) {
      const double obs = *y[static_cast<std::size_t>(t)];
      Eigen::VectorXd log_o(n);
      double m = k_neg_inf;
      for (int a = 0; a < n; ++a) {
        log_o(a) = log_emission(obs, space.value(a), sigma);
        if (pred(a) > 0.0 && log_o(a) > m) m = log_o(a);
      }
      if (m == k_neg_inf) {
        throw ImpossibleObservationError("forward: prediction support is empty");
      }
      for (int a = 0; a < n; ++a) filt(a) = pred(a) * std::exp(log_o(a) - m);
      log_shift = m;
    }
    const double c = filt.sum();
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ImpossibleObservationError("forward: all-zero scaling constant");
    }
    res.alpha.row(t) = (filt / c).transpose();
    res.log_scale[static_cast<std::size_t>(t)] = log_shift + std::log(c);
    res.log_likelihood += res.log_scale[static_cast<std::size_t>(t)];
  }
  return res;
}

ForwardResult forward(const HmbParameters& theta, const ObsSeq& y) {
  return forward(theta.to_bridge(), theta.sigma, y);
}

namespace {

/// exp(logO_{t}(b) - log_scale_t) for every state; the gap case has logO = 0.
Eigen::VectorXd scaled_emission(const StateSpace& space, double sigma,
                                const std::optional<double>& obs, double log_scale) {
  Eigen::VectorXd e(space.size());
  for (int b = 0; b < space.size(); ++b) {
    const double log_o = obs ? log_emission(*obs, space.value(b), sigma) : 0.0;
    e(b) = std::exp(log_o - log_scale);
  }
  return e;
}

}  // namespace

Eigen::MatrixXd backward(const BridgeProcess& bridge, double sigma, const ObsSeq& y,
                         const ForwardResult& fwd) {
  const StateSpace& space = bridge.space();
  const int n = space.size();
  const int len = static_cast<int>(y.size());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(len, n);
  beta.row(len - 1).setOnes();
  for (int t = len - 2; t >= 0; --t) {
    const BridgeTransition b = bridge_transition(bridge, bridge.first_time() + t);
    const Eigen::VectorXd e =
        scaled_emission(space, sigma, y[static_cast<std::size_t>(t + 1)],
                        fwd.log_scale[static_cast<std::size_t>(t + 1)]);
    beta.row(t) =
        (b.probs * e.cwiseProduct(beta.row(t + 1).transpose())).transpose();
  }
  return beta;
}

SmoothedStats smooth(const BridgeProcess& bridge, double sigma, const ObsSeq& y) {
  const StateSpace& space = bridge.space();
  const int n = space.size();
  const int len = static_cast<int>(y.size());
  const ForwardResult fwd = forward(bridge, sigma, y);
  const Eigen::MatrixXd beta = backward(bridge, sigma, y, fwd);

  SmoothedStats stats;
  stats.log_likelihood = fwd.log_likelihood;
  stats.gamma.resize(len, n);
  for (int t = 0; t < len; ++t) {
    Eigen::VectorXd g = fwd.alpha.row(t).cwiseProduct(beta.row(t)).transpose();
    const double s = g.sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ImpossibleObservationError("smooth: degenerate state marginal");
    }
    stats.gamma.row(t) = (g / s).transpose();
  }
  stats.xi.reserve(static_cast<std::size_t>(len - 1));
  for (int t = 0; t + 1 < len; ++t) {
    const BridgeTransition b = bridge_transition(bridge, bridge.first_time() + t);
    const Eigen::VectorXd e =
        scaled_emission(space, sigma, y[static_cast<std::size_t>(t + 1)],
                        fwd.log_scale[static_cast<std::size_t>(t + 1)]);
    Eigen::MatrixXd xi(n, n);
    for (int a = 0; a < n; ++a) {
      for (int bb = 0; bb < n; ++bb) {
        xi(a, bb) = fwd.alpha(t, a) * b.probs(a, bb) * e(bb) * beta(t + 1, bb);
      }
    }
    const double s = xi.sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ImpossibleObservationError("smooth: degenerate pairwise marginal");
    }
    stats.xi.push_back(xi / s);
  }
  return stats;
}

SmoothedStats smooth(const HmbParameters& theta, const ObsSeq& y) {
  return smooth(theta.to_bridge(), theta.sigma, y);
}

namespace {

const BridgeSegment& segment_at(const std::vector<BridgeSegment>& segments, int t) {
  for (const auto& seg : segments) {
    if (t >= seg.start_time && t < seg.end_time) return seg;
  }
  throw std::out_of_range("no bridge segment covers transition time " + std::to_string(t));
}

std::vector<Eigen::MatrixXd> raw_powers(const Eigen::MatrixXd& p, int max_k) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(max_k) + 1);
  out.push_back(Eigen::MatrixXd::Identity(p.rows(), p.cols()));
  for (int k = 1; k <= max_k; ++k) out.push_back(out.back() * p);
  return out;
}

/// Transition part of Q for a nonnegative matrix p: sum over transitions of
/// xi-weighted log bridge probabilities. -infinity when a needed entry is 0.
double bridge_q_term(const Eigen::MatrixXd& p, const std::vector<BridgeSegment>& segments,
                     int first_time, const std::vector<Eigen::MatrixXd>& xi_sum) {
  int max_k = 0;
  for (const auto& seg : segments) max_k = std::max(max_k, seg.end_time - seg.start_time);
  const auto powers = raw_powers(p, max_k);
  const int n = static_cast<int>(p.rows());
  double total = 0.0;
  for (std::size_t k = 0; k < xi_sum.size(); ++k) {
    const int t = first_time + static_cast<int>(k);
    const BridgeSegment& seg = segment_at(segments, t);
    const auto& p_num = powers[static_cast<std::size_t>(seg.end_time - t - 1)];
    const auto& p_den = powers[static_cast<std::size_t>(seg.end_time - t)];
    for (int a = 0; a < n; ++a) {
      const double denom = p_den(a, seg.pin_index);
      for (int b = 0; b < n; ++b) {
        const double w = xi_sum[k](a, b);
        if (w <= 0.0) continue;
        const double num = p(a, b) * p_num(b, seg.pin_index);
        if (!(num > 0.0) || !(denom > 0.0)) return k_neg_inf;
        total += w * std::log(num / denom);
      }
    }
  }
  return total;
}

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += u[static_cast<std::size_t>(i)];
    const double cand = (cum - 1.0) / (i + 1);
    if (u[static_cast<std::size_t>(i)] - cand > 0.0) theta = cand;
  }
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = std::max(v(i) - theta, 0.0);
  return w;
}

Eigen::MatrixXd project_rows(Eigen::MatrixXd m) {
  for (int a = 0; a < m.rows(); ++a) {
    m.row(a) = project_to_simplex(m.row(a).transpose()).transpose();
  }
  return m;
}

Eigen::MatrixXd ascend_full(Eigen::MatrixXd p, const std::vector<BridgeSegment>& segments,
                            int first_time, const std::vector<Eigen::MatrixXd>& xi_sum,
                            int steps) {
  const int n = static_cast<int>(p.rows());
  const double h = 1e-6;
  double a_cur = bridge_q_term(p, segments, first_time, xi_sum);
  for (int step = 0; step < steps; ++step) {
    Eigen::MatrixXd grad(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Eigen::MatrixXd pp = p;
        pp(i, j) += h;
        const double up = bridge_q_term(pp, segments, first_time, xi_sum);
        if (p(i, j) >= h) {
          Eigen::MatrixXd pm = p;
          pm(i, j) -= h;
          grad(i, j) = (up - bridge_q_term(pm, segments, first_time, xi_sum)) / (2.0 * h);
        } else {
          grad(i, j) = (up - a_cur) / h;
        }
      }
    }
    if (!grad.allFinite()) break;
    const double g_norm = grad.norm();
    if (g_norm == 0.0) break;
    double eta = 1.0 / g_norm;
    bool improved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::MatrixXd cand = project_rows(p + eta * grad);
      const double a_cand = bridge_q_term(cand, segments, first_time, xi_sum);
      if (a_cand > a_cur) {
        p = cand;
        a_cur = a_cand;
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
  }
  return p;
}

Eigen::MatrixXd toeplitz_raw(int n, double base) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = std::pow(base, std::abs(i - j));
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

double ascend_toeplitz(double base, int n, const std::vector<BridgeSegment>& segments,
                       int first_time, const std::vector<Eigen::MatrixXd>& xi_sum, int steps) {
  const double lo = 1e-3;
  const double hi = 1.0 - 1e-3;
  auto value = [&](double b) {
    return bridge_q_term(toeplitz_raw(n, b), segments, first_time, xi_sum);
  };
  base = std::clamp(base, lo, hi);
  double a_cur = value(base);
  const double h = 1e-6;
  for (int step = 0; step < steps; ++step) {
    const double g =
        (value(std::min(base + h, hi)) - value(std::max(base - h, lo))) / (2.0 * h);
    if (!std::isfinite(g) || g == 0.0) break;
    double eta = 0.25 / std::max(1.0, std::abs(g));
    bool improved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const double cand = std::clamp(base + eta * g, lo, hi);
      const double a_cand = value(cand);
      if (a_cand > a_cur) {
        base = cand;
        a_cur = a_cand;
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
  }
  return base;
}

Eigen::MatrixXd renormalize_rows(Eigen::MatrixXd m) {
  for (int a = 0; a < m.rows(); ++a) m.row(a) /= m.row(a).sum();
  return m;
}

}  // namespace

double q_function(const HmbParameters& theta, const SmoothedStats& stats, const ObsSeq& y) {
  const int len = static_cast<int>(y.size());
  if (stats.gamma.rows() != len || static_cast<int>(stats.xi.size()) != len - 1) {
    throw std::invalid_argument("q_function: stats do not match the sequence length");
  }
  const StateSpace& space = theta.space;
  double q = 0.0;
  for (int t = 0; t < len; ++t) {
    if (!y[static_cast<std::size_t>(t)]) continue;
    for (int a = 0; a < space.size(); ++a) {
      q += stats.gamma(t, a) *
           log_emission(*y[static_cast<std::size_t>(t)], space.value(a), theta.sigma);
    }
  }
  const int first_time = theta.segments.front().start_time;
  const double trans = bridge_q_term(theta.P.matrix(), theta.segments, first_time, stats.xi);
  return q + trans;
}

EmResult em_fit(const std::vector<ObsSeq>& sequences, const HmbParameters& init,
                const EmConfig& cfg) {
  if (sequences.empty()) {
    throw std::invalid_argument("em_fit: need at least one sequence");
  }
  const std::size_t len = sequences.front().size();
  if (len < 2) {
    throw std::invalid_argument("em_fit: sequences need at least two steps");
  }
  for (const auto& s : sequences) {
    if (s.size() != len) {
      throw std::invalid_argument("em_fit: sequences must share one horizon");
    }
  }

  HmbParameters theta = init;
  const StateSpace& space = theta.space;
  const int n = space.size();
  const int first_time = theta.segments.front().start_time;

  auto total_loglik = [&sequences](const HmbParameters& th) {
    const BridgeProcess bridge = th.to_bridge();
    double total = 0.0;
    for (const auto& yseq : sequences) {
      total += forward(bridge, th.sigma, yseq).log_likelihood;
    }
    return total;
  };

  double ll_cur = k_neg_inf;
  try {
    ll_cur = total_loglik(theta);
  } catch (const ImpossibleObservationError& e) {
    throw InfeasibleStartError(std::string("em_fit: ") + e.what());
  }
  if (!std::isfinite(ll_cur)) {
    throw InfeasibleStartError("em_fit: starting log-likelihood is not finite");
  }

  std::vector<double> trace;
  trace.push_back(ll_cur);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const BridgeProcess bridge = theta.to_bridge();
    std::vector<Eigen::MatrixXd> xi_sum(len - 1, Eigen::MatrixXd::Zero(n, n));
    double sq_sum = 0.0;
    long long n_obs = 0;
    for (const auto& yseq : sequences) {
      const SmoothedStats stats = smooth(bridge, theta.sigma, yseq);
      for (std::size_t t = 0; t + 1 < len; ++t) xi_sum[t] += stats.xi[t];
      for (std::size_t t = 0; t < len; ++t) {
        if (!yseq[t]) continue;
        ++n_obs;
        for (int a = 0; a < n; ++a) {
          const double d = *yseq[t] - space.value(a);
          sq_sum += stats.gamma(static_cast<int>(t), a) * d * d;
        }
      }
    }

    HmbParameters cand = theta;
    if (n_obs > 0) {
      cand.sigma = std::max(std::sqrt(sq_sum / static_cast<double>(n_obs)), k_sigma_min);
    }
    if (cfg.toeplitz) {
      const double base_cur = theta.P(0, 1) / theta.P(0, 0);
      const double base_new =
          ascend_toeplitz(base_cur, n, theta.segments, first_time, xi_sum, cfg.ascent_steps);
      cand.P = TransitionMatrix(toeplitz_raw(n, base_new));
    } else {
      cand.P = TransitionMatrix(renormalize_rows(
          ascend_full(theta.P.matrix(), theta.segments, first_time, xi_sum, cfg.ascent_steps)));
    }

    double ll_new = total_loglik(cand);
    if (!(ll_new >= ll_cur)) {
      // The P ascent is gated on the true likelihood; retreat to the sigma
      // update alone, which EM guarantees cannot hurt.
      HmbParameters sigma_only = theta;
      sigma_only.sigma = cand.sigma;
      const double ll_sigma = total_loglik(sigma_only);
      if (ll_sigma >= ll_cur) {
        cand = sigma_only;
        ll_new = ll_sigma;
      } else {
        break;  // numerical stalemate: keep the current accepted parameters
      }
    }
    const double gain = ll_new - ll_cur;
    theta = cand;
    ll_cur = ll_new;
    trace.push_back(ll_cur);
    if (gain < cfg.tol) break;
  }
  return EmResult{std::move(theta), std::move(trace)};
}

void write_params(const HmbParameters& params, const std::filesystem::path& path) {
  nlohmann::json j;
  j["n_states"] = params.space.size();
  j["values"] = params.space.values();
  const auto& m = params.P.matrix();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (int a = 0; a < m.rows(); ++a) {
    for (int b = 0; b < m.cols(); ++b) flat.push_back(m(a, b));
  }
  j["P"] = flat;
  j["sigma"] = params.sigma;
  j["pins"] = nlohmann::json::array();
  j["pins"].push_back({{"time", params.segments.front().start_time},
                       {"state_index", params.initial_index}});
  for (const auto& seg : params.segments) {
    j["pins"].push_back({{"time", seg.end_time}, {"state_index", seg.pin_index}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("write_params: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

HmbParameters read_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_params: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("read_params: ") + e.what(), {});
  }
  const int n = j.at("n_states").get<int>();
  if (n < 2) throw FormatError("read_params: n_states must be >= 2", {});
  StateSpace space(n);
  const auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != n) {
    throw FormatError("read_params: values length mismatch", {});
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(values[static_cast<std::size_t>(i)] - space.value(i)) > 1e-9) {
      throw FormatError("read_params: values are not the canonical grid", {});
    }
  }
  const auto flat = j.at("P").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != n * n) {
    throw FormatError("read_params: P has wrong size", {});
  }
  Eigen::MatrixXd m(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) m(a, b) = flat[static_cast<std::size_t>(a * n + b)];
  }
  const auto& pins = j.at("pins");
  if (pins.size() < 2) throw FormatError("read_params: need at least two pins", {});
  std::vector<BridgeSegment> segments;
  for (std::size_t k = 0; k + 1 < pins.size(); ++k) {
    BridgeSegment seg;
    seg.start_time = pins[k].at("time").get<int>();
    seg.end_time = pins[k + 1].at("time").get<int>();
    seg.pin_index = pins[k + 1].at("state_index").get<int>();
    segments.push_back(seg);
  }
  HmbParameters params{TransitionMatrix(m), j.at("sigma").get<double>(), space,
                       std::move(segments), pins[0].at("state_index").get<int>()};
  if (params.sigma <= 0.0) throw FormatError("read_params: sigma must be positive", {});
  return params;
}

}  // namespace bridgenet
