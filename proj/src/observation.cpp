#include "bridgenet/observation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bridgenet/errors.hpp"

namespace bridgenet {

WeightedGraph sample_edges(const WeightedGraph& g, double gamma, std::mt19937_64& rng) {
  if (gamma <= 0.0 || gamma > 1.0) {
    throw std::invalid_argument("sample_edges: gamma must be in (0,1]");
  }
  const auto& edges = g.edges();
  if (edges.empty()) {
    throw std::invalid_argument("sample_edges: graph has no edges");
  }
  const auto n_keep = static_cast<std::size_t>(
      std::llround(gamma * static_cast<double>(edges.size())));
  if (n_keep == 0) {
    throw EmptySampleError("sample_edges: round(gamma*|E|) = 0");
  }
  std::vector<Edge> kept;
  kept.reserve(n_keep);
  std::sample(edges.begin(), edges.end(), std::back_inserter(kept), n_keep, rng);
  return WeightedGraph(g.n_vertices(), std::move(kept));
}

WeightedGraph sample_edges(const WeightedGraph& g, const EdgeSampleConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return sample_edges(g, cfg.gamma, rng);
}

double observed_conductance(const WeightedGraph& sub, ConductanceMethod method) {
  if (method == ConductanceMethod::exact) {
    return graph_conductance_exact(sub).value;
  }
  return graph_conductance_sweep(sub).value;
}

const NoiseParams& NoiseModel::params_for(int state_index) const {
  if (mode == NoiseMode::pooled) return pooled;
  return per_state.at(static_cast<std::size_t>(state_index));
}

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  const auto n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace

std::pair<NoiseModel, CalibrationReport> calibrate_noise(const CommunityLayout& layout,
                                                         const BridgeProcess& bridge,
                                                         const EdgeSampleConfig& cfg, int n_runs,
                                                         ConductanceMethod method) {
  if (n_runs < 100) {
    throw std::invalid_argument("calibrate_noise: n_runs must be >= 100");
  }
  const StateSpace& space = bridge.space();
  const int n_states = space.size();

  std::vector<WeightedGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(n_states));
  for (int i = 0; i < n_states; ++i) {
    graphs.push_back(build_company_customer_graph(layout, space.value(i)));
  }

  std::vector<std::vector<double>> buckets(static_cast<std::size_t>(n_states));
  for (int run = 0; run < n_runs; ++run) {
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(run));
    const Trajectory traj = sample_trajectory(bridge, rng);
    for (int s : traj.states) {
      const WeightedGraph sub = sample_edges(graphs[static_cast<std::size_t>(s)], cfg.gamma, rng);
      const double z = cfg.gamma * observed_conductance(sub, method);
      buckets[static_cast<std::size_t>(s)].push_back(z - space.value(s));
    }
  }

  std::vector<double> all;
  for (auto& b : buckets) all.insert(all.end(), b.begin(), b.end());

  const int k_min_samples = 30;
  const bool any_fitted = std::any_of(buckets.begin(), buckets.end(), [&](const auto& b) {
    return static_cast<int>(b.size()) >= k_min_samples;
  });
  if (!any_fitted) {
    throw CalibrationFailedError("calibrate_noise: every state has fewer than 30 samples");
  }

  NoiseModel model;
  model.mode = NoiseMode::per_state;
  model.gamma = cfg.gamma;
  const MeanSd pooled = mean_sd(all);
  model.pooled = {pooled.mean, std::max(pooled.sd, k_sigma_min),
                  static_cast<long long>(all.size())};

  CalibrationReport report;
  report.n_runs = n_runs;
  report.states.resize(static_cast<std::size_t>(n_states));
  model.per_state.resize(static_cast<std::size_t>(n_states));

  for (int i = 0; i < n_states; ++i) {
    auto& bucket = buckets[static_cast<std::size_t>(i)];
    auto& cal = report.states[static_cast<std::size_t>(i)];
    auto& params = model.per_state[static_cast<std::size_t>(i)];
    cal.n_samples = static_cast<long long>(bucket.size());

    if (static_cast<int>(bucket.size()) < k_min_samples) {
      params = model.pooled;
      params.n_samples = cal.n_samples;
      cal.pooled_fallback = true;
    } else {
      const MeanSd fit = mean_sd(bucket);
      cal.degenerate = fit.sd < 1e-12;
      params = {fit.mean, std::max(fit.sd, k_sigma_min), cal.n_samples};
    }

    std::sort(bucket.begin(), bucket.end());
    if (!cal.degenerate && static_cast<int>(bucket.size()) >= 8) {
      const auto [d, p] = ks_test_gaussian(bucket, params.mu, params.sigma);
      cal.ks_tested = true;
      cal.ks_statistic = d;
      cal.p_value = p;
    }
    cal.residuals = std::move(bucket);
  }
  return {std::move(model), std::move(report)};
}

namespace {

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

std::pair<double, double> ks_test_gaussian(const std::vector<double>& samples, double mu,
                                           double sigma) {
  if (samples.size() < 8) {
    throw std::invalid_argument("ks_test_gaussian: need at least 8 samples");
  }
  if (sigma <= 0.0) {
    throw std::invalid_argument("ks_test_gaussian: sigma must be positive");
  }
  std::vector<double> xs(samples);
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i], mu, sigma);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return {d, kolmogorov_tail(lambda)};
}

double emission_likelihood(double z, int state_index, const StateSpace& space,
                           const NoiseModel& noise) {
  const NoiseParams& p = noise.params_for(state_index);
  const double r = (z - space.value(state_index) - p.mu) / p.sigma;
  const double density = std::exp(-0.5 * r * r) / (p.sigma * std::sqrt(2.0 * std::numbers::pi));
  return std::max(density, std::numeric_limits<double>::min());
}

namespace {

nlohmann::json params_to_json(const NoiseParams& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}, {"n_samples", p.n_samples}};
}

NoiseParams params_from_json(const nlohmann::json& j) {
  NoiseParams p;
  p.mu = j.at("mu").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.n_samples = j.at("n_samples").get<long long>();
  if (p.sigma <= 0.0) throw FormatError("noise model: sigma must be positive", {});
  return p;
}

}  // namespace

void write_noise_model(const NoiseModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["mode"] = model.mode == NoiseMode::per_state ? "per_state" : "pooled";
  j["states"] = nlohmann::json::array();
  for (const auto& p : model.per_state) j["states"].push_back(params_to_json(p));
  j["pooled"] = params_to_json(model.pooled);
  j["gamma"] = model.gamma;
  std::ofstream out(path);
  if (!out) throw IoError("write_noise_model: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

NoiseModel read_noise_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_noise_model: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("read_noise_model: ") + e.what(), {});
  }
  NoiseModel model;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "per_state") {
    model.mode = NoiseMode::per_state;
  } else if (mode == "pooled") {
    model.mode = NoiseMode::pooled;
  } else {
    throw FormatError("read_noise_model: unknown mode '" + mode + "'", {});
  }
  for (const auto& s : j.at("states")) model.per_state.push_back(params_from_json(s));
  model.pooled = params_from_json(j.at("pooled"));
  model.gamma = j.at("gamma").get<double>();
  if (model.gamma <= 0.0 || model.gamma > 1.0) {
    throw FormatError("read_noise_model: gamma out of (0,1]", {});
  }
  return model;
}

}  // namespace bridgenet
