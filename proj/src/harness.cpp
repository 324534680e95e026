#include "bridgenet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bridgenet/errors.hpp"
#include "bridgenet/estimation.hpp"
#include "bridgenet/graph.hpp"
#include "bridgenet/retweet.hpp"

namespace bridgenet {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file " + path.string());
  return out;
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::invalid_argument("out_dir is not writable: " + dir.string());
  return dir;
}

void write_resolved_config(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  auto out = open_out(dir / "resolved_config.json");
  out << resolved_config_json(cfg).dump(2) << "\n";
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("spearman: a series is constant");
  }
  return sxy / std::sqrt(sxx * syy);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(n);
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

ConductanceMethod method_from_string(const std::string& s) {
  if (s == "exact") return ConductanceMethod::exact;
  if (s == "sweep") return ConductanceMethod::sweep;
  throw std::invalid_argument("conductance_method must be 'exact' or 'sweep'");
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "per_state") return NoiseMode::per_state;
  if (s == "pooled") return NoiseMode::pooled;
  throw std::invalid_argument("noise_mode must be 'per_state' or 'pooled'");
}

EstimateMode estimate_mode_from_string(const std::string& s) {
  if (s == "mean") return EstimateMode::mean;
  if (s == "map") return EstimateMode::map;
  throw std::invalid_argument("estimate_mode must be 'mean' or 'map'");
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.m_utilitarian < 1) throw std::invalid_argument("m_utilitarian must be >= 1");
  if (cfg.n_fans < 1) throw std::invalid_argument("n_fans must be >= 1");
  if (cfg.T < 2) throw std::invalid_argument("T must be >= 2");
  if (cfg.n_states.empty()) throw std::invalid_argument("n_states must be nonempty");
  for (int n : cfg.n_states) {
    if (n < 2) throw std::invalid_argument("every n_states entry must be >= 2");
  }
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) throw std::invalid_argument("gamma must be in (0,1]");
  if (cfg.base <= 0.0 || cfg.base >= 1.0) throw std::invalid_argument("base must be in (0,1)");
  if (cfg.n_monte_carlo < 1) throw std::invalid_argument("n_monte_carlo must be >= 1");
  if (cfg.n_calibration_runs < 100) {
    throw std::invalid_argument("n_calibration_runs must be >= 100");
  }
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (cfg.out_dir.empty()) throw std::invalid_argument("out_dir must be nonempty");
  if (cfg.window_min > cfg.window_max) {
    throw std::invalid_argument("window_min must be <= window_max");
  }
  if (cfg.subsample_n < 1) throw std::invalid_argument("subsample_n must be >= 1");
  if (cfg.em_max_iters < 1) throw std::invalid_argument("em_max_iters must be >= 1");
  if (cfg.em_tol <= 0.0) throw std::invalid_argument("em_tol must be positive");
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "m_utilitarian") {
        cfg.m_utilitarian = value.get<int>();
      } else if (key == "n_fans") {
        cfg.n_fans = value.get<int>();
      } else if (key == "T") {
        cfg.T = value.get<int>();
      } else if (key == "n_states") {
        cfg.n_states = value.get<std::vector<int>>();
      } else if (key == "gamma") {
        cfg.gamma = value.get<double>();
      } else if (key == "base") {
        cfg.base = value.get<double>();
      } else if (key == "n_monte_carlo") {
        cfg.n_monte_carlo = value.get<int>();
      } else if (key == "n_calibration_runs") {
        cfg.n_calibration_runs = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "conductance_method") {
        cfg.conductance_method = method_from_string(value.get<std::string>());
      } else if (key == "noise_mode") {
        cfg.noise_mode = noise_mode_from_string(value.get<std::string>());
      } else if (key == "estimate_mode") {
        cfg.estimate_mode = estimate_mode_from_string(value.get<std::string>());
      } else if (key == "jobs") {
        cfg.jobs = value.get<int>();
      } else if (key == "out_dir") {
        cfg.out_dir = value.get<std::string>();
      } else if (key == "retweet_path") {
        cfg.retweet_path = value.get<std::string>();
      } else if (key == "seeds_path") {
        cfg.seeds_path = value.get<std::string>();
      } else if (key == "sequences_path") {
        cfg.sequences_path = value.get<std::string>();
      } else if (key == "params_path") {
        cfg.params_path = value.get<std::string>();
      } else if (key == "window_min") {
        cfg.window_min = value.get<int>();
      } else if (key == "window_max") {
        cfg.window_max = value.get<int>();
      } else if (key == "subsample_n") {
        cfg.subsample_n = value.get<int>();
      } else if (key == "em_max_iters") {
        cfg.em_max_iters = value.get<int>();
      } else if (key == "em_tol") {
        cfg.em_tol = value.get<double>();
      } else if (key == "em_toeplitz") {
        cfg.em_toeplitz = value.get<bool>();
      } else {
        throw std::invalid_argument("unknown config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config value has the wrong type: " + std::string(e.what()));
  }
  validate_config(cfg);
  return cfg;
}

nlohmann::json resolved_config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["m_utilitarian"] = cfg.m_utilitarian;
  j["n_fans"] = cfg.n_fans;
  j["T"] = cfg.T;
  j["n_states"] = cfg.n_states;
  j["gamma"] = cfg.gamma;
  j["base"] = cfg.base;
  j["n_monte_carlo"] = cfg.n_monte_carlo;
  j["n_calibration_runs"] = cfg.n_calibration_runs;
  j["seed"] = cfg.seed;
  j["conductance_method"] =
      cfg.conductance_method == ConductanceMethod::exact ? "exact" : "sweep";
  j["noise_mode"] = cfg.noise_mode == NoiseMode::per_state ? "per_state" : "pooled";
  j["estimate_mode"] = cfg.estimate_mode == EstimateMode::mean ? "mean" : "map";
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir;
  j["retweet_path"] = cfg.retweet_path;
  j["seeds_path"] = cfg.seeds_path;
  j["sequences_path"] = cfg.sequences_path;
  j["params_path"] = cfg.params_path;
  j["window_min"] = cfg.window_min;
  j["window_max"] = cfg.window_max;
  j["subsample_n"] = cfg.subsample_n;
  j["em_max_iters"] = cfg.em_max_iters;
  j["em_tol"] = cfg.em_tol;
  j["em_toeplitz"] = cfg.em_toeplitz;
  return j;
}

namespace {

BridgeProcess standard_bridge(const ExperimentConfig& cfg, int n_states) {
  return BridgeProcess::standard(make_toeplitz_transition(n_states, cfg.base),
                                 StateSpace(n_states), cfg.T);
}

/// phi and lambda2 for every grid weight; the per-t metric series is then a
/// lookup because the graph depends on time only through the state.
struct MetricTable {
  std::vector<double> phi;
  std::vector<double> lambda2;
};

MetricTable metric_table(const ExperimentConfig& cfg, const StateSpace& space) {
  const CommunityLayout layout{cfg.m_utilitarian, cfg.n_fans};
  MetricTable table;
  for (int i = 0; i < space.size(); ++i) {
    const WeightedGraph g = build_company_customer_graph(layout, space.value(i));
    table.phi.push_back(g.connected_over_positive_edges()
                            ? observed_conductance(g, cfg.conductance_method)
                            : 0.0);
    table.lambda2.push_back(algebraic_connectivity(g));
  }
  return table;
}

struct MetricRuns {
  std::vector<Trajectory> trajectories;
  MetricTable table;
  StateSpace space;
};

MetricRuns simulate_metric_runs(const ExperimentConfig& cfg) {
  const int n_states = cfg.n_states.front();
  const BridgeProcess bridge = standard_bridge(cfg, n_states);
  MetricRuns runs{{}, metric_table(cfg, bridge.space()), bridge.space()};
  runs.trajectories.resize(static_cast<std::size_t>(cfg.n_monte_carlo), Trajectory{});
  parallel_for(cfg.n_monte_carlo, cfg.jobs, [&](int rep) {
    runs.trajectories[static_cast<std::size_t>(rep)] =
        sample_trajectory(bridge, mix_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
  });
  return runs;
}

void write_metric_csv(const MetricRuns& runs, std::ostream& out) {
  out << "rep,t,w,phi,lambda2\n";
  for (std::size_t rep = 0; rep < runs.trajectories.size(); ++rep) {
    const auto& states = runs.trajectories[rep].states;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const int s = states[k];
      out << rep << ',' << (k + 1) << ',' << fmt(runs.space.value(s)) << ','
          << fmt(runs.table.phi[static_cast<std::size_t>(s)]) << ','
          << fmt(runs.table.lambda2[static_cast<std::size_t>(s)]) << "\n";
    }
  }
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);
  const MetricRuns runs = simulate_metric_runs(cfg);
  auto out = open_out(dir / "metrics.csv");
  write_metric_csv(runs, out);
}

void cmd_metrics_compare(const ExperimentConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);
  const MetricRuns runs = simulate_metric_runs(cfg);
  auto out = open_out(dir / "metrics_compare.csv");
  write_metric_csv(runs, out);

  double sum = 0.0;
  double min_rho = 1.0;
  for (const auto& traj : runs.trajectories) {
    std::vector<double> phi;
    std::vector<double> lambda2;
    for (int s : traj.states) {
      phi.push_back(runs.table.phi[static_cast<std::size_t>(s)]);
      lambda2.push_back(runs.table.lambda2[static_cast<std::size_t>(s)]);
    }
    const double rho = spearman(phi, lambda2);
    sum += rho;
    min_rho = std::min(min_rho, rho);
  }
  nlohmann::json summary;
  summary["n_trajectories"] = runs.trajectories.size();
  summary["mean_spearman"] = sum / static_cast<double>(runs.trajectories.size());
  summary["min_spearman"] = min_rho;
  auto sout = open_out(dir / "summary.json");
  sout << summary.dump(2) << "\n";
}

namespace {

std::pair<NoiseModel, CalibrationReport> calibrate_for(const ExperimentConfig& cfg,
                                                       const BridgeProcess& bridge) {
  const CommunityLayout layout{cfg.m_utilitarian, cfg.n_fans};
  const EdgeSampleConfig sample_cfg{
      cfg.gamma, mix_seed(cfg.seed, 0xCA1Bull * static_cast<std::uint64_t>(
                                        bridge.space().size()))};
  auto result =
      calibrate_noise(layout, bridge, sample_cfg, cfg.n_calibration_runs, cfg.conductance_method);
  result.first.mode = cfg.noise_mode;
  return result;
}

}  // namespace

void cmd_calibrate(const ExperimentConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);
  const int n_states = cfg.n_states.front();
  const BridgeProcess bridge = standard_bridge(cfg, n_states);
  const auto [noise, report] = calibrate_for(cfg, bridge);

  write_noise_model(noise, dir / "noise_model.json");

  auto ks = open_out(dir / "ks_report.csv");
  ks << "state,value,n_samples,mu,sigma,pooled_fallback,degenerate,ks_tested,"
        "ks_statistic,p_value\n";
  for (int i = 0; i < n_states; ++i) {
    const auto& cal = report.states[static_cast<std::size_t>(i)];
    const auto& params = noise.per_state[static_cast<std::size_t>(i)];
    ks << i << ',' << fmt(bridge.space().value(i)) << ',' << cal.n_samples << ','
       << fmt(params.mu) << ',' << fmt(params.sigma) << ',' << (cal.pooled_fallback ? 1 : 0)
       << ',' << (cal.degenerate ? 1 : 0) << ',' << (cal.ks_tested ? 1 : 0) << ','
       << fmt(cal.ks_statistic) << ',' << fmt(cal.p_value) << "\n";
  }

  auto cdf = open_out(dir / "calibration_cdf.csv");
  cdf << "state,residual,cdf\n";
  for (int i = 0; i < n_states; ++i) {
    const auto& residuals = report.states[static_cast<std::size_t>(i)].residuals;
    for (std::size_t k = 0; k < residuals.size(); ++k) {
      cdf << i << ',' << fmt(residuals[k]) << ','
          << fmt(static_cast<double>(k + 1) / static_cast<double>(residuals.size())) << "\n";
    }
  }
}

void cmd_evaluate(const ExperimentConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);
  auto out = open_out(dir / "evaluation.csv");
  out << "n_states,hmb_mse,hmm_mse,relative_improvement,n_runs,ci_halfwidth\n";

  for (const int n_states : cfg.n_states) {
    const BridgeProcess bridge = standard_bridge(cfg, n_states);
    const StateSpace& space = bridge.space();
    const auto [noise, report] = calibrate_for(cfg, bridge);

    const CommunityLayout layout{cfg.m_utilitarian, cfg.n_fans};
    std::vector<WeightedGraph> graphs;
    for (int i = 0; i < n_states; ++i) {
      graphs.push_back(build_company_customer_graph(layout, space.value(i)));
    }

    const int n_runs = cfg.n_monte_carlo;
    std::vector<double> hmb_mse(static_cast<std::size_t>(n_runs));
    std::vector<double> hmm_mse(static_cast<std::size_t>(n_runs));
    parallel_for(n_runs, cfg.jobs, [&](int rep) {
      std::mt19937_64 rng(mix_seed(
          cfg.seed, (static_cast<std::uint64_t>(n_states) << 32) |
                        static_cast<std::uint64_t>(static_cast<std::uint32_t>(rep))));
      const Trajectory traj = sample_trajectory(bridge, rng);
      std::vector<std::optional<double>> obs;
      obs.reserve(traj.states.size());
      for (int s : traj.states) {
        const WeightedGraph sub = sample_edges(graphs[static_cast<std::size_t>(s)], cfg.gamma, rng);
        obs.emplace_back(cfg.gamma * observed_conductance(sub, cfg.conductance_method));
      }
      // Paired design: both filters consume the identical observation stream.
      FilterRun hmb = run_filter(obs, FilterKind::hmb, bridge, noise);
      FilterRun hmm = run_filter(obs, FilterKind::hmm, bridge, noise);
      hmb.truth = traj.states;
      hmm.truth = traj.states;
      hmb_mse[static_cast<std::size_t>(rep)] = mse(hmb, space, cfg.estimate_mode);
      hmm_mse[static_cast<std::size_t>(rep)] = mse(hmm, space, cfg.estimate_mode);
    });

    const double n = static_cast<double>(n_runs);
    const double mean_hmb = std::accumulate(hmb_mse.begin(), hmb_mse.end(), 0.0) / n;
    const double mean_hmm = std::accumulate(hmm_mse.begin(), hmm_mse.end(), 0.0) / n;
    double var_diff = 0.0;
    for (int rep = 0; rep < n_runs; ++rep) {
      const double d = hmm_mse[static_cast<std::size_t>(rep)] -
                       hmb_mse[static_cast<std::size_t>(rep)];
      var_diff += (d - (mean_hmm - mean_hmb)) * (d - (mean_hmm - mean_hmb));
    }
    var_diff = n_runs > 1 ? var_diff / (n - 1.0) : 0.0;
    const double ci_halfwidth = 1.96 * std::sqrt(var_diff / n);
    const double rel = mean_hmm > 0.0 ? (mean_hmm - mean_hmb) / mean_hmm : 0.0;
    out << n_states << ',' << fmt(mean_hmb) << ',' << fmt(mean_hmm) << ',' << fmt(rel) << ','
        << n_runs << ',' << fmt(ci_halfwidth) << "\n";
  }
}

namespace {

struct SequenceFile {
  std::vector<std::string> ids;  // in order of first appearance
  std::vector<ObsSeq> sequences;
  int horizon = 0;
};

SequenceFile read_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sequences file " + path.string());
  struct Row {
    std::string id;
    int t;
    std::optional<double> y;
  };
  std::vector<Row> rows;
  std::vector<int> bad;
  std::string line;
  int line_no = 0;
  int horizon = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "sequence_id,t,y") continue;
    std::istringstream ss(line);
    Row row;
    std::string t_field;
    std::string y_field;
    if (!std::getline(ss, row.id, ',') || !std::getline(ss, t_field, ',')) {
      bad.push_back(line_no);
      continue;
    }
    std::getline(ss, y_field);
    try {
      std::size_t used = 0;
      row.t = std::stoi(t_field, &used);
      if (used != t_field.size() || row.t < 1 || row.id.empty()) throw std::invalid_argument("");
      if (!y_field.empty()) {
        row.y = std::stod(y_field, &used);
        if (used != y_field.size()) throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      bad.push_back(line_no);
      continue;
    }
    horizon = std::max(horizon, row.t);
    rows.push_back(std::move(row));
  }
  if (!bad.empty()) {
    throw FormatError("sequences file has malformed rows: " + path.string(), bad);
  }
  if (rows.empty()) throw FormatError("sequences file is empty: " + path.string(), {});

  SequenceFile file;
  file.horizon = horizon;
  std::map<std::string, std::size_t> index;
  for (const auto& row : rows) {
    auto [it, inserted] = index.try_emplace(row.id, file.sequences.size());
    if (inserted) {
      file.ids.push_back(row.id);
      file.sequences.emplace_back(static_cast<std::size_t>(horizon), std::nullopt);
    }
    auto& seq = file.sequences[it->second];
    if (seq[static_cast<std::size_t>(row.t - 1)]) {
      throw FormatError("duplicate (sequence_id, t) in " + path.string(), {});
    }
    seq[static_cast<std::size_t>(row.t - 1)] = row.y;
  }
  return file;
}

double moment_sigma_init(const std::vector<ObsSeq>& sequences) {
  std::vector<double> diffs;
  for (const auto& seq : sequences) {
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      if (seq[t] && seq[t + 1]) diffs.push_back(*seq[t + 1] - *seq[t]);
    }
  }
  if (diffs.size() < 2) return 0.1;
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                      static_cast<double>(diffs.size());
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (static_cast<double>(diffs.size()) - 1.0));
  return std::clamp(sd / std::numbers::sqrt2, k_sigma_min, 1.0);
}

HmbParameters initial_params(const ExperimentConfig& cfg, int n_states, int horizon,
                             const std::vector<ObsSeq>& sequences) {
  const StateSpace space(n_states);
  std::vector<BridgeSegment> segments;
  int initial_index = space.max_index();
  if (horizon == 2 * cfg.T - 1) {
    segments.push_back({1, cfg.T, space.min_index()});
    segments.push_back({cfg.T, 2 * cfg.T - 1, space.max_index()});
  } else {
    segments.push_back({1, horizon, space.max_index()});
    for (const auto& v : sequences.front()) {
      if (v) {
        initial_index = space.nearest_index(*v);
        break;
      }
    }
  }
  return HmbParameters{make_toeplitz_transition(n_states, cfg.base),
                       moment_sigma_init(sequences), space, std::move(segments), initial_index};
}

void write_em_outputs(const EmResult& result, const std::filesystem::path& dir) {
  write_params(result.params, dir / "params.json");
  auto trace = open_out(dir / "likelihood_trace.csv");
  trace << "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < result.likelihood_trace.size(); ++i) {
    trace << i << ',' << fmt(result.likelihood_trace[i]) << "\n";
  }
}

}  // namespace

void cmd_fit(const ExperimentConfig& cfg) {
  if (cfg.sequences_path.empty()) {
    throw std::invalid_argument("fit requires sequences_path in the config");
  }
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);

  const SequenceFile file = read_sequences(cfg.sequences_path);
  const int n_states = cfg.n_states.front();
  const HmbParameters init = initial_params(cfg, n_states, file.horizon, file.sequences);
  const EmConfig em_cfg{cfg.em_max_iters, cfg.em_tol, cfg.em_toeplitz};
  const EmResult result = em_fit(file.sequences, init, em_cfg);
  write_em_outputs(result, dir);

  long long n_observations = 0;
  for (const auto& seq : file.sequences) {
    for (const auto& v : seq) {
      if (v) ++n_observations;
    }
  }
  nlohmann::json meta;
  meta["n_sequences"] = file.sequences.size();
  meta["horizon"] = file.horizon;
  meta["n_observations"] = n_observations;
  meta["iterations"] = result.likelihood_trace.size() - 1;
  meta["final_log_likelihood"] = result.likelihood_trace.back();
  if (file.sequences.size() == 1) {
    meta["note"] = "single training sequence: parameter estimates carry wide error bars";
  }
  auto mout = open_out(dir / "fit_metadata.json");
  mout << meta.dump(2) << "\n";
}

void cmd_polarize(const ExperimentConfig& cfg) {
  if (cfg.retweet_path.empty() || cfg.seeds_path.empty()) {
    throw std::invalid_argument("polarize requires retweet_path and seeds_path in the config");
  }
  const auto dir = prepare_out_dir(cfg);
  write_resolved_config(cfg, dir);

  const int horizon = cfg.window_max - cfg.window_min + 1;
  const ParseReport parsed = parse_retweets(cfg.retweet_path, cfg.window_min, cfg.window_max);
  const auto records = systematic_subsample(parsed.records, cfg.subsample_n);
  const IdeologyTable seeds = read_seed_table(cfg.seeds_path);
  const UserClassification classification = classify_users(records, seeds);
  const PolarizationSeries series = polarization_series(records, classification, seeds, horizon);

  {
    auto out = open_out(dir / "polarization.csv");
    write_series_csv(series, out);
  }
  {
    auto out = open_out(dir / "classification.csv");
    out << "user,label\n";
    for (const auto& [user, label] : classification) {
      const char* name = label == Ideology::D                     ? "D"
                         : label == Ideology::R                   ? "R"
                         : label == Ideology::dropped_tie         ? "dropped_tie"
                                                                  : "dropped_low_activity";
      out << user << ',' << name << "\n";
    }
  }

  const int n_states = cfg.n_states.front();
  const DiscretizedSeries disc = discretize_series(series, n_states);

  HmbParameters params = [&] {
    if (!cfg.params_path.empty()) {
      HmbParameters loaded = read_params(cfg.params_path);
      if (loaded.space.size() != n_states) {
        throw std::invalid_argument("params_path model has a different n_states");
      }
      return loaded;
    }
    const StateSpace space(n_states);
    std::vector<BridgeSegment> segments{{1, horizon, space.max_index()}};
    const HmbParameters init{make_toeplitz_transition(n_states, cfg.base),
                             moment_sigma_init({disc.observations}), space, segments,
                             disc.initial_index};
    const EmConfig em_cfg{cfg.em_max_iters, cfg.em_tol, cfg.em_toeplitz};
    const EmResult result = em_fit({disc.observations}, init, em_cfg);
    write_em_outputs(result, dir);
    return result.params;
  }();

  NoiseModel noise;
  noise.mode = NoiseMode::pooled;
  noise.pooled = {0.0, std::max(params.sigma, k_sigma_min), 0};
  noise.gamma = 1.0;

  const BridgeProcess bridge = params.to_bridge();
  const FilterRun hmb = run_filter(disc.observations, FilterKind::hmb, bridge, noise);
  const FilterRun hmm = run_filter(disc.observations, FilterKind::hmm, bridge, noise);
  {
    auto out = open_out(dir / "hmb_run.csv");
    write_filter_run_csv(hmb, params.space, 1, out);
  }
  {
    auto out = open_out(dir / "hmm_run.csv");
    write_filter_run_csv(hmm, params.space, 1, out);
  }
  {
    auto out = open_out(dir / "estimates.csv");
    out << "day,y,gap,hmb_estimate,hmm_estimate\n";
    for (std::size_t k = 0; k < series.y.size(); ++k) {
      out << (k + 1) << ',';
      if (series.y[k]) out << fmt(*series.y[k]);
      out << ',' << (series.y[k] ? 0 : 1) << ','
          << fmt(disc.from_canonical(
                 point_estimate(hmb.posteriors[k], params.space, cfg.estimate_mode)))
          << ','
          << fmt(disc.from_canonical(
                 point_estimate(hmm.posteriors[k], params.space, cfg.estimate_mode)))
          << "\n";
    }
  }
}

}  // namespace bridgenet
