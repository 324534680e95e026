// Acceptance gate: every release-blocking behavior checked end to end, one
// PASS/FAIL line each. Exit status is the number of failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgenet/bridge.hpp"
#include "bridgenet/estimation.hpp"
#include "bridgenet/filtering.hpp"
#include "bridgenet/graph.hpp"
#include "bridgenet/harness.hpp"
#include "bridgenet/observation.hpp"
#include "bridgenet/retweet.hpp"
#include "bridgenet/transition.hpp"

using namespace bridgenet;

namespace {

const std::filesystem::path kFixtures = BRIDGENET_FIXTURE_DIR;

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    rows.push_back(split_csv(line));
  }
  return rows;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min(8, static_cast<int>(hw == 0 ? 1 : hw)));
}

// ---------------------------------------------------------------------------
// 1. Paired filter comparison: the bridge filter must beat the homogeneous
//    HMM baseline by >= 10% relative MSE at every state-space size, with the
//    paired confidence interval excluding zero, in under five minutes.
bool check_filter_superiority() {
  TempDir dir("bridgenet_acc_eval");
  ExperimentConfig cfg;
  cfg.n_states = {4, 6, 8};
  cfg.n_monte_carlo = 500;
  cfg.n_calibration_runs = 500;
  cfg.seed = 7;
  cfg.jobs = default_jobs();
  cfg.out_dir = dir.path.string();

  const double t0 = now_seconds();
  cmd_evaluate(cfg);
  const double elapsed = now_seconds() - t0;

  bool ok = true;
  const auto rows = read_csv_rows(dir.path / "evaluation.csv");
  if (rows.size() != 3) {
    std::cout << "       expected 3 evaluation rows, got " << rows.size() << "\n";
    return false;
  }
  for (const auto& row : rows) {
    const int ns = std::stoi(row[0]);
    const double hmb = std::stod(row[1]);
    const double hmm = std::stod(row[2]);
    const double rel = std::stod(row[3]);
    const int n_runs = std::stoi(row[4]);
    const double ci = std::stod(row[5]);
    const bool significant = (hmm - hmb) > ci;
    std::cout << "       N=" << ns << ": hmb=" << hmb << " hmm=" << hmm
              << " improvement=" << 100.0 * rel << "% ci_halfwidth=" << ci
              << (significant ? "" : "  [NOT SIGNIFICANT]") << "\n";
    ok = ok && n_runs == 500 && hmb < hmm && significant && rel >= 0.10;
  }
  std::cout << "       runtime " << elapsed << " s\n";
  return ok && elapsed < 300.0;
}

// ---------------------------------------------------------------------------
// 2. Bridge sampling: pins hit in 100% of 10^4 trajectories; per-time
//    occupancy within TV < 0.02 of the exactly propagated marginals.
bool check_bridge_sampling() {
  const int n_states = 6;
  const int T = 20;
  const auto P = make_toeplitz_transition(n_states, 0.25);
  const StateSpace space(n_states);
  const BridgeProcess bridge = BridgeProcess::standard(P, space, T);
  const auto exact = exact_marginals(bridge);
  const int horizon = bridge.horizon();  // 2T-1

  const int n_samples = 10000;
  std::vector<Eigen::VectorXd> counts(static_cast<std::size_t>(horizon),
                                      Eigen::VectorXd::Zero(n_states));
  std::mt19937_64 rng(0xACCE11ull);
  int pin_hits = 0;
  for (int s = 0; s < n_samples; ++s) {
    const Trajectory traj = sample_trajectory(bridge, rng);
    if (traj.states[0] == n_states - 1 && traj.states[static_cast<std::size_t>(T - 1)] == 0 &&
        traj.states[static_cast<std::size_t>(horizon - 1)] == n_states - 1) {
      ++pin_hits;
    }
    for (int t = 0; t < horizon; ++t) {
      counts[static_cast<std::size_t>(t)](traj.states[static_cast<std::size_t>(t)]) += 1.0;
    }
  }

  double max_tv = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const Eigen::VectorXd empirical = counts[static_cast<std::size_t>(t)] / n_samples;
    const double tv = 0.5 * (empirical - exact[static_cast<std::size_t>(t)]).cwiseAbs().sum();
    max_tv = std::max(max_tv, tv);
  }
  std::cout << "       pin hits " << pin_hits << "/" << n_samples << ", max per-time TV "
            << max_tv << "\n";
  return pin_hits == n_samples && max_tv < 0.02;
}

// ---------------------------------------------------------------------------
// 3 & 4. Small-instance oracles by exhaustive path enumeration.

struct SmallInstance {
  BridgeProcess bridge;
  StateSpace space;
};

std::vector<SmallInstance> small_instances(int n_states) {
  const StateSpace space(n_states);
  const auto P = make_toeplitz_transition(n_states, 0.4);
  std::vector<SmallInstance> out;
  for (const int h : {3, 5, 7}) {
    // single pinned endpoint
    out.push_back({BridgeProcess(P, space, {{1, h, 0}}, n_states - 1), space});
    // two segments: down then back up
    const int mid = (h + 1) / 2;
    out.push_back(
        {BridgeProcess(P, space, {{1, mid, 0}, {mid, h, n_states - 1}}, n_states - 1), space});
  }
  return out;
}

std::vector<std::optional<double>> random_observations(int horizon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::optional<double>> obs;
  for (int t = 0; t < horizon; ++t) {
    if (unif(rng) < 0.25) {
      obs.emplace_back(std::nullopt);
    } else {
      obs.emplace_back(0.1 + 0.8 * unif(rng));
    }
  }
  return obs;
}

// Conditional laws by brute force over all state paths: weight each path by
// base-chain probabilities, pin indicators, and emission densities, then
// marginalize. posterior[t] conditions on observations up to time t only.
struct Enumeration {
  std::vector<Eigen::VectorXd> posteriors;
  double likelihood = 0.0;  // P(y | pins): all observation factors, divided
                            // by the pin mass so it matches the bridge model
};

Enumeration enumerate_laws(const BridgeProcess& bridge,
                           const std::vector<std::optional<double>>& obs,
                           const std::function<double(double, int)>& density) {
  const int n = bridge.space().size();
  const int h = bridge.horizon();
  Enumeration out;
  out.posteriors.assign(static_cast<std::size_t>(h), Eigen::VectorXd::Zero(n));
  std::vector<Eigen::VectorXd> unnorm(static_cast<std::size_t>(h), Eigen::VectorXd::Zero(n));

  std::vector<int> path(static_cast<std::size_t>(h), 0);
  double pin_mass = 0.0;
  while (true) {
    double w = path[0] == bridge.initial_index() ? 1.0 : 0.0;
    if (w > 0.0) {
      for (int t = 0; t + 1 < h && w > 0.0; ++t) {
        w *= bridge.base()(path[static_cast<std::size_t>(t)],
                           path[static_cast<std::size_t>(t + 1)]);
      }
      for (const auto& seg : bridge.segments()) {
        if (path[static_cast<std::size_t>(seg.end_time - 1)] != seg.pin_index) w = 0.0;
      }
    }
    if (w > 0.0) {
      pin_mass += w;
      // emission factors appear causally: the posterior at time t uses
      // factors for times <= t, the likelihood uses all of them.
      double w_causal = w;
      for (int t = 0; t < h; ++t) {
        if (obs[static_cast<std::size_t>(t)]) {
          w_causal *= density(*obs[static_cast<std::size_t>(t)], path[static_cast<std::size_t>(t)]);
        }
        unnorm[static_cast<std::size_t>(t)](path[static_cast<std::size_t>(t)]) += w_causal;
      }
      out.likelihood += w_causal;
    }
    int k = h - 1;
    while (k >= 0 && path[static_cast<std::size_t>(k)] == n - 1) {
      path[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
    ++path[static_cast<std::size_t>(k)];
  }

  for (int t = 0; t < h; ++t) {
    const double total = unnorm[static_cast<std::size_t>(t)].sum();
    out.posteriors[static_cast<std::size_t>(t)] = unnorm[static_cast<std::size_t>(t)] / total;
  }
  out.likelihood /= pin_mass;
  return out;
}

bool check_filter_oracle() {
  NoiseModel noise;
  noise.mode = NoiseMode::pooled;
  noise.pooled = {0.0, 0.15, 0};

  double worst = 0.0;
  std::mt19937_64 rng(0x0F11ull);
  for (const int n_states : {2, 3}) {
    for (const auto& inst : small_instances(n_states)) {
      const auto density = [&](double z, int state) {
        return emission_likelihood(z, state, inst.space, noise);
      };
      for (int trial = 0; trial < 50; ++trial) {
        const auto obs = random_observations(inst.bridge.horizon(), rng);
        const Enumeration oracle = enumerate_laws(inst.bridge, obs, density);
        const FilterRun run = run_filter(obs, FilterKind::hmb, inst.bridge, noise);
        for (std::size_t t = 0; t < run.posteriors.size(); ++t) {
          const double err =
              (run.posteriors[t].probs - oracle.posteriors[t]).cwiseAbs().maxCoeff();
          worst = std::max(worst, err);
        }
      }
    }
  }
  std::cout << "       max |filter - enumeration| = " << worst << " over 600 runs\n";
  return worst < 1e-8;
}

bool check_likelihood_oracle() {
  const double sigma = 0.15;
  double worst_ll = 0.0;
  double worst_gamma = 0.0;
  double worst_xi = 0.0;
  std::mt19937_64 rng(0x5A11ull);
  for (const int n_states : {2, 3}) {
    for (const auto& inst : small_instances(n_states)) {
      const auto density = [&](double z, int state) {
        const double r = (z - inst.space.value(state)) / sigma;
        return std::exp(-0.5 * r * r) / (sigma * std::sqrt(2.0 * std::numbers::pi));
      };
      const HmbParameters theta{inst.bridge.base(), sigma, inst.space,
                                inst.bridge.segments(), inst.bridge.initial_index()};
      for (int trial = 0; trial < 50; ++trial) {
        const auto obs = random_observations(inst.bridge.horizon(), rng);
        const Enumeration oracle = enumerate_laws(inst.bridge, obs, density);
        const ForwardResult fwd = forward(theta, obs);
        worst_ll = std::max(worst_ll,
                            std::abs(fwd.log_likelihood - std::log(oracle.likelihood)));

        const SmoothedStats stats = smooth(theta, obs);
        for (int t = 0; t < stats.gamma.rows(); ++t) {
          worst_gamma = std::max(worst_gamma, std::abs(stats.gamma.row(t).sum() - 1.0));
        }
        for (std::size_t t = 0; t < stats.xi.size(); ++t) {
          for (int a = 0; a < stats.gamma.cols(); ++a) {
            worst_xi = std::max(
                worst_xi,
                std::abs(stats.xi[t].row(a).sum() - stats.gamma(static_cast<int>(t), a)));
          }
        }
      }
    }
  }
  std::cout << "       max |logL - enumeration| = " << worst_ll << ", max |sum(gamma)-1| = "
            << worst_gamma << ", max |sum_b(xi)-gamma| = " << worst_xi << "\n";
  return worst_ll < 1e-9 && worst_gamma < 1e-9 && worst_xi < 1e-9;
}

// ---------------------------------------------------------------------------
// 5. EM recovery on synthetic data from a known parameter point.
bool check_em_recovery() {
  const double t0 = now_seconds();
  const int n_states = 4;
  const int T = 20;
  const StateSpace space(n_states);
  const auto P_true = make_toeplitz_transition(n_states, 0.5);
  const double sigma_true = 0.1;
  const BridgeProcess truth = BridgeProcess::standard(P_true, space, T);

  std::mt19937_64 rng(2025);
  std::normal_distribution<double> gauss(0.0, sigma_true);
  std::vector<ObsSeq> sequences;
  for (int s = 0; s < 100; ++s) {
    const Trajectory traj = sample_trajectory(truth, rng);
    ObsSeq y;
    for (const int state : traj.states) {
      y.emplace_back(space.value(state) + gauss(rng));
    }
    sequences.push_back(std::move(y));
  }

  const HmbParameters init{make_toeplitz_transition(n_states, 0.25), 0.3, space,
                           truth.segments(), truth.initial_index()};

  EmConfig cfg;
  cfg.max_iters = 40;
  cfg.tol = 1e-9;
  cfg.toeplitz = false;
  const EmResult result = em_fit(sequences, init, cfg);
  const double elapsed = now_seconds() - t0;

  bool monotone = true;
  for (std::size_t i = 1; i < result.likelihood_trace.size(); ++i) {
    if (result.likelihood_trace[i] < result.likelihood_trace[i - 1] - 1e-9) monotone = false;
  }
  double max_row_tv = 0.0;
  for (int a = 0; a < n_states; ++a) {
    double tv = 0.0;
    for (int b = 0; b < n_states; ++b) {
      tv += 0.5 * std::abs(result.params.P(a, b) - P_true(a, b));
    }
    max_row_tv = std::max(max_row_tv, tv);
  }
  const double sigma_rel_err = std::abs(result.params.sigma - sigma_true) / sigma_true;
  std::cout << "       trace " << (monotone ? "nondecreasing" : "DECREASED") << " over "
            << result.likelihood_trace.size() - 1 << " iterations, max row TV = " << max_row_tv
            << ", sigma = " << result.params.sigma << " (rel err " << sigma_rel_err
            << "), runtime " << elapsed << " s\n";
  return monotone && max_row_tv <= 0.1 && sigma_rel_err <= 0.20 && elapsed < 600.0;
}

// ---------------------------------------------------------------------------
// 6. Conductance: the Fiedler sweep must agree with exact brute force on the
//    company-customer family, and brute force must reproduce hand values.
bool check_conductance_oracle() {
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<int> pick_m(1, 5);
  std::uniform_real_distribution<double> pick_w(0.05, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = pick_m(rng);
    std::uniform_int_distribution<int> pick_fans(1, 11 - m);
    const CommunityLayout layout{m, pick_fans(rng)};
    const WeightedGraph g = build_company_customer_graph(layout, pick_w(rng));
    const double by_sweep = graph_conductance_sweep(g).value;
    const double by_enum = graph_conductance_exact(g).value;
    worst = std::max(worst, std::abs(by_sweep - by_enum));
  }

  const WeightedGraph cycle(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}});
  const double cycle_phi = graph_conductance_exact(cycle).value;

  const WeightedGraph triangles = read_edge_list(kFixtures / "bridged_triangles.tsv");
  const double triangle_phi = graph_conductance_exact(triangles).value;

  std::cout << "       max |sweep - exact| = " << worst << " over 200 graphs; 4-cycle = "
            << cycle_phi << ", bridged triangles = " << triangle_phi << " (want "
            << 0.1 / 6.1 << ")\n";
  return worst <= 1e-12 && cycle_phi == 0.5 && triangle_phi == 0.1 / 6.1;
}

// ---------------------------------------------------------------------------
// 7. Metric co-movement along noiseless trajectories.
bool check_metric_comovement() {
  TempDir dir("bridgenet_acc_metrics");
  ExperimentConfig cfg;
  cfg.n_states = {6};
  cfg.n_monte_carlo = 100;
  cfg.seed = 11;
  cfg.jobs = default_jobs();
  cfg.out_dir = dir.path.string();
  cmd_metrics_compare(cfg);

  bool boundaries_ok = true;
  const auto rows = read_csv_rows(dir.path / "metrics_compare.csv");
  for (const auto& row : rows) {
    const int t = std::stoi(row[1]);
    const double w = std::stod(row[2]);
    const double phi = std::stod(row[3]);
    const double lambda2 = std::stod(row[4]);
    if (t == cfg.T) {
      boundaries_ok = boundaries_ok && w == 0.0 && phi == 0.0 && lambda2 == 0.0;
    }
    if (t == 1 || t == 2 * cfg.T - 1) {
      boundaries_ok = boundaries_ok && phi > 0.0 && lambda2 > 0.0;
    }
  }

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
  const double mean_rho = summary.at("mean_spearman").get<double>();
  std::cout << "       boundaries " << (boundaries_ok ? "exact" : "VIOLATED")
            << ", mean Spearman = " << mean_rho << " over "
            << summary.at("n_trajectories").get<int>() << " trajectories\n";
  return boundaries_ok && mean_rho >= 0.9;
}

// ---------------------------------------------------------------------------
// 8. Residual Gaussianity of the calibrated noise model.
bool check_noise_gaussianity() {
  TempDir dir("bridgenet_acc_cal");
  ExperimentConfig cfg;
  cfg.n_states = {6};
  cfg.n_calibration_runs = 100;
  cfg.seed = 21;  // documented alternate: 6
  cfg.jobs = default_jobs();
  cfg.out_dir = dir.path.string();
  cmd_calibrate(cfg);

  const auto rows = read_csv_rows(dir.path / "ks_report.csv");
  bool ok = true;
  int tested = 0;
  double min_p = 1.0;
  for (const auto& row : rows) {
    const long long n_samples = std::stoll(row[2]);
    const bool degenerate = row[6] == "1";
    const bool ks_tested = row[7] == "1";
    const double p = std::stod(row[9]);
    if (degenerate || n_samples < 100) continue;
    ++tested;
    min_p = std::min(min_p, p);
    ok = ok && ks_tested && p > 0.05;
  }
  std::cout << "       " << tested << " states tested, min KS p-value = " << min_p << "\n";
  return ok && tested >= 4;
}

// ---------------------------------------------------------------------------
// 9. Retweet pipeline determinism against the hand-computed fixture.
bool check_retweet_pipeline() {
  const auto run_once = [&]() {
    const ParseReport parsed = parse_retweets(kFixtures / "retweets.tsv", 1, 10);
    const IdeologyTable seeds = read_seed_table(kFixtures / "seed_accounts.csv");
    const UserClassification cls = classify_users(parsed.records, seeds);
    const PolarizationSeries series = polarization_series(parsed.records, cls, seeds, 10);
    std::ostringstream csv;
    write_series_csv(series, csv);
    return std::make_tuple(cls, series, csv.str());
  };
  const auto [cls_a, series_a, csv_a] = run_once();
  const auto [cls_b, series_b, csv_b] = run_once();

  const std::string golden =
      "day,y,intra,cross,gap\n"
      "1,1,3,0,0\n"
      "2,0.66666666666666663,4,2,0\n"
      "3,0.5,2,2,0\n"
      "4,0.25,1,3,0\n"
      "5,0.5,2,2,0\n"
      "6,0.83333333333333337,5,1,0\n"
      "7,1,4,0,0\n"
      "8,,0,0,1\n"
      "9,1,4,0,0\n"
      "10,1,3,0,0\n";

  const UserClassification expected_cls = {
      {"uAda", Ideology::D},          {"uBen", Ideology::D},
      {"uCal", Ideology::D},          {"uRex", Ideology::R},
      {"uSam", Ideology::R},          {"uVic", Ideology::R},
      {"uTam", Ideology::dropped_tie}, {"uNed", Ideology::dropped_tie},
      {"uLow", Ideology::dropped_low_activity}};

  const bool deterministic = csv_a == csv_b && cls_a == cls_b && series_a.y == series_b.y;
  const bool golden_ok = csv_a == golden;
  const bool cls_ok = cls_a == expected_cls;
  const bool five_sixths = series_a.y[5].has_value() && *series_a.y[5] == 5.0 / 6.0;
  std::cout << "       csv " << (golden_ok ? "matches golden bytes" : "DIFFERS")
            << ", classification " << (cls_ok ? "exact" : "WRONG") << ", repeat runs "
            << (deterministic ? "identical" : "DIFFER") << ", y(6) == 5/6: "
            << (five_sixths ? "yes" : "NO") << "\n";
  return deterministic && golden_ok && cls_ok && five_sixths;
}

// ---------------------------------------------------------------------------
// 10. End-to-end polarize on a synthetic month of retweets: the fitted
//     bridge filter must beat the homogeneous baseline in >= 80% of 200
//     paired replications on data generated from the fitted model.
bool check_polarize_end_to_end() {
  TempDir dir("bridgenet_acc_polarize");

  // Synthesize 30 days: intra-retweet probability starts high, dips to its
  // low mid-month, and recovers, so the series has a bridge-like shape.
  const auto tsv_path = dir.path / "retweets.tsv";
  const auto seeds_path = dir.path / "seeds.csv";
  {
    std::ofstream seeds(seeds_path);
    seeds << "account,party\n";
    for (int i = 0; i < 4; ++i) seeds << "seedD" << i << ",D\n";
    for (int i = 0; i < 4; ++i) seeds << "seedR" << i << ",R\n";
  }
  {
    std::ofstream tsv(tsv_path);
    std::mt19937_64 rng(778899);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_seed(0, 3);
    for (int day = 1; day <= 30; ++day) {
      const double dip = 1.0 - std::abs(day - 15.5) / 14.5;  // 0 at the ends, 1 mid-month
      const double p_cross = 0.05 + 0.45 * dip;
      for (int u = 0; u < 8; ++u) {
        const bool user_d = u < 4;
        const int n_retweets = 1 + (unif(rng) < 0.5 ? 1 : 0);
        for (int k = 0; k < n_retweets; ++k) {
          const bool cross = unif(rng) < p_cross;
          const bool author_d = cross ? !user_d : user_d;
          tsv << day << "\tuser" << u << "\t" << (author_d ? "seedD" : "seedR")
              << pick_seed(rng) << "\n";
        }
      }
    }
  }

  ExperimentConfig cfg;
  cfg.retweet_path = tsv_path.string();
  cfg.seeds_path = seeds_path.string();
  cfg.window_min = 1;
  cfg.window_max = 30;
  cfg.n_states = {4};
  cfg.em_toeplitz = true;
  cfg.em_max_iters = 30;
  cfg.seed = 3;
  cfg.out_dir = dir.path.string();
  cmd_polarize(cfg);

  const HmbParameters fitted = read_params(dir.path / "params.json");
  const BridgeProcess bridge = fitted.to_bridge();
  const double sigma = std::max(fitted.sigma, k_sigma_min);
  NoiseModel noise;
  noise.mode = NoiseMode::pooled;
  noise.pooled = {0.0, sigma, 0};

  std::mt19937_64 rng(0xE2Eull);
  std::normal_distribution<double> gauss(0.0, sigma);
  int hmb_wins = 0;
  const int n_reps = 200;
  for (int rep = 0; rep < n_reps; ++rep) {
    const Trajectory traj = sample_trajectory(bridge, rng);
    std::vector<std::optional<double>> obs;
    for (const int state : traj.states) {
      obs.emplace_back(fitted.space.value(state) + gauss(rng));
    }
    FilterRun hmb = run_filter(obs, FilterKind::hmb, bridge, noise);
    FilterRun hmm = run_filter(obs, FilterKind::hmm, bridge, noise);
    hmb.truth = traj.states;
    hmm.truth = traj.states;
    if (mse(hmb, fitted.space, EstimateMode::mean) <=
        mse(hmm, fitted.space, EstimateMode::mean)) {
      ++hmb_wins;
    }
  }
  std::cout << "       fitted sigma = " << fitted.sigma << ", bridge filter wins " << hmb_wins
            << "/" << n_reps << " paired replications\n";
  return hmb_wins >= 160;
}

struct Criterion {
  std::string label;
  std::function<bool()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"filter superiority over HMM baseline", check_filter_superiority},
      {"bridge sampling hits pins and exact marginals", check_bridge_sampling},
      {"filter posterior matches path enumeration", check_filter_oracle},
      {"likelihood and smoother match enumeration", check_likelihood_oracle},
      {"EM recovers synthetic parameters monotonically", check_em_recovery},
      {"conductance sweep matches exact brute force", check_conductance_oracle},
      {"conductance and algebraic connectivity co-move", check_metric_comovement},
      {"calibrated residuals pass per-state KS tests", check_noise_gaussianity},
      {"retweet pipeline reproduces hand-computed series", check_retweet_pipeline},
      {"fitted bridge filter wins paired end-to-end runs", check_polarize_end_to_end},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    bool ok = false;
    std::string note;
    try {
      ok = criteria[i].run();
    } catch (const std::exception& e) {
      note = std::string(" (exception: ") + e.what() + ")";
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << (i + 1) << ": "
              << criteria[i].label << note << "\n";
    if (!ok) ++failures;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed\n"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criteria FAILED\n");
  return failures;
}
