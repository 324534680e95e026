#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <vector>

#include "bridgenet/bridge.hpp"
#include "bridgenet/estimation.hpp"
#include "bridgenet/filtering.hpp"
#include "bridgenet/graph.hpp"
#include "bridgenet/observation.hpp"
#include "bridgenet/retweet.hpp"
#include "bridgenet/state_space.hpp"
#include "bridgenet/transition.hpp"

namespace py = pybind11;
using namespace bridgenet;

namespace {

Eigen::MatrixXd posterior_matrix(const FilterRun& run) {
  if (run.posteriors.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(run.posteriors.size()),
                      run.posteriors.front().probs.size());
  for (std::size_t t = 0; t < run.posteriors.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = run.posteriors[t].probs.transpose();
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_bridgenet, m) {
  m.doc() = "Segregation dynamics as a hidden Markov bridge: C++ core bindings";

  py::class_<StateSpace>(m, "StateSpace")
      .def(py::init<int>(), py::arg("n_states"))
      .def("__len__", &StateSpace::size)
      .def("value", &StateSpace::value, py::arg("index"))
      .def("values", &StateSpace::values)
      .def("nearest_index", &StateSpace::nearest_index, py::arg("v"))
      .def_property_readonly("min_index", &StateSpace::min_index)
      .def_property_readonly("max_index", &StateSpace::max_index);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def(py::init<Eigen::MatrixXd>(), py::arg("entries"))
      .def("__len__", &TransitionMatrix::size)
      .def("__call__", &TransitionMatrix::operator(), py::arg("a"), py::arg("b"))
      .def_property_readonly("matrix", &TransitionMatrix::matrix,
                             py::return_value_policy::copy);

  m.def("make_toeplitz_transition", &make_toeplitz_transition, py::arg("n_states"),
        py::arg("base") = 0.25);
  m.def("matrix_power", &matrix_power, py::arg("p"), py::arg("k"));

  py::class_<BridgeSegment>(m, "BridgeSegment")
      .def(py::init([](int start_time, int end_time, int pin_index) {
             return BridgeSegment{start_time, end_time, pin_index};
           }),
           py::arg("start_time"), py::arg("end_time"), py::arg("pin_index"))
      .def_readonly("start_time", &BridgeSegment::start_time)
      .def_readonly("end_time", &BridgeSegment::end_time)
      .def_readonly("pin_index", &BridgeSegment::pin_index);

  py::class_<BridgeProcess>(m, "BridgeProcess")
      .def(py::init<TransitionMatrix, StateSpace, std::vector<BridgeSegment>, int>(),
           py::arg("base"), py::arg("space"), py::arg("segments"), py::arg("initial_index"))
      .def_static("standard", &BridgeProcess::standard, py::arg("base"), py::arg("space"),
                  py::arg("T"))
      .def_property_readonly("space", &BridgeProcess::space)
      .def_property_readonly("segments", &BridgeProcess::segments)
      .def_property_readonly("initial_index", &BridgeProcess::initial_index)
      .def_property_readonly("horizon", &BridgeProcess::horizon)
      .def_property_readonly("first_time", &BridgeProcess::first_time);

  py::class_<BridgeTransition>(m, "BridgeTransition")
      .def_readonly("probs", &BridgeTransition::probs)
      .def_readonly("reachable", &BridgeTransition::reachable);
  m.def("bridge_transition", &bridge_transition, py::arg("bridge"), py::arg("t"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states);
  m.def(
      "sample_trajectory",
      [](const BridgeProcess& bridge, std::uint64_t seed) {
        return sample_trajectory(bridge, seed);
      },
      py::arg("bridge"), py::arg("seed"));
  m.def("exact_marginals", &exact_marginals, py::arg("bridge"));

  // --- graph metrics ---
  py::class_<CommunityLayout>(m, "CommunityLayout")
      .def(py::init([](int m_utilitarian, int n_fans) {
             return CommunityLayout{m_utilitarian, n_fans};
           }),
           py::arg("m_utilitarian"), py::arg("n_fans"))
      .def_readonly("m_utilitarian", &CommunityLayout::m_utilitarian)
      .def_readonly("n_fans", &CommunityLayout::n_fans)
      .def_property_readonly("total_vertices", &CommunityLayout::total_vertices)
      .def_property_readonly("company_index", &CommunityLayout::company_index);

  py::class_<Edge>(m, "Edge")
      .def(py::init([](int i, int j, double weight) { return Edge{i, j, weight}; }),
           py::arg("i"), py::arg("j"), py::arg("weight"))
      .def_readonly("i", &Edge::i)
      .def_readonly("j", &Edge::j)
      .def_readonly("weight", &Edge::weight);

  py::class_<WeightedGraph>(m, "WeightedGraph")
      .def(py::init<int, std::vector<Edge>>(), py::arg("n_vertices"), py::arg("edges"))
      .def_property_readonly("n_vertices", &WeightedGraph::n_vertices)
      .def_property_readonly("edges", &WeightedGraph::edges)
      .def("weighted_degrees", &WeightedGraph::weighted_degrees)
      .def("total_weight", &WeightedGraph::total_weight)
      .def("adjacency", &WeightedGraph::adjacency)
      .def("connected", &WeightedGraph::connected_over_positive_edges);

  m.def("build_company_customer_graph", &build_company_customer_graph, py::arg("layout"),
        py::arg("w"));

  py::class_<Cut>(m, "Cut")
      .def(py::init([](std::vector<int> subset) { return Cut{std::move(subset)}; }),
           py::arg("subset"))
      .def_readonly("subset", &Cut::subset);
  py::class_<ConductanceResult>(m, "ConductanceResult")
      .def_readonly("value", &ConductanceResult::value)
      .def_readonly("cut", &ConductanceResult::cut);

  m.def("conductance_of_cut", &conductance_of_cut, py::arg("graph"), py::arg("cut"));
  m.def("graph_conductance_exact", &graph_conductance_exact, py::arg("graph"));
  m.def("graph_conductance_sweep", &graph_conductance_sweep, py::arg("graph"));
  m.def("laplacian", &laplacian, py::arg("graph"));
  m.def("algebraic_connectivity", &algebraic_connectivity, py::arg("graph"));

  // --- observation / noise model ---
  py::enum_<ConductanceMethod>(m, "ConductanceMethod")
      .value("exact", ConductanceMethod::exact)
      .value("sweep", ConductanceMethod::sweep);
  py::enum_<NoiseMode>(m, "NoiseMode")
      .value("per_state", NoiseMode::per_state)
      .value("pooled", NoiseMode::pooled);

  m.def(
      "sample_edges",
      [](const WeightedGraph& g, double gamma, std::uint64_t seed) {
        return sample_edges(g, EdgeSampleConfig{gamma, seed});
      },
      py::arg("graph"), py::arg("gamma"), py::arg("seed"));
  m.def("observed_conductance", &observed_conductance, py::arg("subgraph"),
        py::arg("method") = ConductanceMethod::sweep);

  py::class_<NoiseParams>(m, "NoiseParams")
      .def(py::init([](double mu, double sigma, long long n_samples) {
             return NoiseParams{mu, sigma, n_samples};
           }),
           py::arg("mu") = 0.0, py::arg("sigma") = k_sigma_min, py::arg("n_samples") = 0)
      .def_readonly("mu", &NoiseParams::mu)
      .def_readonly("sigma", &NoiseParams::sigma)
      .def_readonly("n_samples", &NoiseParams::n_samples);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("mode", &NoiseModel::mode)
      .def_readwrite("per_state", &NoiseModel::per_state)
      .def_readwrite("pooled", &NoiseModel::pooled)
      .def_readwrite("gamma", &NoiseModel::gamma)
      .def("params_for", &NoiseModel::params_for, py::arg("state_index"),
           py::return_value_policy::copy);

  py::class_<StateCalibration>(m, "StateCalibration")
      .def_readonly("n_samples", &StateCalibration::n_samples)
      .def_readonly("pooled_fallback", &StateCalibration::pooled_fallback)
      .def_readonly("degenerate", &StateCalibration::degenerate)
      .def_readonly("ks_tested", &StateCalibration::ks_tested)
      .def_readonly("ks_statistic", &StateCalibration::ks_statistic)
      .def_readonly("p_value", &StateCalibration::p_value)
      .def_readonly("residuals", &StateCalibration::residuals);
  py::class_<CalibrationReport>(m, "CalibrationReport")
      .def_readonly("n_runs", &CalibrationReport::n_runs)
      .def_readonly("states", &CalibrationReport::states);

  m.def(
      "calibrate_noise",
      [](const CommunityLayout& layout, const BridgeProcess& bridge, double gamma,
         std::uint64_t seed, int n_runs, ConductanceMethod method) {
        return calibrate_noise(layout, bridge, EdgeSampleConfig{gamma, seed}, n_runs, method);
      },
      py::arg("layout"), py::arg("bridge"), py::arg("gamma"), py::arg("seed"),
      py::arg("n_runs"), py::arg("method") = ConductanceMethod::sweep);
  m.def("ks_test_gaussian", &ks_test_gaussian, py::arg("samples"), py::arg("mu"),
        py::arg("sigma"));
  m.def("emission_likelihood", &emission_likelihood, py::arg("z"), py::arg("state_index"),
        py::arg("space"), py::arg("noise"));
  m.def("write_noise_model", &write_noise_model, py::arg("model"), py::arg("path"));
  m.def("read_noise_model", &read_noise_model, py::arg("path"));

  // --- filtering ---
  py::enum_<FilterKind>(m, "FilterKind")
      .value("hmb", FilterKind::hmb)
      .value("hmm", FilterKind::hmm);
  py::enum_<EstimateMode>(m, "EstimateMode")
      .value("mean", EstimateMode::mean)
      .value("map", EstimateMode::map);

  py::class_<FilterRun>(m, "FilterRun")
      .def_property_readonly("posteriors", &posterior_matrix)
      .def_readonly("observations", &FilterRun::observations)
      .def_readwrite("truth", &FilterRun::truth);

  m.def("run_filter", &run_filter, py::arg("observations"), py::arg("kind"),
        py::arg("bridge"), py::arg("noise"));
  m.def(
      "point_estimates",
      [](const FilterRun& run, const StateSpace& space, EstimateMode mode) {
        std::vector<double> out;
        out.reserve(run.posteriors.size());
        for (const auto& q : run.posteriors) out.push_back(point_estimate(q, space, mode));
        return out;
      },
      py::arg("run"), py::arg("space"), py::arg("mode") = EstimateMode::mean);
  m.def("mse", &mse, py::arg("run"), py::arg("space"), py::arg("mode") = EstimateMode::mean);

  // --- estimation ---
  py::class_<HmbParameters>(m, "HmbParameters")
      .def(py::init([](const TransitionMatrix& P, double sigma, const StateSpace& space,
                       std::vector<BridgeSegment> segments, int initial_index) {
             return HmbParameters{P, sigma, space, std::move(segments), initial_index};
           }),
           py::arg("P"), py::arg("sigma"), py::arg("space"), py::arg("segments"),
           py::arg("initial_index"))
      .def_readonly("P", &HmbParameters::P)
      .def_readonly("sigma", &HmbParameters::sigma)
      .def_readonly("space", &HmbParameters::space)
      .def_readonly("segments", &HmbParameters::segments)
      .def_readonly("initial_index", &HmbParameters::initial_index)
      .def("to_bridge", &HmbParameters::to_bridge);

  m.def(
      "forward_log_likelihood",
      [](const HmbParameters& theta, const ObsSeq& y) {
        return forward(theta, y).log_likelihood;
      },
      py::arg("theta"), py::arg("observations"));

  py::class_<EmConfig>(m, "EmConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &EmConfig::max_iters)
      .def_readwrite("tol", &EmConfig::tol)
      .def_readwrite("toeplitz", &EmConfig::toeplitz)
      .def_readwrite("ascent_steps", &EmConfig::ascent_steps);

  py::class_<EmResult>(m, "EmResult")
      .def_readonly("params", &EmResult::params)
      .def_readonly("likelihood_trace", &EmResult::likelihood_trace);

  m.def("em_fit", &em_fit, py::arg("sequences"), py::arg("init"),
        py::arg("config") = EmConfig{});
  m.def("write_params", &write_params, py::arg("params"), py::arg("path"));
  m.def("read_params", &read_params, py::arg("path"));

  // --- retweet pipeline ---
  py::class_<RetweetRecord>(m, "RetweetRecord")
      .def(py::init([](int day, std::string retweeter, std::string author) {
             return RetweetRecord{day, std::move(retweeter), std::move(author)};
           }),
           py::arg("day"), py::arg("retweeter"), py::arg("author"))
      .def_readonly("day", &RetweetRecord::day)
      .def_readonly("retweeter", &RetweetRecord::retweeter)
      .def_readonly("author", &RetweetRecord::author);

  py::class_<ParseReport>(m, "ParseReport")
      .def_readonly("records", &ParseReport::records)
      .def_readonly("malformed_lines", &ParseReport::malformed_lines)
      .def_readonly("data_lines", &ParseReport::data_lines);

  py::enum_<Ideology>(m, "Ideology")
      .value("D", Ideology::D)
      .value("R", Ideology::R)
      .value("dropped_tie", Ideology::dropped_tie)
      .value("dropped_low_activity", Ideology::dropped_low_activity);

  py::class_<IdeologyTable>(m, "IdeologyTable")
      .def(py::init([](std::map<std::string, char> party) {
             return IdeologyTable{std::move(party)};
           }),
           py::arg("party"))
      .def_readonly("party", &IdeologyTable::party);

  py::class_<PolarizationSeries>(m, "PolarizationSeries")
      .def_readonly("y", &PolarizationSeries::y)
      .def_readonly("intra", &PolarizationSeries::intra)
      .def_readonly("cross", &PolarizationSeries::cross);

  py::class_<DiscretizedSeries>(m, "DiscretizedSeries")
      .def_readonly("observations", &DiscretizedSeries::observations)
      .def_readonly("lo", &DiscretizedSeries::lo)
      .def_readonly("hi", &DiscretizedSeries::hi)
      .def_readonly("n_states", &DiscretizedSeries::n_states)
      .def_readonly("initial_index", &DiscretizedSeries::initial_index)
      .def("to_canonical", &DiscretizedSeries::to_canonical, py::arg("y"))
      .def("from_canonical", &DiscretizedSeries::from_canonical, py::arg("u"));

  m.def("parse_retweets", &parse_retweets, py::arg("path"), py::arg("day_min"),
        py::arg("day_max"));
  m.def("systematic_subsample", &systematic_subsample, py::arg("records"), py::arg("n"));
  m.def("read_seed_table", &read_seed_table, py::arg("path"));
  m.def("classify_users", &classify_users, py::arg("records"), py::arg("seeds"));
  m.def("polarization_series", &polarization_series, py::arg("records"),
        py::arg("classification"), py::arg("seeds"), py::arg("horizon"));
  m.def("discretize_series", &discretize_series, py::arg("series"), py::arg("n_states"));
}
