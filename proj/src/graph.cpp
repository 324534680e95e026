#include "bridgenet/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bridgenet/errors.hpp"

namespace bridgenet {

WeightedGraph::WeightedGraph(int n_vertices, std::vector<Edge> edges)
    : n_vertices_(n_vertices), edges_(std::move(edges)) {
  if (n_vertices_ < 1) {
    throw std::invalid_argument("WeightedGraph: need at least one vertex");
  }
  std::vector<Edge> normalized;
  normalized.reserve(edges_.size());
  for (const Edge& e : edges_) {
    if (e.i == e.j) {
      throw std::invalid_argument("WeightedGraph: self-loop");
    }
    if (e.i < 0 || e.j < 0 || e.i >= n_vertices_ || e.j >= n_vertices_) {
      throw std::invalid_argument("WeightedGraph: vertex index out of range");
    }
    if (e.weight < 0.0) {
      throw std::invalid_argument("WeightedGraph: negative weight");
    }
    normalized.push_back(e.i < e.j ? e : Edge{e.j, e.i, e.weight});
  }
  std::sort(normalized.begin(), normalized.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < normalized.size(); ++k) {
    if (normalized[k].i == normalized[k - 1].i && normalized[k].j == normalized[k - 1].j) {
      throw std::invalid_argument("WeightedGraph: duplicate edge");
    }
  }
  edges_ = std::move(normalized);
}

std::vector<double> WeightedGraph::weighted_degrees() const {
  std::vector<double> deg(static_cast<std::size_t>(n_vertices_), 0.0);
  for (const Edge& e : edges_) {
    deg[static_cast<std::size_t>(e.i)] += e.weight;
    deg[static_cast<std::size_t>(e.j)] += e.weight;
  }
  return deg;
}

double WeightedGraph::total_weight() const {
  double total = 0.0;
  for (const Edge& e : edges_) total += e.weight;
  return total;
}

Eigen::MatrixXd WeightedGraph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_vertices_, n_vertices_);
  for (const Edge& e : edges_) {
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return a;
}

std::vector<int> WeightedGraph::positive_components() const {
  std::vector<int> comp(static_cast<std::size_t>(n_vertices_), -1);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_vertices_));
  for (const Edge& e : edges_) {
    if (e.weight > 0.0) {
      adj[static_cast<std::size_t>(e.i)].push_back(e.j);
      adj[static_cast<std::size_t>(e.j)].push_back(e.i);
    }
  }
  int next = 0;
  std::vector<int> stack;
  for (int v = 0; v < n_vertices_; ++v) {
    if (comp[static_cast<std::size_t>(v)] != -1) continue;
    comp[static_cast<std::size_t>(v)] = next;
    stack.push_back(v);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(w)] == -1) {
          comp[static_cast<std::size_t>(w)] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

bool WeightedGraph::connected_over_positive_edges() const {
  const auto comp = positive_components();
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

WeightedGraph build_company_customer_graph(const CommunityLayout& layout, double w) {
  if (layout.m_utilitarian < 1 || layout.n_fans < 1) {
    throw std::invalid_argument("CommunityLayout: m_utilitarian and n_fans must be >= 1");
  }
  if (w < 0.0 || w > 1.0) {
    throw std::invalid_argument("build_company_customer_graph: w must be in [0,1]");
  }
  const int m = layout.m_utilitarian;
  const int company = layout.company_index();
  const int n_total = layout.total_vertices();

  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) edges.push_back({i, j, 1.0});
    edges.push_back({i, company, w});
  }
  for (int i = company + 1; i < n_total; ++i) {
    edges.push_back({company, i, 1.0});
    for (int j = i + 1; j < n_total; ++j) edges.push_back({i, j, 1.0});
  }
  return WeightedGraph(n_total, std::move(edges));
}

namespace {

struct CutAccumulator {
  double cross = 0.0;
  double vol_s = 0.0;
  double vol_total = 0.0;
};

double cut_value(const CutAccumulator& acc) {
  const double small = std::min(acc.vol_s, acc.vol_total - acc.vol_s);
  if (small <= 0.0) {
    throw UndefinedConductanceError("conductance: a side of the cut has zero volume");
  }
  return acc.cross / small;
}

}  // namespace

double conductance_of_cut(const WeightedGraph& g, const Cut& cut) {
  const int n = g.n_vertices();
  if (cut.subset.empty() || static_cast<int>(cut.subset.size()) >= n) {
    throw std::invalid_argument("Cut: subset must be a nonempty proper subset");
  }
  std::vector<char> in_s(static_cast<std::size_t>(n), 0);
  for (int v : cut.subset) {
    if (v < 0 || v >= n) throw std::invalid_argument("Cut: vertex out of range");
    if (in_s[static_cast<std::size_t>(v)]) throw std::invalid_argument("Cut: duplicate vertex");
    in_s[static_cast<std::size_t>(v)] = 1;
  }
  CutAccumulator acc;
  for (const Edge& e : g.edges()) {
    const bool a = in_s[static_cast<std::size_t>(e.i)];
    const bool b = in_s[static_cast<std::size_t>(e.j)];
    if (a != b) acc.cross += e.weight;
    acc.vol_total += 2.0 * e.weight;
    if (a) acc.vol_s += e.weight;
    if (b) acc.vol_s += e.weight;
  }
  return cut_value(acc);
}

ConductanceResult graph_conductance_exact(const WeightedGraph& g) {
  const int n = g.n_vertices();
  if (n > 24) {
    throw TooLargeError("graph_conductance_exact: more than 24 vertices, use sweep");
  }
  if (g.total_weight() <= 0.0) {
    throw std::invalid_argument("graph_conductance_exact: graph has no positive weight");
  }
  const auto deg = g.weighted_degrees();
  const double vol_total = std::accumulate(deg.begin(), deg.end(), 0.0);

  // Gray-code walk over all subsets containing vertex 0, flipping one vertex
  // per step so cross weight and volume update incrementally.
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    adj[static_cast<std::size_t>(e.i)].push_back({e.j, e.weight});
    adj[static_cast<std::size_t>(e.j)].push_back({e.i, e.weight});
  }

  std::vector<char> in_s(static_cast<std::size_t>(n), 0);
  in_s[0] = 1;
  double cross = deg[0];  // S = {0}: every incident edge crosses
  double vol_s = deg[0];

  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;

  auto consider = [&](std::uint32_t mask) {
    const double small = std::min(vol_s, vol_total - vol_s);
    if (small <= 0.0) return;  // undefined cut, not a candidate
    const double value = cross / small;
    if (value < best) {
      best = value;
      best_mask = mask;
    }
  };

  const std::uint64_t count = 1ull << (n - 1);  // subsets over vertices 1..n-1
  std::uint32_t gray = 0;
  consider(gray);
  for (std::uint64_t k = 1; k < count; ++k) {
    const std::uint32_t next_gray = static_cast<std::uint32_t>(k ^ (k >> 1));
    const std::uint32_t changed = gray ^ next_gray;
    int v = 1;
    while (!((changed >> (v - 1)) & 1u)) ++v;
    const bool joining = !in_s[static_cast<std::size_t>(v)];
    in_s[static_cast<std::size_t>(v)] = joining ? 1 : 0;
    vol_s += joining ? deg[static_cast<std::size_t>(v)] : -deg[static_cast<std::size_t>(v)];
    for (const auto& [u, w] : adj[static_cast<std::size_t>(v)]) {
      const bool u_in = in_s[static_cast<std::size_t>(u)];
      // After the flip, edge (v,u) crosses iff sides differ.
      if (u_in != joining) {
        cross += w;
      } else {
        cross -= w;
      }
    }
    gray = next_gray;
    const std::uint32_t full = static_cast<std::uint32_t>(count - 1);
    if (gray != full) consider(gray);  // S = V is not a cut
  }

  if (!std::isfinite(best)) {
    throw UndefinedConductanceError("graph_conductance_exact: no cut with positive volumes");
  }
  ConductanceResult res;
  res.value = best;
  res.cut.subset.push_back(0);
  for (int v = 1; v < n; ++v) {
    if ((best_mask >> (v - 1)) & 1u) res.cut.subset.push_back(v);
  }
  return res;
}

namespace {

/// Fiedler vector of the Laplacian restricted to the given vertices.
Eigen::VectorXd fiedler_vector(const WeightedGraph& g, const std::vector<int>& verts) {
  const int k = static_cast<int>(verts.size());
  std::vector<int> pos(static_cast<std::size_t>(g.n_vertices()), -1);
  for (int idx = 0; idx < k; ++idx) pos[static_cast<std::size_t>(verts[idx])] = idx;

  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  for (const Edge& e : g.edges()) {
    const int a = pos[static_cast<std::size_t>(e.i)];
    const int b = pos[static_cast<std::size_t>(e.j)];
    if (a < 0 || b < 0 || e.weight <= 0.0) continue;
    l(a, b) -= e.weight;
    l(b, a) -= e.weight;
    l(a, a) += e.weight;
    l(b, b) += e.weight;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  return solver.eigenvectors().col(1);
}

}  // namespace

ConductanceResult graph_conductance_sweep(const WeightedGraph& g) {
  const int n = g.n_vertices();
  const auto deg = g.weighted_degrees();
  if (g.total_weight() <= 0.0) {
    throw UndefinedConductanceError("graph_conductance_sweep: graph has no positive weight");
  }

  // Vertices with zero volume never change a cut's value; sweep over the rest.
  std::vector<int> active;
  for (int v = 0; v < n; ++v) {
    if (deg[static_cast<std::size_t>(v)] > 0.0) active.push_back(v);
  }

  // Disconnected over positive edges with two positive-volume sides: a
  // component is a zero-conductance cut.
  const auto comp = g.positive_components();
  {
    std::vector<double> comp_vol;
    for (int v : active) {
      const int c = comp[static_cast<std::size_t>(v)];
      if (c >= static_cast<int>(comp_vol.size())) comp_vol.resize(static_cast<std::size_t>(c) + 1, 0.0);
      comp_vol[static_cast<std::size_t>(c)] += deg[static_cast<std::size_t>(v)];
    }
    int positive_comps = 0;
    int chosen = -1;
    for (std::size_t c = 0; c < comp_vol.size(); ++c) {
      if (comp_vol[c] > 0.0) {
        ++positive_comps;
        if (chosen < 0) chosen = static_cast<int>(c);
      }
    }
    if (positive_comps >= 2) {
      ConductanceResult res;
      res.value = 0.0;
      for (int v : active) {
        if (comp[static_cast<std::size_t>(v)] == chosen) res.cut.subset.push_back(v);
      }
      return res;
    }
  }

  if (active.size() < 2) {
    throw UndefinedConductanceError("graph_conductance_sweep: no cut with positive volumes");
  }

  const Eigen::VectorXd fiedler = fiedler_vector(g, active);
  std::vector<int> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fiedler(a) != fiedler(b)) return fiedler(a) < fiedler(b);
    return active[static_cast<std::size_t>(a)] < active[static_cast<std::size_t>(b)];  // ties by index
  });

  std::vector<char> in_s(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    adj[static_cast<std::size_t>(e.i)].push_back({e.j, e.weight});
    adj[static_cast<std::size_t>(e.j)].push_back({e.i, e.weight});
  }
  const double vol_total =
      std::accumulate(deg.begin(), deg.end(), 0.0);

  double cross = 0.0;
  double vol_s = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_prefix = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const int v = active[static_cast<std::size_t>(order[k])];
    in_s[static_cast<std::size_t>(v)] = 1;
    vol_s += deg[static_cast<std::size_t>(v)];
    for (const auto& [u, w] : adj[static_cast<std::size_t>(v)]) {
      cross += in_s[static_cast<std::size_t>(u)] ? -w : w;
    }
    const double small = std::min(vol_s, vol_total - vol_s);
    if (small <= 0.0) continue;
    const double value = cross / small;
    if (value < best) {
      best = value;
      best_prefix = k + 1;
    }
  }
  if (!std::isfinite(best)) {
    throw UndefinedConductanceError("graph_conductance_sweep: no valid prefix cut");
  }
  ConductanceResult res;
  res.value = best;
  for (std::size_t k = 0; k < best_prefix; ++k) {
    res.cut.subset.push_back(active[static_cast<std::size_t>(order[k])]);
  }
  std::sort(res.cut.subset.begin(), res.cut.subset.end());
  return res;
}

Eigen::MatrixXd laplacian(const WeightedGraph& g) {
  const int n = g.n_vertices();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    l(e.i, e.j) -= e.weight;
    l(e.j, e.i) -= e.weight;
    l(e.i, e.i) += e.weight;
    l(e.j, e.j) += e.weight;
  }
  return l;
}

double algebraic_connectivity(const WeightedGraph& g) {
  if (g.n_vertices() < 2) {
    throw std::invalid_argument("algebraic_connectivity: need at least 2 vertices");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g));
  const double lambda2 = solver.eigenvalues()(1);
  if (std::abs(lambda2) < 1e-8 && !g.connected_over_positive_edges()) {
    return 0.0;
  }
  return lambda2;
}

WeightedGraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("read_edge_list: cannot open " + path.string());
  }
  std::string line;
  int n_vertices = -1;
  std::vector<Edge> edges;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("vertices=");
      if (pos != std::string::npos) {
        n_vertices = std::stoi(line.substr(pos + 9));
      }
      continue;
    }
    std::istringstream ss(line);
    Edge e;
    if (!(ss >> e.i >> e.j >> e.weight)) {
      throw FormatError("read_edge_list: malformed line in " + path.string(), {line_no});
    }
    edges.push_back(e);
  }
  if (n_vertices < 0) {
    throw FormatError("read_edge_list: missing '# vertices=<n>' header", {});
  }
  return WeightedGraph(n_vertices, std::move(edges));
}

void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_edge_list: cannot open " + path.string());
  }
  out << "# vertices=" << g.n_vertices() << "\n";
  char buf[64];
  for (const Edge& e : g.edges()) {
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%.17g\n", e.i, e.j, e.weight);
    out << buf;
  }
}

}  // namespace bridgenet
