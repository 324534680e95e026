#ifndef BRIDGENET_GRAPH_HPP
#define BRIDGENET_GRAPH_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace bridgenet {

/// Company-customer layout: vertices 0..m-1 are utilitarian customers (M),
/// vertex m is the company, vertices m+1..m+n_fans are fans (N).
struct CommunityLayout {
  int m_utilitarian = 0;
  int n_fans = 0;

  int total_vertices() const { return m_utilitarian + n_fans + 1; }
  int company_index() const { return m_utilitarian; }
};

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Undirected weighted graph: at most one edge per unordered pair, stored
/// with i < j, weights >= 0. Zero-weight edges stay in the edge set (they
/// carry topology) but count as absent for connectivity.
class WeightedGraph {
 public:
  WeightedGraph(int n_vertices, std::vector<Edge> edges);

  int n_vertices() const { return n_vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::vector<double> weighted_degrees() const;
  double total_weight() const;
  Eigen::MatrixXd adjacency() const;

  /// Component labels over positive-weight edges only.
  std::vector<int> positive_components() const;
  bool connected_over_positive_edges() const;

 private:
  int n_vertices_;
  std::vector<Edge> edges_;
};

/// Three-class weights: cliques of weight 1 inside M and N,
/// company-fan edges of weight 1, company-utilitarian edges carrying the
/// shared bridge value w. No M-N edges.
WeightedGraph build_company_customer_graph(const CommunityLayout& layout, double w);

/// Nonempty proper subset of vertices.
struct Cut {
  std::vector<int> subset;
};

/// Cut weight divided by the smaller side's volume (sum of weighted
/// degrees). Throws UndefinedConductanceError when a side has zero volume.
double conductance_of_cut(const WeightedGraph& g, const Cut& cut);

struct ConductanceResult {
  double value = 0.0;
  Cut cut;
};

/// Exact minimum over all 2^{n-1}-1 cuts; n_vertices <= 24.
ConductanceResult graph_conductance_exact(const WeightedGraph& g);

/// Fiedler-vector sweep: sort vertices by the second Laplacian eigenvector,
/// take the best prefix cut. Upper-bounds the exact minimum; returns 0 with
/// a separating cut when the graph is disconnected over positive edges.
ConductanceResult graph_conductance_sweep(const WeightedGraph& g);

/// L = D - A, symmetric positive semidefinite with zero row sums.
Eigen::MatrixXd laplacian(const WeightedGraph& g);

/// Second-smallest Laplacian eigenvalue; reported as exactly 0 when the
/// graph is disconnected over positive-weight edges.
double algebraic_connectivity(const WeightedGraph& g);

/// Edge-list fixture format: '# vertices=<n>' header then 'i<TAB>j<TAB>w'.
WeightedGraph read_edge_list(const std::filesystem::path& path);
void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path);

}  // namespace bridgenet

#endif
