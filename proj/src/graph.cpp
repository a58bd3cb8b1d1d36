#include "consensus/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace consensus {

Matrix Graph::degree_matrix() const {
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = degrees[i];
  return d;
}

Matrix Graph::laplacian() const { return degree_matrix() - adjacency; }

Matrix Graph::walk_matrix() const {
  Matrix p = adjacency;
  for (int i = 0; i < n; ++i) p.row(i) /= static_cast<double>(degrees[i]);
  return p;
}

EdgeList Graph::edge_list() const {
  EdgeList edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adjacency(i, j) != 0.0) edges.emplace_back(i, j);
  return edges;
}

int Graph::edge_count() const { return static_cast<int>(edge_list().size()); }

bool is_connected(const Matrix& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  if (n == 0) return false;
  std::vector<bool> visited(n, false);
  std::vector<int> stack{0};
  visited[0] = true;
  int seen = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (adjacency(u, v) != 0.0 && !visited[v]) {
        visited[v] = true;
        ++seen;
        stack.push_back(v);
      }
    }
  }
  return seen == n;
}

Graph from_edge_list(const EdgeList& edges, int n) {
  if (n < 2) fail(errc::bad_size, "graph needs at least 2 vertices, got " + std::to_string(n));
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [i, j] : edges) {
    if (i == j) fail(errc::self_loop, "edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    if (i < 0 || i >= n || j < 0 || j >= n)
      fail(errc::index_out_of_range,
           "edge (" + std::to_string(i) + "," + std::to_string(j) + ") with n=" + std::to_string(n));
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  Graph g;
  g.n = n;
  g.adjacency = std::move(a);
  g.degrees = IntVector(n);
  for (int i = 0; i < n; ++i) {
    int d = static_cast<int>(g.adjacency.row(i).sum());
    if (d == 0) fail(errc::isolated_vertex, "vertex " + std::to_string(i));
    g.degrees[i] = d;
  }
  if (!is_connected(g.adjacency)) fail(errc::disconnected, "graph is not connected");
  return g;
}

const EdgeList& karate_edges() {
  // Zachary (1977), 0-indexed, 78 edges.
  static const EdgeList edges = {
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
      {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
      {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
      {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
      {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
      {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
      {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
      {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
  return edges;
}

const std::vector<int>& karate_faction() {
  // Canonical two-faction split: label 0 = faction of node 0, 1 = faction of node 33.
  static const std::vector<int> labels = [] {
    std::vector<int> v(34, 1);
    for (int i : {0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 16, 17, 19, 21}) v[i] = 0;
    return v;
  }();
  return labels;
}

Graph make_builtin(const std::string& topology, int n) {
  EdgeList edges;
  if (topology == "line") {
    if (n < 2) fail(errc::bad_size, "line needs n >= 2");
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  } else if (topology == "ring") {
    if (n < 3) fail(errc::bad_size, "ring needs n >= 3");
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  } else if (topology == "star") {
    if (n < 2) fail(errc::bad_size, "star needs n >= 2");
    for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
  } else if (topology == "complete") {
    if (n < 2) fail(errc::bad_size, "complete needs n >= 2");
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  } else if (topology == "karate") {
    if (n != 34) fail(errc::bad_size, "karate has n = 34");
    edges = karate_edges();
  } else {
    fail(errc::unknown_topology, topology);
  }
  return from_edge_list(edges, n);
}

Graph make_complete_bipartite(int p, int q) {
  if (p < 1 || q < 1) fail(errc::bad_size, "complete_bipartite needs p, q >= 1");
  EdgeList edges;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) edges.emplace_back(i, p + j);
  return from_edge_list(edges, p + q);
}

Matrix SubgraphDecomposition::internal_walk_matrix() const {
  Matrix p = internal_adjacency;
  for (int i = 0; i < size(); ++i) p.row(i) /= static_cast<double>(internal_degrees[i]);
  return p;
}

SubgraphDecomposition induced_subgraph(const Graph& g, const std::vector<int>& vertices) {
  if (vertices.empty()) fail(errc::empty_subset, "induced subgraph of no vertices");
  std::set<int> unique(vertices.begin(), vertices.end());
  for (int v : unique)
    if (v < 0 || v >= g.n) fail(errc::index_out_of_range, "vertex " + std::to_string(v));

  SubgraphDecomposition dec;
  dec.vertex_set.assign(unique.begin(), unique.end());
  const int m = dec.size();
  std::vector<int> position(g.n, -1);
  for (int i = 0; i < m; ++i) position[dec.vertex_set[i]] = i;

  dec.internal_adjacency = Matrix::Zero(m, m);
  dec.internal_degrees = IntVector::Zero(m);
  dec.total_degrees = IntVector(m);
  dec.external_degrees = IntVector(m);
  for (int i = 0; i < m; ++i) {
    const int v = dec.vertex_set[i];
    dec.total_degrees[i] = g.degrees[v];
    for (int u = 0; u < g.n; ++u) {
      if (g.adjacency(v, u) == 0.0) continue;
      if (position[u] >= 0) {
        dec.internal_adjacency(i, position[u]) = 1.0;
        dec.internal_degrees[i] += 1;
      } else {
        dec.boundary_edges.emplace_back(v, u);
      }
    }
    dec.external_degrees[i] = dec.total_degrees[i] - dec.internal_degrees[i];
  }
  // Size-1 subsets are allowed (degenerate cluster, flagged downstream).
  if (m > 1 && !is_connected(dec.internal_adjacency))
    fail(errc::induced_disconnected, "induced subgraph is not connected");
  return dec;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  EdgeList edges;
  int max_index = -1;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    int i, j;
    if (row >> i >> j) {
      edges.emplace_back(i, j);
      max_index = std::max({max_index, i, j});
    }
  }
  if (edges.empty()) fail(errc::io_error, "no edges in " + path);
  return from_edge_list(edges, max_index + 1);
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open " + path);
  out << "# " << g.n << " vertices, " << g.edge_count() << " edges\n";
  for (const auto& [i, j] : g.edge_list()) out << i << " " << j << "\n";
}

std::vector<int> load_partition(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    int label;
    if (row >> label) labels.push_back(label);
  }
  if (static_cast<int>(labels.size()) != n)
    fail(errc::io_error, path + ": expected " + std::to_string(n) + " labels, got " +
                             std::to_string(labels.size()));
  return labels;
}

std::vector<std::vector<int>> partition_groups(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> by_label;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) by_label[labels[i]].push_back(i);
  std::vector<std::vector<int>> groups;
  for (auto& [label, members] : by_label) groups.push_back(std::move(members));
  return groups;
}

const char* errc_name(errc code) {
  switch (code) {
    case errc::self_loop: return "SelfLoop";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::disconnected: return "Disconnected";
    case errc::isolated_vertex: return "IsolatedVertex";
    case errc::unknown_topology: return "UnknownTopology";
    case errc::bad_size: return "BadSize";
    case errc::empty_subset: return "EmptySubset";
    case errc::induced_disconnected: return "InducedDisconnected";
    case errc::eigen_solve_failure: return "EigenSolveFailure";
    case errc::non_positive_k: return "NonPositiveK";
    case errc::assumption_violation: return "AssumptionViolation";
    case errc::not_a_fixed_point: return "NotAFixedPoint";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_finite_state: return "NonFiniteState";
    case errc::order_precondition_violated: return "OrderPreconditionViolated";
    case errc::precondition_not_checked: return "PreconditionNotChecked";
    case errc::not_an_equilibrium: return "NotAnEquilibrium";
    case errc::not_nfse: return "NotNFSE";
    case errc::not_odd: return "NotOdd";
    case errc::branch_lost: return "BranchLost";
    case errc::cohesion_not_met: return "CohesionNotMet";
    case errc::config_parse_error: return "ConfigParseError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace consensus
