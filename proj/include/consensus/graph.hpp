#pragma once

#include <string>
#include <utility>
#include <vector>

#include "consensus/types.hpp"

namespace consensus {

using EdgeList = std::vector<std::pair<int, int>>;

// Simple undirected connected graph. Immutable after construction; safe to
// share across threads.
struct Graph {
  int n = 0;
  Matrix adjacency;    // symmetric 0/1, zero diagonal
  IntVector degrees;   // row sums, every entry >= 1

  Matrix degree_matrix() const;  // D
  Matrix laplacian() const;      // D - A
  Matrix walk_matrix() const;    // D^{-1} A (row-stochastic)
  EdgeList edge_list() const;    // pairs (i, j) with i < j, ascending
  int edge_count() const;
};

// Validates: indices in range, no self-loops, duplicates collapsed, no
// isolated vertex, connected.
Graph from_edge_list(const EdgeList& edges, int n);

// topology in {line, ring, star, complete, karate}; karate forces n = 34.
Graph make_builtin(const std::string& topology, int n);
Graph make_complete_bipartite(int p, int q);

bool is_connected(const Matrix& adjacency);
inline bool is_connected(const Graph& g) { return is_connected(g.adjacency); }

// Embedded Zachary karate club data: 34 nodes, 78 edges, plus the canonical
// two-faction split (faction of node 0 -> label 0, faction of node 33 -> 1).
const EdgeList& karate_edges();
const std::vector<int>& karate_faction();

// Induced-subgraph decomposition feeding the cluster analysis.
struct SubgraphDecomposition {
  std::vector<int> vertex_set;   // ascending original indices
  Matrix internal_adjacency;     // A_in
  IntVector internal_degrees;    // d_i^in
  IntVector total_degrees;       // d_i (restriction of D)
  IntVector external_degrees;    // d_i - d_i^in
  EdgeList boundary_edges;       // (internal vertex, external vertex)

  int size() const { return static_cast<int>(vertex_set.size()); }
  Matrix internal_walk_matrix() const;  // D_in^{-1} A_in
};

// Subset must be nonempty and induce a connected subgraph.
SubgraphDecomposition induced_subgraph(const Graph& g, const std::vector<int>& vertices);

// Edge-list text format: whitespace-separated 0-indexed pairs, one per line,
// '#' comments; n inferred as max index + 1.
Graph load_edge_list(const std::string& path);
void save_edge_list(const Graph& g, const std::string& path);

// Partition file: one integer label per vertex line, '#' comments.
std::vector<int> load_partition(const std::string& path, int n);

// Vertex sets of each label, ascending labels.
std::vector<std::vector<int>> partition_groups(const std::vector<int>& labels);

}  // namespace consensus
