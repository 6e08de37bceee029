#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "hyperclust/tensor.hpp"

namespace hyperclust {

enum class DistanceMetric : std::uint8_t { Euclidean, Cosine };

DistanceMetric parse_metric(std::string_view name);
std::string_view to_string(DistanceMetric metric);

struct KnnConfig {
  std::size_t k = 5;
  DistanceMetric metric = DistanceMetric::Euclidean;
};

/// Binary incidence matrix (vertices x hyperedges) plus per-hyperedge weights.
struct Hypergraph {
  SparseMatrix incidence;
  std::vector<double> edge_weights;

  std::size_t num_vertices() const { return incidence.rows(); }
  std::size_t num_edges() const { return incidence.cols(); }

  /// Throws InvalidInput when the incidence is non-binary, a hyperedge or a
  /// vertex is empty, or a weight is not positive.
  void validate() const;
};

/// k nearest neighbours of every row, nearest first. The row itself is never
/// its own neighbour; equal distances go to the lower index.
std::vector<std::vector<std::size_t>> knn_neighbors(const DenseMatrix& x, const KnnConfig& cfg);

/// Symmetric binary adjacency: (i,j) is an edge when either vertex is among
/// the other's k nearest neighbours. Zero diagonal.
SparseMatrix knn_graph(const DenseMatrix& x, const KnnConfig& cfg);
SparseMatrix knn_graph(const std::vector<std::vector<std::size_t>>& neighbors);

/// One hyperedge per vertex j holding j and every i related to j by the
/// symmetric KNN rule. Unit weights.
Hypergraph knn_hypergraph(const DenseMatrix& x, const KnnConfig& cfg);

/// Neighbourhood hypergraph of an existing graph: hyperedge j = {j} ∪ N(j).
Hypergraph hypergraph_from_adjacency(const SparseMatrix& adjacency);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix graph_operator(const SparseMatrix& adjacency);

/// Dv^-1/2 H W De^-1 Hᵀ Dv^-1/2.
SparseMatrix hypergraph_operator(const Hypergraph& hg);

/// A + I, the reconstruction target of the graph autoencoder.
SparseMatrix add_self_loops(const SparseMatrix& adjacency);

enum class EdgeListMode : std::uint8_t {
  UpperTriangle,  // i < j only, for symmetric adjacency
  AllEntries,     // every stored (row, col), for incidence matrices
};

/// `i<TAB>j` per line, 0-based, lexicographic order.
void write_edge_list(std::ostream& out, const SparseMatrix& m, EdgeListMode mode);

}  // namespace hyperclust
