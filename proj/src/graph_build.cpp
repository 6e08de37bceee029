#include "hyperclust/graph_build.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "distance.hpp"
#include "hyperclust/error.hpp"

namespace hyperclust {

DistanceMetric parse_metric(std::string_view name) {
  if (name == "euclidean") return DistanceMetric::Euclidean;
  if (name == "cosine") return DistanceMetric::Cosine;
  throw InvalidInput("unknown distance metric '" + std::string(name) + "'");
}

std::string_view to_string(DistanceMetric metric) {
  return metric == DistanceMetric::Euclidean ? "euclidean" : "cosine";
}

void Hypergraph::validate() const {
  if (edge_weights.size() != incidence.cols()) {
    throw InvalidInput("hypergraph has " + std::to_string(incidence.cols()) + " hyperedges but " +
                       std::to_string(edge_weights.size()) + " weights");
  }
  if (!incidence.is_binary()) throw InvalidInput("hypergraph incidence is not binary");
  for (double w : edge_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("hyperedge weights must be positive");
  }
  std::vector<std::size_t> edge_size(incidence.cols(), 0);
  for (std::size_t v = 0; v < incidence.rows(); ++v) {
    std::size_t degree = 0;
    const auto cols = incidence.row_cols(v);
    const auto vals = incidence.row_values(v);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (vals[p] != 0.0) {
        ++degree;
        ++edge_size[cols[p]];
      }
    }
    if (degree == 0) throw InvalidInput("vertex " + std::to_string(v) + " belongs to no hyperedge");
  }
  for (std::size_t e = 0; e < edge_size.size(); ++e) {
    if (edge_size[e] == 0) throw InvalidInput("hyperedge " + std::to_string(e) + " is empty");
  }
}

std::vector<std::vector<std::size_t>> knn_neighbors(const DenseMatrix& x, const KnnConfig& cfg) {
  const std::size_t n = x.rows();
  if (n < 2) throw InvalidInput("KNN needs at least 2 samples, got " + std::to_string(n));
  if (cfg.k < 1 || cfg.k >= n) {
    throw InvalidInput("KNN requires 1 <= k < n (k=" + std::to_string(cfg.k) +
                       ", n=" + std::to_string(n) + ")");
  }
  const detail::RowDistances distances(x);
  std::vector<std::vector<std::size_t>> result(n);
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> dist(n);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n_rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      if (cfg.metric == DistanceMetric::Euclidean) {
        distances.squared_from(i, dist);
      } else {
        distances.dots_from(i, dist);
        const double ni = distances.squared_norm(i);
        for (std::size_t j = 0; j < n; ++j) {
          const double denom = std::sqrt(ni * distances.squared_norm(j));
          dist[j] = denom > 0.0 ? 1.0 - dist[j] / denom : 1.0;
        }
      }
      order.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) order.emplace_back(dist[j], j);
      }
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.k), order.end());
      auto& row = result[i];
      row.reserve(cfg.k);
      for (std::size_t r = 0; r < cfg.k; ++r) row.push_back(order[r].second);
    }
  }
  return result;
}

SparseMatrix knn_graph(const std::vector<std::vector<std::size_t>>& neighbors) {
  const std::size_t n = neighbors.size();
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) {
      if (j >= n || j == i) throw InvalidInput("neighbour list references an invalid vertex");
      triplets.push_back({i, j, 1.0});
      triplets.push_back({j, i, 1.0});
    }
  }
  SparseMatrix summed = SparseMatrix::from_triplets(n, n, std::move(triplets));
  // Mutual neighbours were counted twice; clamp back to binary.
  std::vector<double> vals(summed.values().begin(), summed.values().end());
  std::fill(vals.begin(), vals.end(), 1.0);
  return SparseMatrix(n, n, {summed.row_offsets().begin(), summed.row_offsets().end()},
                      {summed.col_indices().begin(), summed.col_indices().end()}, std::move(vals));
}

SparseMatrix knn_graph(const DenseMatrix& x, const KnnConfig& cfg) {
  return knn_graph(knn_neighbors(x, cfg));
}

SparseMatrix add_self_loops(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("self loops need a square matrix, got " + adjacency.shape_string());
  }
  std::vector<Triplet> triplets;
  triplets.reserve(adjacency.nnz() + adjacency.rows());
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    const auto cols = adjacency.row_cols(i);
    const auto vals = adjacency.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) triplets.push_back({i, cols[p], vals[p]});
    triplets.push_back({i, i, 1.0});
  }
  return SparseMatrix::from_triplets(adjacency.rows(), adjacency.cols(), std::move(triplets));
}

namespace {

void require_simple_graph(const SparseMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw ShapeError(std::string(who) + ": adjacency must be square, got " + a.shape_string());
  }
  if (!a.is_symmetric()) throw InvalidInput(std::string(who) + ": adjacency is not symmetric");
  if (!a.is_binary()) throw InvalidInput(std::string(who) + ": adjacency is not binary");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a.at(i, i) != 0.0) {
      throw InvalidInput(std::string(who) + ": adjacency has a self loop at vertex " + std::to_string(i));
    }
  }
}

}  // namespace

Hypergraph hypergraph_from_adjacency(const SparseMatrix& adjacency) {
  require_simple_graph(adjacency, "hypergraph_from_adjacency");
  Hypergraph hg{add_self_loops(adjacency), std::vector<double>(adjacency.rows(), 1.0)};
  return hg;
}

Hypergraph knn_hypergraph(const DenseMatrix& x, const KnnConfig& cfg) {
  return hypergraph_from_adjacency(knn_graph(x, cfg));
}

SparseMatrix graph_operator(const SparseMatrix& adjacency) {
  require_simple_graph(adjacency, "graph_operator");
  const SparseMatrix a_hat = add_self_loops(adjacency);
  const std::size_t n = a_hat.rows();
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (double v : a_hat.row_values(i)) degree += v;
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  std::vector<double> vals(a_hat.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = a_hat.row_cols(i);
    const auto src = a_hat.row_values(i);
    const std::size_t base = a_hat.row_offsets()[i];
    for (std::size_t p = 0; p < cols.size(); ++p) {
      vals[base + p] = inv_sqrt_degree[i] * src[p] * inv_sqrt_degree[cols[p]];
    }
  }
  return SparseMatrix(n, n, {a_hat.row_offsets().begin(), a_hat.row_offsets().end()},
                      {a_hat.col_indices().begin(), a_hat.col_indices().end()}, std::move(vals));
}

SparseMatrix hypergraph_operator(const Hypergraph& hg) {
  hg.validate();
  const SparseMatrix& h = hg.incidence;
  const SparseMatrix ht = h.transpose();
  const std::size_t n = h.rows();
  const std::size_t m = h.cols();

  std::vector<double> inv_sqrt_dv(n);
  for (std::size_t v = 0; v < n; ++v) {
    double dv = 0.0;
    const auto cols = h.row_cols(v);
    const auto vals = h.row_values(v);
    for (std::size_t p = 0; p < cols.size(); ++p) dv += hg.edge_weights[cols[p]] * vals[p];
    inv_sqrt_dv[v] = 1.0 / std::sqrt(dv);
  }
  // w(e) / d(e)
  std::vector<double> edge_scale(m);
  for (std::size_t e = 0; e < m; ++e) {
    double de = 0.0;
    for (double v : ht.row_values(e)) de += v;
    edge_scale[e] = hg.edge_weights[e] / de;
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::vector<std::size_t>> row_cols(n);
  std::vector<std::vector<double>> row_vals(n);
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> accum(n, 0.0);
    std::vector<char> touched(n, 0);
    std::vector<std::size_t> pattern;
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n_rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      pattern.clear();
      const auto edges = h.row_cols(i);
      const auto hi = h.row_values(i);
      for (std::size_t p = 0; p < edges.size(); ++p) {
        const std::size_t e = edges[p];
        const double scale = hi[p] * edge_scale[e];
        const auto members = ht.row_cols(e);
        const auto hm = ht.row_values(e);
        for (std::size_t q = 0; q < members.size(); ++q) {
          const std::size_t j = members[q];
          if (!touched[j]) {
            touched[j] = 1;
            pattern.push_back(j);
          }
          accum[j] += scale * hm[q];
        }
      }
      std::sort(pattern.begin(), pattern.end());
      auto& cols_out = row_cols[i];
      auto& vals_out = row_vals[i];
      cols_out.reserve(pattern.size());
      vals_out.reserve(pattern.size());
      for (std::size_t j : pattern) {
        cols_out.push_back(j);
        vals_out.push_back(inv_sqrt_dv[i] * accum[j] * inv_sqrt_dv[j]);
        accum[j] = 0.0;
        touched[j] = 0;
      }
    }
  }
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    cols.insert(cols.end(), row_cols[i].begin(), row_cols[i].end());
    vals.insert(vals.end(), row_vals[i].begin(), row_vals[i].end());
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

void write_edge_list(std::ostream& out, const SparseMatrix& m, EdgeListMode mode) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto cols = m.row_cols(r);
    const auto vals = m.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (vals[p] == 0.0) continue;
      if (mode == EdgeListMode::UpperTriangle && cols[p] <= r) continue;
      out << r << '\t' << cols[p] << '\n';
    }
  }
}

}  // namespace hyperclust
