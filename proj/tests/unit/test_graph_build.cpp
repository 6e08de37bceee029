#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "hyperclust/error.hpp"
#include "hyperclust/graph_build.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace hyperclust;

namespace {

std::set<std::pair<std::size_t, std::size_t>> edge_set(const SparseMatrix& a) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (auto j : a.row_cols(i)) {
      if (i < j) out.emplace(i, j);
    }
  }
  return out;
}

Hypergraph random_hypergraph(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<Triplet> t;
  for (std::size_t e = 0; e < m; ++e) t.push_back({e % n, e, 1.0});  // no empty hyperedge
  for (std::size_t v = 0; v < n; ++v) t.push_back({v, v % m, 1.0});  // no isolated vertex
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e = 0; e < m; ++e) {
      if (rng.uniform() < 0.3) t.push_back({v, e, 1.0});
    }
  }
  auto h = SparseMatrix::from_triplets(n, m, std::move(t));
  // collapse summed duplicates back to 1
  std::vector<double> ones(h.nnz(), 1.0);
  h = SparseMatrix(n, m, {h.row_offsets().begin(), h.row_offsets().end()},
                   {h.col_indices().begin(), h.col_indices().end()}, ones);
  std::vector<double> w(m);
  for (double& x : w) x = rng.uniform(0.5, 2.0);
  return {h, w};
}

}  // namespace

TEST_SUITE("graph_build") {

TEST_CASE("knn graph anchors") {
  DenseMatrix x{{0}, {1}, {10}};
  auto a = knn_graph(x, {.k = 1});
  CHECK(edge_set(a) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
  CHECK(a.is_symmetric());

  auto two = knn_graph(DenseMatrix{{0.0}, {3.0}}, {.k = 1});
  CHECK(edge_set(two) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("knn rejects bad k and tiny inputs") {
  DenseMatrix x{{0}, {1}, {2}};
  CHECK_THROWS_AS(knn_graph(x, {.k = 3}), InvalidInput);
  CHECK_THROWS_AS(knn_graph(x, {.k = 0}), InvalidInput);
  CHECK_THROWS_AS(knn_graph(DenseMatrix{{1.0}}, {.k = 1}), InvalidInput);
}

TEST_CASE("knn ties go to the lower index and duplicates are allowed") {
  DenseMatrix x{{0}, {0}, {0}, {0}};
  auto nb = knn_neighbors(x, {.k = 2});
  CHECK(nb[0] == std::vector<std::size_t>{1, 2});
  CHECK(nb[3] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("knn matches brute force on random data") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = gen::random_dense(40, 5, rng);
    const std::size_t k = 3 + static_cast<std::size_t>(trial);
    auto expected = oracle::knn(oracle::to_rows(x), k);
    CHECK(knn_neighbors(x, {.k = k}) == expected);

    auto a = knn_graph(x, {.k = k});
    CHECK(a.is_symmetric());
    CHECK(a.is_binary());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      CHECK(a.at(i, i) == 0.0);
      CHECK(a.row_cols(i).size() >= k);
      for (auto j : expected[i]) CHECK(a.at(i, j) == 1.0);
    }
  }
}

TEST_CASE("knn on sparse binary rows matches brute force") {
  // Wide low-density rows exercise the sparse distance path.
  Rng rng(22);
  DenseMatrix x(60, 120);
  for (double& v : x.values()) v = rng.uniform() < 0.05 ? 1.0 : 0.0;
  CHECK(knn_neighbors(x, {.k = 5}) == oracle::knn(oracle::to_rows(x), 5));
}

TEST_CASE("cosine metric") {
  DenseMatrix x{{1, 0}, {10, 1}, {0, 1}, {0, 0}};
  auto nb = knn_neighbors(x, {.k = 1, .metric = DistanceMetric::Cosine});
  CHECK(nb[0] == std::vector<std::size_t>{1});
  CHECK(nb[2] == std::vector<std::size_t>{1});
  CHECK(parse_metric("cosine") == DistanceMetric::Cosine);
  CHECK(parse_metric("euclidean") == DistanceMetric::Euclidean);
  CHECK_THROWS_AS(parse_metric("manhattan"), InvalidInput);
}

TEST_CASE("knn graph is permutation equivariant") {
  Rng rng(23);
  auto x = gen::random_dense(25, 3, rng);
  std::vector<std::size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  DenseMatrix px(25, 3);
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t c = 0; c < 3; ++c) px(i, c) = x(perm[i], c);
  }
  auto a = knn_graph(x, {.k = 4});
  auto pa = knn_graph(px, {.k = 4});
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t j = 0; j < 25; ++j) CHECK(pa.at(i, j) == a.at(perm[i], perm[j]));
  }
}

TEST_CASE("knn hypergraph anchors") {
  auto hg = knn_hypergraph(DenseMatrix{{0}, {1}, {10}}, {.k = 1});
  oracle::Dense expected{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};  // column j = hyperedge j
  CHECK(oracle::max_abs_diff(expected, hg.incidence) == 0.0);
  CHECK(hg.edge_weights == std::vector<double>{1, 1, 1});

  auto two = knn_hypergraph(DenseMatrix{{0.0}, {1.0}}, {.k = 1});
  CHECK(oracle::max_abs_diff(oracle::Dense{{1, 1}, {1, 1}}, two.incidence) == 0.0);
}

TEST_CASE("knn hypergraph matches brute force") {
  Rng rng(24);
  auto x = gen::random_dense(20, 4, rng);
  auto hg = knn_hypergraph(x, {.k = 3});
  auto nb = oracle::knn(oracle::to_rows(x), 3);
  oracle::Dense expected = oracle::zeros(20, 20);
  for (std::size_t j = 0; j < 20; ++j) {
    expected[j][j] = 1.0;
    for (auto i : nb[j]) {
      expected[i][j] = 1.0;
      expected[j][i] = 1.0;
    }
  }
  CHECK(oracle::max_abs_diff(expected, hg.incidence) == 0.0);
  for (std::size_t j = 0; j < 20; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 20; ++i) col += hg.incidence.at(i, j);
    CHECK(col >= 2.0);
  }
  CHECK_NOTHROW(hg.validate());
}

TEST_CASE("hypergraph validation") {
  Hypergraph empty_edge{SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}}), {1.0, 1.0}};
  CHECK_THROWS_AS(empty_edge.validate(), InvalidInput);
  Hypergraph lonely{SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}}), {1.0}};
  CHECK_THROWS_AS(lonely.validate(), InvalidInput);
  CHECK_THROWS_AS(hypergraph_operator(lonely), InvalidInput);
  Hypergraph bad_weight{SparseMatrix::identity(2), {1.0, 0.0}};
  CHECK_THROWS_AS(bad_weight.validate(), InvalidInput);
  Hypergraph wrong_count{SparseMatrix::identity(2), {1.0}};
  CHECK_THROWS_AS(wrong_count.validate(), InvalidInput);
}

TEST_CASE("graph operator anchors") {
  auto edge = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  CHECK(oracle::max_abs_diff(oracle::Dense{{0.5, 0.5}, {0.5, 0.5}}, graph_operator(edge)) <= 1e-15);
  CHECK(oracle::max_abs_diff(oracle::Dense{{1.0}}, graph_operator(SparseMatrix(1, 1))) == 0.0);

  auto path = SparseMatrix::from_triplets(3, 3, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, 1}});
  CHECK(oracle::max_abs_diff(oracle::graph_operator(oracle::to_rows(path)), graph_operator(path)) <= 1e-12);
}

TEST_CASE("graph operator rejects malformed adjacency") {
  CHECK_THROWS_AS(graph_operator(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}})), InvalidInput);
  CHECK_THROWS_AS(graph_operator(SparseMatrix::identity(2)), InvalidInput);
  CHECK_THROWS_AS(graph_operator(SparseMatrix::from_triplets(2, 2, {{0, 1, 2.0}, {1, 0, 2.0}})), InvalidInput);
  CHECK_THROWS_AS(graph_operator(SparseMatrix(2, 3)), ShapeError);
}

TEST_CASE("graph operator matches the dense oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = gen::random_graph(15, 0.25, rng);
    auto p = graph_operator(a);
    CHECK(oracle::max_abs_diff(oracle::graph_operator(oracle::to_rows(a)), p) <= 1e-12);
    CHECK(p.is_symmetric());
    for (double v : p.values()) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    for (std::size_t i = 0; i < 15; ++i) {
      CHECK(p.at(i, i) == doctest::Approx(1.0 / (static_cast<double>(a.row_cols(i).size()) + 1.0)));
    }
  }
}

TEST_CASE("graph operator rows sum to one on cycles") {
  for (std::size_t n : {3u, 5u, 12u}) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back({i, (i + 1) % n, 1.0});
      t.push_back({(i + 1) % n, i, 1.0});
    }
    auto p = graph_operator(SparseMatrix::from_triplets(n, n, t));
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (double v : p.row_values(i)) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("hypergraph operator anchors") {
  Hypergraph pair{SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}}), {1.0}};
  CHECK(oracle::max_abs_diff(oracle::Dense{{0.5, 0.5}, {0.5, 0.5}}, hypergraph_operator(pair)) <= 1e-15);
  Hypergraph id{SparseMatrix::identity(4), {1, 1, 1, 1}};
  CHECK(hypergraph_operator(id).to_dense() == DenseMatrix::identity(4));
}

TEST_CASE("hypergraph operator matches the dense oracle and is a contraction") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10;
    const std::size_t m = 4 + static_cast<std::size_t>(trial % 8);
    auto hg = random_hypergraph(n, m, rng);
    auto theta = hypergraph_operator(hg);
    auto expected = oracle::hypergraph_operator(oracle::to_rows(hg.incidence), hg.edge_weights);
    CHECK(oracle::max_abs_diff(expected, theta) <= 1e-12);
    CHECK(theta.is_symmetric(1e-15));
    for (double ev : oracle::eigenvalues(oracle::to_rows(theta))) {
      CHECK(ev >= -1e-10);
      CHECK(ev <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("hypergraph operator factors as M Mᵀ") {
  Rng rng(43);
  auto hg = random_hypergraph(30, 12, rng);
  auto h = oracle::to_rows(hg.incidence);
  std::vector<double> dv(30, 0.0);
  std::vector<double> de(12, 0.0);
  for (std::size_t v = 0; v < 30; ++v) {
    for (std::size_t e = 0; e < 12; ++e) {
      dv[v] += hg.edge_weights[e] * h[v][e];
      de[e] += h[v][e];
    }
  }
  oracle::Dense m = h;
  for (std::size_t v = 0; v < 30; ++v) {
    for (std::size_t e = 0; e < 12; ++e) m[v][e] = h[v][e] * std::sqrt(hg.edge_weights[e] / de[e] / dv[v]);
  }
  auto mmt = oracle::matmul(m, oracle::transpose(m));
  CHECK(oracle::max_abs_diff(mmt, hypergraph_operator(hg)) <= 1e-12);
}

TEST_CASE("two-member hyperedges reduce to a weighted normalized adjacency") {
  // 4-cycle, each edge a hyperedge with its own weight.
  std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  std::vector<double> w{1.0, 2.0, 0.5, 3.0};
  std::vector<Triplet> t;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    t.push_back({edges[e].first, e, 1.0});
    t.push_back({edges[e].second, e, 1.0});
  }
  Hypergraph hg{SparseMatrix::from_triplets(4, 4, t), w};
  // Each hyperedge contributes w/2 to both endpoints and to the diagonal.
  oracle::Dense a = oracle::zeros(4, 4);
  std::vector<double> d(4, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    a[i][j] += w[e] / 2;
    a[j][i] += w[e] / 2;
    a[i][i] += w[e] / 2;
    a[j][j] += w[e] / 2;
    d[i] += w[e];
    d[j] += w[e];
  }
  for (auto& x : d) x = 1.0 / std::sqrt(x);
  CHECK(oracle::max_abs_diff(oracle::diag_scale(d, a, d), hypergraph_operator(hg)) <= 1e-14);
}

TEST_CASE("hypergraph from adjacency and self loops") {
  auto path = SparseMatrix::from_triplets(3, 3, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, 1}});
  auto hg = hypergraph_from_adjacency(path);
  CHECK(hg.incidence == add_self_loops(path));
  CHECK(hg.edge_weights == std::vector<double>{1, 1, 1});
  CHECK(add_self_loops(path).at(2, 2) == 1.0);
}

TEST_CASE("edge list export") {
  auto path = SparseMatrix::from_triplets(3, 3, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, 1}});
  std::ostringstream upper;
  write_edge_list(upper, path, EdgeListMode::UpperTriangle);
  CHECK(upper.str() == "0\t1\n1\t2\n");
  std::ostringstream all;
  write_edge_list(all, SparseMatrix::from_triplets(2, 1, {{0, 0, 1}, {1, 0, 1}}), EdgeListMode::AllEntries);
  CHECK(all.str() == "0\t0\n1\t0\n");
}

}  // TEST_SUITE
