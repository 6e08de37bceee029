#include "hyperclust/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "distance.hpp"
#include "hyperclust/error.hpp"
#include "hyperclust/rng.hpp"

namespace hyperclust {

std::vector<std::int32_t> canonicalize_labels(Labels& labels, std::size_t k) {
  std::vector<std::int32_t> remap(k, -1);
  std::int32_t next = 0;
  for (auto& l : labels) {
    auto& slot = remap[static_cast<std::size_t>(l)];
    if (slot < 0) slot = next++;
    l = slot;
  }
  // Clusters that never appear keep their relative order after the rest.
  for (auto& slot : remap) {
    if (slot < 0) slot = next++;
  }
  return remap;
}

namespace {

// Point-to-centroid squared distances, sparse-aware for bag-of-words rows.
class PointSet {
 public:
  explicit PointSet(const DenseMatrix& pts) : pts_(pts), sparse_(detail::prefers_sparse(pts)) {
    if (sparse_) {
      csr_ = SparseMatrix::from_dense(pts);
      norms_.resize(pts.rows());
      for (std::size_t i = 0; i < pts.rows(); ++i) {
        double acc = 0.0;
        for (double v : csr_.row_values(i)) acc += v * v;
        norms_[i] = acc;
      }
    }
  }

  std::size_t size() const { return pts_.rows(); }
  std::size_t dim() const { return pts_.cols(); }

  double sqdist(std::size_t i, std::span<const double> c, double c_norm) const {
    if (!sparse_) return detail::squared_distance(pts_.row(i), c);
    const auto cols = csr_.row_cols(i);
    const auto vals = csr_.row_values(i);
    double dot = 0.0;
    for (std::size_t p = 0; p < cols.size(); ++p) dot += vals[p] * c[cols[p]];
    return std::max(0.0, norms_[i] + c_norm - 2.0 * dot);
  }

  void add_to(std::size_t i, std::span<double> acc) const {
    if (!sparse_) {
      const auto row = pts_.row(i);
      for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += row[c];
      return;
    }
    const auto cols = csr_.row_cols(i);
    const auto vals = csr_.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) acc[cols[p]] += vals[p];
  }

  std::span<const double> row(std::size_t i) const { return pts_.row(i); }

 private:
  const DenseMatrix& pts_;
  bool sparse_;
  SparseMatrix csr_;
  std::vector<double> norms_;
};

std::vector<double> row_norms(const DenseMatrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (double v : m.row(r)) acc += v * v;
    out[r] = acc;
  }
  return out;
}

DenseMatrix seed_plus_plus(const PointSet& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.size();
  DenseMatrix centers(k, pts.dim());
  std::size_t first = rng.below(n);
  std::copy(pts.row(first).begin(), pts.row(first).end(), centers.row(0).begin());
  std::vector<double> d2(n);
  double c_norm = row_norms(centers)[0];
  for (std::size_t i = 0; i < n; ++i) d2[i] = pts.sqdist(i, centers.row(0), c_norm);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      throw InvalidInput("k-means++ seeding found fewer than k=" + std::to_string(k) + " distinct points");
    }
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      cumulative += d2[i];
      pick = i;
      if (cumulative > target) break;
    }
    std::copy(pts.row(pick).begin(), pts.row(pick).end(), centers.row(c).begin());
    double norm = 0.0;
    for (double v : centers.row(c)) norm += v * v;
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], pts.sqdist(i, centers.row(c), norm));
  }
  return centers;
}

// Nearest centroid per point; equal distances go to the lower centroid index.
void assign(const PointSet& pts, const DenseMatrix& centers, Labels& labels, std::vector<double>& dist) {
  const std::vector<double> norms = row_norms(centers);
  const auto n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double best = std::numeric_limits<double>::infinity();
    std::int32_t best_c = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = pts.sqdist(i, centers.row(c), norms[c]);
      if (d < best) {
        best = d;
        best_c = static_cast<std::int32_t>(c);
      }
    }
    labels[i] = best_c;
    dist[i] = best;
  }
}

// Move the point farthest from its centroid into each empty cluster.
void repair_empty(const PointSet& pts, DenseMatrix& centers, Labels& labels, std::vector<double>& dist) {
  const std::size_t k = centers.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = pts.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > far_d) {
        far_d = dist[i];
        far = i;
      }
    }
    if (far == pts.size()) throw InvalidInput("cannot repair empty k-means cluster");
    --sizes[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<std::int32_t>(c);
    ++sizes[c];
    dist[far] = 0.0;
    std::copy(pts.row(far).begin(), pts.row(far).end(), centers.row(c).begin());
  }
}

void update_centers(const PointSet& pts, const Labels& labels, DenseMatrix& centers) {
  const std::size_t k = centers.rows();
  centers = DenseMatrix(k, pts.dim());
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    pts.add_to(i, centers.row(c));
    ++sizes[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double inv = 1.0 / static_cast<double>(sizes[c]);
    for (double& v : centers.row(c)) v *= inv;
  }
}

double inertia_of(const PointSet& pts, const Labels& labels, const DenseMatrix& centers) {
  const std::vector<double> norms = row_norms(centers);
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    total += pts.sqdist(i, centers.row(c), norms[c]);
  }
  return total;
}

ClusterAssignment lloyd(const PointSet& pts, std::size_t k, Rng& rng, std::size_t max_iter) {
  const std::size_t n = pts.size();
  ClusterAssignment out;
  DenseMatrix centers = seed_plus_plus(pts, k, rng);
  Labels labels(n, 0);
  std::vector<double> dist(n);

  assign(pts, centers, labels, dist);
  repair_empty(pts, centers, labels, dist);
  update_centers(pts, labels, centers);
  out.inertia_trace.push_back(inertia_of(pts, labels, centers));
  std::size_t iterations = 1;

  Labels next(n, 0);
  while (iterations < max_iter) {
    assign(pts, centers, next, dist);
    repair_empty(pts, centers, next, dist);
    if (next == labels) break;
    labels.swap(next);
    update_centers(pts, labels, centers);
    out.inertia_trace.push_back(inertia_of(pts, labels, centers));
    ++iterations;
  }
  out.labels = std::move(labels);
  out.centroids = std::move(centers);
  out.inertia = out.inertia_trace.back();
  out.iterations_run = iterations;
  return out;
}

}  // namespace

ClusterAssignment kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (k < 1) throw InvalidInput("k-means needs k >= 1");
  if (k > n) {
    throw InvalidInput("k-means with k=" + std::to_string(k) + " > n=" + std::to_string(n) + " points");
  }
  if (!points.all_finite()) throw InvalidInput("k-means input contains non-finite values");
  if (options.max_iter < 1 || options.n_init < 1) throw InvalidInput("k-means needs max_iter, n_init >= 1");

  const PointSet pts(points);
  ClusterAssignment best;
  bool have_best = false;
  for (std::size_t restart = 0; restart < options.n_init; ++restart) {
    Rng rng(seed, restart);
    ClusterAssignment candidate = lloyd(pts, k, rng, options.max_iter);
    if (!have_best || candidate.inertia < best.inertia) {
      best = std::move(candidate);
      have_best = true;
    }
  }

  const auto remap = canonicalize_labels(best.labels, k);
  DenseMatrix ordered(k, points.cols());
  for (std::size_t c = 0; c < k; ++c) {
    const auto dst = static_cast<std::size_t>(remap[c]);
    std::copy(best.centroids.row(c).begin(), best.centroids.row(c).end(), ordered.row(dst).begin());
  }
  best.centroids = std::move(ordered);
  return best;
}

}  // namespace hyperclust
