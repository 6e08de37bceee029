#include "hyperclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "distance.hpp"
#include "hyperclust/error.hpp"

namespace hyperclust {

namespace {

struct Clusters {
  std::size_t k = 0;
  std::vector<std::size_t> sizes;
};

Clusters check_labels(const DenseMatrix& points, std::span<const std::int32_t> labels) {
  if (labels.size() != points.rows()) {
    throw ShapeError(std::to_string(labels.size()) + " labels for " + std::to_string(points.rows()) + " points");
  }
  if (!points.all_finite()) throw InvalidInput("metric input contains non-finite values");
  Clusters c;
  for (auto l : labels) {
    if (l < 0) throw InvalidInput("negative cluster label");
    c.k = std::max(c.k, static_cast<std::size_t>(l) + 1);
  }
  c.sizes.assign(c.k, 0);
  for (auto l : labels) ++c.sizes[static_cast<std::size_t>(l)];
  for (std::size_t i = 0; i < c.k; ++i) {
    if (c.sizes[i] == 0) throw InvalidInput("cluster " + std::to_string(i) + " is empty");
  }
  return c;
}

DenseMatrix centroids_of(const DenseMatrix& points, std::span<const std::int32_t> labels, const Clusters& c) {
  DenseMatrix centers(c.k, points.cols());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto dst = centers.row(static_cast<std::size_t>(labels[i]));
    const auto src = points.row(i);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
  }
  for (std::size_t j = 0; j < c.k; ++j) {
    const double inv = 1.0 / static_cast<double>(c.sizes[j]);
    for (double& v : centers.row(j)) v *= inv;
  }
  return centers;
}

}  // namespace

double silhouette(const DenseMatrix& points, std::span<const std::int32_t> labels) {
  const Clusters c = check_labels(points, labels);
  const std::size_t n = points.rows();
  if (c.k < 2 || c.k > n - 1) {
    throw DegenerateClustering("silhouette needs 2 <= k <= n-1 (k=" + std::to_string(c.k) +
                               ", n=" + std::to_string(n) + ")");
  }
  const detail::RowDistances distances(points);
  std::vector<double> scores(n, 0.0);
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> dist(n);
    std::vector<double> per_cluster(c.k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n_rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto own = static_cast<std::size_t>(labels[i]);
      if (c.sizes[own] == 1) continue;
      distances.squared_from(i, dist);
      std::fill(per_cluster.begin(), per_cluster.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) per_cluster[static_cast<std::size_t>(labels[j])] += std::sqrt(dist[j]);
      }
      const double a = per_cluster[own] / static_cast<double>(c.sizes[own] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < c.k; ++q) {
        if (q != own) b = std::min(b, per_cluster[q] / static_cast<double>(c.sizes[q]));
      }
      const double denom = std::max(a, b);
      scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
  }
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(n);
}

double davies_bouldin(const DenseMatrix& points, std::span<const std::int32_t> labels) {
  const Clusters c = check_labels(points, labels);
  if (c.k < 2) throw DegenerateClustering("Davies-Bouldin needs at least 2 clusters");
  const DenseMatrix centers = centroids_of(points, labels, c);
  std::vector<double> scatter(c.k, 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    scatter[l] += std::sqrt(detail::squared_distance(points.row(i), centers.row(l)));
  }
  for (std::size_t j = 0; j < c.k; ++j) scatter[j] /= static_cast<double>(c.sizes[j]);

  double total = 0.0;
  for (std::size_t i = 0; i < c.k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < c.k; ++j) {
      if (j == i) continue;
      const double gap = std::sqrt(detail::squared_distance(centers.row(i), centers.row(j)));
      if (!(gap > 0.0)) {
        throw DegenerateClustering("Davies-Bouldin undefined: clusters " + std::to_string(i) + " and " +
                                   std::to_string(j) + " share a centroid");
      }
      worst = std::max(worst, (scatter[i] + scatter[j]) / gap);
    }
    total += worst;
  }
  return total / static_cast<double>(c.k);
}

double calinski_harabasz(const DenseMatrix& points, std::span<const std::int32_t> labels) {
  const Clusters c = check_labels(points, labels);
  const std::size_t n = points.rows();
  if (c.k < 2 || c.k > n - 1) {
    throw DegenerateClustering("Calinski-Harabasz needs 2 <= k <= n-1 (k=" + std::to_string(c.k) +
                               ", n=" + std::to_string(n) + ")");
  }
  const DenseMatrix centers = centroids_of(points, labels, c);
  std::vector<double> mean(points.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = points.row(i);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += row[d];
  }
  for (double& v : mean) v /= static_cast<double>(n);

  double between = 0.0;
  for (std::size_t j = 0; j < c.k; ++j) {
    between += static_cast<double>(c.sizes[j]) * detail::squared_distance(centers.row(j), mean);
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    within += detail::squared_distance(points.row(i), centers.row(static_cast<std::size_t>(labels[i])));
  }
  // Centroids of identical points can differ from them by rounding only.
  if (!(within > 1e-20 * (between + within))) {
    throw DegenerateClustering("Calinski-Harabasz undefined: zero within-cluster dispersion");
  }
  return (between / static_cast<double>(c.k - 1)) / (within / static_cast<double>(n - c.k));
}

MetricsReport evaluate_metrics(const DenseMatrix& points, std::span<const std::int32_t> labels) {
  MetricsReport report;
  const Clusters c = check_labels(points, labels);
  report.n = points.rows();
  report.k = c.k;
  auto attempt = [&report](std::optional<double>& slot, auto&& fn) {
    try {
      slot = fn();
    } catch (const DegenerateClustering& e) {
      report.notes.emplace_back(e.what());
    }
  };
  attempt(report.silhouette, [&] { return silhouette(points, labels); });
  attempt(report.davies_bouldin, [&] { return davies_bouldin(points, labels); });
  attempt(report.calinski_harabasz, [&] { return calinski_harabasz(points, labels); });
  return report;
}

}  // namespace hyperclust
