#pragma once

#include <optional>
#include <span>
#include <string>

#include "hyperclust/kmeans.hpp"
#include "hyperclust/tensor.hpp"

namespace hyperclust {

/// Mean over samples of (b - a) / max(a, b), where a is the mean distance to
/// the rest of the sample's own cluster and b the smallest mean distance to
/// another cluster. Samples in singleton clusters score 0. Needs 2 <= k <= n-1.
double silhouette(const DenseMatrix& points, std::span<const std::int32_t> labels);

/// (1/k) Σ_i max_{j≠i} (s_i + s_j) / d(c_i, c_j), s_i the mean distance of
/// cluster i's points to its centroid. Needs 2 <= k <= n and distinct centroids.
double davies_bouldin(const DenseMatrix& points, std::span<const std::int32_t> labels);

/// [tr(B)/(k-1)] / [tr(W)/(n-k)]. Needs 2 <= k <= n-1 and tr(W) > 0.
double calinski_harabasz(const DenseMatrix& points, std::span<const std::int32_t> labels);

/// All three indices. A metric that is undefined for this clustering is left
/// empty and the reason recorded in `notes`.
struct MetricsReport {
  std::optional<double> silhouette;
  std::optional<double> davies_bouldin;
  std::optional<double> calinski_harabasz;
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::string> notes;
};

MetricsReport evaluate_metrics(const DenseMatrix& points, std::span<const std::int32_t> labels);

}  // namespace hyperclust
