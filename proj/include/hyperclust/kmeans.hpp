#pragma once

#include <cstdint>
#include <vector>

#include "hyperclust/tensor.hpp"

namespace hyperclust {

using Labels = std::vector<std::int32_t>;

struct ClusterAssignment {
  Labels labels;          // canonical: clusters numbered by first appearance
  DenseMatrix centroids;  // k x d, row c is the mean of cluster c
  double inertia = 0.0;   // sum of squared distances to the assigned centroid
  std::size_t iterations_run = 0;
  /// Inertia after every Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;

  std::size_t num_clusters() const { return centroids.rows(); }
};

struct KMeansOptions {
  std::size_t max_iter = 300;
  std::size_t n_init = 10;
};

/// Lloyd's algorithm from k-means++ seeding; best of `n_init` restarts by
/// inertia (ties go to the earlier restart). Deterministic for a seed.
ClusterAssignment kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {});

/// Renumber labels by order of first appearance. Returns the old->new map.
std::vector<std::int32_t> canonicalize_labels(Labels& labels, std::size_t k);

}  // namespace hyperclust
