#pragma once

#include <cstdint>
#include <vector>

#include "hyperclust/kmeans.hpp"
#include "hyperclust/tensor.hpp"

namespace hyperclust {

struct EigenPairs {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // n x k, column c pairs with values[c]
};

enum class EigenMethod : std::uint8_t { Auto, Jacobi, Lanczos };

struct EigenOptions {
  EigenMethod method = EigenMethod::Auto;
  /// Auto switches from dense Jacobi to Lanczos above this size.
  std::size_t dense_limit = 512;
  std::uint64_t seed = 0;
  double symmetry_tolerance = 1e-12;
  double residual_tolerance = 1e-10;
};

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Values ascending.
EigenPairs jacobi_eigen(const DenseMatrix& s);

/// The k algebraically smallest eigenpairs of a symmetric matrix. Each
/// eigenvector is signed so its largest-magnitude entry is positive.
EigenPairs sym_eigen_smallest(const SparseMatrix& s, std::size_t k, const EigenOptions& options = {});

/// I - D^-1/2 A D^-1/2, isolated vertices taking degree 1.
SparseMatrix normalized_laplacian(const SparseMatrix& adjacency);

/// Rows of the k smallest Laplacian eigenvectors, each scaled to unit length
/// (zero rows stay zero).
DenseMatrix spectral_embedding(const SparseMatrix& adjacency, std::size_t k, std::uint64_t seed);

/// Normalized spectral clustering: k-means on spectral_embedding rows.
ClusterAssignment spectral_clustering(const SparseMatrix& adjacency, std::size_t k, std::uint64_t seed,
                                      const KMeansOptions& kmeans_options = {});

}  // namespace hyperclust
