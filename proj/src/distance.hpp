#pragma once

#include <span>
#include <vector>

#include "hyperclust/tensor.hpp"

namespace hyperclust::detail {

/// One-row-against-all distance evaluation.
///
/// Low-density, wide matrices (bag-of-words features) go through a sparse
/// Gram path: ||x-y||^2 = ||x||^2 + ||y||^2 - 2<x,y> with the inner products
/// accumulated over an inverted column index. Binary inputs stay exact on
/// that path. Everything else uses the direct difference formula.
class RowDistances {
 public:
  explicit RowDistances(const DenseMatrix& m);

  bool uses_sparse_path() const noexcept { return sparse_; }
  std::size_t size() const noexcept { return m_.rows(); }
  double squared_norm(std::size_t i) const { return norms_[i]; }

  /// out[j] = ||m_i - m_j||^2.
  void squared_from(std::size_t i, std::span<double> out) const;
  /// out[j] = <m_i, m_j>.
  void dots_from(std::size_t i, std::span<double> out) const;

 private:
  const DenseMatrix& m_;
  bool sparse_ = false;
  SparseMatrix csr_;
  SparseMatrix csc_;
  std::vector<double> norms_;
};

bool prefers_sparse(const DenseMatrix& m);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hyperclust::detail
