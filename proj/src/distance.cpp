#include "distance.hpp"

#include <algorithm>

namespace hyperclust::detail {

bool prefers_sparse(const DenseMatrix& m) {
  if (m.cols() < 64 || m.empty()) return false;
  const auto vals = m.values();
  const auto nonzero = static_cast<std::size_t>(
      std::count_if(vals.begin(), vals.end(), [](double v) { return v != 0.0; }));
  return nonzero * 10 <= vals.size();
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    acc += d * d;
  }
  return acc;
}

RowDistances::RowDistances(const DenseMatrix& m) : m_(m), sparse_(prefers_sparse(m)) {
  norms_.resize(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (double v : m.row(i)) acc += v * v;
    norms_[i] = acc;
  }
  if (sparse_) {
    csr_ = SparseMatrix::from_dense(m);
    csc_ = csr_.transpose();
  }
}

void RowDistances::dots_from(std::size_t i, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (sparse_) {
    const auto feats = csr_.row_cols(i);
    const auto fvals = csr_.row_values(i);
    for (std::size_t p = 0; p < feats.size(); ++p) {
      const auto owners = csc_.row_cols(feats[p]);
      const auto ovals = csc_.row_values(feats[p]);
      for (std::size_t q = 0; q < owners.size(); ++q) out[owners[q]] += fvals[p] * ovals[q];
    }
    return;
  }
  const auto xi = m_.row(i);
  for (std::size_t j = 0; j < m_.rows(); ++j) {
    const auto xj = m_.row(j);
    double acc = 0.0;
    for (std::size_t c = 0; c < xi.size(); ++c) acc += xi[c] * xj[c];
    out[j] = acc;
  }
}

void RowDistances::squared_from(std::size_t i, std::span<double> out) const {
  if (sparse_) {
    dots_from(i, out);
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = std::max(0.0, norms_[i] + norms_[j] - 2.0 * out[j]);
    }
    out[i] = 0.0;
    return;
  }
  const auto xi = m_.row(i);
  for (std::size_t j = 0; j < m_.rows(); ++j) out[j] = squared_distance(xi, m_.row(j));
}

}  // namespace hyperclust::detail
