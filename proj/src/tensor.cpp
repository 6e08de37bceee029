#include "hyperclust/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hyperclust/error.hpp"

namespace hyperclust {

namespace {

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

constexpr double kSigmoidLow = std::numeric_limits<double>::min();
constexpr double kSigmoidHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

}  // namespace

// --- DenseMatrix ------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("DenseMatrix " + shape(rows, cols) + " needs " + std::to_string(rows * cols) +
                     " values, got " + std::to_string(values_.size()));
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged initializer for DenseMatrix");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string DenseMatrix::shape_string() const { return shape(rows_, cols_); }

// --- SparseMatrix -----------------------------------------------------------

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
    throw InvalidInput("inconsistent CSR arrays for " + shape(rows_, cols_));
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) throw InvalidInput("CSR row offsets decrease");
    for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      if (col_indices_[p] >= cols_) throw InvalidInput("CSR column index out of range");
      if (p > row_offsets_[r] && col_indices_[p] <= col_indices_[p - 1]) {
        throw InvalidInput("CSR column indices not strictly increasing in row " + std::to_string(r));
      }
      if (!std::isfinite(values_[p])) throw InvalidInput("non-finite CSR value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidInput("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                         ") outside " + shape(rows, cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(triplets.size());
  vals_out.reserve(triplets.size());
  std::size_t last_row = rows;
  for (const auto& t : triplets) {
    if (last_row == t.row && !cols_out.empty() && cols_out.back() == t.col) {
      vals_out.back() += t.value;
      continue;
    }
    cols_out.push_back(t.col);
    vals_out.push_back(t.value);
    ++offsets[t.row + 1];
    last_row = t.row;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m, double drop_tolerance) {
  std::vector<std::size_t> offsets(m.rows() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (std::abs(v) > drop_tolerance) {
        cols.push_back(c);
        vals.push_back(v);
      }
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::iota(offsets.begin(), offsets.end(), std::size_t{0});
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto cols = row_cols(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (std::size_t c : col_indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> cols(nnz());
  std::vector<double> vals(nnz());
  // Rows are visited in ascending order, so each output row is filled sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      const std::size_t dst = cursor[col_indices_[p]]++;
      cols[dst] = r;
      vals[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) d(r, col_indices_[p]) = values_[p];
  }
  return d;
}

bool SparseMatrix::is_symmetric(double tolerance) const {
  if (rows_ != cols_) return false;
  const SparseMatrix t = transpose();
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto a_cols = row_cols(r);
    const auto a_vals = row_values(r);
    const auto b_cols = t.row_cols(r);
    const auto b_vals = t.row_values(r);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a_cols.size() || j < b_cols.size()) {
      double a = 0.0;
      double b = 0.0;
      if (j == b_cols.size() || (i < a_cols.size() && a_cols[i] < b_cols[j])) {
        a = a_vals[i++];
      } else if (i == a_cols.size() || b_cols[j] < a_cols[i]) {
        b = b_vals[j++];
      } else {
        a = a_vals[i++];
        b = b_vals[j++];
      }
      if (std::abs(a - b) > tolerance) return false;
    }
  }
  return true;
}

bool SparseMatrix::is_binary() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

std::string SparseMatrix::shape_string() const { return shape(rows_, cols_); }

// --- kernels ----------------------------------------------------------------

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& m) {
  if (s.cols() != m.rows()) {
    throw ShapeError("spmm: sparse " + s.shape_string() + " times dense " + m.shape_string());
  }
  DenseMatrix out(s.rows(), m.cols());
  const std::size_t width = m.cols();
  const auto n_rows = static_cast<std::ptrdiff_t>(s.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
    auto dst = out.row(static_cast<std::size_t>(r));
    const auto cols = s.row_cols(static_cast<std::size_t>(r));
    const auto vals = s.row_values(static_cast<std::size_t>(r));
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const double v = vals[p];
      const double* src = m.row(cols[p]).data();
      for (std::size_t c = 0; c < width; ++c) dst[c] += v * src[c];
    }
  }
  return out;
}

DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, Transpose transpose_b) {
  const bool bt = transpose_b == Transpose::Yes;
  const std::size_t inner_b = bt ? b.cols() : b.rows();
  if (a.cols() != inner_b) {
    throw ShapeError(std::string("gemm: ") + a.shape_string() + " times " + b.shape_string() +
                     (bt ? "^T" : ""));
  }
  const std::size_t n = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t m = bt ? b.rows() : b.cols();
  DenseMatrix out(n, m);
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
  if (bt) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
      const auto ar = a.row(static_cast<std::size_t>(i));
      auto dst = out.row(static_cast<std::size_t>(i));
      for (std::size_t j = 0; j < m; ++j) {
        const auto br = b.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < inner; ++k) acc += ar[k] * br[k];
        dst[j] = acc;
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
      const auto ar = a.row(static_cast<std::size_t>(i));
      auto dst = out.row(static_cast<std::size_t>(i));
      for (std::size_t k = 0; k < inner; ++k) {
        const double v = ar[k];
        if (v == 0.0) continue;
        const double* br = b.row(k).data();
        for (std::size_t j = 0; j < m; ++j) dst[j] += v * br[j];
      }
    }
  }
  return out;
}

DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("gemm_tn: " + a.shape_string() + "^T times " + b.shape_string());
  }
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  DenseMatrix out(n, m);
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
    auto dst = out.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const double v = a(k, static_cast<std::size_t>(i));
      if (v == 0.0) continue;
      const double* br = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j) dst[j] += v * br[j];
    }
  }
  return out;
}

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) noexcept {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kSigmoidLow, kSigmoidHigh);
}

double softplus(double x) noexcept {
  return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

DenseMatrix map_elementwise(const DenseMatrix& m, Activation fn) {
  DenseMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  switch (fn) {
    case Activation::Relu:
      std::transform(src.begin(), src.end(), dst.begin(), relu);
      break;
    case Activation::Sigmoid:
      std::transform(src.begin(), src.end(), dst.begin(), sigmoid);
      break;
  }
  return out;
}

}  // namespace hyperclust
