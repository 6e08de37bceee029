#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hyperclust {

/// Row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;
  std::string shape_string() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
class SparseMatrix {
 public:
  SparseMatrix() : row_offsets_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols);  // all zero
  /// Validates the CSR invariants and throws InvalidInput on violation.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Duplicate coordinates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  /// Stores every entry whose magnitude exceeds `drop_tolerance`.
  static SparseMatrix from_dense(const DenseMatrix& m, double drop_tolerance = 0.0);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }

  /// Stored value or zero. O(log nnz(row)).
  double at(std::size_t r, std::size_t c) const;

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  bool is_symmetric(double tolerance = 0.0) const;
  bool is_binary() const;
  std::string shape_string() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

enum class Transpose : std::uint8_t { No, Yes };
enum class Activation : std::uint8_t { Relu, Sigmoid };

/// S·M.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& m);

/// A·B, or A·Bᵀ when `transpose_b` is Yes.
DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, Transpose transpose_b = Transpose::No);

/// Aᵀ·B.
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix map_elementwise(const DenseMatrix& m, Activation fn);

double relu(double x) noexcept;

/// Logistic function clamped into the open interval (0, 1); plain
/// 1/(1+e^-x) rounds to exactly 1.0 for x > ~37.
double sigmoid(double x) noexcept;

/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

}  // namespace hyperclust
