#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace smell {

/// Read-only view of one sparse row; column indices strictly increasing.
struct SparseRowView {
  std::span<const int> cols;
  std::span<const double> values;

  std::size_t nnz() const { return cols.size(); }
  double squared_norm() const;
  double dot(std::span<const double> dense) const;
};

/// Compressed sparse row matrix of doubles.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const { return indptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return indices_.size(); }

  /// Appends a row. Columns must be strictly increasing and < cols();
  /// explicit zeros are dropped.
  void append_row(std::span<const int> cols, std::span<const double> values);
  void append_row(SparseRowView row) { append_row(row.cols, row.values); }

  SparseRowView row(std::size_t r) const;
  double at(std::size_t r, std::size_t c) const;

  /// Rows picked by index, in the given order.
  SparseMatrix select_rows(std::span<const std::size_t> rows) const;
  std::vector<double> dense_row(std::size_t r) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> indptr_{0};
  std::vector<int> indices_;
  std::vector<double> values_;
};

double squared_distance(SparseRowView a, SparseRowView b);

/// Builds a sparse matrix from dense rows (zeros dropped).
SparseMatrix from_dense(const std::vector<std::vector<double>>& rows, std::size_t cols);

}  // namespace smell
