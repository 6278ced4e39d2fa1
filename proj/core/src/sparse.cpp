#include "smell/sparse.hpp"

#include "smell/error.hpp"

namespace smell {

double SparseRowView::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

double SparseRowView::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (std::size_t k = 0; k < cols.size(); ++k) s += values[k] * dense[static_cast<std::size_t>(cols[k])];
  return s;
}

void SparseMatrix::append_row(std::span<const int> cols, std::span<const double> values) {
  if (cols.size() != values.size()) throw InvalidArgument("sparse row: column/value length mismatch");
  int prev = -1;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const int c = cols[k];
    if (c <= prev || c < 0 || static_cast<std::size_t>(c) >= cols_) {
      throw InvalidArgument("sparse row: columns must be increasing and within width");
    }
    prev = c;
    if (values[k] == 0.0) continue;
    indices_.push_back(c);
    values_.push_back(values[k]);
  }
  indptr_.push_back(indices_.size());
}

SparseRowView SparseMatrix::row(std::size_t r) const {
  const auto b = indptr_.at(r);
  const auto e = indptr_.at(r + 1);
  return {std::span<const int>(indices_).subspan(b, e - b), std::span<const double>(values_).subspan(b, e - b)};
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto v = row(r);
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    if (static_cast<std::size_t>(v.cols[k]) == c) return v.values[k];
  }
  return 0.0;
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const {
  SparseMatrix out(cols_);
  for (auto r : rows) out.append_row(row(r));
  return out;
}

std::vector<double> SparseMatrix::dense_row(std::size_t r) const {
  std::vector<double> out(cols_, 0.0);
  const auto v = row(r);
  for (std::size_t k = 0; k < v.nnz(); ++k) out[static_cast<std::size_t>(v.cols[k])] = v.values[k];
  return out;
}

double squared_distance(SparseRowView a, SparseRowView b) {
  double s = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.nnz() || j < b.nnz()) {
    if (j == b.nnz() || (i < a.nnz() && a.cols[i] < b.cols[j])) {
      s += a.values[i] * a.values[i];
      ++i;
    } else if (i == a.nnz() || b.cols[j] < a.cols[i]) {
      s += b.values[j] * b.values[j];
      ++j;
    } else {
      const double d = a.values[i] - b.values[j];
      s += d * d;
      ++i;
      ++j;
    }
  }
  return s;
}

SparseMatrix from_dense(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  SparseMatrix m(cols);
  std::vector<int> idx;
  std::vector<double> val;
  for (const auto& r : rows) {
    if (r.size() != cols) throw InvalidArgument("from_dense: ragged rows");
    idx.clear();
    val.clear();
    for (std::size_t c = 0; c < cols; ++c) {
      if (r[c] != 0.0) {
        idx.push_back(static_cast<int>(c));
        val.push_back(r[c]);
      }
    }
    m.append_row(idx, val);
  }
  return m;
}

}  // namespace smell
