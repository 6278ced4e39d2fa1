#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "smell/sparse.hpp"

namespace smell {

struct ResamplePlan {
  std::vector<std::size_t> current;  // per encoded class
  std::vector<std::size_t> target;
  int k_neighbors = 5;
  std::uint64_t seed = 0;
};

struct SmoteResult {
  SparseMatrix X;
  std::vector<int> y;
  ResamplePlan plan;
  /// For every synthetic row (in output order after the originals), the
  /// input row indices of the two parents it was interpolated between.
  std::vector<std::pair<std::size_t, std::size_t>> parents;
};

/// SMOTE oversampling to the majority class count.
///
/// For each synthetic sample of class c: a uniformly drawn class-c row x,
/// one of its min(k, n_c - 1) nearest class-c neighbours z (Euclidean,
/// distance ties to the lower row index), and u ~ U(0,1) give x + u (z - x).
/// Originals come first and unchanged; synthetic rows follow grouped by
/// class. Each class draws from its own substream of `seed`, so the output
/// is bit-identical for a given seed. Synthetic rows are not renormalised.
///
/// Throws InvalidArgument when a class that needs synthetic rows has a
/// single sample, or when k < 1.
SmoteResult smote(const SparseMatrix& X, std::span<const int> y, int k = 5, std::uint64_t seed = 0);

/// Nearest same-set neighbours of `query` among `candidates` (row indices
/// into X, `query` itself excluded), closest first, ties to lower index.
std::vector<std::size_t> nearest_neighbors(const SparseMatrix& X, std::size_t query,
                                           std::span<const std::size_t> candidates, std::size_t k);

}  // namespace smell
