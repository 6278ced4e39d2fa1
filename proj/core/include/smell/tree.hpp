#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smell/rng.hpp"
#include "smell/sparse.hpp"

namespace smell {

/// Column entries of a sparse matrix sorted by (column, value, row). Built
/// once per training matrix and shared by every tree grown on it.
struct PresortedColumns {
  struct Entry {
    int col;
    double value;
    std::uint32_t row;
  };
  std::vector<Entry> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;

  static PresortedColumns build(const SparseMatrix& X);
};

/// Axis-aligned binary tree over sparse rows: a row goes left when its
/// value at `feature` is <= `threshold` (absent entries read as 0).
class DecisionTreeModel {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;  // class distribution (sums to 1) or {regression mean}

    friend bool operator==(const Node&, const Node&) = default;
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<Node>& nodes() { return nodes_; }
  int leaf_for(SparseRowView row) const;
  const std::vector<double>& value_for(SparseRowView row) const { return nodes_[static_cast<std::size_t>(leaf_for(row))].value; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;

 private:
  std::vector<Node> nodes_;
};

enum class SplitCriterion { Gini, SquaredError };

struct TreeGrowOptions {
  SplitCriterion criterion = SplitCriterion::Gini;
  int max_depth = 0;           // 0 = unlimited
  int min_samples_split = 2;   // by total sample weight
  /// Features examined per split; nullopt examines all. When set, features
  /// are drawn without replacement until this many have been visited and at
  /// least one of them varies within the node.
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 0;  // feature draws only
};

struct GrownTree {
  DecisionTreeModel tree;
  /// Leaf node index reached by each training row (-1 for zero-weight rows).
  std::vector<int> leaf_of_row;
};

/// Grows a tree breadth-first. `weights[r]` is the multiplicity of row r
/// (bootstrap counts; 0 excludes the row). For Gini, `targets` holds class
/// codes in [0, n_classes); for squared error it holds real targets.
///
/// Every node examines candidate thresholds at midpoints between
/// consecutive distinct values; the best split wins with ties going to the
/// lower feature index, then the lower threshold. A node becomes a leaf when
/// it is pure, too small, at max depth, or constant in every examined feature.
GrownTree grow_tree(const PresortedColumns& columns, std::span<const double> targets,
                    std::span<const double> weights, int n_classes, const TreeGrowOptions& options);

}  // namespace smell
