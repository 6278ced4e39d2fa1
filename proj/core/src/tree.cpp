#include "smell/tree.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "smell/error.hpp"

namespace smell {

PresortedColumns PresortedColumns::build(const SparseMatrix& X) {
  PresortedColumns p;
  p.rows = X.rows();
  p.cols = X.cols();
  p.entries.reserve(X.nnz());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      p.entries.push_back({row.cols[k], row.values[k], static_cast<std::uint32_t>(r)});
    }
  }
  std::sort(p.entries.begin(), p.entries.end(), [](const Entry& a, const Entry& b) {
    if (a.col != b.col) return a.col < b.col;
    if (a.value != b.value) return a.value < b.value;
    return a.row < b.row;
  });
  return p;
}

int DecisionTreeModel::leaf_for(SparseRowView row) const {
  int n = 0;
  while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
    const auto& node = nodes_[static_cast<std::size_t>(n)];
    const auto it = std::lower_bound(row.cols.begin(), row.cols.end(), node.feature);
    const double v = (it != row.cols.end() && *it == node.feature)
                         ? row.values[static_cast<std::size_t>(it - row.cols.begin())]
                         : 0.0;
    n = v <= node.threshold ? node.left : node.right;
  }
  return n;
}

std::size_t DecisionTreeModel::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    best = std::max(best, d[i]);
    if (n.feature >= 0) {
      d[static_cast<std::size_t>(n.left)] = d[i] + 1;
      d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

namespace {

// Per-node sufficient statistics. Gini: class weights. Squared error:
// {weight, weighted sum, weighted sum of squares}.
using Stats = std::vector<double>;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;
};

class Grower {
 public:
  Grower(const PresortedColumns& columns, std::span<const double> targets, std::span<const double> weights,
         int n_classes, const TreeGrowOptions& options)
      : cols_(columns), targets_(targets), weights_(weights), k_(n_classes), opt_(options) {
    if (targets.size() != columns.rows || weights.size() != columns.rows) {
      throw InvalidArgument("grow_tree: targets/weights length must equal row count");
    }
    stat_size_ = opt_.criterion == SplitCriterion::Gini ? static_cast<std::size_t>(k_) : 3;
  }

  GrownTree run() {
    GrownTree out;
    auto& nodes = out.tree.nodes();
    node_of_.assign(cols_.rows, -1);
    nodes.emplace_back();
    std::vector<Stats> totals(1, Stats(stat_size_, 0.0));
    for (std::size_t r = 0; r < cols_.rows; ++r) {
      if (weights_[r] <= 0.0) continue;
      node_of_[r] = 0;
      add(totals[0], r, weights_[r]);
    }
    std::vector<int> level{0};
    std::vector<int> depth_of{0};
    while (!level.empty()) {
      std::vector<int> slot(nodes.size(), -1);
      std::vector<int> splittable;
      for (int id : level) {
        if (can_split(totals[static_cast<std::size_t>(id)], depth_of[static_cast<std::size_t>(id)])) {
          slot[static_cast<std::size_t>(id)] = static_cast<int>(splittable.size());
          splittable.push_back(id);
        }
      }
      if (splittable.empty()) break;

      std::vector<std::vector<std::uint32_t>> buckets(splittable.size());
      for (std::uint32_t e = 0; e < cols_.entries.size(); ++e) {
        const int nd = node_of_[cols_.entries[e].row];
        if (nd < 0) continue;
        const int s = slot[static_cast<std::size_t>(nd)];
        if (s >= 0) buckets[static_cast<std::size_t>(s)].push_back(e);
      }

      std::vector<Split> splits(splittable.size());
      for (std::size_t s = 0; s < splittable.size(); ++s) {
        splits[s] = best_split(splittable[s], totals[static_cast<std::size_t>(splittable[s])], buckets[s]);
      }

      // Children, then row routing: zero default first, explicit entries after.
      std::vector<int> next_level;
      std::vector<int> default_child(nodes.size(), -1);
      for (std::size_t s = 0; s < splittable.size(); ++s) {
        if (splits[s].feature < 0) continue;
        const int id = splittable[s];
        const int left = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.emplace_back();
        auto& parent = nodes[static_cast<std::size_t>(id)];
        parent.feature = splits[s].feature;
        parent.threshold = splits[s].threshold;
        parent.left = left;
        parent.right = left + 1;
        default_child.resize(nodes.size(), -1);
        default_child[static_cast<std::size_t>(id)] = 0.0 <= parent.threshold ? left : left + 1;
        const int d = depth_of[static_cast<std::size_t>(id)] + 1;
        depth_of.resize(nodes.size(), 0);
        depth_of[static_cast<std::size_t>(left)] = d;
        depth_of[static_cast<std::size_t>(left + 1)] = d;
        next_level.push_back(left);
        next_level.push_back(left + 1);
      }
      if (next_level.empty()) break;
      for (std::size_t r = 0; r < cols_.rows; ++r) {
        const int nd = node_of_[r];
        if (nd >= 0 && static_cast<std::size_t>(nd) < default_child.size() && default_child[static_cast<std::size_t>(nd)] >= 0) {
          node_of_[r] = -2 - nd;  // marks "parent nd, routed by default"
        }
      }
      for (std::size_t s = 0; s < splittable.size(); ++s) {
        if (splits[s].feature < 0) continue;
        const int id = splittable[s];
        const auto& parent = nodes[static_cast<std::size_t>(id)];
        for (auto e : buckets[s]) {
          const auto& entry = cols_.entries[e];
          if (entry.col != parent.feature) continue;
          node_of_[entry.row] = entry.value <= parent.threshold ? parent.left : parent.right;
        }
      }
      for (std::size_t r = 0; r < cols_.rows; ++r) {
        if (node_of_[r] <= -2) node_of_[r] = default_child[static_cast<std::size_t>(-2 - node_of_[r])];
      }
      totals.resize(nodes.size(), Stats(stat_size_, 0.0));
      for (int id : next_level) totals[static_cast<std::size_t>(id)].assign(stat_size_, 0.0);
      for (std::size_t r = 0; r < cols_.rows; ++r) {
        const int nd = node_of_[r];
        if (nd >= 0 && static_cast<std::size_t>(nd) >= level_floor(next_level)) add(totals[static_cast<std::size_t>(nd)], r, weights_[r]);
      }
      level = std::move(next_level);
    }

    for (std::size_t id = 0; id < nodes.size(); ++id) {
      auto& n = nodes[id];
      if (n.feature >= 0) continue;
      const auto& t = totals[id];
      if (opt_.criterion == SplitCriterion::Gini) {
        double w = 0.0;
        for (double c : t) w += c;
        n.value.resize(static_cast<std::size_t>(k_));
        for (std::size_t c = 0; c < n.value.size(); ++c) n.value[c] = w > 0.0 ? t[c] / w : 0.0;
      } else {
        n.value = {t[0] > 0.0 ? t[1] / t[0] : 0.0};
      }
    }
    out.leaf_of_row = node_of_;
    return out;
  }

 private:
  static std::size_t level_floor(const std::vector<int>& level) {
    return level.empty() ? 0 : static_cast<std::size_t>(*std::min_element(level.begin(), level.end()));
  }

  void add(Stats& s, std::size_t row, double w) const {
    if (opt_.criterion == SplitCriterion::Gini) {
      s[static_cast<std::size_t>(targets_[row])] += w;
    } else {
      const double y = targets_[row];
      s[0] += w;
      s[1] += w * y;
      s[2] += w * y * y;
    }
  }

  double weight(const Stats& s) const {
    if (opt_.criterion == SplitCriterion::Gini) {
      double w = 0.0;
      for (double c : s) w += c;
      return w;
    }
    return s[0];
  }

  bool can_split(const Stats& s, int depth) const {
    const double w = weight(s);
    if (w < static_cast<double>(opt_.min_samples_split) || w <= 1.0) return false;
    if (opt_.max_depth > 0 && depth >= opt_.max_depth) return false;
    if (opt_.criterion == SplitCriterion::Gini) {
      int present = 0;
      for (double c : s) present += c > 0.0 ? 1 : 0;
      return present > 1;
    }
    const double var = s[2] / s[0] - (s[1] / s[0]) * (s[1] / s[0]);
    return var > 1e-14 * std::max(1.0, s[2] / s[0]);
  }

  // Proxy to maximise: Gini -> sum_c n_c^2 / n; squared error -> sum^2 / n.
  double proxy(const Stats& s) const {
    if (opt_.criterion == SplitCriterion::Gini) {
      double w = 0.0;
      double sq = 0.0;
      for (double c : s) {
        w += c;
        sq += c * c;
      }
      return w > 0.0 ? sq / w : 0.0;
    }
    return s[0] > 0.0 ? s[1] * s[1] / s[0] : 0.0;
  }

  std::vector<int> allowed_features(int node_id, const Stats& total, const std::vector<std::uint32_t>& bucket) const {
    const double node_w = weight(total);
    std::vector<int> varying;
    for (std::size_t a = 0; a < bucket.size();) {
      const int col = cols_.entries[bucket[a]].col;
      std::size_t b = a;
      double w = 0.0;
      while (b < bucket.size() && cols_.entries[bucket[b]].col == col) {
        w += weights_[cols_.entries[bucket[b]].row];
        ++b;
      }
      const bool has_zero = w < node_w - 1e-9;
      if (has_zero || cols_.entries[bucket[a]].value != cols_.entries[bucket[b - 1]].value) varying.push_back(col);
      a = b;
    }
    if (!opt_.max_features || *opt_.max_features >= cols_.cols || varying.empty()) return varying;

    Rng rng(derive_seed(opt_.seed, "tree-node", static_cast<std::uint64_t>(node_id)));
    std::unordered_map<std::size_t, std::size_t> swapped;
    auto value_at = [&](std::size_t i) {
      auto it = swapped.find(i);
      return it == swapped.end() ? i : it->second;
    };
    std::vector<int> chosen;
    const std::size_t n = cols_.cols;
    for (std::size_t visited = 0; visited < n && (visited < *opt_.max_features || chosen.empty()); ++visited) {
      const std::size_t j = visited + static_cast<std::size_t>(rng.below(n - visited));
      const std::size_t f = value_at(j);
      swapped[j] = value_at(visited);
      if (std::binary_search(varying.begin(), varying.end(), static_cast<int>(f))) chosen.push_back(static_cast<int>(f));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  Split best_split(int node_id, const Stats& total, const std::vector<std::uint32_t>& bucket) const {
    Split best;
    const auto allowed = allowed_features(node_id, total, bucket);
    if (allowed.empty()) return best;
    const double node_w = weight(total);
    Stats left(stat_size_);
    Stats right(stat_size_);
    Stats zero(stat_size_);
    std::size_t next_allowed = 0;
    for (std::size_t a = 0; a < bucket.size();) {
      const int col = cols_.entries[bucket[a]].col;
      std::size_t b = a;
      while (b < bucket.size() && cols_.entries[bucket[b]].col == col) ++b;
      while (next_allowed < allowed.size() && allowed[next_allowed] < col) ++next_allowed;
      if (next_allowed == allowed.size()) break;
      if (allowed[next_allowed] != col) {
        a = b;
        continue;
      }
      // Zero block = node total minus explicit entries.
      zero = total;
      for (std::size_t i = a; i < b; ++i) {
        const auto& e = cols_.entries[bucket[i]];
        sub(zero, e.row, weights_[e.row]);
      }
      const bool has_zero = weight(zero) > 1e-9 && node_w - weight(zero) < node_w;
      std::fill(left.begin(), left.end(), 0.0);
      double prev = 0.0;
      bool have_prev = false;
      auto consider = [&](double next_value) {
        if (!have_prev || next_value <= prev) return;
        const double lw = weight(left);
        if (lw <= 0.0 || lw >= node_w) return;
        for (std::size_t i = 0; i < stat_size_; ++i) right[i] = total[i] - left[i];
        const double score = proxy(left) + proxy(right);
        if (best.feature < 0 || score > best.score + 1e-12 * std::max(1.0, std::abs(best.score))) {
          double thr = prev + (next_value - prev) / 2.0;
          if (thr >= next_value) thr = prev;
          best = {col, thr, score};
        }
      };
      bool zero_done = !has_zero;
      for (std::size_t i = a; i < b; ++i) {
        const auto& e = cols_.entries[bucket[i]];
        if (!zero_done && e.value > 0.0) {
          consider(0.0);
          for (std::size_t s = 0; s < stat_size_; ++s) left[s] += zero[s];
          prev = 0.0;
          have_prev = true;
          zero_done = true;
        }
        consider(e.value);
        add(left, e.row, weights_[e.row]);
        prev = e.value;
        have_prev = true;
      }
      if (!zero_done) {
        consider(0.0);
      }
      a = b;
    }
    return best;
  }

  void sub(Stats& s, std::size_t row, double w) const {
    if (opt_.criterion == SplitCriterion::Gini) {
      s[static_cast<std::size_t>(targets_[row])] -= w;
    } else {
      const double y = targets_[row];
      s[0] -= w;
      s[1] -= w * y;
      s[2] -= w * y * y;
    }
  }

  const PresortedColumns& cols_;
  std::span<const double> targets_;
  std::span<const double> weights_;
  int k_;
  TreeGrowOptions opt_;
  std::size_t stat_size_ = 0;
  std::vector<int> node_of_;
};

}  // namespace

GrownTree grow_tree(const PresortedColumns& columns, std::span<const double> targets,
                    std::span<const double> weights, int n_classes, const TreeGrowOptions& options) {
  if (options.criterion == SplitCriterion::Gini && n_classes < 1) {
    throw InvalidArgument("grow_tree: need at least one class");
  }
  return Grower(columns, targets, weights, n_classes, options).run();
}

}  // namespace smell
