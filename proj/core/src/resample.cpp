#include "smell/resample.hpp"

#include <algorithm>
#include <string>

#include "smell/error.hpp"
#include "smell/rng.hpp"

namespace smell {

std::vector<std::size_t> nearest_neighbors(const SparseMatrix& X, std::size_t query,
                                           std::span<const std::size_t> candidates, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  const auto q = X.row(query);
  for (auto c : candidates) {
    if (c == query) continue;
    dist.emplace_back(squared_distance(q, X.row(c)), c);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

SmoteResult smote(const SparseMatrix& X, std::span<const int> y, int k, std::uint64_t seed) {
  if (X.rows() != y.size()) throw InvalidArgument("smote: row count does not match label count");
  if (k < 1) throw InvalidArgument("smote: k_neighbors must be at least 1");
  int n_classes = 0;
  for (int label : y) {
    if (label < 0) throw InvalidArgument("smote: negative class code");
    n_classes = std::max(n_classes, label + 1);
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < y.size(); ++i) members[static_cast<std::size_t>(y[i])].push_back(i);

  SmoteResult out;
  out.plan.k_neighbors = k;
  out.plan.seed = seed;
  std::size_t majority = 0;
  for (const auto& m : members) {
    out.plan.current.push_back(m.size());
    majority = std::max(majority, m.size());
  }
  for (const auto& m : members) out.plan.target.push_back(m.empty() ? 0 : majority);

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& m = members[c];
    if (!m.empty() && m.size() < majority && m.size() < 2) {
      throw InvalidArgument("smote: class " + std::to_string(c) +
                            " has a single sample; drop or duplicate it before oversampling");
    }
  }

  out.X = X;
  out.y.assign(y.begin(), y.end());
  std::vector<int> cols;
  std::vector<double> vals;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& m = members[c];
    if (m.empty() || m.size() >= majority) continue;
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), m.size() - 1);
    std::vector<std::vector<std::size_t>> neighbors(m.size());
    Rng rng(derive_seed(seed, "smote", c));
    for (std::size_t need = majority - m.size(); need > 0; --need) {
      const auto pick = static_cast<std::size_t>(rng.below(m.size()));
      auto& nn = neighbors[pick];
      if (nn.empty()) nn = nearest_neighbors(X, m[pick], m, k_eff);
      const std::size_t z = nn[static_cast<std::size_t>(rng.below(nn.size()))];
      const double u = rng.uniform();
      const auto a = X.row(m[pick]);
      const auto b = X.row(z);
      cols.clear();
      vals.clear();
      std::size_t i = 0;
      std::size_t j = 0;
      while (i < a.nnz() || j < b.nnz()) {
        if (j == b.nnz() || (i < a.nnz() && a.cols[i] < b.cols[j])) {
          cols.push_back(a.cols[i]);
          vals.push_back(a.values[i] + u * (0.0 - a.values[i]));
          ++i;
        } else if (i == a.nnz() || b.cols[j] < a.cols[i]) {
          cols.push_back(b.cols[j]);
          vals.push_back(u * b.values[j]);
          ++j;
        } else {
          cols.push_back(a.cols[i]);
          vals.push_back(a.values[i] + u * (b.values[j] - a.values[i]));
          ++i;
          ++j;
        }
      }
      out.X.append_row(cols, vals);
      out.y.push_back(static_cast<int>(c));
      out.parents.emplace_back(m[pick], z);
    }
  }
  return out;
}

}  // namespace smell
