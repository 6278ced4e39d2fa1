#pragma once

// Independent reference implementations. They work from raw label pairs and
// textbook definitions, never from the library's confusion-matrix code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct PairMetrics {
  std::vector<double> precision, recall, f1;
  std::vector<double> support;
  double accuracy = 0.0;
  double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
  double weighted_p = 0.0, weighted_r = 0.0, weighted_f1 = 0.0;
  double mcc = 0.0;
};

// Gorodkin's R_K written as a correlation of one-hot indicator matrices:
// cov(X,Y) / sqrt(cov(X,X) cov(Y,Y)).
inline double indicator_correlation(const std::vector<int>& t, const std::vector<int>& p, int K) {
  const std::size_t n = t.size();
  std::vector<double> mx(K, 0.0), my(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mx[t[i]] += 1.0 / n;
    my[p[i]] += 1.0 / n;
  }
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      const double x = (t[i] == k ? 1.0 : 0.0) - mx[k];
      const double y = (p[i] == k ? 1.0 : 0.0) - my[k];
      cxy += x * y;
      cxx += x * x;
      cyy += y * y;
    }
  }
  if (cxx == 0.0 || cyy == 0.0) return 0.0;
  return cxy / std::sqrt(cxx * cyy);
}

inline PairMetrics brute_metrics(const std::vector<int>& t, const std::vector<int>& p, int K) {
  PairMetrics m;
  const std::size_t n = t.size();
  double correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
  m.accuracy = correct / n;
  for (int k = 0; k < K; ++k) {
    double tp = 0, pred = 0, truth = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += t[i] == k && p[i] == k;
      pred += p[i] == k;
      truth += t[i] == k;
    }
    const double prec = pred == 0 ? 0.0 : tp / pred;
    const double rec = truth == 0 ? 0.0 : tp / truth;
    m.precision.push_back(prec);
    m.recall.push_back(rec);
    m.f1.push_back(prec + rec == 0 ? 0.0 : 2 * prec * rec / (prec + rec));
    m.support.push_back(truth);
  }
  for (int k = 0; k < K; ++k) {
    m.macro_p += m.precision[k] / K;
    m.macro_r += m.recall[k] / K;
    m.macro_f1 += m.f1[k] / K;
    m.weighted_p += m.precision[k] * m.support[k] / n;
    m.weighted_r += m.recall[k] * m.support[k] / n;
    m.weighted_f1 += m.f1[k] * m.support[k] / n;
  }
  m.mcc = indicator_correlation(t, p, K);
  return m;
}

inline double binary_mcc(double tp, double fp, double fn, double tn) {
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  return den == 0.0 ? 0.0 : (tp * tn - fp * fn) / den;
}

// Random (truth, prediction) pairs with n in [1, max_n], classes in [2, max_k].
struct LabelPairs {
  int K = 0;
  std::vector<int> truth, pred;
};

inline LabelPairs random_pairs(std::mt19937_64& g, int max_k, int max_n) {
  LabelPairs lp;
  lp.K = 2 + static_cast<int>(g() % static_cast<std::uint64_t>(max_k - 1));
  const int n = 1 + static_cast<int>(g() % static_cast<std::uint64_t>(max_n));
  for (int i = 0; i < n; ++i) {
    lp.truth.push_back(static_cast<int>(g() % lp.K));
    lp.pred.push_back(static_cast<int>(g() % lp.K));
  }
  return lp;
}

}  // namespace oracle
