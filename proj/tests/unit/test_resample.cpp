#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "smell/error.hpp"
#include "smell/resample.hpp"

using namespace smell;

namespace {

struct Instance {
  SparseMatrix X;
  std::vector<int> y;
};

Instance random_instance(std::mt19937_64& g, std::vector<int> counts, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  Instance in;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (int i = 0; i < counts[c]; ++i) {
      std::vector<double> r(cols, 0.0);
      for (auto& v : r)
        if (u(g) < 0.4) v = std::round(u(g) * 8.0) / 4.0;
      rows.push_back(r);
      in.y.push_back(static_cast<int>(c));
    }
  }
  in.X = from_dense(rows, cols);
  return in;
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// z must be within the k nearest same-class rows of x: fewer than k rows are
// strictly closer than z.
bool is_k_neighbor(const Instance& in, std::size_t x, std::size_t z, int k) {
  const auto dx = in.X.dense_row(x);
  const double dz = dist2(dx, in.X.dense_row(z));
  int closer = 0;
  for (std::size_t i = 0; i < in.y.size(); ++i) {
    if (i == x || in.y[i] != in.y[x]) continue;
    if (dist2(dx, in.X.dense_row(i)) < dz) ++closer;
  }
  return closer < k;
}

// Every synthetic row must be x + u (z - x) for a single u in [0, 1].
bool on_segment(const std::vector<double>& s, const std::vector<double>& x, const std::vector<double>& z) {
  double u = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = z[i] - x[i];
    if (std::abs(d) < 1e-15) {
      if (std::abs(s[i] - x[i]) > 1e-12) return false;
      continue;
    }
    const double ui = (s[i] - x[i]) / d;
    if (ui < -1e-12 || ui > 1 + 1e-12) return false;
    if (u < 0) u = ui;
    else if (std::abs(u - ui) > 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("class counts are equalised to the majority") {
  std::mt19937_64 g(1);
  const auto in = random_instance(g, {10, 4, 2}, 6);
  const auto r = smote(in.X, in.y, 5, 99);
  CHECK(r.plan.current == std::vector<std::size_t>{10, 4, 2});
  CHECK(r.plan.target == std::vector<std::size_t>{10, 10, 10});
  CHECK(r.X.rows() == 30);
  std::vector<int> counts(3, 0);
  for (int c : r.y) ++counts[c];
  CHECK(counts == std::vector<int>{10, 10, 10});
  CHECK(r.parents.size() == 14);
  for (std::size_t i = 0; i < in.y.size(); ++i) {
    CHECK(r.X.dense_row(i) == in.X.dense_row(i));
    CHECK(r.y[i] == in.y[i]);
  }
  for (std::size_t i = 16; i < 22; ++i) CHECK(r.y[i] == 1);
  for (std::size_t i = 22; i < 30; ++i) CHECK(r.y[i] == 2);
}

TEST_CASE("synthetic rows stay inside the parent envelope") {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + static_cast<int>(g() % 3);
    std::vector<int> counts;
    for (int c = 0; c < K; ++c) counts.push_back(2 + static_cast<int>(g() % 12));
    const auto in = random_instance(g, counts, 1 + g() % 8);
    const int k = 1 + static_cast<int>(g() % 5);
    const auto r = smote(in.X, in.y, k, g());
    REQUIRE(r.X.rows() == in.y.size() + r.parents.size());
    for (std::size_t s = 0; s < r.parents.size(); ++s) {
      const auto [x, z] = r.parents[s];
      const auto row = in.y.size() + s;
      CHECK(in.y[x] == r.y[row]);
      CHECK(in.y[z] == r.y[row]);
      CHECK(x != z);
      CHECK(is_k_neighbor(in, x, z, k));
      CHECK(on_segment(r.X.dense_row(row), in.X.dense_row(x), in.X.dense_row(z)));
    }
  }
}

TEST_CASE("same seed gives identical output, other seeds differ") {
  std::mt19937_64 g(5);
  const auto in = random_instance(g, {12, 5, 3}, 5);
  const auto a = smote(in.X, in.y, 5, 7);
  const auto b = smote(in.X, in.y, 5, 7);
  const auto c = smote(in.X, in.y, 5, 8);
  CHECK(a.X == b.X);
  CHECK(a.parents == b.parents);
  CHECK_FALSE(a.X == c.X);
}

TEST_CASE("balanced input is returned unchanged") {
  std::mt19937_64 g(6);
  const auto in = random_instance(g, {4, 4}, 3);
  const auto r = smote(in.X, in.y, 5, 1);
  CHECK(r.X == in.X);
  CHECK(r.parents.empty());
}

TEST_CASE("nearest neighbours break ties by lower index") {
  const auto X = from_dense({{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {3, 3}}, 2);
  const std::vector<std::size_t> cand{4, 3, 2, 1, 0};
  CHECK(nearest_neighbors(X, 0, cand, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK(nearest_neighbors(X, 0, cand, 10).size() == 4);
}

TEST_CASE("errors") {
  const auto X = from_dense({{1}, {2}, {3}}, 1);
  const std::vector<int> y{0, 0, 1};
  CHECK_THROWS_AS(smote(X, y, 5, 1), InvalidArgument);
  const std::vector<int> y2{0, 0, 1};
  const auto X2 = from_dense({{1}, {2}, {3}, {4}}, 1);
  const std::vector<int> y3{0, 0, 1, 1};
  CHECK_THROWS_AS(smote(X2, y3, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(smote(X2, y2, 5, 1), InvalidArgument);
}
