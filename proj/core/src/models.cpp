#include "smell/models.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "smell/error.hpp"
#include "smell/rng.hpp"

namespace smell {

void to_json(nlohmann::json& j, const NaiveBayesParams& p) {
  j = {{"alpha", p.alpha}};
}

void from_json(const nlohmann::json& j, NaiveBayesParams& p) {
  p.alpha = j.value("alpha", p.alpha);
}

void to_json(nlohmann::json& j, const LogisticRegressionParams& p) {
  j = {{"C", p.C}, {"max_epochs", p.max_epochs}, {"tolerance", p.tolerance}};
}

void from_json(const nlohmann::json& j, LogisticRegressionParams& p) {
  p.C = j.value("C", p.C);
  p.max_epochs = j.value("max_epochs", p.max_epochs);
  p.tolerance = j.value("tolerance", p.tolerance);
}

void to_json(nlohmann::json& j, const DecisionTreeParams& p) {
  j = {{"max_depth", p.max_depth}, {"min_samples_split", p.min_samples_split}};
}

void from_json(const nlohmann::json& j, DecisionTreeParams& p) {
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_samples_split = j.value("min_samples_split", p.min_samples_split);
}

void to_json(nlohmann::json& j, const RandomForestParams& p) {
  j = {{"n_trees", p.n_trees}, {"bootstrap", p.bootstrap}, {"max_features", p.max_features}, {"max_depth", p.max_depth}, {"min_samples_split", p.min_samples_split}};
}

void from_json(const nlohmann::json& j, RandomForestParams& p) {
  p.n_trees = j.value("n_trees", p.n_trees);
  p.bootstrap = j.value("bootstrap", p.bootstrap);
  p.max_features = j.value("max_features", p.max_features);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_samples_split = j.value("min_samples_split", p.min_samples_split);
}

void to_json(nlohmann::json& j, const SvmParams& p) {
  j = {{"C", p.C}, {"epochs", p.epochs}};
}

void from_json(const nlohmann::json& j, SvmParams& p) {
  p.C = j.value("C", p.C);
  p.epochs = j.value("epochs", p.epochs);
}

void to_json(nlohmann::json& j, const GradientBoostingParams& p) {
  j = {{"n_rounds", p.n_rounds}, {"max_depth", p.max_depth}, {"learning_rate", p.learning_rate}};
}

void from_json(const nlohmann::json& j, GradientBoostingParams& p) {
  p.n_rounds = j.value("n_rounds", p.n_rounds);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
}

void to_json(nlohmann::json& j, const KnnParams& p) {
  j = {{"k", p.k}};
}

void from_json(const nlohmann::json& j, KnnParams& p) {
  p.k = j.value("k", p.k);
}

namespace {

struct KindInfo {
  ModelKind kind;
  std::string_view name;
  std::string_view display;
};

constexpr std::array<KindInfo, 7> kKinds = {{
    {ModelKind::NaiveBayes, "naive-bayes", "Naive Bayes"},
    {ModelKind::LogisticRegression, "logistic-regression", "Logistic Regression"},
    {ModelKind::DecisionTree, "decision-tree", "Decision Tree"},
    {ModelKind::RandomForest, "random-forest", "Random Forest"},
    {ModelKind::Svm, "svm", "SVM"},
    {ModelKind::GradientBoosting, "gradient-boosting", "Gradient Boosting"},
    {ModelKind::Knn, "knn", "KNN"},
}};

Hyperparameters default_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::NaiveBayes: return NaiveBayesParams{};
    case ModelKind::LogisticRegression: return LogisticRegressionParams{};
    case ModelKind::DecisionTree: return DecisionTreeParams{};
    case ModelKind::RandomForest: return RandomForestParams{};
    case ModelKind::Svm: return SvmParams{};
    case ModelKind::GradientBoosting: return GradientBoostingParams{};
    case ModelKind::Knn: return KnnParams{};
  }
  throw InvalidArgument("unknown model kind");
}

nlohmann::json params_to_json(const Hyperparameters& h) {
  return std::visit([](const auto& p) { return nlohmann::json(p); }, h);
}

Hyperparameters params_from_json(ModelKind kind, const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("hyperparameters must be a JSON object");
  Hyperparameters h = default_params(kind);
  const auto known = params_to_json(h);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw InvalidArgument("unknown hyperparameter '" + key + "' for " + std::string(to_string(kind)));
    }
  }
  std::visit([&](auto& p) { j.get_to(p); }, h);
  return h;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("invalid hyperparameter: " + what);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Linear scores W x + b for all rows.
std::vector<double> linear_scores(const SparseMatrix& X, const std::vector<double>& W, const std::vector<double>& b,
                                  std::size_t K) {
  const std::size_t V = X.cols();
  std::vector<double> out(X.rows() * K);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    for (std::size_t k = 0; k < K; ++k) {
      double z = b[k];
      const double* w = W.data() + k * V;
      for (std::size_t i = 0; i < row.nnz(); ++i) z += w[row.cols[i]] * row.values[i];
      out[r * K + k] = z;
    }
  }
  return out;
}

// --- naive Bayes ---

ModelParameters fit_naive_bayes(const NaiveBayesParams& p, const SparseMatrix& X, std::span<const int> y, int K) {
  const std::size_t V = X.cols();
  const auto k = static_cast<std::size_t>(K);
  ModelParameters m;
  m.weights.assign(k * V, 0.0);
  m.bias.assign(k, 0.0);
  std::vector<double> class_count(k, 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    class_count[c] += 1.0;
    const auto row = X.row(r);
    for (std::size_t i = 0; i < row.nnz(); ++i) m.weights[c * V + static_cast<std::size_t>(row.cols[i])] += row.values[i];
  }
  const double n = static_cast<double>(X.rows());
  for (std::size_t c = 0; c < k; ++c) {
    double total = 0.0;
    for (std::size_t v = 0; v < V; ++v) total += m.weights[c * V + v];
    const double denom = std::log(total + p.alpha * static_cast<double>(V));
    for (std::size_t v = 0; v < V; ++v) m.weights[c * V + v] = std::log(m.weights[c * V + v] + p.alpha) - denom;
    m.bias[c] = class_count[c] > 0.0 ? std::log(class_count[c] / n) : -std::numeric_limits<double>::infinity();
  }
  return m;
}

// --- logistic regression ---

ModelParameters fit_logistic(const LogisticRegressionParams& p, const SparseMatrix& X, std::span<const int> y, int K,
                             TrainingInfo& info) {
  const std::size_t V = X.cols();
  const auto k = static_cast<std::size_t>(K);
  std::vector<double> theta(k * V + k, 0.0);
  std::vector<double> grad;
  std::vector<double> cand(theta.size());
  std::vector<double> cand_grad;
  double f = logistic_objective(X, y, K, p.C, theta, &grad);
  info.loss_history = {f};
  info.converged = false;
  double step = 1.0;
  int epoch = 0;
  for (; epoch < p.max_epochs; ++epoch) {
    double ginf = 0.0;
    double gg = 0.0;
    for (double g : grad) {
      ginf = std::max(ginf, std::abs(g));
      gg += g * g;
    }
    if (ginf < p.tolerance) {
      info.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e6);
    double fc = f;
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t i = 0; i < theta.size(); ++i) cand[i] = theta[i] - step * grad[i];
      fc = logistic_objective(X, y, K, p.C, cand, &cand_grad);
      if (fc <= f - 0.5 * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    theta.swap(cand);
    grad.swap(cand_grad);
    f = fc;
    info.loss_history.push_back(f);
  }
  info.iterations = epoch;
  for (std::size_t i = 1; i < info.loss_history.size(); ++i) {
    if (info.loss_history[i] > info.loss_history[i - 1]) {
      throw Error("logistic regression loss increased at epoch " + std::to_string(i));
    }
  }
  ModelParameters m;
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k * V));
  m.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(k * V), theta.end());
  return m;
}

// --- linear SVM, one vs rest ---

ModelParameters fit_svm(const SvmParams& p, const SparseMatrix& X, std::span<const int> y, int K) {
  const std::size_t V = X.cols();
  const auto k = static_cast<std::size_t>(K);
  const std::size_t n = X.rows();
  ModelParameters m;
  m.weights.assign(k * V, 0.0);
  m.bias.assign(k, 0.0);
  const double lambda = 1.0 / (p.C * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  parallel_for(k, [&](std::size_t c) {
    std::vector<double> w(V, 0.0);
    double b = 0.0;
    std::vector<double> avg(V, 0.0);
    double avg_b = 0.0;
    std::vector<double> step_sum(V);
    for (int t = 1; t <= p.epochs; ++t) {
      std::fill(step_sum.begin(), step_sum.end(), 0.0);
      double step_b = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double s = static_cast<std::size_t>(y[r]) == c ? 1.0 : -1.0;
        const auto row = X.row(r);
        double z = b;
        for (std::size_t i = 0; i < row.nnz(); ++i) z += w[static_cast<std::size_t>(row.cols[i])] * row.values[i];
        if (s * z < 1.0) {
          for (std::size_t i = 0; i < row.nnz(); ++i) step_sum[static_cast<std::size_t>(row.cols[i])] += s * row.values[i];
          step_b += s;
        }
      }
      const double eta = 1.0 / (lambda * t);
      const double shrink = 1.0 - 1.0 / t;
      const double scale = eta / static_cast<double>(n);
      double norm2 = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        w[v] = shrink * w[v] + scale * step_sum[v];
        norm2 += w[v] * w[v];
      }
      b = shrink * b + scale * step_b;
      norm2 += b * b;
      if (norm2 > radius * radius) {
        const double f = radius / std::sqrt(norm2);
        for (double& v : w) v *= f;
        b *= f;
      }
      for (std::size_t v = 0; v < V; ++v) avg[v] += w[v];
      avg_b += b;
    }
    for (std::size_t v = 0; v < V; ++v) m.weights[c * V + v] = avg[v] / p.epochs;
    m.bias[c] = avg_b / p.epochs;
  });
  return m;
}

// --- trees ---

std::size_t resolve_max_features(int requested, std::size_t V) {
  if (requested > 0) return static_cast<std::size_t>(requested);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(V)))));
}

ModelParameters fit_tree(const DecisionTreeParams& p, const SparseMatrix& X, std::span<const int> y, int K,
                         std::uint64_t seed) {
  const auto cols = PresortedColumns::build(X);
  std::vector<double> targets(y.begin(), y.end());
  std::vector<double> weights(y.size(), 1.0);
  TreeGrowOptions opt;
  opt.max_depth = p.max_depth;
  opt.min_samples_split = p.min_samples_split;
  opt.seed = seed;
  ModelParameters m;
  m.trees.push_back(grow_tree(cols, targets, weights, K, opt).tree);
  return m;
}

ModelParameters fit_forest(const RandomForestParams& p, const SparseMatrix& X, std::span<const int> y, int K,
                           std::uint64_t seed) {
  const auto cols = PresortedColumns::build(X);
  std::vector<double> targets(y.begin(), y.end());
  const std::size_t n = X.rows();
  ModelParameters m;
  m.trees.resize(static_cast<std::size_t>(p.n_trees));
  parallel_for(m.trees.size(), [&](std::size_t t) {
    std::vector<double> weights(n, p.bootstrap ? 0.0 : 1.0);
    if (p.bootstrap) {
      Rng rng(derive_seed(seed, "forest-bootstrap", t));
      for (std::size_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
    }
    TreeGrowOptions opt;
    opt.max_depth = p.max_depth;
    opt.min_samples_split = p.min_samples_split;
    opt.max_features = resolve_max_features(p.max_features, X.cols());
    opt.seed = derive_seed(seed, "forest-features", t);
    m.trees[t] = grow_tree(cols, targets, weights, K, opt).tree;
  });
  return m;
}

ModelParameters fit_boosting(const GradientBoostingParams& p, const SparseMatrix& X, std::span<const int> y, int K,
                             std::uint64_t seed) {
  const auto cols = PresortedColumns::build(X);
  const std::size_t n = X.rows();
  const auto k = static_cast<std::size_t>(K);
  ModelParameters m;
  m.init.assign(k, 0.0);
  std::vector<double> counts(k, 0.0);
  for (int c : y) counts[static_cast<std::size_t>(c)] += 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double prior = std::clamp(counts[c] / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    m.init[c] = std::log(prior / (1.0 - prior));
  }
  std::vector<double> F(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) F[r * k + c] = m.init[c];
  }
  std::vector<double> weights(n, 1.0);
  m.trees.resize(static_cast<std::size_t>(p.n_rounds) * k);
  for (int round = 0; round < p.n_rounds; ++round) {
    parallel_for(k, [&](std::size_t c) {
      std::vector<double> residual(n);
      std::vector<double> hess(n);
      for (std::size_t r = 0; r < n; ++r) {
        const double prob = sigmoid(F[r * k + c]);
        residual[r] = (static_cast<std::size_t>(y[r]) == c ? 1.0 : 0.0) - prob;
        hess[r] = prob * (1.0 - prob);
      }
      TreeGrowOptions opt;
      opt.criterion = SplitCriterion::SquaredError;
      opt.max_depth = p.max_depth;
      opt.seed = derive_seed(seed, "boosting", static_cast<std::uint64_t>(round) * k + c);
      auto grown = grow_tree(cols, residual, weights, 1, opt);
      auto& nodes = grown.tree.nodes();
      std::vector<double> num(nodes.size(), 0.0);
      std::vector<double> den(nodes.size(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto leaf = static_cast<std::size_t>(grown.leaf_of_row[r]);
        num[leaf] += residual[r];
        den[leaf] += hess[r];
      }
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature >= 0) continue;
        nodes[i].value = {den[i] > 1e-150 ? num[i] / den[i] : 0.0};
      }
      for (std::size_t r = 0; r < n; ++r) {
        F[r * k + c] += p.learning_rate * nodes[static_cast<std::size_t>(grown.leaf_of_row[r])].value[0];
      }
      m.trees[static_cast<std::size_t>(round) * k + c] = std::move(grown.tree);
    });
  }
  return m;
}

// --- knn ---

std::vector<double> knn_votes(const KnnParams& p, const ModelParameters& m, const SparseMatrix& X, std::size_t K) {
  const std::size_t n = m.train_X.rows();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
  std::vector<double> train_norm(n);
  for (std::size_t j = 0; j < n; ++j) train_norm[j] = m.train_X.row(j).squared_norm();
  std::vector<double> out(X.rows() * K, 0.0);
  parallel_for(X.rows(), [&](std::size_t r) {
    std::vector<double> q(X.cols(), 0.0);
    const auto row = X.row(r);
    for (std::size_t i = 0; i < row.nnz(); ++i) q[static_cast<std::size_t>(row.cols[i])] = row.values[i];
    const double qn = row.squared_norm();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = {std::max(0.0, qn + train_norm[j] - 2.0 * m.train_X.row(j).dot(q)), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t i = 0; i < kk; ++i) {
      out[r * K + static_cast<std::size_t>(m.train_y[dist[i].second])] += 1.0 / static_cast<double>(kk);
    }
  });
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::string_view display_name(ModelKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.display;
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  std::string s;
  for (char c : text) s += c == '_' || c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& k : kKinds) {
    if (k.name == s) return k.kind;
  }
  static const std::array<std::pair<std::string_view, ModelKind>, 9> aliases = {{
      {"nb", ModelKind::NaiveBayes},
      {"multinomial-nb", ModelKind::NaiveBayes},
      {"lr", ModelKind::LogisticRegression},
      {"logreg", ModelKind::LogisticRegression},
      {"dt", ModelKind::DecisionTree},
      {"rf", ModelKind::RandomForest},
      {"gb", ModelKind::GradientBoosting},
      {"gbm", ModelKind::GradientBoosting},
      {"k-nn", ModelKind::Knn},
  }};
  for (const auto& [alias, kind] : aliases) {
    if (alias == s) return kind;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::defaults(ModelKind kind, std::uint64_t seed) {
  return ModelSpec{kind, default_params(kind), seed};
}

void ModelSpec::validate() const {
  if (params.index() != static_cast<std::size_t>(kind)) {
    throw InvalidArgument("hyperparameters do not match model kind " + std::string(to_string(kind)));
  }
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          require(p.alpha > 0.0, "alpha must be > 0");
        } else if constexpr (std::is_same_v<T, LogisticRegressionParams>) {
          require(p.C > 0.0, "C must be > 0");
          require(p.max_epochs >= 1, "max_epochs must be >= 1");
          require(p.tolerance > 0.0, "tolerance must be > 0");
        } else if constexpr (std::is_same_v<T, DecisionTreeParams>) {
          require(p.max_depth >= 0, "max_depth must be >= 0");
          require(p.min_samples_split >= 2, "min_samples_split must be >= 2");
        } else if constexpr (std::is_same_v<T, RandomForestParams>) {
          require(p.n_trees >= 1, "n_trees must be >= 1");
          require(p.max_features >= 0, "max_features must be >= 0");
          require(p.max_depth >= 0, "max_depth must be >= 0");
          require(p.min_samples_split >= 2, "min_samples_split must be >= 2");
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          require(p.C > 0.0, "C must be > 0");
          require(p.epochs >= 1, "epochs must be >= 1");
        } else if constexpr (std::is_same_v<T, GradientBoostingParams>) {
          require(p.n_rounds >= 1, "n_rounds must be >= 1");
          require(p.max_depth >= 1, "max_depth must be >= 1");
          require(p.learning_rate >= 0.0, "learning_rate must be >= 0");
        } else {
          require(p.k >= 1, "k must be >= 1");
        }
      },
      params);
}

void ModelSpec::set(std::string_view key, std::string_view value) {
  auto j = params_to_json(params);
  const std::string k(key);
  if (!j.contains(k)) {
    throw InvalidArgument("unknown hyperparameter '" + k + "' for " + std::string(to_string(kind)));
  }
  const std::string v(value);
  try {
    auto& slot = j[k];
    if (slot.is_boolean()) {
      if (v == "true" || v == "1") {
        slot = true;
      } else if (v == "false" || v == "0") {
        slot = false;
      } else {
        throw InvalidArgument("expected true/false");
      }
    } else if (slot.is_number_integer()) {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw InvalidArgument("trailing characters");
      slot = x;
    } else {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw InvalidArgument("trailing characters");
      slot = x;
    }
  } catch (const std::exception& e) {
    throw InvalidArgument("bad value '" + v + "' for hyperparameter '" + k + "': " + e.what());
  }
  params = params_from_json(kind, j);
  validate();
}

nlohmann::json ModelSpec::to_json() const {
  return {{"kind", to_string(kind)}, {"hyperparameters", params_to_json(params)}, {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw FormatError("model spec needs a 'kind'");
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown model kind '" + j.at("kind").get<std::string>() + "'");
  ModelSpec spec = defaults(*kind, j.value("seed", std::uint64_t{0}));
  if (j.contains("hyperparameters")) spec.params = params_from_json(*kind, j.at("hyperparameters"));
  spec.validate();
  return spec;
}

nlohmann::json TrainingInfo::to_json() const {
  return {{"samples", samples},         {"features", features},   {"seed", seed},
          {"wall_seconds", wall_seconds}, {"iterations", iterations}, {"converged", converged},
          {"loss_history", loss_history}};
}

TrainingInfo TrainingInfo::from_json(const nlohmann::json& j) {
  TrainingInfo t;
  t.samples = j.value("samples", std::size_t{0});
  t.features = j.value("features", std::size_t{0});
  t.seed = j.value("seed", std::uint64_t{0});
  t.wall_seconds = j.value("wall_seconds", 0.0);
  t.iterations = j.value("iterations", 0);
  t.converged = j.value("converged", true);
  t.loss_history = j.value("loss_history", std::vector<double>{});
  return t;
}

TrainedModel::TrainedModel(ModelSpec spec, std::size_t n_features, int n_classes, LabelEncoding encoding,
                           ModelParameters params, TrainingInfo info)
    : spec_(std::move(spec)),
      n_features_(n_features),
      n_classes_(n_classes),
      encoding_(std::move(encoding)),
      params_(std::move(params)),
      info_(std::move(info)) {}

void TrainedModel::check_width(const SparseMatrix& X) const {
  if (X.cols() != n_features_) {
    throw InvalidArgument("feature width " + std::to_string(X.cols()) + " does not match trained width " +
                          std::to_string(n_features_));
  }
}

ScoreMatrix TrainedModel::decision_scores(const SparseMatrix& X) const {
  check_width(X);
  const auto K = static_cast<std::size_t>(n_classes_);
  ScoreMatrix s;
  s.rows = X.rows();
  s.classes = K;
  s.values.assign(s.rows * K, 0.0);
  switch (spec_.kind) {
    case ModelKind::NaiveBayes:
    case ModelKind::LogisticRegression: {
      s.values = linear_scores(X, params_.weights, params_.bias, K);
      for (std::size_t r = 0; r < s.rows; ++r) softmax_inplace({s.values.data() + r * K, K});
      s.calibrated = true;
      break;
    }
    case ModelKind::Svm:
      s.values = linear_scores(X, params_.weights, params_.bias, K);
      break;
    case ModelKind::DecisionTree:
      for (std::size_t r = 0; r < s.rows; ++r) {
        const auto& v = params_.trees.front().value_for(X.row(r));
        std::copy(v.begin(), v.end(), s.values.begin() + static_cast<std::ptrdiff_t>(r * K));
      }
      break;
    case ModelKind::RandomForest: {
      const double share = 1.0 / static_cast<double>(params_.trees.size());
      for (std::size_t r = 0; r < s.rows; ++r) {
        const auto row = X.row(r);
        for (const auto& tree : params_.trees) {
          s.values[r * K + static_cast<std::size_t>(argmax(tree.value_for(row)))] += share;
        }
      }
      s.calibrated = true;
      break;
    }
    case ModelKind::GradientBoosting: {
      const auto& gb = std::get<GradientBoostingParams>(spec_.params);
      for (std::size_t r = 0; r < s.rows; ++r) {
        const auto row = X.row(r);
        auto out = std::span<double>(s.values.data() + r * K, K);
        for (std::size_t c = 0; c < K; ++c) out[c] = params_.init[c];
        for (std::size_t t = 0; t < params_.trees.size(); ++t) {
          out[t % K] += gb.learning_rate * params_.trees[t].value_for(row)[0];
        }
        double total = 0.0;
        for (double& v : out) {
          v = sigmoid(v);
          total += v;
        }
        for (double& v : out) v /= total;
      }
      s.calibrated = true;
      break;
    }
    case ModelKind::Knn:
      s.values = knn_votes(std::get<KnnParams>(spec_.params), params_, X, K);
      break;
  }
  return s;
}

ScoreMatrix TrainedModel::predict_proba(const SparseMatrix& X) const {
  switch (spec_.kind) {
    case ModelKind::Svm:
    case ModelKind::Knn:
    case ModelKind::DecisionTree:
      throw InvalidArgument(std::string(to_string(spec_.kind)) +
                            " has no calibrated probabilities; use decision_scores");
    default:
      return decision_scores(X);
  }
}

std::vector<int> TrainedModel::predict(const SparseMatrix& X) const {
  const auto s = decision_scores(X);
  std::vector<int> out(s.rows);
  for (std::size_t r = 0; r < s.rows; ++r) out[r] = argmax(s.row(r));
  return out;
}

double logistic_objective(const SparseMatrix& X, std::span<const int> y, int n_classes, double C,
                          std::span<const double> theta, std::vector<double>* grad) {
  const std::size_t V = X.cols();
  const auto K = static_cast<std::size_t>(n_classes);
  if (theta.size() != K * V + K) throw InvalidArgument("logistic_objective: theta has wrong length");
  if (y.size() != X.rows()) throw InvalidArgument("logistic_objective: label count mismatch");
  const double n = static_cast<double>(X.rows());
  if (grad) grad->assign(theta.size(), 0.0);
  std::vector<double> z(K);
  double loss = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    for (std::size_t k = 0; k < K; ++k) {
      double v = theta[K * V + k];
      for (std::size_t i = 0; i < row.nnz(); ++i) v += theta[k * V + static_cast<std::size_t>(row.cols[i])] * row.values[i];
      z[k] = v;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    const double lse = m + std::log(s);
    const auto yc = static_cast<std::size_t>(y[r]);
    loss += lse - z[yc];
    if (grad) {
      for (std::size_t k = 0; k < K; ++k) {
        const double d = std::exp(z[k] - lse) - (k == yc ? 1.0 : 0.0);
        for (std::size_t i = 0; i < row.nnz(); ++i) (*grad)[k * V + static_cast<std::size_t>(row.cols[i])] += d * row.values[i];
        (*grad)[K * V + k] += d;
      }
    }
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < K * V; ++i) reg += theta[i] * theta[i];
  loss += reg / (2.0 * C);
  if (grad) {
    for (std::size_t i = 0; i < K * V; ++i) (*grad)[i] += theta[i] / C;
    for (double& g : *grad) g /= n;
  }
  return loss / n;
}

TrainedModel train(const ModelSpec& spec, const SparseMatrix& X, std::span<const int> y, int n_classes) {
  std::vector<SmellLabel> labels;
  for (int c = 0; c < n_classes && c < static_cast<int>(kLabelCount); ++c) labels.push_back(kAllLabels[static_cast<std::size_t>(c)]);
  if (n_classes > static_cast<int>(kLabelCount)) throw InvalidArgument("too many classes");
  return train(spec, X, y, LabelEncoding::from_labels(labels));
}

TrainedModel train(const ModelSpec& spec, const SparseMatrix& X, std::span<const int> y,
                   const LabelEncoding& encoding) {
  spec.validate();
  const int K = static_cast<int>(encoding.size());
  if (X.rows() != y.size()) {
    throw InvalidArgument("train: " + std::to_string(X.rows()) + " rows but " + std::to_string(y.size()) + " labels");
  }
  if (X.rows() == 0) throw InvalidArgument("train: empty training set");
  std::vector<bool> present(static_cast<std::size_t>(K), false);
  for (int c : y) {
    if (c < 0 || c >= K) throw InvalidArgument("train: label code " + std::to_string(c) + " out of range");
    present[static_cast<std::size_t>(c)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw InvalidArgument("train: need at least two classes in the training labels");
  }
  const auto start = std::chrono::steady_clock::now();
  TrainingInfo info;
  info.samples = X.rows();
  info.features = X.cols();
  info.seed = spec.seed;
  ModelParameters params;
  switch (spec.kind) {
    case ModelKind::NaiveBayes:
      params = fit_naive_bayes(std::get<NaiveBayesParams>(spec.params), X, y, K);
      info.iterations = 1;
      break;
    case ModelKind::LogisticRegression:
      params = fit_logistic(std::get<LogisticRegressionParams>(spec.params), X, y, K, info);
      break;
    case ModelKind::DecisionTree:
      params = fit_tree(std::get<DecisionTreeParams>(spec.params), X, y, K, spec.seed);
      info.iterations = 1;
      break;
    case ModelKind::RandomForest: {
      const auto& p = std::get<RandomForestParams>(spec.params);
      params = fit_forest(p, X, y, K, spec.seed);
      info.iterations = p.n_trees;
      break;
    }
    case ModelKind::Svm: {
      const auto& p = std::get<SvmParams>(spec.params);
      params = fit_svm(p, X, y, K);
      info.iterations = p.epochs;
      break;
    }
    case ModelKind::GradientBoosting: {
      const auto& p = std::get<GradientBoostingParams>(spec.params);
      params = fit_boosting(p, X, y, K, spec.seed);
      info.iterations = p.n_rounds;
      break;
    }
    case ModelKind::Knn:
      params.train_X = X;
      params.train_y.assign(y.begin(), y.end());
      info.iterations = 0;
      break;
  }
  info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return TrainedModel(spec, X.cols(), K, encoding, std::move(params), std::move(info));
}

}  // namespace smell
