#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "smell/corpus.hpp"
#include "smell/sparse.hpp"
#include "smell/tree.hpp"

namespace smell {

enum class ModelKind { NaiveBayes, LogisticRegression, DecisionTree, RandomForest, Svm, GradientBoosting, Knn };

inline constexpr std::array<ModelKind, 7> kAllModelKinds = {
    ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::DecisionTree, ModelKind::RandomForest,
    ModelKind::Svm,        ModelKind::GradientBoosting,   ModelKind::Knn};

std::string_view to_string(ModelKind kind);
/// Accepts the canonical names ("random-forest") and common short forms ("rf", "nb", "lr", "dt", "gb").
std::optional<ModelKind> parse_model_kind(std::string_view text);
std::string_view display_name(ModelKind kind);

struct NaiveBayesParams {
  double alpha = 1.0;
  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

struct LogisticRegressionParams {
  double C = 1.0;
  int max_epochs = 1000;
  double tolerance = 1e-6;  // on the gradient infinity norm
  friend bool operator==(const LogisticRegressionParams&, const LogisticRegressionParams&) = default;
};

struct DecisionTreeParams {
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;
  friend bool operator==(const DecisionTreeParams&, const DecisionTreeParams&) = default;
};

struct RandomForestParams {
  int n_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0 = floor(sqrt(V)), otherwise an explicit count
  int max_depth = 0;
  int min_samples_split = 2;
  friend bool operator==(const RandomForestParams&, const RandomForestParams&) = default;
};

struct SvmParams {
  double C = 1.0;
  int epochs = 200;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct GradientBoostingParams {
  int n_rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  friend bool operator==(const GradientBoostingParams&, const GradientBoostingParams&) = default;
};

struct KnnParams {
  int k = 3;
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

using Hyperparameters = std::variant<NaiveBayesParams, LogisticRegressionParams, DecisionTreeParams,
                                     RandomForestParams, SvmParams, GradientBoostingParams, KnnParams>;

struct ModelSpec {
  ModelKind kind = ModelKind::NaiveBayes;
  Hyperparameters params;
  std::uint64_t seed = 0;

  /// Pinned default hyperparameters for a kind.
  static ModelSpec defaults(ModelKind kind, std::uint64_t seed = 0);

  /// Throws InvalidArgument when params do not belong to kind or are out of range.
  void validate() const;

  /// Overrides one hyperparameter from text ("k", "3"); throws on unknown
  /// keys or unparsable values.
  void set(std::string_view key, std::string_view value);

  nlohmann::json to_json() const;
  /// Missing hyperparameters take their defaults; unknown ones are an error.
  static ModelSpec from_json(const nlohmann::json& j);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct TrainingInfo {
  std::size_t samples = 0;
  std::size_t features = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  int iterations = 0;  // epochs, trees or rounds
  bool converged = true;
  std::vector<double> loss_history;  // logistic regression objective per epoch

  nlohmann::json to_json() const;
  static TrainingInfo from_json(const nlohmann::json& j);
};

/// Fitted parameters; which members are used depends on the kind.
///  naive-bayes:         weights = log P(term|class) (K x V), bias = log prior
///  logistic-regression: weights (K x V), bias
///  svm:                 weights (K x V), bias, one-vs-rest heads
///  decision-tree:       trees[0]
///  random-forest:       trees
///  gradient-boosting:   init (K), trees round-major (round r, class k at r*K + k)
///  knn:                 train_X, train_y
struct ModelParameters {
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<DecisionTreeModel> trees;
  std::vector<double> init;
  SparseMatrix train_X;
  std::vector<int> train_y;

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Per-row class scores. `calibrated` is true for probabilities.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t classes = 0;
  std::vector<double> values;  // row-major
  bool calibrated = false;

  std::span<const double> row(std::size_t r) const { return {values.data() + r * classes, classes}; }
};

class TrainedModel {
 public:
  TrainedModel() = default;
  TrainedModel(ModelSpec spec, std::size_t n_features, int n_classes, LabelEncoding encoding,
               ModelParameters params, TrainingInfo info);

  ModelKind kind() const { return spec_.kind; }
  const ModelSpec& spec() const { return spec_; }
  std::size_t n_features() const { return n_features_; }
  int n_classes() const { return n_classes_; }
  const LabelEncoding& encoding() const { return encoding_; }
  const ModelParameters& parameters() const { return params_; }
  const TrainingInfo& info() const { return info_; }
  /// Free-form JSON object stored in the file envelope (vocabulary, run info).
  const nlohmann::json& metadata() const { return metadata_; }
  void set_metadata(nlohmann::json metadata);

  /// Encoded labels, argmax of the scores with ties to the lowest code.
  std::vector<int> predict(const SparseMatrix& X) const;
  /// Probabilities; only naive-bayes, logistic-regression, random-forest
  /// (vote shares) and gradient-boosting. Others throw InvalidArgument.
  ScoreMatrix predict_proba(const SparseMatrix& X) const;
  /// Scores for every kind: probabilities where available, otherwise
  /// margins (svm), leaf class distributions (decision-tree) or neighbour
  /// vote shares (knn), flagged uncalibrated.
  ScoreMatrix decision_scores(const SparseMatrix& X) const;

  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);
  std::string serialize() const;
  static TrainedModel deserialize(std::string_view bytes);

  friend bool operator==(const TrainedModel& a, const TrainedModel& b) {
    return a.spec_ == b.spec_ && a.n_features_ == b.n_features_ && a.n_classes_ == b.n_classes_ &&
           a.encoding_ == b.encoding_ && a.params_ == b.params_;
  }

 private:
  void check_width(const SparseMatrix& X) const;

  ModelSpec spec_;
  std::size_t n_features_ = 0;
  int n_classes_ = 0;
  LabelEncoding encoding_;
  ModelParameters params_;
  TrainingInfo info_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

/// Trains on encoded labels in [0, n_classes). Throws InvalidArgument on a
/// row/label count mismatch, out-of-range labels or fewer than two classes
/// present.
TrainedModel train(const ModelSpec& spec, const SparseMatrix& X, std::span<const int> y, int n_classes);
TrainedModel train(const ModelSpec& spec, const SparseMatrix& X, std::span<const int> y,
                   const LabelEncoding& encoding);

/// Multinomial logistic objective (1/n) [sum_i -log p(y_i|x_i) + |W|^2 / (2C)]
/// with the bias unpenalised. `theta` holds W (K x V, row-major) followed by
/// b (K). When `grad` is non-null it receives the gradient.
double logistic_objective(const SparseMatrix& X, std::span<const int> y, int n_classes, double C,
                          std::span<const double> theta, std::vector<double>* grad);

}  // namespace smell
