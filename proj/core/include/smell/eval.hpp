#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "smell/corpus.hpp"
#include "smell/labels.hpp"

namespace smell {

/// Prediction code for a response that could not be mapped to any label.
inline constexpr int kUnparseable = -1;

/// Rows are true classes, columns predicted classes, both in `labels` order.
/// Predictions that named no label are kept per true class in `unparseable`;
/// they count as errors everywhere.
struct ConfusionMatrix {
  std::vector<SmellLabel> labels;
  std::vector<std::size_t> counts;       // K x K, row-major
  std::vector<std::size_t> unparseable;  // per true class

  std::size_t size() const { return labels.size(); }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * size() + pred]; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t true_count(std::size_t k) const;       // row sum incl. unparseable
  std::size_t predicted_count(std::size_t k) const;  // column sum
  std::size_t unparseable_total() const;

  nlohmann::json to_json() const;
  static ConfusionMatrix from_json(const nlohmann::json& j);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Codes index `labels`; a prediction of kUnparseable is allowed. Throws
/// InvalidArgument on empty input, length mismatch or out-of-range codes.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<SmellLabel> labels);
/// Label form; predictions outside `labels` are out-of-vocabulary errors,
/// nullopt predictions are unparseable.
ConfusionMatrix confusion_matrix(std::span<const SmellLabel> y_true, std::span<const std::optional<SmellLabel>> y_pred,
                                 std::vector<SmellLabel> labels);

struct ClassMetrics {
  SmellLabel label = SmellLabel::NotASmell;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  Averages macro;
  Averages weighted;
  double mcc = 0.0;
  std::size_t unparseable = 0;
  std::optional<ConfusionMatrix> confusion;
  nlohmann::json metadata = nlohmann::json::object();

  const ClassMetrics* find(SmellLabel label) const;

  nlohmann::json to_json() const;
  /// Accepts reports written by to_json; the confusion matrix and metadata
  /// are optional so hand-made per-class tables can be compared too.
  static EvalReport from_json(const nlohmann::json& j);
};

/// Per-class P/R/F1 (0/0 -> 0), support, accuracy, macro and weighted averages and MCC.
EvalReport class_metrics(const ConfusionMatrix& cm);

/// Support-weighted and unweighted means of per-class rows.
Averages weighted_average(std::span<const ClassMetrics> rows);
Averages macro_average(std::span<const ClassMetrics> rows);

/// Gorodkin multiclass MCC; an unparseable column counts as one more
/// predicted class that is never true. Zero denominator gives 0.
double mcc(const ConfusionMatrix& cm);

/// Stratified k-fold assignment over encoded labels: each class is shuffled
/// on its own substream, then dealt round-robin, continuing the rotation
/// across classes. Returns k sorted index lists that partition [0, n).
/// Throws InvalidArgument when k < 2 or k > n.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed);

}  // namespace smell
