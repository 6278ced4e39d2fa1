#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smell/eval.hpp"

namespace smell {

/// Per-class table with accuracy, macro/weighted averages and MCC, values
/// to two decimals, rows in report order.
std::string render_report_text(const EvalReport& report, std::string_view title = {});

/// Header "true\\pred,<labels...>,unparseable" then one row per true class.
std::string render_confusion_csv(const ConfusionMatrix& cm);

struct F1Delta {
  SmellLabel label = SmellLabel::NotASmell;
  double f1_a = 0.0;
  double f1_b = 0.0;
  double delta = 0.0;  // f1_b - f1_a
};

struct RunComparison {
  std::vector<F1Delta> rows;  // in the order of report a
  double accuracy_delta = 0.0;
  double mcc_delta = 0.0;
  double weighted_f1_delta = 0.0;

  nlohmann::json to_json() const;
};

/// Per-class F1 deltas b - a. Throws InvalidArgument when the two reports
/// do not cover the same label set.
RunComparison compare_runs(const EvalReport& a, const EvalReport& b);

std::string render_comparison_text(const RunComparison& c, std::string_view name_a = "a",
                                   std::string_view name_b = "b");

struct SummaryRow {
  std::string model;
  double mcc = 0.0;
  double accuracy = 0.0;
};

/// "Model  MCC  Accuracy" table.
std::string render_summary_text(const std::vector<SummaryRow>& rows, std::string_view title = {});

/// Value rounded half away from zero to two decimals, as printed.
std::string format2(double v);

}  // namespace smell
