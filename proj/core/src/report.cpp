#include "smell/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "smell/error.hpp"

namespace smell {

namespace {

std::string pad(std::string_view s, std::size_t width, bool right = false) {
  std::string out(s);
  if (out.size() >= width) return out;
  const std::string fill(width - out.size(), ' ');
  return right ? fill + out : out + fill;
}

std::string signed2(double v) {
  std::string s = format2(v);
  if (s == "-0.00") s = "0.00";
  if (s[0] != '-') s = "+" + s;
  return s;
}

}  // namespace

std::string format2(double v) {
  // Nudge away from binary representation error so 0.285 prints 0.29.
  const double scaled = std::round(v * 100.0 + (v >= 0 ? 1e-9 : -1e-9));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", scaled / 100.0);
  return buf;
}

std::string render_report_text(const EvalReport& report, std::string_view title) {
  std::size_t name_w = 16;
  for (const auto& c : report.classes) name_w = std::max(name_w, display_name(c.label).size() + 2);
  std::string out;
  if (!title.empty()) out += std::string(title) + "\n";
  out += pad("Category", name_w) + pad("Precision", 11, true) + pad("Recall", 9, true) + pad("F1-Score", 10, true) +
         pad("Support", 9, true) + "\n";
  std::size_t total = 0;
  for (const auto& c : report.classes) {
    out += pad(display_name(c.label), name_w) + pad(format2(c.precision), 11, true) + pad(format2(c.recall), 9, true) +
           pad(format2(c.f1), 10, true) + pad(std::to_string(c.support), 9, true) + "\n";
    total += c.support;
  }
  out += "\n";
  out += pad("Accuracy", name_w) + pad("", 11) + pad("", 9) + pad(format2(report.accuracy), 10, true) +
         pad(std::to_string(total), 9, true) + "\n";
  out += pad("Macro avg", name_w) + pad(format2(report.macro.precision), 11, true) +
         pad(format2(report.macro.recall), 9, true) + pad(format2(report.macro.f1), 10, true) +
         pad(std::to_string(total), 9, true) + "\n";
  out += pad("Weighted avg", name_w) + pad(format2(report.weighted.precision), 11, true) +
         pad(format2(report.weighted.recall), 9, true) + pad(format2(report.weighted.f1), 10, true) +
         pad(std::to_string(total), 9, true) + "\n";
  out += pad("MCC", name_w) + pad("", 11) + pad("", 9) + pad(format2(report.mcc), 10, true) + "\n";
  if (report.unparseable > 0) out += "Unparseable responses: " + std::to_string(report.unparseable) + "\n";
  return out;
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\pred";
  for (auto l : cm.labels) out += "," + std::string(to_string(l));
  out += ",unparseable\n";
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out += std::string(to_string(cm.labels[i]));
    for (std::size_t j = 0; j < cm.size(); ++j) out += "," + std::to_string(cm.at(i, j));
    out += "," + std::to_string(cm.unparseable.empty() ? 0 : cm.unparseable[i]) + "\n";
  }
  return out;
}

nlohmann::json RunComparison::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"label", to_string(r.label)}, {"f1_a", r.f1_a}, {"f1_b", r.f1_b}, {"delta", r.delta}});
  }
  return {{"schema", "smell-comparison"},
          {"version", 1},
          {"classes", j},
          {"accuracy_delta", accuracy_delta},
          {"mcc_delta", mcc_delta},
          {"weighted_f1_delta", weighted_f1_delta}};
}

RunComparison compare_runs(const EvalReport& a, const EvalReport& b) {
  std::set<SmellLabel> la;
  std::set<SmellLabel> lb;
  for (const auto& c : a.classes) la.insert(c.label);
  for (const auto& c : b.classes) lb.insert(c.label);
  if (la != lb || la.size() != a.classes.size() || lb.size() != b.classes.size()) {
    throw InvalidArgument("compare_runs: the two reports cover different label sets");
  }
  RunComparison out;
  for (const auto& ca : a.classes) {
    const auto* cb = b.find(ca.label);
    out.rows.push_back({ca.label, ca.f1, cb->f1, cb->f1 - ca.f1});
  }
  out.accuracy_delta = b.accuracy - a.accuracy;
  out.mcc_delta = b.mcc - a.mcc;
  out.weighted_f1_delta = b.weighted.f1 - a.weighted.f1;
  return out;
}

std::string render_comparison_text(const RunComparison& c, std::string_view name_a, std::string_view name_b) {
  std::size_t name_w = 16;
  for (const auto& r : c.rows) name_w = std::max(name_w, display_name(r.label).size() + 2);
  const std::size_t wa = std::max<std::size_t>(8, name_a.size() + 2);
  const std::size_t wb = std::max<std::size_t>(8, name_b.size() + 2);
  std::string out = pad("Category", name_w) + pad(name_a, wa, true) + pad(name_b, wb, true) +
                    pad("Increase in F1", 16, true) + "\n";
  for (const auto& r : c.rows) {
    out += pad(display_name(r.label), name_w) + pad(format2(r.f1_a), wa, true) + pad(format2(r.f1_b), wb, true) +
           pad(signed2(r.delta), 16, true) + "\n";
  }
  out += "\n";
  out += pad("Accuracy", name_w) + pad("", wa) + pad("", wb) + pad(signed2(c.accuracy_delta), 16, true) + "\n";
  out += pad("MCC", name_w) + pad("", wa) + pad("", wb) + pad(signed2(c.mcc_delta), 16, true) + "\n";
  out += pad("Weighted F1", name_w) + pad("", wa) + pad("", wb) + pad(signed2(c.weighted_f1_delta), 16, true) + "\n";
  return out;
}

std::string render_summary_text(const std::vector<SummaryRow>& rows, std::string_view title) {
  std::size_t name_w = 22;
  for (const auto& r : rows) name_w = std::max(name_w, r.model.size() + 2);
  std::string out;
  if (!title.empty()) out += std::string(title) + "\n";
  out += pad("Model", name_w) + pad("MCC", 8, true) + pad("Accuracy", 10, true) + "\n";
  for (const auto& r : rows) {
    out += pad(r.model, name_w) + pad(format2(r.mcc), 8, true) + pad(format2(r.accuracy), 10, true) + "\n";
  }
  return out;
}

}  // namespace smell
