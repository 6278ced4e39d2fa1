#include "smell/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smell/error.hpp"
#include "smell/rng.hpp"

namespace smell {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

nlohmann::json labels_json(const std::vector<SmellLabel>& labels) {
  auto j = nlohmann::json::array();
  for (auto l : labels) j.push_back(to_string(l));
  return j;
}

nlohmann::json averages_json(const Averages& a) {
  return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

Averages averages_from_json(const nlohmann::json& j) {
  return {j.value("precision", 0.0), j.value("recall", 0.0), j.value("f1", 0.0)};
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0}) + unparseable_total();
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < size(); ++i) t += at(i, i);
  return t;
}

std::size_t ConfusionMatrix::true_count(std::size_t k) const {
  std::size_t t = unparseable.empty() ? 0 : unparseable[k];
  for (std::size_t j = 0; j < size(); ++j) t += at(k, j);
  return t;
}

std::size_t ConfusionMatrix::predicted_count(std::size_t k) const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < size(); ++i) t += at(i, k);
  return t;
}

std::size_t ConfusionMatrix::unparseable_total() const {
  return std::accumulate(unparseable.begin(), unparseable.end(), std::size_t{0});
}

nlohmann::json ConfusionMatrix::to_json() const {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < size(); ++i) {
    rows.push_back(std::vector<std::size_t>(counts.begin() + static_cast<std::ptrdiff_t>(i * size()),
                                            counts.begin() + static_cast<std::ptrdiff_t>((i + 1) * size())));
  }
  return {{"labels", labels_json(labels)}, {"matrix", rows}, {"unparseable", unparseable}};
}

ConfusionMatrix ConfusionMatrix::from_json(const nlohmann::json& j) {
  ConfusionMatrix cm;
  for (const auto& l : j.at("labels")) cm.labels.push_back(parse_label_or_throw(l.get<std::string>()));
  const auto K = cm.labels.size();
  const auto& rows = j.at("matrix");
  if (rows.size() != K) throw FormatError("confusion matrix: row count does not match labels");
  for (const auto& row : rows) {
    if (row.size() != K) throw FormatError("confusion matrix: row width does not match labels");
    for (const auto& v : row) cm.counts.push_back(v.get<std::size_t>());
  }
  cm.unparseable = j.value("unparseable", std::vector<std::size_t>(K, 0));
  if (cm.unparseable.size() != K) throw FormatError("confusion matrix: unparseable column has wrong length");
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<SmellLabel> labels) {
  if (y_true.size() != y_pred.size()) {
    throw InvalidArgument("confusion_matrix: " + std::to_string(y_true.size()) + " true labels but " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw InvalidArgument("confusion_matrix: empty input");
  const auto K = labels.size();
  ConfusionMatrix cm;
  cm.labels = std::move(labels);
  cm.counts.assign(K * K, 0);
  cm.unparseable.assign(K, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || static_cast<std::size_t>(t) >= K) {
      throw InvalidArgument("confusion_matrix: true label code " + std::to_string(t) + " out of range");
    }
    if (p == kUnparseable) {
      ++cm.unparseable[static_cast<std::size_t>(t)];
      continue;
    }
    if (p < 0 || static_cast<std::size_t>(p) >= K) {
      throw InvalidArgument("confusion_matrix: predicted label code " + std::to_string(p) + " out of range");
    }
    ++cm.counts[static_cast<std::size_t>(t) * K + static_cast<std::size_t>(p)];
  }
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const SmellLabel> y_true, std::span<const std::optional<SmellLabel>> y_pred,
                                 std::vector<SmellLabel> labels) {
  auto code = [&](SmellLabel l) {
    const auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) {
      throw InvalidArgument("confusion_matrix: label '" + std::string(to_string(l)) + "' not in the label set");
    }
    return static_cast<int>(it - labels.begin());
  };
  std::vector<int> t;
  std::vector<int> p;
  t.reserve(y_true.size());
  p.reserve(y_pred.size());
  for (auto l : y_true) t.push_back(code(l));
  for (const auto& l : y_pred) p.push_back(l ? code(*l) : kUnparseable);
  return confusion_matrix(t, p, std::move(labels));
}

const ClassMetrics* EvalReport::find(SmellLabel label) const {
  for (const auto& c : classes) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

Averages weighted_average(std::span<const ClassMetrics> rows) {
  Averages a;
  double support = 0.0;
  for (const auto& r : rows) {
    const double s = static_cast<double>(r.support);
    a.precision += s * r.precision;
    a.recall += s * r.recall;
    a.f1 += s * r.f1;
    support += s;
  }
  if (support == 0.0) return {};
  a.precision /= support;
  a.recall /= support;
  a.f1 /= support;
  return a;
}

Averages macro_average(std::span<const ClassMetrics> rows) {
  Averages a;
  if (rows.empty()) return a;
  for (const auto& r : rows) {
    a.precision += r.precision;
    a.recall += r.recall;
    a.f1 += r.f1;
  }
  const double n = static_cast<double>(rows.size());
  a.precision /= n;
  a.recall /= n;
  a.f1 /= n;
  return a;
}

double mcc(const ConfusionMatrix& cm) {
  if (cm.size() == 0) throw InvalidArgument("mcc: empty confusion matrix");
  const double s = static_cast<double>(cm.total());
  const double c = static_cast<double>(cm.trace());
  double tp = 0.0;
  double pp = 0.0;
  double tt = 0.0;
  for (std::size_t k = 0; k < cm.size(); ++k) {
    const double t = static_cast<double>(cm.true_count(k));
    const double p = static_cast<double>(cm.predicted_count(k));
    tp += t * p;
    pp += p * p;
    tt += t * t;
  }
  const double u = static_cast<double>(cm.unparseable_total());
  pp += u * u;
  const double den = std::sqrt(s * s - pp) * std::sqrt(s * s - tt);
  return den == 0.0 ? 0.0 : (c * s - tp) / den;
}

EvalReport class_metrics(const ConfusionMatrix& cm) {
  if (cm.size() == 0 || cm.total() == 0) throw InvalidArgument("class_metrics: empty confusion matrix");
  EvalReport r;
  for (std::size_t k = 0; k < cm.size(); ++k) {
    ClassMetrics m;
    m.label = cm.labels[k];
    const double tp = static_cast<double>(cm.at(k, k));
    m.support = cm.true_count(k);
    m.precision = ratio(tp, static_cast<double>(cm.predicted_count(k)));
    m.recall = ratio(tp, static_cast<double>(m.support));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    r.classes.push_back(m);
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  r.macro = macro_average(r.classes);
  r.weighted = weighted_average(r.classes);
  r.mcc = mcc(cm);
  r.unparseable = cm.unparseable_total();
  r.confusion = cm;
  return r;
}

nlohmann::json EvalReport::to_json() const {
  auto rows = nlohmann::json::array();
  for (const auto& c : classes) {
    rows.push_back({{"label", to_string(c.label)},
                    {"precision", c.precision},
                    {"recall", c.recall},
                    {"f1", c.f1},
                    {"support", c.support}});
  }
  nlohmann::json j = {{"schema", "smell-report"},
                      {"version", 1},
                      {"classes", rows},
                      {"accuracy", accuracy},
                      {"macro_avg", averages_json(macro)},
                      {"weighted_avg", averages_json(weighted)},
                      {"mcc", mcc},
                      {"unparseable", unparseable},
                      {"metadata", metadata}};
  if (confusion) j["confusion"] = confusion->to_json();
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("classes")) throw FormatError("report JSON needs a 'classes' array");
  EvalReport r;
  for (const auto& c : j.at("classes")) {
    ClassMetrics m;
    m.label = parse_label_or_throw(c.at("label").get<std::string>());
    m.precision = c.value("precision", 0.0);
    m.recall = c.value("recall", 0.0);
    m.f1 = c.value("f1", 0.0);
    m.support = c.value("support", std::size_t{0});
    r.classes.push_back(m);
  }
  r.accuracy = j.value("accuracy", 0.0);
  r.macro = j.contains("macro_avg") ? averages_from_json(j.at("macro_avg")) : macro_average(r.classes);
  r.weighted = j.contains("weighted_avg") ? averages_from_json(j.at("weighted_avg")) : weighted_average(r.classes);
  r.mcc = j.value("mcc", 0.0);
  r.unparseable = j.value("unparseable", std::size_t{0});
  if (j.contains("confusion")) r.confusion = ConfusionMatrix::from_json(j.at("confusion"));
  r.metadata = j.value("metadata", nlohmann::json::object());
  return r;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified_kfold: k must be at least 2");
  if (k > labels.size()) {
    throw InvalidArgument("stratified_kfold: k=" + std::to_string(k) + " exceeds dataset size " +
                          std::to_string(labels.size()));
  }
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("stratified_kfold: negative label code");
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  std::size_t largest = 0;
  for (const auto& idx : by_class) largest = std::max(largest, idx.size());
  if (k > largest) {
    throw InvalidArgument("stratified_kfold: k=" + std::to_string(k) + " exceeds the size of every class");
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, "kfold", c));
    rng.shuffle(std::span<std::size_t>(idx));
    for (auto i : idx) {
      folds[cursor % k].push_back(i);
      ++cursor;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
  std::vector<int> codes;
  codes.reserve(d.size());
  for (auto l : labels_of(d)) codes.push_back(static_cast<int>(l));
  return stratified_kfold(codes, k, seed);
}

}  // namespace smell
