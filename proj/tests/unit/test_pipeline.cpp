#include <doctest.h>

#include <filesystem>

#include "smell/error.hpp"
#include "smell/pipeline.hpp"

using namespace smell;

namespace {

const Dataset& separable() {
  static const Dataset d = load_dataset(std::filesystem::path(SMELL_TEST_DATA) / "separable.csv", DatasetFormat::Csv);
  return d;
}

// Keeps the first n records of each listed class.
Dataset imbalanced(const std::vector<std::pair<SmellLabel, std::size_t>>& counts) {
  Dataset out;
  for (const auto& [label, n] : counts) {
    std::size_t kept = 0;
    for (const auto& r : separable().records) {
      if (r.label == label && kept < n) {
        out.records.push_back(r);
        ++kept;
      }
    }
  }
  return out;
}

ModelSpec nb() { return ModelSpec::defaults(ModelKind::NaiveBayes); }

}  // namespace

TEST_CASE("cross validation is deterministic for a seed") {
  const auto d = imbalanced({{SmellLabel::Obvious, 50}, {SmellLabel::Task, 30}, {SmellLabel::Vague, 15}});
  auto spec = ModelSpec::defaults(ModelKind::RandomForest);
  spec.set("n_trees", "10");
  const auto a = cross_validate(spec, d, 5, 3);
  const auto b = cross_validate(spec, d, 5, 3);
  REQUIRE(a.folds.size() == 5);
  for (std::size_t f = 0; f < 5; ++f) CHECK(a.folds[f].to_json() == b.folds[f].to_json());
  CHECK(a.mean_mcc == b.mean_mcc);
}

TEST_CASE("validation folds keep the class imbalance, training folds are balanced") {
  const auto d = imbalanced({{SmellLabel::Obvious, 50}, {SmellLabel::Task, 30}, {SmellLabel::Vague, 15},
                             {SmellLabel::NotASmell, 10}});
  const auto cv = cross_validate(nb(), d, 5, 17);
  REQUIRE(cv.folds.size() == 5);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto& r = cv.folds[f];
    CHECK(r.find(SmellLabel::Obvious)->support == 10);
    CHECK(r.find(SmellLabel::Task)->support == 6);
    CHECK(r.find(SmellLabel::Vague)->support == 3);
    CHECK(r.find(SmellLabel::NotASmell)->support == 2);
    const auto& plan = cv.plans[f];
    for (auto t : plan.target) CHECK(t == 40);
    std::size_t before = 0;
    for (auto c : plan.current) before += c;
    CHECK(before == 84);
  }
  CHECK(cv.mean_mcc > 0.9);
}

TEST_CASE("vocabulary never sees held-out terms") {
  auto train = imbalanced({{SmellLabel::Obvious, 20}, {SmellLabel::Task, 20}});
  Dataset test;
  CommentRecord r;
  r.id = "held-out";
  r.comment_text = "zzzuniqueterm counter";
  r.label = SmellLabel::Obvious;
  test.records.push_back(r);
  const auto enc = LabelEncoding::fit(labels_of(train));
  const auto out = train_and_evaluate(nb(), train, test, enc, {}, 1);
  CHECK(out.vocabulary.index_of("zzzuniqueterm") == -1);
  CHECK(out.vocabulary.document_count() == 40);
  CHECK(out.report.find(SmellLabel::Obvious)->support == 1);
}

TEST_CASE("code segments enter the features only when asked") {
  auto train = imbalanced({{SmellLabel::Obvious, 20}, {SmellLabel::Task, 20}});
  train.records[0].code_segment = "frobnicate(widget);";
  const auto enc = LabelEncoding::fit(labels_of(train));
  PipelineOptions off, on;
  on.with_code = true;
  CHECK(train_and_evaluate(nb(), train, train, enc, off, 1).vocabulary.index_of("frobnicate") == -1);
  const auto with = train_and_evaluate(nb(), train, train, enc, on, 1);
  CHECK(with.vocabulary.index_of("frobnicate") >= 0);
  CHECK(with.report.metadata["with_code"] == true);
}

TEST_CASE("smote can be switched off") {
  const auto d = imbalanced({{SmellLabel::Obvious, 30}, {SmellLabel::Task, 10}});
  PipelineOptions o;
  o.use_smote = false;
  const auto out = holdout_evaluate(nb(), d, 0.2, 5, o);
  CHECK(out.plan.target.empty());
  CHECK_FALSE(out.report.metadata.contains("smote"));
  const auto with = holdout_evaluate(nb(), d, 0.2, 5);
  CHECK(with.plan.target == std::vector<std::size_t>{24, 24});
}

TEST_CASE("holdout report metadata") {
  const auto d = imbalanced({{SmellLabel::Obvious, 30}, {SmellLabel::Task, 30}, {SmellLabel::Vague, 30}});
  const auto out = holdout_evaluate(nb(), d, 0.2, 9);
  const auto& m = out.report.metadata;
  CHECK(m["protocol"] == "holdout");
  CHECK(m["seed"] == 9);
  CHECK(m["dataset_sha256"] == dataset_hash(d));
  CHECK(out.report.confusion);
  CHECK(out.report.confusion->total() == 18);
  const auto again = holdout_evaluate(nb(), d, 0.2, 9);
  CHECK(again.report.to_json() == out.report.to_json());
}

TEST_CASE("bad inputs") {
  const auto d = imbalanced({{SmellLabel::Obvious, 10}, {SmellLabel::Task, 10}});
  CHECK_THROWS_AS(cross_validate(nb(), d, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(cross_validate(nb(), d, 11, 1), InvalidArgument);
}
