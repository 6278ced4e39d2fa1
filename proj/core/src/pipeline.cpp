#include "smell/pipeline.hpp"

#include "smell/error.hpp"
#include "smell/rng.hpp"

namespace smell {

namespace {

std::vector<TokenList> tokenize_all(const Dataset& d, const PipelineOptions& options) {
  std::vector<TokenList> docs;
  docs.reserve(d.size());
  for (const auto& r : d.records) docs.push_back(tokenize(feature_text(r, options.with_code), options.tokenizer));
  return docs;
}

std::vector<std::string> ids_of(const Dataset& d) {
  std::vector<std::string> ids;
  ids.reserve(d.size());
  for (const auto& r : d.records) ids.push_back(r.id);
  return ids;
}

nlohmann::json plan_json(const ResamplePlan& p, const LabelEncoding& enc) {
  nlohmann::json before = nlohmann::json::object();
  nlohmann::json after = nlohmann::json::object();
  for (std::size_t c = 0; c < p.current.size() && c < enc.size(); ++c) {
    const std::string name(to_string(enc.decode(static_cast<int>(c))));
    before[name] = p.current[c];
    after[name] = p.target[c];
  }
  return {{"before", before}, {"after", after}, {"k_neighbors", p.k_neighbors}, {"seed", p.seed}};
}

}  // namespace

FoldOutcome train_and_evaluate(const ModelSpec& spec, const Dataset& train, const Dataset& test,
                               const LabelEncoding& encoding, const PipelineOptions& options,
                               std::uint64_t smote_seed) {
  if (train.empty() || test.empty()) throw InvalidArgument("train_and_evaluate: empty train or test set");
  const auto train_docs = tokenize_all(train, options);
  const auto test_docs = tokenize_all(test, options);
  FoldOutcome out;
  out.vocabulary = Vocabulary::fit(train_docs);
  const auto X_train = tfidf_transform(train_docs, out.vocabulary, ids_of(train));
  const auto X_test = tfidf_transform(test_docs, out.vocabulary, ids_of(test));
  const auto y_train = encoding.encode(labels_of(train));
  const auto y_test = encoding.encode(labels_of(test));

  if (options.use_smote) {
    auto res = smote(X_train.matrix, y_train, options.smote_k, smote_seed);
    out.plan = res.plan;
    out.model = smell::train(spec, res.X, res.y, encoding);
  } else {
    out.model = smell::train(spec, X_train.matrix, y_train, encoding);
  }
  const auto pred = out.model.predict(X_test.matrix);
  out.report = class_metrics(confusion_matrix(y_test, pred, encoding.labels()));
  out.report.metadata = {{"model", spec.to_json()},
                         {"train_size", train.size()},
                         {"test_size", test.size()},
                         {"vocabulary_size", out.vocabulary.size()},
                         {"with_code", options.with_code},
                         {"train_dataset_sha256", dataset_hash(train)},
                         {"test_dataset_sha256", dataset_hash(test)},
                         {"training_iterations", out.model.info().iterations},
                         {"training_converged", out.model.info().converged}};
  if (options.use_smote) out.report.metadata["smote"] = plan_json(out.plan, encoding);
  return out;
}

FoldOutcome holdout_evaluate(const ModelSpec& spec, const Dataset& d, double test_fraction, std::uint64_t seed,
                             const PipelineOptions& options) {
  const auto encoding = LabelEncoding::fit(labels_of(d));
  const auto split = stratified_split(d, test_fraction, seed);
  auto out = train_and_evaluate(spec, split.train, split.test, encoding, options, derive_seed(seed, "smote"));
  out.report.metadata["protocol"] = "holdout";
  out.report.metadata["test_fraction"] = test_fraction;
  out.report.metadata["seed"] = seed;
  out.report.metadata["dataset_sha256"] = dataset_hash(d);
  return out;
}

CrossValidation cross_validate(const ModelSpec& spec, const Dataset& d, std::size_t k, std::uint64_t seed,
                               const PipelineOptions& options) {
  const auto labels = labels_of(d);
  const auto encoding = LabelEncoding::fit(labels);
  const auto folds = stratified_kfold(encoding.encode(labels), k, seed);
  CrossValidation cv;
  std::vector<bool> in_fold(d.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), false);
    for (auto i : folds[f]) in_fold[i] = true;
    Dataset train;
    Dataset test;
    train.provenance = test.provenance = d.provenance;
    for (std::size_t i = 0; i < d.size(); ++i) (in_fold[i] ? test : train).records.push_back(d.records[i]);
    auto out = train_and_evaluate(spec, train, test, encoding, options, derive_seed(seed, "smote", f));
    out.report.metadata["protocol"] = "cross-validation";
    out.report.metadata["fold"] = f;
    out.report.metadata["folds"] = k;
    out.report.metadata["seed"] = seed;
    cv.mean_mcc += out.report.mcc;
    cv.mean_accuracy += out.report.accuracy;
    cv.plans.push_back(out.plan);
    cv.folds.push_back(std::move(out.report));
  }
  cv.mean_mcc /= static_cast<double>(folds.size());
  cv.mean_accuracy /= static_cast<double>(folds.size());
  return cv;
}

}  // namespace smell
