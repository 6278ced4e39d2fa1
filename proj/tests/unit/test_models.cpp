#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "smell/error.hpp"
#include "smell/features.hpp"
#include "smell/models.hpp"
#include "smell/pipeline.hpp"

using namespace smell;

namespace {

SparseMatrix dense(const std::vector<std::vector<double>>& rows) {
  return from_dense(rows, rows.empty() ? 0 : rows[0].size());
}

struct Separable {
  SparseMatrix X_train, X_test;
  std::vector<int> y_train, y_test;
  LabelEncoding enc;
};

const Separable& separable() {
  static const Separable s = [] {
    Separable out;
    const auto d = load_dataset(SMELL_TEST_DATA "/separable.csv", DatasetFormat::Csv);
    out.enc = LabelEncoding::fit(labels_of(d));
    const auto split = stratified_split(d, 0.2, 11);
    std::vector<TokenList> tr, te;
    for (const auto& r : split.train.records) tr.push_back(tokenize(r.comment_text));
    for (const auto& r : split.test.records) te.push_back(tokenize(r.comment_text));
    const auto vocab = Vocabulary::fit(tr);
    out.X_train = tfidf_transform(tr, vocab).matrix;
    out.X_test = tfidf_transform(te, vocab).matrix;
    out.y_train = out.enc.encode(labels_of(split.train));
    out.y_test = out.enc.encode(labels_of(split.test));
    return out;
  }();
  return s;
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  double hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return hit / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("model kinds parse and print") {
  for (auto k : kAllModelKinds) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK(parse_model_kind("RF") == ModelKind::RandomForest);
  CHECK(parse_model_kind("Gradient_Boosting") == ModelKind::GradientBoosting);
  CHECK_FALSE(parse_model_kind("perceptron"));
}

TEST_CASE("pinned defaults") {
  CHECK(std::get<KnnParams>(ModelSpec::defaults(ModelKind::Knn).params).k == 3);
  const auto rf = std::get<RandomForestParams>(ModelSpec::defaults(ModelKind::RandomForest).params);
  CHECK(rf.n_trees == 100);
  CHECK(rf.bootstrap);
  const auto gb = std::get<GradientBoostingParams>(ModelSpec::defaults(ModelKind::GradientBoosting).params);
  CHECK(gb.n_rounds == 100);
  CHECK(gb.max_depth == 3);
  CHECK(gb.learning_rate == doctest::Approx(0.1));
  CHECK(std::get<LogisticRegressionParams>(ModelSpec::defaults(ModelKind::LogisticRegression).params).C == 1.0);
  CHECK(std::get<SvmParams>(ModelSpec::defaults(ModelKind::Svm).params).epochs == 200);
  CHECK(std::get<NaiveBayesParams>(ModelSpec::defaults(ModelKind::NaiveBayes).params).alpha == 1.0);
}

TEST_CASE("spec validation, overrides and json") {
  auto spec = ModelSpec::defaults(ModelKind::Knn, 5);
  CHECK_THROWS_AS(spec.set("k", "0"), InvalidArgument);
  spec = ModelSpec::defaults(ModelKind::Knn, 5);
  spec.set("k", "7");
  CHECK(std::get<KnnParams>(spec.params).k == 7);
  CHECK_THROWS_AS(spec.set("depth", "2"), InvalidArgument);
  CHECK_THROWS_AS(spec.set("k", "2.5"), InvalidArgument);
  CHECK(ModelSpec::from_json(spec.to_json()) == spec);

  auto rf = ModelSpec::defaults(ModelKind::RandomForest);
  rf.set("bootstrap", "false");
  CHECK_FALSE(std::get<RandomForestParams>(rf.params).bootstrap);

  ModelSpec bad{ModelKind::Svm, KnnParams{}, 0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(ModelSpec::from_json({{"kind", "knn"}, {"hyperparameters", {{"kk", 1}}}}), InvalidArgument);
}

TEST_CASE("training contract errors") {
  const auto X = dense({{1, 0}, {0, 1}, {1, 1}});
  for (auto k : kAllModelKinds) {
    CAPTURE(to_string(k));
    const std::vector<int> one_class{0, 0, 0};
    CHECK_THROWS_AS(train(ModelSpec::defaults(k), X, one_class, 2), InvalidArgument);
    const std::vector<int> short_y{0, 1};
    CHECK_THROWS_AS(train(ModelSpec::defaults(k), X, short_y, 2), InvalidArgument);
  }
  const std::vector<int> y{0, 1, 0};
  const auto m = train(ModelSpec::defaults(ModelKind::NaiveBayes), X, y, 2);
  CHECK_THROWS_AS(m.predict(dense({{1, 0, 0}})), InvalidArgument);
}

TEST_CASE("naive Bayes matches the hand-computed Laplace posterior") {
  // docs (a) -> c0, (b) -> c1. With alpha=1: P(a|c0) = (1+1)/(1+2) = 2/3,
  // P(a|c1) = (0+1)/(1+2) = 1/3, equal priors, so posterior(c0 | a) = 2/3.
  const auto X = dense({{1, 0}, {0, 1}});
  const std::vector<int> y{0, 1};
  const auto m = train(ModelSpec::defaults(ModelKind::NaiveBayes), X, y, 2);
  const auto q = dense({{1, 0}});
  CHECK(m.predict(q)[0] == 0);
  const auto p = m.predict_proba(q);
  CHECK(p.row(0)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p.row(0)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("knn votes and tie-break") {
  // Query at the origin; three nearest neighbours determined by distance.
  SUBCASE("majority of three") {
    const auto X = dense({{0.1, 0}, {0.2, 0}, {0.3, 0}, {5, 5}});
    const std::vector<int> y{0, 0, 1, 2};
    const auto m = train(ModelSpec::defaults(ModelKind::Knn), X, y, 3);
    CHECK(m.predict(dense({{0, 0}}))[0] == 0);
  }
  SUBCASE("three-way tie goes to the lowest code") {
    const auto X = dense({{0.1, 0}, {0.2, 0}, {0.3, 0}, {5, 5}});
    const std::vector<int> y{2, 1, 0, 2};
    const auto m = train(ModelSpec::defaults(ModelKind::Knn), X, y, 3);
    CHECK(m.predict(dense({{0, 0}}))[0] == 0);
    CHECK_THROWS_AS(m.predict_proba(dense({{0, 0}})), InvalidArgument);
    const auto s = m.decision_scores(dense({{0, 0}}));
    CHECK_FALSE(s.calibrated);
  }
}

TEST_CASE("decision tree memorises separable points") {
  const auto X = dense({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const std::vector<int> y{0, 1, 2, 3};
  const auto m = train(ModelSpec::defaults(ModelKind::DecisionTree), X, y, 4);
  CHECK(m.predict(X) == y);
  CHECK(m.parameters().trees.front().leaf_count() == 4);
}

TEST_CASE("tree split ties go to the lower feature") {
  // Features 0 and 1 are identical, so both give the same split.
  const auto X = dense({{1, 1}, {1, 1}, {0, 0}, {0, 0}});
  const std::vector<int> y{1, 1, 0, 0};
  const auto m = train(ModelSpec::defaults(ModelKind::DecisionTree), X, y, 2);
  CHECK(m.parameters().trees.front().nodes().front().feature == 0);
  CHECK(m.parameters().trees.front().nodes().front().threshold == doctest::Approx(0.5));
}

TEST_CASE("tree threshold handles negative values and the implicit zero block") {
  const auto X = dense({{-2}, {-1}, {0}, {0}, {3}});
  const std::vector<int> y{0, 0, 1, 1, 2};
  const auto m = train(ModelSpec::defaults(ModelKind::DecisionTree), X, y, 3);
  CHECK(m.predict(X) == y);
  CHECK(m.predict(dense({{-1.6}}))[0] == 0);
  CHECK(m.predict(dense({{0.2}}))[0] == 1);
  CHECK(m.predict(dense({{2.0}}))[0] == 2);
}

TEST_CASE("logistic regression on a zero-weight model gives uniform probabilities") {
  const auto X = dense({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<int> y{0, 1, 2};
  auto spec = ModelSpec::defaults(ModelKind::LogisticRegression);
  spec.set("max_epochs", "1");
  const auto m = train(spec, X, y, 3);
  const TrainedModel zero(m.spec(), 2, 3, m.encoding(),
                          ModelParameters{std::vector<double>(6, 0.0), std::vector<double>(3, 0.0), {}, {}, {}, {}}, {});
  const auto p = zero.predict_proba(X);
  for (std::size_t r = 0; r < 3; ++r) {
    for (double v : p.row(r)) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("logistic gradient agrees with central differences") {
  std::mt19937_64 g(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> rows(5, std::vector<double>(8));
  for (auto& r : rows)
    for (auto& v : r) v = u(g);
  const auto X = dense(rows);
  const std::vector<int> y{0, 1, 2, 1, 0};
  const int K = 3;
  std::vector<double> theta(K * 8 + K);
  for (auto& t : theta) t = u(g);
  std::vector<double> grad;
  logistic_objective(X, y, K, 1.0, theta, &grad);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const double fd = (logistic_objective(X, y, K, 1.0, tp, nullptr) - logistic_objective(X, y, K, 1.0, tm, nullptr)) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-8}));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("logistic loss never increases") {
  const auto& s = separable();
  const auto m = train(ModelSpec::defaults(ModelKind::LogisticRegression), s.X_train, s.y_train, s.enc);
  const auto& h = m.info().loss_history;
  REQUIRE(h.size() > 1);
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
}

TEST_CASE("random forest with one tree and no bootstrap equals the decision tree") {
  const auto& s = separable();
  auto rf = ModelSpec::defaults(ModelKind::RandomForest, 3);
  rf.set("n_trees", "1");
  rf.set("bootstrap", "false");
  rf.set("max_features", std::to_string(s.X_train.cols()));
  const auto forest = train(rf, s.X_train, s.y_train, s.enc);
  const auto tree = train(ModelSpec::defaults(ModelKind::DecisionTree, 3), s.X_train, s.y_train, s.enc);
  CHECK(forest.parameters().trees.front() == tree.parameters().trees.front());
  CHECK(forest.predict(s.X_test) == tree.predict(s.X_test));
}

TEST_CASE("random forest is deterministic for a seed") {
  const auto& s = separable();
  auto spec = ModelSpec::defaults(ModelKind::RandomForest, 17);
  spec.set("n_trees", "20");
  const auto a = train(spec, s.X_train, s.y_train, s.enc);
  const auto b = train(spec, s.X_train, s.y_train, s.enc);
  CHECK(a.parameters().trees == b.parameters().trees);
  spec.seed = 18;
  const auto c = train(spec, s.X_train, s.y_train, s.enc);
  CHECK_FALSE(a.parameters().trees == c.parameters().trees);
}

TEST_CASE("gradient boosting with zero learning rate predicts the majority class") {
  const auto X = dense({{1, 0}, {0, 1}, {1, 1}, {0, 0}, {2, 1}});
  const std::vector<int> y{1, 1, 1, 0, 2};
  auto spec = ModelSpec::defaults(ModelKind::GradientBoosting);
  spec.set("learning_rate", "0");
  spec.set("n_rounds", "5");
  const auto m = train(spec, X, y, 3);
  for (int p : m.predict(X)) CHECK(p == 1);
}

TEST_CASE("probabilities sum to one and agree with predict") {
  const auto& s = separable();
  for (auto k : {ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::RandomForest,
                 ModelKind::GradientBoosting}) {
    CAPTURE(to_string(k));
    const auto m = train(ModelSpec::defaults(k, 1), s.X_train, s.y_train, s.enc);
    const auto p = m.predict_proba(s.X_test);
    const auto pred = m.predict(s.X_test);
    CHECK(p.calibrated);
    for (std::size_t r = 0; r < p.rows; ++r) {
      double sum = 0;
      int arg = 0;
      for (std::size_t c = 0; c < p.classes; ++c) {
        CHECK(p.row(r)[c] >= 0.0);
        sum += p.row(r)[c];
        if (p.row(r)[c] > p.row(r)[static_cast<std::size_t>(arg)]) arg = static_cast<int>(c);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(arg == pred[r]);
    }
  }
}

TEST_CASE("every kind separates the synthetic corpus and survives a save/load round trip") {
  const auto& s = separable();
  const auto dir = std::filesystem::temp_directory_path() / "smell_models_test";
  std::filesystem::create_directories(dir);
  for (auto k : kAllModelKinds) {
    CAPTURE(to_string(k));
    const auto m = train(ModelSpec::defaults(k, 42), s.X_train, s.y_train, s.enc);
    const double train_acc = accuracy(m.predict(s.X_train), s.y_train);
    const double test_acc = accuracy(m.predict(s.X_test), s.y_test);
    MESSAGE(to_string(k), " train ", train_acc, " test ", test_acc, " in ", m.info().wall_seconds, "s");
    CHECK(train_acc >= 0.95);
    CHECK(test_acc >= 0.90);

    const auto path = dir / (std::string(to_string(k)) + ".model");
    m.save(path);
    const auto back = TrainedModel::load(path);
    CHECK(back == m);
    CHECK(back.predict(s.X_test) == m.predict(s.X_test));
    const auto a = m.decision_scores(s.X_test);
    const auto b = back.decision_scores(s.X_test);
    CHECK(a.values == b.values);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupted model files are rejected") {
  const auto X = dense({{1, 0}, {0, 1}});
  const std::vector<int> y{0, 1};
  const auto bytes = train(ModelSpec::defaults(ModelKind::NaiveBayes), X, y, 2).serialize();
  CHECK_THROWS_AS(TrainedModel::deserialize(bytes.substr(0, bytes.size() - 3)), FormatError);
  auto flipped = bytes;
  flipped.back() = static_cast<char>(flipped.back() ^ 0x5a);
  CHECK_THROWS_AS(TrainedModel::deserialize(flipped), FormatError);
  CHECK_THROWS_AS(TrainedModel::deserialize("not a model"), FormatError);
}

TEST_CASE("envelope metadata round trip") {
  const auto X = dense({{1, 0}, {0, 1}});
  const std::vector<int> y{0, 1};
  auto m = train(ModelSpec::defaults(ModelKind::NaiveBayes), X, y, 2);
  CHECK(m.metadata().empty());
  m.set_metadata({{"vocabulary", {"a", "b"}}, {"seed", 3}});
  const auto back = TrainedModel::deserialize(m.serialize());
  CHECK(back.metadata() == m.metadata());
  CHECK(back == m);
  CHECK_THROWS_AS(m.set_metadata(nlohmann::json::array()), InvalidArgument);
}
