#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "smell/eval.hpp"
#include "smell/extractor.hpp"
#include "smell/features.hpp"
#include "smell/models.hpp"
#include "smell/resample.hpp"

using namespace smell;

namespace {

const std::vector<std::string> kWords = {"parse", "header", "buffer", "todo",  "fix",    "later", "increment",
                                         "index", "return", "value",  "cache", "remove", "hack",  "config",
                                         "thread", "lock",  "retry",  "socket", "json",  "file",  "counter"};

std::vector<std::string> comments(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto len = 3 + g() % 10;
    for (std::size_t w = 0; w < len; ++w) s += kWords[g() % kWords.size()] + (w + 1 < len ? " " : "");
    out.push_back(s);
  }
  return out;
}

struct Corpus {
  SparseMatrix X;
  std::vector<int> y;
};

// Labels follow the first word so trees have something to learn.
Corpus corpus(std::size_t n, int K, std::uint64_t seed) {
  const auto texts = comments(n, seed);
  std::vector<TokenList> docs;
  for (const auto& t : texts) docs.push_back(tokenize(t));
  const auto vocab = Vocabulary::fit(docs);
  Corpus c{tfidf_transform(docs, vocab).matrix, {}};
  for (const auto& d : docs) c.y.push_back(d.empty() ? 0 : static_cast<int>(std::hash<std::string>{}(d[0]) % K));
  return c;
}

std::string java_source(int methods) {
  std::string s = "public class Bench {\n";
  for (int m = 0; m < methods; ++m) {
    s += "  // computes value " + std::to_string(m) + "\n";
    s += "  int f" + std::to_string(m) + "(int x) {\n";
    s += "    int y = x * 2; // doubled\n";
    s += "    if (y > 10) {\n      y -= 1;\n    } else {\n      y += 1;\n    }\n";
    s += "    String t = \"// not a comment\";\n    /* block */\n    return y;\n  }\n";
  }
  return s + "}\n";
}

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
  const auto texts = comments(1000, 1);
  for (auto _ : state) {
    for (const auto& t : texts) benchmark::DoNotOptimize(tokenize(t));
  }
  state.SetItemsProcessed(state.iterations() * texts.size());
}
BENCHMARK(BM_Tokenize);

static void BM_TfidfFitTransform(benchmark::State& state) {
  const auto texts = comments(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<TokenList> docs;
  for (const auto& t : texts) docs.push_back(tokenize(t));
  for (auto _ : state) {
    const auto vocab = Vocabulary::fit(docs);
    benchmark::DoNotOptimize(tfidf_transform(docs, vocab));
  }
  state.SetItemsProcessed(state.iterations() * docs.size());
}
BENCHMARK(BM_TfidfFitTransform)->Arg(500)->Arg(2000);

static void BM_Smote(benchmark::State& state) {
  auto c = corpus(static_cast<std::size_t>(state.range(0)), 4, 3);
  // Skew the classes so there is oversampling to do.
  for (std::size_t i = 0; i < c.y.size(); ++i)
    if (i % 3) c.y[i] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(smote(c.X, c.y, 5, 7));
}
BENCHMARK(BM_Smote)->Arg(500)->Arg(2000);

static void BM_TrainModel(benchmark::State& state) {
  const auto kind = kAllModelKinds[static_cast<std::size_t>(state.range(0))];
  const auto c = corpus(1000, 5, 4);
  const auto spec = ModelSpec::defaults(kind, 9);
  state.SetLabel(std::string(to_string(kind)));
  for (auto _ : state) benchmark::DoNotOptimize(train(spec, c.X, c.y, 5));
}
BENCHMARK(BM_TrainModel)->DenseRange(0, static_cast<int>(kAllModelKinds.size()) - 1)->Unit(benchmark::kMillisecond);

static void BM_Mcc(benchmark::State& state) {
  std::mt19937_64 g(5);
  const int K = 10;
  std::vector<int> t(5000), p(5000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<int>(g() % K);
    p[i] = g() % 3 ? t[i] : static_cast<int>(g() % K);
  }
  std::vector<SmellLabel> labels(kAllLabels.begin(), kAllLabels.end());
  for (auto _ : state) benchmark::DoNotOptimize(class_metrics(confusion_matrix(t, p, labels)));
}
BENCHMARK(BM_Mcc);

static void BM_ExtractAndAssociate(benchmark::State& state) {
  const auto text = java_source(static_cast<int>(state.range(0)));
  const auto src = make_source("Bench.java", Language::Java, text);
  for (auto _ : state) {
    const LexedSource lexed(src);
    for (const auto& c : extract_inline_comments(src)) benchmark::DoNotOptimize(associate_code_segment(c, lexed));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ExtractAndAssociate)->Arg(50)->Arg(500);
BENCHMARK_MAIN();
