#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace csmell {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitReview = 2;

struct GlobalOptions {
  std::uint64_t seed = 42;
  std::string out = "out";
  bool quiet = false;
};

struct ExtractOptions {
  std::string root;
  std::string project;
  std::vector<std::string> include;
  std::vector<std::string> exclude;
};

struct PrepareOptions {
  std::string dataset;
  std::size_t threshold = 30;
};

// Shared by train-eval and cv.
struct ModelOptions {
  std::string dataset;
  std::vector<std::string> models{"all"};
  std::vector<std::string> params;  // kind.key=value
  bool with_code = false;
  bool no_smote = false;
  int smote_k = 5;
  bool keep_short_tokens = false;
};

struct TrainEvalOptions {
  ModelOptions model;
  double test_fraction = 0.2;
};

struct CvOptions {
  ModelOptions model;
  std::size_t folds = 10;
};

struct LlmOptions {
  std::string dataset;
  std::string template_path;
  std::string cache;  // default: <out>/llm-cache
  std::string backend = "http";
  bool include_code = false;
  std::string model = "gpt-4";
  double temperature = 0.2;
  double top_p = 0.1;
  int max_tokens = 10;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout = 60.0;
  int max_attempts = 3;
  int backoff_ms = 1000;
  int concurrency = 4;
};

struct CompareOptions {
  std::string a;
  std::string b;
  std::string name_a = "a";
  std::string name_b = "b";
};

struct ReportOptions {
  std::string input;
  std::string format = "text";
};

struct AgreementOptions {
  std::string a;
  std::string b;
};

int run_extract(const GlobalOptions& g, const ExtractOptions& o);
int run_prepare(const GlobalOptions& g, const PrepareOptions& o);
int run_train_eval(const GlobalOptions& g, const TrainEvalOptions& o);
int run_cv(const GlobalOptions& g, const CvOptions& o);
int run_llm(const GlobalOptions& g, const LlmOptions& o);
int run_compare(const GlobalOptions& g, const CompareOptions& o);
int run_report(const GlobalOptions& g, const ReportOptions& o);
int run_agreement(const GlobalOptions& g, const AgreementOptions& o);

}  // namespace csmell
