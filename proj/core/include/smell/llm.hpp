#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smell/corpus.hpp"
#include "smell/eval.hpp"
#include "smell/report.hpp"

namespace smell {

struct LlmParams {
  std::string model = "gpt-4";
  double temperature = 0.2;
  int max_tokens = 10;
  double top_p = 0.1;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 60.0;
  int max_attempts = 3;          // total tries per request
  int backoff_initial_ms = 1000;  // doubled after every failed attempt
  int concurrency = 4;            // requests in flight

  /// Sampling and model fields only; these enter cache keys.
  nlohmann::json sampling_json() const;
  /// Everything except credentials.
  nlohmann::json to_json() const;
  static LlmParams from_json(const nlohmann::json& j);
  void validate() const;
};

struct CategoryEntry {
  std::string name;
  std::string description;
  std::string example;
};

struct PromptTemplate {
  std::string system;
  std::string preamble;
  std::vector<CategoryEntry> categories;
  std::string comment_heading = "Comment:";
  std::string code_heading = "Code:";
  std::string answer_instruction;

  /// The template shipped with the library.
  static PromptTemplate builtin();
  static PromptTemplate from_json(const nlohmann::json& j);
  static PromptTemplate load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws FormatError unless every one of the ten labels is named by
  /// exactly one category entry.
  void validate() const;
  /// SHA-256 of the canonical JSON form.
  std::string hash() const;
};

struct ChatPrompt {
  std::string system;
  std::string user;
};

/// Taxonomy, then the comment, then (when include_code) a code section
/// holding the segment, or "NA" when there is none.
ChatPrompt build_prompt(const CommentRecord& record, const PromptTemplate& tmpl, bool include_code);

/// The chat-completion request body sent for a prompt.
nlohmann::json chat_request_body(const ChatPrompt& prompt, const LlmParams& params);

/// Maps a model answer to a label: lowercase, trim, strip surrounding
/// punctuation and quotes, collapse whitespace, then an exact alias lookup.
/// Anything else is nullopt (unparseable).
std::optional<SmellLabel> normalize_label(std::string_view raw);

struct Completion {
  std::string text;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

struct ChatRequest {
  ChatPrompt prompt;
  const CommentRecord* record = nullptr;  // for offline backends
  bool include_code = false;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  /// Must be safe to call from several threads at once.
  virtual Completion complete(const ChatRequest& request) = 0;
};

/// Remote chat-completion endpoint. The API key is read from the
/// environment variable named in params at construction.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(LlmParams params);
  std::string name() const override { return "http:" + params_.model; }
  Completion complete(const ChatRequest& request) override;

 private:
  LlmParams params_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Offline deterministic classifier driven by surface rules on the comment
/// (and code when sent). Used for tests and dry runs.
class KeywordBackend : public LlmBackend {
 public:
  std::string name() const override { return "keyword-mock"; }
  Completion complete(const ChatRequest& request) override;
};

/// Splits "scheme://host[:port]/path"; throws InvalidArgument otherwise.
struct Endpoint {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;
};
Endpoint parse_endpoint(std::string_view url);

/// Cache key of one record's request.
std::string llm_cache_key(const CommentRecord& record, const std::string& template_hash, const LlmParams& params,
                          bool include_code);

struct LlmPrediction {
  std::string id;
  std::string raw;
  std::optional<SmellLabel> label;
  std::string requested_at;
  std::string responded_at;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  bool from_cache = false;

  nlohmann::json to_json() const;
};

struct BatchResult {
  std::vector<LlmPrediction> predictions;  // dataset order
  nlohmann::json manifest;
  std::size_t requests_sent = 0;
  std::size_t cache_hits = 0;
  std::size_t unparseable = 0;
  std::optional<EvalReport> report;  // when every record is labeled
};

/// One request per record, cached as <cache_dir>/<key>.json. Records with
/// a cached response are never re-sent. A manifest (<cache_dir>/manifest.json)
/// is rewritten at the end, and also when a request fails, in which case the
/// error is rethrown and a rerun resumes from the cache.
BatchResult run_batch(const Dataset& d, const PromptTemplate& tmpl, const LlmParams& params, bool include_code,
                      const std::filesystem::path& cache_dir, LlmBackend& backend);

/// UTC timestamp "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

}  // namespace smell
