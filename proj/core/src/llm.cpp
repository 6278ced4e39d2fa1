#include "smell/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>

#include "smell/error.hpp"
#include "smell/features.hpp"
#include "smell/hash.hpp"
#include "smell/io.hpp"

namespace smell {
namespace embedded {
std::string_view prompt_template();
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

nlohmann::json LlmParams::sampling_json() const {
  return {{"model", model}, {"temperature", temperature}, {"max_tokens", max_tokens}, {"top_p", top_p}};
}

nlohmann::json LlmParams::to_json() const {
  auto j = sampling_json();
  j["endpoint"] = endpoint;
  j["api_key_env"] = api_key_env;
  j["timeout_seconds"] = timeout_seconds;
  j["max_attempts"] = max_attempts;
  j["backoff_initial_ms"] = backoff_initial_ms;
  j["concurrency"] = concurrency;
  return j;
}

LlmParams LlmParams::from_json(const nlohmann::json& j) {
  LlmParams p;
  p.model = j.value("model", p.model);
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.top_p = j.value("top_p", p.top_p);
  p.endpoint = j.value("endpoint", p.endpoint);
  p.api_key_env = j.value("api_key_env", p.api_key_env);
  p.timeout_seconds = j.value("timeout_seconds", p.timeout_seconds);
  p.max_attempts = j.value("max_attempts", p.max_attempts);
  p.backoff_initial_ms = j.value("backoff_initial_ms", p.backoff_initial_ms);
  p.concurrency = j.value("concurrency", p.concurrency);
  p.validate();
  return p;
}

void LlmParams::validate() const {
  if (model.empty()) throw InvalidArgument("llm: model name is empty");
  if (temperature < 0.0 || temperature > 2.0) throw InvalidArgument("llm: temperature must be in [0, 2]");
  if (top_p <= 0.0 || top_p > 1.0) throw InvalidArgument("llm: top_p must be in (0, 1]");
  if (max_tokens < 1) throw InvalidArgument("llm: max_tokens must be >= 1");
  if (max_attempts < 1) throw InvalidArgument("llm: max_attempts must be >= 1");
  if (backoff_initial_ms < 0) throw InvalidArgument("llm: backoff must be >= 0");
  if (concurrency < 1) throw InvalidArgument("llm: concurrency must be >= 1");
  if (timeout_seconds <= 0.0) throw InvalidArgument("llm: timeout must be > 0");
}

PromptTemplate PromptTemplate::builtin() {
  return from_json(nlohmann::json::parse(embedded::prompt_template()));
}

PromptTemplate PromptTemplate::from_json(const nlohmann::json& j) {
  PromptTemplate t;
  try {
    t.system = j.value("system", "");
    t.preamble = j.at("preamble").get<std::string>();
    for (const auto& c : j.at("categories")) {
      t.categories.push_back({c.at("name").get<std::string>(), c.at("description").get<std::string>(),
                              c.value("example", "")});
    }
    t.comment_heading = j.value("comment_heading", t.comment_heading);
    t.code_heading = j.value("code_heading", t.code_heading);
    t.answer_instruction = j.value("answer_instruction", "");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("prompt template: ") + e.what());
  }
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json PromptTemplate::to_json() const {
  auto cats = nlohmann::json::array();
  for (const auto& c : categories) cats.push_back({{"name", c.name}, {"description", c.description}, {"example", c.example}});
  return {{"format", "smell-prompt-template"},
          {"version", 1},
          {"system", system},
          {"preamble", preamble},
          {"categories", cats},
          {"comment_heading", comment_heading},
          {"code_heading", code_heading},
          {"answer_instruction", answer_instruction}};
}

void PromptTemplate::validate() const {
  std::array<int, kLabelCount> seen{};
  for (const auto& c : categories) {
    const auto label = parse_label(c.name);
    if (!label) throw FormatError("prompt template: '" + c.name + "' is not a category name");
    ++seen[static_cast<std::size_t>(*label)];
  }
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (seen[i] != 1) {
      throw FormatError("prompt template: category '" + std::string(display_name(kAllLabels[i])) + "' appears " +
                        std::to_string(seen[i]) + " times, expected once");
    }
  }
  if (preamble.empty()) throw FormatError("prompt template: empty preamble");
}

std::string PromptTemplate::hash() const { return sha256_hex(to_json().dump()); }

ChatPrompt build_prompt(const CommentRecord& record, const PromptTemplate& tmpl, bool include_code) {
  std::string u = tmpl.preamble + "\n\n";
  for (std::size_t i = 0; i < tmpl.categories.size(); ++i) {
    const auto& c = tmpl.categories[i];
    u += std::to_string(i + 1) + ". " + c.name + ": " + c.description;
    if (!c.example.empty()) u += "\n   Example: " + c.example;
    u += "\n";
  }
  u += "\n" + tmpl.comment_heading + "\n" + record.comment_text + "\n";
  if (include_code) {
    const std::string code = record.code_segment && !record.code_segment->empty() ? *record.code_segment
                                                                                  : std::string(kNaSegment);
    u += "\n" + tmpl.code_heading + "\n" + code + "\n";
  }
  if (!tmpl.answer_instruction.empty()) u += "\n" + tmpl.answer_instruction;
  return {tmpl.system, u};
}

nlohmann::json chat_request_body(const ChatPrompt& prompt, const LlmParams& params) {
  auto messages = nlohmann::json::array();
  if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
  messages.push_back({{"role", "user"}, {"content", prompt.user}});
  return {{"model", params.model},
          {"messages", messages},
          {"temperature", params.temperature},
          {"top_p", params.top_p},
          {"max_tokens", params.max_tokens}};
}

std::optional<SmellLabel> normalize_label(std::string_view raw) {
  std::string s = lower(trim(raw));
  auto strip = [](unsigned char c) { return !std::isalnum(c); };
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && strip(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && strip(static_cast<unsigned char>(s[b - 1]))) --b;
  std::string collapsed;
  bool space = false;
  for (std::size_t i = a; i < b; ++i) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      space = true;
      continue;
    }
    if (space && !collapsed.empty()) collapsed += ' ';
    space = false;
    collapsed += s[i];
  }
  if (collapsed.empty()) return std::nullopt;
  return parse_label(collapsed);
}

Endpoint parse_endpoint(std::string_view url) {
  Endpoint e;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw InvalidArgument("endpoint '" + std::string(url) + "' has no scheme");
  e.scheme = lower(url.substr(0, sep));
  if (e.scheme != "http" && e.scheme != "https") throw InvalidArgument("endpoint scheme must be http or https");
  auto rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  e.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  e.port = e.scheme == "https" ? 443 : 80;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    const std::string port(authority.substr(colon + 1));
    try {
      e.port = std::stoi(port);
    } catch (const std::exception&) {
      throw InvalidArgument("endpoint has a bad port '" + port + "'");
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw InvalidArgument("endpoint '" + std::string(url) + "' has no host");
  e.host = authority;
  return e;
}

HttpBackend::HttpBackend(LlmParams params) : params_(std::move(params)) {
  params_.validate();
  const auto e = parse_endpoint(params_.endpoint);
  scheme_host_port_ = e.scheme + "://" + e.host + ":" + std::to_string(e.port);
  path_ = e.path;
  if (!params_.api_key_env.empty()) {
    if (const char* key = std::getenv(params_.api_key_env.c_str())) api_key_ = key;
  }
}

Completion HttpBackend::complete(const ChatRequest& request) {
  const std::string body = chat_request_body(request.prompt, params_).dump();
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(params_.timeout_seconds);
  const auto usecs = static_cast<time_t>((params_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  std::string last_error;
  int delay_ms = params_.backoff_initial_ms;
  for (int attempt = 1; attempt <= params_.max_attempts; ++attempt) {
    if (attempt > 1 && delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error("llm: authentication failed (HTTP " + std::to_string(res->status) + "); set " + params_.api_key_env);
    }
    if (is_transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error("llm: request rejected with HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      Completion c;
      const auto& content = j.at("choices").at(0).at("message").at("content");
      c.text = content.is_null() ? std::string() : content.get<std::string>();
      if (j.contains("usage") && j["usage"].is_object()) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens")) c.prompt_tokens = u["prompt_tokens"].get<int>();
        if (u.contains("completion_tokens")) c.completion_tokens = u["completion_tokens"].get<int>();
      }
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("llm: malformed response envelope: ") + e.what());
    }
  }
  throw Error("llm: giving up after " + std::to_string(params_.max_attempts) + " attempts (" + last_error + ")");
}

Completion KeywordBackend::complete(const ChatRequest& request) {
  if (!request.record) throw InvalidArgument("keyword backend needs the record");
  const std::string& text = request.record->comment_text;
  const std::string low = lower(text);
  auto say = [](SmellLabel l) { return Completion{std::string(display_name(l)), std::nullopt, std::nullopt}; };
  for (std::string_view marker : {"todo", "fixme", "xxx", "hack"}) {
    const auto pos = low.find(marker);
    if (pos != std::string::npos) {
      const bool start_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(low[pos - 1]));
      const auto end = pos + marker.size();
      const bool end_ok = end >= low.size() || !std::isalnum(static_cast<unsigned char>(low[end]));
      if (start_ok && end_ok) return say(SmellLabel::Task);
    }
  }
  const auto body = trim(text);
  std::size_t alnum = 0;
  for (char c : body) alnum += std::isalnum(static_cast<unsigned char>(c)) ? 1 : 0;
  if (!body.empty() && alnum * 4 < body.size()) return say(SmellLabel::Beautification);
  if (!body.empty() && (body.back() == ';' || body.back() == '{' || body.back() == '}' ||
                        (body.find('(') != std::string_view::npos && body.back() == ')' &&
                         body.find(' ') == std::string_view::npos) ||
                        body.rfind("import ", 0) == 0 || body.rfind("return ", 0) == 0)) {
    return say(SmellLabel::CommentedOutCode);
  }
  const auto words = tokenize(text, TokenizerOptions{true});
  if (request.include_code && request.record->code_segment && *request.record->code_segment != kNaSegment &&
      !words.empty()) {
    const auto code_tokens = tokenize(*request.record->code_segment, TokenizerOptions{true});
    const std::set<std::string> in_code(code_tokens.begin(), code_tokens.end());
    std::size_t shared = 0;
    for (const auto& w : words) shared += in_code.count(w);
    if (shared * 2 >= words.size()) return say(SmellLabel::Obvious);
  }
  if (words.size() <= 1) return say(SmellLabel::Vague);
  return say(SmellLabel::NotASmell);
}

std::string llm_cache_key(const CommentRecord& record, const std::string& template_hash, const LlmParams& params,
                          bool include_code) {
  const nlohmann::json key = {{"id", record.id},
                              {"template", template_hash},
                              {"params", params.sampling_json()},
                              {"include_code", include_code},
                              {"comment", record.comment_text},
                              {"code", include_code && record.code_segment ? *record.code_segment : ""}};
  return short_hash(key.dump()) + short_hash(record.id);
}

nlohmann::json LlmPrediction::to_json() const {
  nlohmann::json j = {{"id", id},
                      {"raw", raw},
                      {"label", label ? nlohmann::json(to_string(*label)) : nlohmann::json("unparseable")},
                      {"requested_at", requested_at},
                      {"responded_at", responded_at},
                      {"from_cache", from_cache}};
  if (prompt_tokens) j["prompt_tokens"] = *prompt_tokens;
  if (completion_tokens) j["completion_tokens"] = *completion_tokens;
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

BatchResult run_batch(const Dataset& d, const PromptTemplate& tmpl, const LlmParams& params, bool include_code,
                      const std::filesystem::path& cache_dir, LlmBackend& backend) {
  params.validate();
  tmpl.validate();
  const std::string template_hash = tmpl.hash();
  const std::size_t n = d.size();
  std::vector<std::string> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = llm_cache_key(d.records[i], template_hash, params, include_code);

  BatchResult out;
  out.predictions.resize(n);
  std::vector<char> done(n, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> sent{0};
  std::atomic<std::size_t> hits{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      const auto& rec = d.records[i];
      const auto path = cache_dir / (keys[i] + ".json");
      LlmPrediction p;
      p.id = rec.id;
      try {
        if (std::filesystem::exists(path)) {
          const auto j = nlohmann::json::parse(read_file(path));
          p.raw = j.at("raw").get<std::string>();
          p.requested_at = j.value("requested_at", "");
          p.responded_at = j.value("responded_at", "");
          if (j.contains("prompt_tokens")) p.prompt_tokens = j["prompt_tokens"].get<int>();
          if (j.contains("completion_tokens")) p.completion_tokens = j["completion_tokens"].get<int>();
          p.from_cache = true;
          ++hits;
        } else {
          ChatRequest req{build_prompt(rec, tmpl, include_code), &rec, include_code};
          p.requested_at = utc_timestamp();
          ++sent;
          const auto c = backend.complete(req);
          p.responded_at = utc_timestamp();
          p.raw = c.text;
          p.prompt_tokens = c.prompt_tokens;
          p.completion_tokens = c.completion_tokens;
          nlohmann::json entry = {{"key", keys[i]},
                                  {"id", rec.id},
                                  {"raw", p.raw},
                                  {"requested_at", p.requested_at},
                                  {"responded_at", p.responded_at},
                                  {"backend", backend.name()}};
          if (p.prompt_tokens) entry["prompt_tokens"] = *p.prompt_tokens;
          if (p.completion_tokens) entry["completion_tokens"] = *p.completion_tokens;
          write_file_atomic(path, entry.dump(2) + "\n");
        }
        p.label = normalize_label(p.raw);
        out.predictions[i] = std::move(p);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(params.concurrency), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  out.requests_sent = sent;
  out.cache_hits = hits;
  std::size_t completed = 0;
  auto records = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    completed += done[i] ? 1 : 0;
    records.push_back({{"id", d.records[i].id}, {"cache_key", keys[i]}, {"status", done[i] ? "done" : "pending"}});
  }
  out.manifest = {{"format", "smell-llm-manifest"},
                  {"version", 1},
                  {"tool_version", SMELL_VERSION},
                  {"dataset_sha256", dataset_hash(d)},
                  {"include_code", include_code},
                  {"params", params.to_json()},
                  {"template_sha256", template_hash},
                  {"backend", backend.name()},
                  {"total", n},
                  {"completed", completed},
                  {"status", completed == n ? "complete" : "incomplete"},
                  {"records", records}};
  write_file_atomic(cache_dir / "manifest.json", out.manifest.dump(2) + "\n");
  if (failure) std::rethrow_exception(failure);

  for (const auto& p : out.predictions) out.unparseable += p.label ? 0 : 1;
  const bool labeled = std::all_of(d.records.begin(), d.records.end(), [](const auto& r) { return r.label.has_value(); });
  if (labeled && n > 0) {
    std::vector<std::optional<SmellLabel>> pred;
    pred.reserve(n);
    for (const auto& p : out.predictions) pred.push_back(p.label);
    const auto gold = labels_of(d);
    out.report = class_metrics(confusion_matrix(gold, pred, std::vector<SmellLabel>(kAllLabels.begin(), kAllLabels.end())));
    out.report->metadata = {{"protocol", "llm"},
                            {"include_code", include_code},
                            {"params", params.sampling_json()},
                            {"template_sha256", template_hash},
                            {"dataset_sha256", dataset_hash(d)},
                            {"backend", backend.name()}};
  }
  return out;
}

}  // namespace smell
