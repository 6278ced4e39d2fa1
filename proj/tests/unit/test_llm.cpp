#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "mock_chat_server.hpp"
#include "smell/error.hpp"
#include "smell/io.hpp"
#include "smell/llm.hpp"

using namespace smell;
namespace fs = std::filesystem;

namespace {

CommentRecord record(std::string id, std::string text, std::optional<std::string> code = {},
                     std::optional<SmellLabel> label = {}) {
  CommentRecord r;
  r.id = std::move(id);
  r.comment_text = std::move(text);
  r.code_segment = std::move(code);
  r.label = label;
  return r;
}

Dataset small_dataset() {
  Dataset d;
  d.records.push_back(record("1", "increment i", "i++;", SmellLabel::Obvious));
  d.records.push_back(record("2", "TODO remove this hack", "NA", SmellLabel::Task));
  d.records.push_back(record("3", "stuff", "x = y;", SmellLabel::Vague));
  d.records.push_back(record("4", "retries the request with exponential backoff", "send();", SmellLabel::NotASmell));
  return d;
}

LlmParams fast_params(const MockChatServer& server) {
  LlmParams p;
  p.endpoint = server.endpoint();
  p.backoff_initial_ms = 1;
  p.timeout_seconds = 5;
  p.api_key_env = "SMELL_TEST_API_KEY";
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

// The part of the user message after the comment heading.
std::string comment_section(const nlohmann::json& body) {
  const std::string user = body["messages"][1]["content"];
  const auto heading = PromptTemplate::builtin().comment_heading;
  return user.substr(user.rfind(heading));
}

// Answers with the display name of the record's true label, looked up by comment.
MockChatServer::Reply oracle_reply(const nlohmann::json& body) {
  const std::string user = comment_section(body);
  for (const auto& r : small_dataset().records) {
    if (user.find(r.comment_text) != std::string::npos) return {200, std::string(display_name(*r.label)) + ".", {}};
  }
  return {200, "Not a smell", {}};
}

}  // namespace

TEST_CASE("pinned sampling parameters") {
  const LlmParams p;
  CHECK(p.model == "gpt-4");
  CHECK(p.temperature == 0.2);
  CHECK(p.max_tokens == 10);
  CHECK(p.top_p == 0.1);
  CHECK_NOTHROW(p.validate());
  const auto back = LlmParams::from_json(p.to_json());
  CHECK(back.to_json() == p.to_json());
  CHECK_FALSE(p.to_json().dump().find("OPENAI_API_KEY=") != std::string::npos);
  LlmParams bad;
  bad.top_p = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("builtin template names every category once") {
  const auto t = PromptTemplate::builtin();
  CHECK_NOTHROW(t.validate());
  CHECK(t.categories.size() == kLabelCount);
  const auto prompt = build_prompt(record("x", "increment i"), t, false);
  for (auto l : kAllLabels) CHECK(prompt.user.find(display_name(l)) != std::string::npos);
  CHECK(prompt.user.find("increment i") != std::string::npos);
  CHECK(prompt.user.find(t.code_heading) == std::string::npos);
  CHECK(prompt.user.find("//facade.registerProxy(newSoundAssetProxy());") != std::string::npos);
  CHECK_FALSE(prompt.system.empty());

  auto missing = t;
  missing.categories.pop_back();
  CHECK_THROWS_AS(missing.validate(), FormatError);
  auto dup = t;
  dup.categories.back() = dup.categories.front();
  CHECK_THROWS_AS(dup.validate(), FormatError);

  CHECK(PromptTemplate::from_json(t.to_json()).hash() == t.hash());
  auto edited = t;
  edited.preamble += " ";
  CHECK(edited.hash() != t.hash());
}

TEST_CASE("code section") {
  const auto t = PromptTemplate::builtin();
  const auto with = build_prompt(record("x", "increment i", "i++;"), t, true);
  CHECK(with.user.find(t.code_heading) != std::string::npos);
  CHECK(with.user.find("i++;") != std::string::npos);
  CHECK(with.user.find(t.comment_heading) < with.user.find(t.code_heading));
  const auto none = build_prompt(record("x", "increment i"), t, true);
  const auto after = none.user.substr(none.user.find(t.code_heading));
  CHECK(after.find("NA") != std::string::npos);
  const auto na = build_prompt(record("x", "increment i", "NA"), t, true);
  CHECK(na.user == none.user);
  const auto without = build_prompt(record("x", "increment i", "i++;"), t, false);
  CHECK(without.user.find("i++;") == std::string::npos);
}

TEST_CASE("request body") {
  const ChatPrompt prompt{"sys", "usr"};
  const auto body = chat_request_body(prompt, LlmParams{});
  CHECK(body["model"] == "gpt-4");
  CHECK(body["temperature"] == 0.2);
  CHECK(body["top_p"] == 0.1);
  CHECK(body["max_tokens"] == 10);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "sys");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "usr");
}

TEST_CASE("answer normalisation") {
  CHECK(normalize_label("Obvious.") == SmellLabel::Obvious);
  CHECK(normalize_label("  \"Vague\"  ") == SmellLabel::Vague);
  CHECK(normalize_label("commented out code") == SmellLabel::CommentedOutCode);
  CHECK(normalize_label("Commented-out code") == SmellLabel::CommentedOutCode);
  CHECK(normalize_label("NOT A SMELL") == SmellLabel::NotASmell);
  CHECK(normalize_label("Too much\n information") == SmellLabel::TooMuchInfo);
  CHECK_FALSE(normalize_label("this comment seems fine"));
  CHECK_FALSE(normalize_label(""));
  CHECK_FALSE(normalize_label("Obvious, Vague"));
  for (auto l : kAllLabels) {
    CHECK(normalize_label(display_name(l)) == l);
    CHECK(normalize_label(to_string(l)) == l);
    // idempotent through either spelling
    CHECK(normalize_label(to_string(*normalize_label(display_name(l)))) == l);
  }
}

TEST_CASE("endpoint parsing") {
  const auto e = parse_endpoint("https://api.example.com/v1/chat/completions");
  CHECK(e.scheme == "https");
  CHECK(e.host == "api.example.com");
  CHECK(e.port == 443);
  CHECK(e.path == "/v1/chat/completions");
  const auto l = parse_endpoint("http://127.0.0.1:8080/x");
  CHECK(l.port == 8080);
  CHECK_THROWS_AS(parse_endpoint("ftp://x/y"), InvalidArgument);
  CHECK_THROWS_AS(parse_endpoint("no-scheme"), InvalidArgument);
  CHECK_THROWS_AS(parse_endpoint("http://h:port/x"), InvalidArgument);
}

TEST_CASE("cache key inputs") {
  const auto r = record("7", "increment i", "i++;");
  const LlmParams p;
  const auto base = llm_cache_key(r, "t1", p, false);
  CHECK(base == llm_cache_key(r, "t1", p, false));
  CHECK(base != llm_cache_key(r, "t2", p, false));
  CHECK(base != llm_cache_key(r, "t1", p, true));
  auto p2 = p;
  p2.temperature = 0.3;
  CHECK(base != llm_cache_key(r, "t1", p2, false));
  auto p3 = p;
  p3.concurrency = 9;
  p3.timeout_seconds = 1;
  CHECK(base == llm_cache_key(r, "t1", p3, false));
  auto r2 = r;
  r2.id = "8";
  CHECK(base != llm_cache_key(r2, "t1", p, false));
}

TEST_CASE("keyword backend rules") {
  KeywordBackend b;
  auto ask = [&](CommentRecord r, bool code) {
    ChatRequest req{build_prompt(r, PromptTemplate::builtin(), code), &r, code};
    return normalize_label(b.complete(req).text);
  };
  CHECK(ask(record("a", "TODO: later"), false) == SmellLabel::Task);
  CHECK(ask(record("a", "-------------"), false) == SmellLabel::Beautification);
  CHECK(ask(record("a", "foo.bar(baz);"), false) == SmellLabel::CommentedOutCode);
  CHECK(ask(record("a", "increment counter", "counter++; increment"), true) == SmellLabel::Obvious);
  CHECK(ask(record("a", "stuff"), false) == SmellLabel::Vague);
  CHECK(ask(record("a", "keeps the cache warm between requests"), false) == SmellLabel::NotASmell);
}

TEST_CASE("wire body and authorization header") {
  MockChatServer server([](const nlohmann::json& body, int) { return oracle_reply(body); });
  ::setenv("SMELL_TEST_API_KEY", "sk-test-123", 1);
  HttpBackend backend(fast_params(server));
  const auto r = record("1", "increment i", "i++;");
  const auto prompt = build_prompt(r, PromptTemplate::builtin(), true);
  const auto c = backend.complete({prompt, &r, true});
  CHECK(c.text == "Obvious.");
  CHECK(c.prompt_tokens == 100);
  REQUIRE(server.hits() == 1);
  const auto sent = nlohmann::json::parse(server.raw_bodies()[0]);
  CHECK(sent["temperature"] == 0.2);
  CHECK(sent["top_p"] == 0.1);
  CHECK(sent["max_tokens"] == 10);
  CHECK(sent["model"] == "gpt-4");
  CHECK(sent["messages"][0]["content"] == prompt.system);
  CHECK(sent["messages"][1]["content"] == prompt.user);
  CHECK(server.auth_headers()[0] == "Bearer sk-test-123");
  ::unsetenv("SMELL_TEST_API_KEY");
}

TEST_CASE("retry policy") {
  const auto r = record("1", "x y z");
  const ChatRequest req{build_prompt(r, PromptTemplate::builtin(), false), &r, false};

  SUBCASE("three 500s give up") {
    MockChatServer server([](const nlohmann::json&, int) { return MockChatServer::Reply{500, {}, {}}; });
    HttpBackend backend(fast_params(server));
    CHECK_THROWS_AS(backend.complete(req), Error);
    CHECK(server.hits() == 3);
  }
  SUBCASE("429 then success") {
    MockChatServer server([](const nlohmann::json&, int i) {
      return i == 0 ? MockChatServer::Reply{429, {}, {}} : MockChatServer::Reply{200, "Vague", {}};
    });
    HttpBackend backend(fast_params(server));
    CHECK(backend.complete(req).text == "Vague");
    CHECK(server.hits() == 2);
  }
  SUBCASE("401 is not retried") {
    MockChatServer server([](const nlohmann::json&, int) { return MockChatServer::Reply{401, {}, {}}; });
    HttpBackend backend(fast_params(server));
    try {
      backend.complete(req);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("authentication") != std::string::npos);
    }
    CHECK(server.hits() == 1);
  }
  SUBCASE("400 is not retried") {
    MockChatServer server([](const nlohmann::json&, int) { return MockChatServer::Reply{400, {}, {}}; });
    HttpBackend backend(fast_params(server));
    CHECK_THROWS_AS(backend.complete(req), Error);
    CHECK(server.hits() == 1);
  }
  SUBCASE("malformed envelope") {
    MockChatServer server([](const nlohmann::json&, int) { return MockChatServer::Reply{200, {}, "{\"choices\":[]}"}; });
    HttpBackend backend(fast_params(server));
    CHECK_THROWS_AS(backend.complete(req), FormatError);
  }
  SUBCASE("connection refused") {
    int port = 0;
    {
      MockChatServer server([](const nlohmann::json&, int) { return MockChatServer::Reply{}; });
      port = parse_endpoint(server.endpoint()).port;
    }
    LlmParams p;
    p.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    p.backoff_initial_ms = 1;
    p.timeout_seconds = 1;
    HttpBackend backend(p);
    CHECK_THROWS_AS(backend.complete(req), Error);
  }
}

TEST_CASE("batch run: cache, manifest and report") {
  MockChatServer server([](const nlohmann::json& body, int) { return oracle_reply(body); });
  const auto dir = fresh_dir("smell_llm_batch");
  const auto d = small_dataset();
  const auto params = fast_params(server);
  HttpBackend backend(params);

  const auto first = run_batch(d, PromptTemplate::builtin(), params, true, dir, backend);
  CHECK(first.requests_sent == 4);
  CHECK(first.cache_hits == 0);
  CHECK(server.hits() == 4);
  REQUIRE(first.report);
  CHECK(first.report->accuracy == 1.0);
  CHECK(first.report->classes.size() == kLabelCount);
  CHECK(first.manifest["status"] == "complete");
  CHECK(first.manifest["completed"] == 4);
  CHECK(first.manifest["params"]["temperature"] == 0.2);
  CHECK(fs::exists(dir / "manifest.json"));
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(first.predictions[i].id == d.records[i].id);

  const auto second = run_batch(d, PromptTemplate::builtin(), params, true, dir, backend);
  CHECK(second.requests_sent == 0);
  CHECK(second.cache_hits == 4);
  CHECK(server.hits() == 4);
  CHECK(second.report->to_json() == first.report->to_json());

  const auto other = run_batch(d, PromptTemplate::builtin(), params, false, dir, backend);
  CHECK(other.requests_sent == 4);
  fs::remove_all(dir);
}

TEST_CASE("batch run resumes after a failure") {
  const auto dir = fresh_dir("smell_llm_resume");
  const auto d = small_dataset();
  {
    MockChatServer failing([](const nlohmann::json& body, int) {
      const std::string user = comment_section(body);
      if (user.find("stuff") != std::string::npos) return MockChatServer::Reply{400, {}, {}};
      return oracle_reply(body);
    });
    auto params = fast_params(failing);
    params.concurrency = 1;
    HttpBackend backend(params);
    CHECK_THROWS_AS(run_batch(d, PromptTemplate::builtin(), params, false, dir, backend), Error);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest["status"] == "incomplete");
    CHECK(manifest["completed"] == 2);
    CHECK(manifest["records"][2]["status"] == "pending");
  }
  MockChatServer good([](const nlohmann::json& body, int) { return oracle_reply(body); });
  auto params = fast_params(good);
  params.concurrency = 1;
  HttpBackend backend(params);
  const auto resumed = run_batch(d, PromptTemplate::builtin(), params, false, dir, backend);
  CHECK(resumed.cache_hits == 2);
  CHECK(resumed.requests_sent == 2);
  CHECK(good.hits() == 2);
  CHECK(resumed.manifest["status"] == "complete");
  fs::remove_all(dir);
}

TEST_CASE("unparseable answers are counted and never correct") {
  MockChatServer server([](const nlohmann::json& body, int) {
    const std::string user = comment_section(body);
    if (user.find("stuff") != std::string::npos) return MockChatServer::Reply{200, "this comment seems fine", {}};
    return oracle_reply(body);
  });
  const auto dir = fresh_dir("smell_llm_unparseable");
  const auto params = fast_params(server);
  HttpBackend backend(params);
  const auto r = run_batch(small_dataset(), PromptTemplate::builtin(), params, false, dir, backend);
  CHECK(r.unparseable == 1);
  REQUIRE(r.report);
  CHECK(r.report->unparseable == 1);
  CHECK(r.report->accuracy == doctest::Approx(0.75));
  CHECK(r.report->find(SmellLabel::Vague)->recall == 0.0);
  CHECK(r.predictions[2].to_json()["label"] == "unparseable");
  fs::remove_all(dir);
}
