#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "artifacts.hpp"
#include "smell/csv.hpp"
#include "smell/error.hpp"
#include "smell/extractor.hpp"
#include "smell/hash.hpp"
#include "smell/io.hpp"
#include "smell/llm.hpp"
#include "smell/pipeline.hpp"
#include "smell/report.hpp"
#include "smell/rng.hpp"

namespace csmell {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json global_json(const GlobalOptions& g, std::string_view subcommand) {
  return {{"subcommand", subcommand}, {"seed", g.seed}};
}

void note(const GlobalOptions& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << "\n";
}

smell::Dataset load(const std::string& path) {
  return smell::load_dataset(path, smell::format_for_path(path));
}

json model_json(const ModelOptions& o) {
  return {{"dataset", o.dataset},     {"models", o.models},   {"params", o.params},
          {"with_code", o.with_code}, {"smote", !o.no_smote}, {"smote_k", o.smote_k},
          {"keep_short_tokens", o.keep_short_tokens}};
}

std::vector<smell::ModelKind> selected_kinds(const std::vector<std::string>& names) {
  std::vector<smell::ModelKind> kinds;
  for (const auto& n : names) {
    if (n == "all") {
      kinds.assign(smell::kAllModelKinds.begin(), smell::kAllModelKinds.end());
      break;
    }
    const auto k = smell::parse_model_kind(n);
    if (!k) throw smell::InvalidArgument("unknown model '" + n + "'");
    if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
  }
  if (kinds.empty()) throw smell::InvalidArgument("no models selected");
  return kinds;
}

std::vector<smell::ModelSpec> build_specs(const ModelOptions& o, std::uint64_t seed) {
  std::vector<smell::ModelSpec> specs;
  for (auto kind : selected_kinds(o.models)) {
    specs.push_back(smell::ModelSpec::defaults(kind, smell::derive_seed(seed, "model", static_cast<std::uint64_t>(kind))));
  }
  for (const auto& p : o.params) {
    const auto dot = p.find('.');
    const auto eq = p.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
      throw smell::InvalidArgument("--param expects model.key=value, got '" + p + "'");
    }
    const auto kind = smell::parse_model_kind(p.substr(0, dot));
    if (!kind) throw smell::InvalidArgument("--param names unknown model '" + p.substr(0, dot) + "'");
    for (auto& s : specs) {
      if (s.kind == *kind) s.set(p.substr(dot + 1, eq - dot - 1), p.substr(eq + 1));
    }
  }
  for (const auto& s : specs) s.validate();
  return specs;
}

smell::PipelineOptions pipeline_options(const ModelOptions& o) {
  smell::PipelineOptions p;
  p.with_code = o.with_code;
  p.use_smote = !o.no_smote;
  p.smote_k = o.smote_k;
  p.tokenizer.keep_short_tokens = o.keep_short_tokens;
  return p;
}

smell::EvalReport load_report(const std::string& path) {
  try {
    return smell::EvalReport::from_json(json::parse(smell::read_file(path)));
  } catch (const json::exception& e) {
    throw smell::FormatError(path + ": " + e.what());
  }
}

void write_report_files(const fs::path& stem, const smell::EvalReport& report, const std::string& title,
                        const RunInfo& run) {
  write_json(stem.string() + ".json", report.to_json(), run);
  write_text(stem.string() + ".txt", smell::render_report_text(report, title), run);
  if (report.confusion) write_csv(stem.string() + ".confusion.csv", smell::render_confusion_csv(*report.confusion), run);
}

}  // namespace

int run_extract(const GlobalOptions& g, const ExtractOptions& o) {
  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "extract");
  run.config.update({{"root", o.root}, {"project", o.project}, {"include", o.include}, {"exclude", o.exclude}});

  const auto sources = smell::scan_tree(o.root, o.include, o.exclude);
  const std::string project = o.project.empty() ? fs::path(o.root).lexically_normal().filename().string() : o.project;

  smell::Dataset records;
  std::string review = smell::csv::format_row({"id", "file_path", "line_start", "line_end", "comment"});
  std::map<std::string, std::size_t> by_rule;
  std::size_t n_review = 0, repaired = 0;
  for (const auto& src : sources) {
    repaired += src.invalid_utf8_bytes > 0 ? 1 : 0;
    const smell::LexedSource lexed(src);
    for (const auto& c : smell::extract_inline_comments(src)) {
      const auto d = smell::associate_code_segment(c, lexed);
      ++by_rule[std::string(smell::to_string(d.rule))];
      smell::CommentRecord r;
      r.id = src.path + ":" + std::to_string(c.span.start);
      r.project = project;
      r.language = src.language;
      r.file_path = src.path;
      r.line_span = c.span;
      r.comment_text = c.text;
      if (d.needs_review()) {
        ++n_review;
        review += smell::csv::format_row(
            {r.id, r.file_path, std::to_string(c.span.start), std::to_string(c.span.end), c.text});
      } else {
        r.code_segment = d.segment;
      }
      records.records.push_back(std::move(r));
    }
  }
  run.dataset_sha256 = smell::dataset_hash(records);

  const fs::path out(g.out);
  fs::create_directories(out);
  write_csv(out / "records.csv", smell::serialize_dataset(records, smell::DatasetFormat::Csv), run);
  write_csv(out / "review.csv", review, run);
  json summary = {{"files", sources.size()},
                  {"comments", records.size()},
                  {"scope_rules", by_rule},
                  {"review", n_review},
                  {"files_with_repaired_utf8", repaired}};
  write_json(out / "extract.json", summary, run);

  std::cout << "extracted " << records.size() << " comments from " << sources.size() << " files";
  if (n_review) std::cout << "; " << n_review << " need scope review (" << (out / "review.csv").string() << ")";
  std::cout << "\n";
  return n_review ? kExitReview : kExitOk;
}

int run_prepare(const GlobalOptions& g, const PrepareOptions& o) {
  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "prepare");
  run.config.update({{"dataset", o.dataset}, {"threshold", o.threshold}});

  const auto d = load(o.dataset);
  run.dataset_sha256 = smell::dataset_hash(d);
  const auto dd = smell::dedup(d);
  const auto filtered = smell::remove_minority_classes(dd.dataset, o.threshold);

  json classes = json::array();
  for (const auto& e : filtered.report) {
    classes.push_back({{"label", smell::to_string(e.label)}, {"count", e.count}, {"kept", e.kept}});
  }
  const json summary = {{"input_records", d.size()},
                        {"after_dedup", dd.dataset.size()},
                        {"duplicates_removed", dd.removed},
                        {"threshold", o.threshold},
                        {"classes", classes},
                        {"output_records", filtered.dataset.size()},
                        {"output_sha256", smell::dataset_hash(filtered.dataset)}};

  const fs::path out(g.out);
  fs::create_directories(out);
  write_csv(out / "prepared.csv", smell::serialize_dataset(filtered.dataset, smell::DatasetFormat::Csv), run);
  write_json(out / "prepare.json", summary, run);

  std::cout << "records: " << d.size() << " -> " << dd.dataset.size() << " after dedup -> "
            << filtered.dataset.size() << " after dropping classes under " << o.threshold << "\n";
  for (const auto& e : filtered.report) {
    std::cout << "  " << smell::display_name(e.label) << ": " << e.count << (e.kept ? "" : " (dropped)") << "\n";
  }
  return kExitOk;
}

int run_train_eval(const GlobalOptions& g, const TrainEvalOptions& o) {
  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "train-eval");
  run.config.update(model_json(o.model));
  run.config["test_fraction"] = o.test_fraction;

  const auto d = load(o.model.dataset);
  run.dataset_sha256 = smell::dataset_hash(d);
  const auto specs = build_specs(o.model, g.seed);
  const auto popts = pipeline_options(o.model);

  const fs::path out(g.out);
  fs::create_directories(out / "models");
  fs::create_directories(out / "reports");
  std::vector<smell::SummaryRow> rows;
  json summary = json::array();
  for (const auto& spec : specs) {
    const std::string name(smell::to_string(spec.kind));
    note(g, "training " + name);
    auto outcome = smell::holdout_evaluate(spec, d, o.test_fraction, g.seed, popts);
    outcome.model.set_metadata({{"run", run.to_json()},
                                {"vocabulary", outcome.vocabulary.to_json()},
                                {"with_code", popts.with_code},
                                {"keep_short_tokens", popts.tokenizer.keep_short_tokens}});
    outcome.model.save(out / "models" / (name + ".model"));
    write_report_files(out / "reports" / name, outcome.report, std::string(smell::display_name(spec.kind)), run);
    rows.push_back({std::string(smell::display_name(spec.kind)), outcome.report.mcc, outcome.report.accuracy});
    summary.push_back({{"model", name}, {"mcc", outcome.report.mcc}, {"accuracy", outcome.report.accuracy}});
  }
  const auto table = smell::render_summary_text(rows, "Hold-out evaluation");
  write_text(out / "summary.txt", table, run);
  write_json(out / "summary.json", {{"protocol", "holdout"}, {"models", summary}}, run);
  std::cout << table;
  return kExitOk;
}

int run_cv(const GlobalOptions& g, const CvOptions& o) {
  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "cv");
  run.config.update(model_json(o.model));
  run.config["folds"] = o.folds;

  const auto d = load(o.model.dataset);
  run.dataset_sha256 = smell::dataset_hash(d);
  const auto specs = build_specs(o.model, g.seed);
  const auto popts = pipeline_options(o.model);

  const fs::path out(g.out);
  fs::create_directories(out / "cv");
  std::vector<smell::SummaryRow> rows;
  json summary = json::array();
  for (const auto& spec : specs) {
    const std::string name(smell::to_string(spec.kind));
    note(g, "cross-validating " + name);
    const auto cv = smell::cross_validate(spec, d, o.folds, g.seed, popts);
    json folds = json::array();
    for (const auto& f : cv.folds) folds.push_back(f.to_json());
    write_json(out / "cv" / (name + ".json"),
               {{"model", name}, {"folds", folds}, {"mean_mcc", cv.mean_mcc}, {"mean_accuracy", cv.mean_accuracy}},
               run);
    rows.push_back({std::string(smell::display_name(spec.kind)), cv.mean_mcc, cv.mean_accuracy});
    summary.push_back({{"model", name}, {"mean_mcc", cv.mean_mcc}, {"mean_accuracy", cv.mean_accuracy}});
  }
  const auto table = smell::render_summary_text(rows, std::to_string(o.folds) + "-fold stratified cross-validation");
  write_text(out / "cv_summary.txt", table, run);
  write_json(out / "cv_summary.json", {{"protocol", "cross-validation"}, {"folds", o.folds}, {"models", summary}},
             run);
  std::cout << table;
  return kExitOk;
}

int run_llm(const GlobalOptions& g, const LlmOptions& o) {
  smell::LlmParams params;
  params.model = o.model;
  params.temperature = o.temperature;
  params.top_p = o.top_p;
  params.max_tokens = o.max_tokens;
  params.endpoint = o.endpoint;
  params.api_key_env = o.api_key_env;
  params.timeout_seconds = o.timeout;
  params.max_attempts = o.max_attempts;
  params.backoff_initial_ms = o.backoff_ms;
  params.concurrency = o.concurrency;
  params.validate();

  const auto tmpl = o.template_path.empty() ? smell::PromptTemplate::builtin() : smell::PromptTemplate::load(o.template_path);
  tmpl.validate();
  const fs::path cache = o.cache.empty() ? fs::path(g.out) / "llm-cache" : fs::path(o.cache);

  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "llm");
  run.config.update({{"dataset", o.dataset},
                     {"template", o.template_path},
                     {"template_sha256", tmpl.hash()},
                     {"backend", o.backend},
                     {"include_code", o.include_code},
                     {"params", params.to_json()}});

  std::unique_ptr<smell::LlmBackend> backend;
  if (o.backend == "keyword") {
    backend = std::make_unique<smell::KeywordBackend>();
  } else if (o.backend == "http") {
    if (!params.api_key_env.empty() && !std::getenv(params.api_key_env.c_str())) {
      throw smell::Error("environment variable " + params.api_key_env + " is not set");
    }
    backend = std::make_unique<smell::HttpBackend>(params);
  } else {
    throw smell::InvalidArgument("unknown backend '" + o.backend + "' (http or keyword)");
  }

  const auto d = load(o.dataset);
  run.dataset_sha256 = smell::dataset_hash(d);
  const auto result = smell::run_batch(d, tmpl, params, o.include_code, cache, *backend);

  const fs::path out = fs::path(g.out) / (o.include_code ? "llm-with-code" : "llm-comment-only");
  fs::create_directories(out);
  std::string lines;
  for (const auto& p : result.predictions) lines += p.to_json().dump() + "\n";
  write_jsonl(out / "predictions.jsonl", lines, run);
  write_json(out / "manifest.json", result.manifest, run);
  note(g, "requests sent: " + std::to_string(result.requests_sent) + ", cache hits: " +
              std::to_string(result.cache_hits) + ", unparseable: " + std::to_string(result.unparseable));
  if (result.report) {
    auto report = *result.report;
    report.metadata["protocol"] = "llm";
    report.metadata["include_code"] = o.include_code;
    report.metadata["template_sha256"] = tmpl.hash();
    report.metadata["params"] = params.sampling_json();
    report.metadata["backend"] = backend->name();
    const std::string title = o.include_code ? "LLM (comment and code)" : "LLM (comment only)";
    write_report_files(out / "report", report, title, run);
    std::cout << smell::render_report_text(report, title);
  } else {
    std::cout << result.predictions.size() << " predictions written (dataset is unlabeled, no report)\n";
  }
  return kExitOk;
}

int run_compare(const GlobalOptions& g, const CompareOptions& o) {
  const auto a = load_report(o.a);
  const auto b = load_report(o.b);
  const auto cmp = smell::compare_runs(a, b);

  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "compare");
  run.config.update({{"a", o.a},
                     {"b", o.b},
                     {"a_sha256", smell::sha256_hex(smell::read_file(o.a))},
                     {"b_sha256", smell::sha256_hex(smell::read_file(o.b))},
                     {"name_a", o.name_a},
                     {"name_b", o.name_b}});
  if (a.metadata.contains("run") && a.metadata["run"].value("dataset_sha256", json()).is_string()) {
    run.dataset_sha256 = a.metadata["run"]["dataset_sha256"].get<std::string>();
  }

  const auto text = smell::render_comparison_text(cmp, o.name_a, o.name_b);
  const fs::path out(g.out);
  fs::create_directories(out);
  write_json(out / "compare.json", cmp.to_json(), run);
  write_text(out / "compare.txt", text, run);
  std::cout << text;
  return kExitOk;
}

int run_report(const GlobalOptions&, const ReportOptions& o) {
  const auto r = load_report(o.input);
  if (o.format == "text") {
    std::cout << smell::render_report_text(r);
  } else if (o.format == "csv") {
    if (!r.confusion) throw smell::InvalidArgument(o.input + " has no confusion matrix");
    std::cout << smell::render_confusion_csv(*r.confusion);
  } else if (o.format == "json") {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    throw smell::InvalidArgument("unknown format '" + o.format + "' (text, csv or json)");
  }
  return kExitOk;
}

int run_agreement(const GlobalOptions& g, const AgreementOptions& o) {
  const auto a = load(o.a);
  const auto b = load(o.b);
  auto segments = [](const smell::Dataset& d) {
    std::map<std::string, std::string> m;
    for (const auto& r : d.records) m[r.id] = r.code_segment.value_or("");
    return m;
  };
  const auto res = smell::annotation_agreement(segments(a), segments(b));

  RunInfo run;
  run.seed = g.seed;
  run.config = global_json(g, "agreement");
  run.config.update({{"a", o.a}, {"b", o.b}});
  run.dataset_sha256 = smell::dataset_hash(a);

  const fs::path out(g.out);
  fs::create_directories(out);
  write_json(out / "agreement.json",
             {{"agreements", res.agreements},
              {"disagreements", res.disagreements},
              {"rate", res.rate},
              {"disagreeing_ids", res.disagreeing_ids}},
             run);
  std::cout << "agreement: " << res.agreements << "/" << (res.agreements + res.disagreements) << " ("
            << smell::format2(res.rate * 100.0) << "%)\n";
  return kExitOk;
}

}  // namespace csmell
