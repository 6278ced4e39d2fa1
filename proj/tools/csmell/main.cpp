#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "smell/error.hpp"
#include "smell/version.hpp"

namespace {

void add_model_options(CLI::App* cmd, csmell::ModelOptions& o) {
  cmd->add_option("--dataset", o.dataset, "Labeled dataset (.csv or .jsonl)")->required();
  cmd->add_option("--models", o.models, "Comma-separated model kinds, or 'all'")->delimiter(',')->capture_default_str();
  cmd->add_option("--param", o.params, "Hyperparameter override model.key=value (repeatable)")->delimiter(',');
  cmd->add_flag("--with-code", o.with_code, "Append the code segment to the comment text");
  cmd->add_flag("--no-smote", o.no_smote, "Train on the imbalanced data as is");
  cmd->add_option("--smote-k", o.smote_k, "SMOTE neighbours")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_flag("--keep-short-tokens", o.keep_short_tokens, "Keep one-character tokens");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inline comment smell extraction and classification"};
  app.set_version_flag("--version", std::string(smell::version()));
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  csmell::GlobalOptions g;
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("-q,--quiet", g.quiet, "No progress messages on stderr");

  std::function<int()> action;

  csmell::ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Extract inline comments and associate code segments");
  extract->add_option("root", ex.root, "Source tree to scan")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--project", ex.project, "Project name for the records (default: root directory name)");
  extract->add_option("--include", ex.include, "Include glob (repeatable; default **/*.java, **/*.py)")->delimiter(',');
  extract->add_option("--exclude", ex.exclude, "Exclude glob (repeatable)")->delimiter(',');
  extract->callback([&] { action = [&] { return csmell::run_extract(g, ex); }; });

  csmell::PrepareOptions pr;
  auto* prepare = app.add_subcommand("prepare", "Deduplicate and drop minority classes");
  prepare->add_option("--dataset", pr.dataset, "Labeled dataset (.csv or .jsonl)")->required();
  prepare->add_option("--threshold", pr.threshold, "Drop classes with fewer instances")->capture_default_str();
  prepare->callback([&] { action = [&] { return csmell::run_prepare(g, pr); }; });

  csmell::TrainEvalOptions te;
  auto* train_eval = app.add_subcommand("train-eval", "Train on a stratified split and evaluate on the held-out part");
  add_model_options(train_eval, te.model);
  train_eval->add_option("--test-fraction", te.test_fraction, "Held-out share of every class")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train_eval->callback([&] { action = [&] { return csmell::run_train_eval(g, te); }; });

  csmell::CvOptions cv;
  auto* cvcmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_model_options(cvcmd, cv.model);
  cvcmd->add_option("--folds", cv.folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
  cvcmd->callback([&] { action = [&] { return csmell::run_cv(g, cv); }; });

  csmell::LlmOptions lo;
  auto* llm = app.add_subcommand("llm", "Classify every comment with a chat-completion model");
  llm->add_option("--dataset", lo.dataset, "Dataset (.csv or .jsonl)")->required();
  llm->add_option("--template", lo.template_path, "Prompt template JSON (default: built-in)");
  llm->add_option("--cache", lo.cache, "Response cache directory (default: <out>/llm-cache)");
  llm->add_option("--backend", lo.backend, "http or keyword (offline rules)")
      ->capture_default_str()
      ->check(CLI::IsMember({"http", "keyword"}));
  llm->add_flag("--include-code", lo.include_code, "Send the code segment with the comment");
  llm->add_option("--model", lo.model, "Model name")->capture_default_str();
  llm->add_option("--temperature", lo.temperature, "Sampling temperature")->capture_default_str();
  llm->add_option("--top-p", lo.top_p, "Nucleus sampling mass")->capture_default_str();
  llm->add_option("--max-tokens", lo.max_tokens, "Completion token limit")->capture_default_str();
  llm->add_option("--endpoint", lo.endpoint, "Chat-completion URL")->capture_default_str();
  llm->add_option("--api-key-env", lo.api_key_env, "Environment variable holding the API key ('' for none)")
      ->capture_default_str();
  llm->add_option("--timeout", lo.timeout, "Per-request timeout in seconds")->capture_default_str();
  llm->add_option("--max-attempts", lo.max_attempts, "Tries per request")->capture_default_str();
  llm->add_option("--backoff-ms", lo.backoff_ms, "First retry delay, doubled each time")->capture_default_str();
  llm->add_option("--concurrency", lo.concurrency, "Requests in flight")->capture_default_str();
  llm->callback([&] { action = [&] { return csmell::run_llm(g, lo); }; });

  csmell::CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Per-class F1 differences between two reports (b - a)");
  compare->add_option("a", co.a, "Baseline report JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("b", co.b, "Compared report JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--name-a", co.name_a, "Column label for a")->capture_default_str();
  compare->add_option("--name-b", co.name_b, "Column label for b")->capture_default_str();
  compare->callback([&] { action = [&] { return csmell::run_compare(g, co); }; });

  csmell::ReportOptions ro;
  auto* report = app.add_subcommand("report", "Render a report JSON");
  report->add_option("input", ro.input, "Report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--format", ro.format, "text, csv (confusion matrix) or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"text", "csv", "json"}));
  report->callback([&] { action = [&] { return csmell::run_report(g, ro); }; });

  csmell::AgreementOptions ag;
  auto* agreement = app.add_subcommand("agreement", "Share of records whose code segments two annotators agree on");
  agreement->add_option("a", ag.a, "First annotated dataset")->required()->check(CLI::ExistingFile);
  agreement->add_option("b", ag.b, "Second annotated dataset")->required()->check(CLI::ExistingFile);
  agreement->callback([&] { action = [&] { return csmell::run_agreement(g, ag); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? csmell::kExitOk : csmell::kExitError;
  }

  try {
    return action();
  } catch (const smell::Error& e) {
    std::cerr << "csmell: error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "csmell: unexpected error: " << e.what() << "\n";
  }
  return csmell::kExitError;
}
