#include "artifacts.hpp"

#include "smell/hash.hpp"
#include "smell/io.hpp"
#include "smell/version.hpp"

namespace csmell {

std::string RunInfo::config_sha256() const { return smell::sha256_hex(config.dump()); }

nlohmann::json RunInfo::to_json() const {
  return {{"tool_version", std::string(smell::version())},
          {"config", config},
          {"config_sha256", config_sha256()},
          {"dataset_sha256", dataset_sha256.empty() ? nlohmann::json(nullptr) : nlohmann::json(dataset_sha256)},
          {"seed", seed}};
}

void write_json(const std::filesystem::path& path, nlohmann::json j, const RunInfo& run) {
  if (j.is_object()) j["run"] = run.to_json();
  smell::write_file_atomic(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, std::string_view text, const RunInfo& run) {
  std::string out;
  out += "# tool_version: " + std::string(smell::version()) + "\n";
  out += "# config_sha256: " + run.config_sha256() + "\n";
  out += "# dataset_sha256: " + (run.dataset_sha256.empty() ? std::string("-") : run.dataset_sha256) + "\n";
  out += "# seed: " + std::to_string(run.seed) + "\n\n";
  out += text;
  smell::write_file_atomic(path, out);
}

namespace {

void write_sidecar(const std::filesystem::path& path, const RunInfo& run) {
  nlohmann::json meta = {{"artifact", path.filename().string()}};
  write_json(path.string() + ".meta.json", meta, run);
}

}  // namespace

void write_csv(const std::filesystem::path& path, std::string_view text, const RunInfo& run) {
  smell::write_file_atomic(path, text);
  write_sidecar(path, run);
}

void write_jsonl(const std::filesystem::path& path, std::string_view text, const RunInfo& run) {
  smell::write_file_atomic(path, text);
  write_sidecar(path, run);
}

}  // namespace csmell
