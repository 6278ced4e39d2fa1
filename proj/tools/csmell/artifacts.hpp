#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace csmell {

/// Provenance stamped into every file the tool writes.
struct RunInfo {
  nlohmann::json config = nlohmann::json::object();  // resolved options of the subcommand
  std::uint64_t seed = 0;
  std::string dataset_sha256;  // empty when no dataset is involved

  std::string config_sha256() const;
  nlohmann::json to_json() const;
};

/// Pretty JSON with a top-level "run" member added (objects only).
void write_json(const std::filesystem::path& path, nlohmann::json j, const RunInfo& run);
/// Text with "# key: value" provenance lines on top.
void write_text(const std::filesystem::path& path, std::string_view text, const RunInfo& run);
/// CSV kept byte-clean; provenance goes to <path>.meta.json.
void write_csv(const std::filesystem::path& path, std::string_view text, const RunInfo& run);
/// One JSON object per line; provenance goes to <path>.meta.json.
void write_jsonl(const std::filesystem::path& path, std::string_view text, const RunInfo& run);

}  // namespace csmell
