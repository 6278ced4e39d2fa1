#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smell/labels.hpp"

namespace smell {

enum class Language { Java, Python, Unknown };

std::string_view to_string(Language lang);
/// "java" / "python"; empty text maps to Unknown; anything else throws.
Language parse_language(std::string_view text);

struct LineSpan {
  int start = 1;  // 1-based, inclusive
  int end = 1;

  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

/// One inline comment with its provenance.
///
/// `code_segment` is absent until a scope has been associated (raw datasets
/// carry no code column); once present it is either "NA" or non-empty.
struct CommentRecord {
  std::string id;
  std::string project;
  Language language = Language::Unknown;
  std::string file_path;
  std::optional<LineSpan> line_span;
  std::string comment_text;
  std::optional<std::string> code_segment;
  std::optional<SmellLabel> label;

  friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

/// Throws FormatError when a record breaks one of its invariants.
void validate(const CommentRecord& record);

enum class DatasetFormat { Csv, Jsonl };

std::string_view to_string(DatasetFormat format);
DatasetFormat parse_format(std::string_view text);
/// Picks the format from the file extension (.jsonl / .json -> Jsonl, else Csv).
DatasetFormat format_for_path(const std::filesystem::path& path);

struct Provenance {
  std::string source_path;
  DatasetFormat format = DatasetFormat::Csv;
  std::string loaded_at;  // ISO-8601 UTC
};

struct Dataset {
  std::vector<CommentRecord> records;
  Provenance provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

using ClassHistogram = std::array<std::size_t, kLabelCount>;

/// Counts labeled records per class; unlabeled records are not counted.
ClassHistogram histogram(const Dataset& d);
std::size_t total(const ClassHistogram& h);

/// Throws FormatError on duplicate ids or an invalid record.
void validate(const Dataset& d);

/// Stable digest of record content (provenance excluded).
std::string dataset_hash(const Dataset& d);

/// Canonical CSV header of the interchange format.
inline constexpr std::array<std::string_view, 9> kCsvColumns = {
    "id", "project", "language", "file_path", "line_start", "line_end", "comment", "code", "label"};

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset parse_dataset(std::string_view text, DatasetFormat format, std::string source_name = "<memory>");

std::string serialize_dataset(const Dataset& d, DatasetFormat format);
void save_dataset(const Dataset& d, const std::filesystem::path& path, DatasetFormat format);

struct DedupResult {
  Dataset dataset;
  std::size_t removed = 0;
};

/// Keeps the first record of every exact (comment_text, label) pair.
DedupResult dedup(const Dataset& d);

struct ClassFilterEntry {
  SmellLabel label;
  std::size_t count = 0;
  bool kept = false;
};

struct MinorityFilterResult {
  Dataset dataset;
  std::vector<ClassFilterEntry> report;  // classes present in the input, canonical order
};

/// Drops every record of a class with fewer than `threshold` instances.
MinorityFilterResult remove_minority_classes(const Dataset& d, std::size_t threshold = 30);

/// Bijective label <-> integer map fit on training labels only. Integers
/// are assigned 0..K-1 in canonical label order.
class LabelEncoding {
 public:
  LabelEncoding() = default;
  static LabelEncoding fit(std::span<const SmellLabel> train_labels);
  static LabelEncoding from_labels(std::vector<SmellLabel> labels);

  int encode(SmellLabel label) const;
  std::vector<int> encode(std::span<const SmellLabel> labels) const;
  SmellLabel decode(int code) const;
  bool contains(SmellLabel label) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<SmellLabel>& labels() const { return labels_; }

  friend bool operator==(const LabelEncoding&, const LabelEncoding&) = default;

 private:
  std::vector<SmellLabel> labels_;
  std::array<int, kLabelCount> codes_{};  // -1 when absent
};

/// Labels of every record; throws if any record is unlabeled.
std::vector<SmellLabel> labels_of(const Dataset& d);

/// Per-class test quotas for a stratified split: floor(count*fraction) per
/// class plus largest-remainder top-up so the total equals
/// round(n*fraction). Remainder ties go to the earlier canonical label.
ClassHistogram stratified_test_quota(const ClassHistogram& h, double test_fraction);

struct SplitResult {
  Dataset train;
  Dataset test;
};

/// Stratified holdout split. Within each class records are shuffled with
/// the "split" substream of `seed`; both halves keep the original record order.
SplitResult stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

struct AgreementResult {
  std::size_t agreements = 0;
  std::size_t disagreements = 0;
  double rate = 0.0;
  std::vector<std::string> disagreeing_ids;  // sorted
};

/// Two annotators' code segments per record id. Segments are compared after
/// stripping trailing whitespace from every line and from the whole string.
AgreementResult annotation_agreement(const std::map<std::string, std::string>& a,
                                     const std::map<std::string, std::string>& b);

}  // namespace smell
