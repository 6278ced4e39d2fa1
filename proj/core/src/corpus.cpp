#include "smell/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "smell/csv.hpp"
#include "smell/error.hpp"
#include "smell/hash.hpp"
#include "smell/io.hpp"
#include "smell/rng.hpp"

namespace smell {
namespace {

using nlohmann::json;

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int parse_line_number(std::string_view text, std::size_t row, std::string_view column) {
  int value = 0;
  const auto t = trim(text);
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("row " + std::to_string(row) + ": column '" + std::string(column) +
                      "' is not an integer: '" + std::string(text) + "'");
  }
  return value;
}

// Raw fields of one input row before typed conversion.
struct RawRow {
  std::size_t row = 0;
  std::optional<std::string> id, project, language, file_path, line_start, line_end, comment,
      code, label;
};

std::optional<std::string> nonempty(std::optional<std::string> v) {
  if (v && v->empty()) return std::nullopt;
  return v;
}

Dataset build_dataset(std::vector<RawRow> raw, Provenance provenance) {
  Dataset d;
  d.provenance = std::move(provenance);
  d.records.reserve(raw.size());
  std::vector<std::string> bad_labels;
  for (auto& r : raw) {
    CommentRecord rec;
    rec.id = r.id && !r.id->empty() ? *r.id : std::to_string(r.row);
    rec.project = r.project.value_or("");
    rec.file_path = r.file_path.value_or("");
    try {
      rec.language = parse_language(r.language.value_or(""));
    } catch (const FormatError& e) {
      throw FormatError("row " + std::to_string(r.row) + ": " + e.what());
    }
    const auto ls = nonempty(r.line_start);
    const auto le = nonempty(r.line_end);
    if (ls || le) {
      LineSpan span;
      span.start = parse_line_number(ls ? *ls : *le, r.row, "line_start");
      span.end = parse_line_number(le ? *le : *ls, r.row, "line_end");
      rec.line_span = span;
    }
    if (!r.comment || trim(*r.comment).empty()) {
      throw FormatError("row " + std::to_string(r.row) + ": missing comment text");
    }
    rec.comment_text = std::move(*r.comment);
    rec.code_segment = nonempty(std::move(r.code));
    if (auto lbl = nonempty(std::move(r.label))) {
      if (auto parsed = parse_label(*lbl)) {
        rec.label = *parsed;
      } else {
        bad_labels.push_back("row " + std::to_string(r.row) + ": '" + *lbl + "'");
      }
    }
    if (bad_labels.empty()) {
      try {
        validate(rec);
      } catch (const FormatError& e) {
        throw FormatError("row " + std::to_string(r.row) + ": " + e.what());
      }
    }
    d.records.push_back(std::move(rec));
  }
  if (!bad_labels.empty()) {
    std::string msg = "unknown label value(s): ";
    for (std::size_t i = 0; i < bad_labels.size(); ++i) {
      if (i) msg += "; ";
      msg += bad_labels[i];
    }
    throw FormatError(msg);
  }
  validate(d);
  return d;
}

std::vector<RawRow> read_csv_rows(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw FormatError("empty CSV input (no header)");
  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(trim(header[i]))] = i;
  // "comment_text" is accepted as a synonym for the comment column.
  if (!col.contains("comment") && col.contains("comment_text")) col["comment"] = col["comment_text"];
  if (!col.contains("comment")) throw FormatError("CSV header has no 'comment' column");

  std::vector<RawRow> out;
  out.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& fields = rows[i].fields;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw FormatError("row " + std::to_string(i) + " (line " + std::to_string(rows[i].line) +
                        "): expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    RawRow r;
    r.row = i;
    auto get = [&](const char* name) -> std::optional<std::string> {
      auto it = col.find(name);
      if (it == col.end()) return std::nullopt;
      return fields[it->second];
    };
    r.id = get("id");
    r.project = get("project");
    r.language = get("language");
    r.file_path = get("file_path");
    r.line_start = get("line_start");
    r.line_end = get("line_end");
    r.comment = get("comment");
    r.code = get("code");
    r.label = get("label");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RawRow> read_jsonl_rows(std::string_view text) {
  std::vector<RawRow> out;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError("row " + std::to_string(row) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw FormatError("row " + std::to_string(row) + ": not a JSON object");
    RawRow r;
    r.row = row;
    auto get = [&](const char* name, bool numeric = false) -> std::optional<std::string> {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null()) return std::nullopt;
      if (it->is_string()) return it->get<std::string>();
      if (numeric && it->is_number_integer()) return std::to_string(it->get<long long>());
      throw FormatError("row " + std::to_string(row) + ": field '" + name + "' has wrong type");
    };
    r.id = get("id", true);
    r.project = get("project");
    r.language = get("language");
    r.file_path = get("file_path");
    r.line_start = get("line_start", true);
    r.line_end = get("line_end", true);
    r.comment = get("comment");
    if (!r.comment) r.comment = get("comment_text");
    r.code = get("code");
    r.label = get("label");
    out.push_back(std::move(r));
    if (nl == text.size()) break;
  }
  return out;
}

std::string strip_trailing_ws(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto nl = s.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    if (last) nl = s.size();
    auto line = s.substr(pos, nl - pos);
    const auto end = line.find_last_not_of(" \t\r");
    out.append(end == std::string_view::npos ? std::string_view{} : line.substr(0, end + 1));
    if (last) break;
    out.push_back('\n');
    pos = nl + 1;
  }
  const auto end = out.find_last_not_of(" \t\r\n");
  out.resize(end == std::string::npos ? 0 : end + 1);
  return out;
}

}  // namespace

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::Java: return "java";
    case Language::Python: return "python";
    case Language::Unknown: return "";
  }
  return "";
}

Language parse_language(std::string_view text) {
  const auto t = trim(text);
  if (t.empty()) return Language::Unknown;
  std::string lower(t);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "java") return Language::Java;
  if (lower == "python" || lower == "py") return Language::Python;
  throw FormatError("unknown language '" + std::string(text) + "'");
}

void validate(const CommentRecord& record) {
  if (trim(record.comment_text).empty()) throw FormatError("comment text is empty");
  if (record.line_span) {
    const auto& s = *record.line_span;
    if (s.start < 1 || s.end < 1 || s.start > s.end) {
      throw FormatError("invalid line span " + std::to_string(s.start) + "-" +
                        std::to_string(s.end));
    }
  }
  if (record.code_segment && record.code_segment->empty()) {
    throw FormatError("code segment must be \"NA\" or non-empty");
  }
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::Csv ? "csv" : "jsonl";
}

DatasetFormat parse_format(std::string_view text) {
  if (text == "csv") return DatasetFormat::Csv;
  if (text == "jsonl") return DatasetFormat::Jsonl;
  throw FormatError("unknown dataset format '" + std::string(text) + "'");
}

DatasetFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? DatasetFormat::Jsonl : DatasetFormat::Csv;
}

ClassHistogram histogram(const Dataset& d) {
  ClassHistogram h{};
  for (const auto& r : d.records) {
    if (r.label) ++h[static_cast<std::size_t>(*r.label)];
  }
  return h;
}

std::size_t total(const ClassHistogram& h) { return std::accumulate(h.begin(), h.end(), std::size_t{0}); }

void validate(const Dataset& d) {
  std::unordered_set<std::string> ids;
  ids.reserve(d.records.size());
  for (const auto& r : d.records) {
    validate(r);
    if (!ids.insert(r.id).second) throw FormatError("duplicate record id '" + r.id + "'");
  }
}

std::string dataset_hash(const Dataset& d) {
  Dataset copy;
  copy.records = d.records;
  return sha256_hex(serialize_dataset(copy, DatasetFormat::Csv));
}

Dataset parse_dataset(std::string_view text, DatasetFormat format, std::string source_name) {
  Provenance prov{std::move(source_name), format, now_iso8601()};
  auto rows = format == DatasetFormat::Csv ? read_csv_rows(text) : read_jsonl_rows(text);
  return build_dataset(std::move(rows), std::move(prov));
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return parse_dataset(read_file(path), format, path.string());
}

std::string serialize_dataset(const Dataset& d, DatasetFormat format) {
  std::string out;
  if (format == DatasetFormat::Csv) {
    out = csv::format_row({kCsvColumns.begin(), kCsvColumns.end()});
    for (const auto& r : d.records) {
      out += csv::format_row({
          r.id,
          r.project,
          std::string(to_string(r.language)),
          r.file_path,
          r.line_span ? std::to_string(r.line_span->start) : "",
          r.line_span ? std::to_string(r.line_span->end) : "",
          r.comment_text,
          r.code_segment.value_or(""),
          r.label ? std::string(to_string(*r.label)) : "",
      });
    }
    return out;
  }
  for (const auto& r : d.records) {
    json obj = json::object();
    obj["id"] = r.id;
    obj["project"] = r.project;
    obj["language"] = std::string(to_string(r.language));
    obj["file_path"] = r.file_path;
    obj["line_start"] = r.line_span ? json(r.line_span->start) : json(nullptr);
    obj["line_end"] = r.line_span ? json(r.line_span->end) : json(nullptr);
    obj["comment"] = r.comment_text;
    obj["code"] = r.code_segment ? json(*r.code_segment) : json(nullptr);
    obj["label"] = r.label ? json(std::string(to_string(*r.label))) : json(nullptr);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path, DatasetFormat format) {
  write_file_atomic(path, serialize_dataset(d, format));
}

std::vector<SmellLabel> labels_of(const Dataset& d) {
  std::vector<SmellLabel> out;
  out.reserve(d.size());
  for (const auto& r : d.records) {
    if (!r.label) throw InvalidArgument("record '" + r.id + "' has no label");
    out.push_back(*r.label);
  }
  return out;
}

DedupResult dedup(const Dataset& d) {
  DedupResult result;
  result.dataset.provenance = d.provenance;
  std::set<std::pair<std::string_view, SmellLabel>> seen;
  for (const auto& r : d.records) {
    if (!r.label) throw InvalidArgument("dedup requires labels; record '" + r.id + "' is unlabeled");
    if (seen.emplace(r.comment_text, *r.label).second) {
      result.dataset.records.push_back(r);
    } else {
      ++result.removed;
    }
  }
  return result;
}

MinorityFilterResult remove_minority_classes(const Dataset& d, std::size_t threshold) {
  (void)labels_of(d);  // every record must be labeled
  const auto h = histogram(d);
  MinorityFilterResult result;
  result.dataset.provenance = d.provenance;
  for (auto label : kAllLabels) {
    const auto count = h[static_cast<std::size_t>(label)];
    if (count == 0) continue;
    result.report.push_back({label, count, count >= threshold});
  }
  for (const auto& r : d.records) {
    if (h[static_cast<std::size_t>(*r.label)] >= threshold) result.dataset.records.push_back(r);
  }
  return result;
}

LabelEncoding LabelEncoding::fit(std::span<const SmellLabel> train_labels) {
  if (train_labels.empty()) throw InvalidArgument("cannot fit a label encoding on no labels");
  std::vector<SmellLabel> distinct(train_labels.begin(), train_labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return from_labels(std::move(distinct));
}

LabelEncoding LabelEncoding::from_labels(std::vector<SmellLabel> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty()) throw InvalidArgument("label encoding needs at least one label");
  LabelEncoding enc;
  enc.codes_.fill(-1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    enc.codes_[static_cast<std::size_t>(labels[i])] = static_cast<int>(i);
  }
  enc.labels_ = std::move(labels);
  return enc;
}

bool LabelEncoding::contains(SmellLabel label) const {
  return !labels_.empty() && codes_[static_cast<std::size_t>(label)] >= 0;
}

int LabelEncoding::encode(SmellLabel label) const {
  if (!contains(label)) {
    throw InvalidArgument("label '" + std::string(to_string(label)) +
                          "' was not seen when the encoding was fit");
  }
  return codes_[static_cast<std::size_t>(label)];
}

std::vector<int> LabelEncoding::encode(std::span<const SmellLabel> labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(encode(l));
  return out;
}

SmellLabel LabelEncoding::decode(int code) const {
  if (code < 0 || static_cast<std::size_t>(code) >= labels_.size()) {
    throw InvalidArgument("label code " + std::to_string(code) + " out of range");
  }
  return labels_[static_cast<std::size_t>(code)];
}

ClassHistogram stratified_test_quota(const ClassHistogram& h, double test_fraction) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw InvalidArgument("test fraction must lie in [0, 1]");
  }
  const auto n = total(h);
  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  ClassHistogram quota{};
  std::array<double, kLabelCount> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    const double exact = static_cast<double>(h[c]) * test_fraction;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<std::size_t, kLabelCount> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < target && i < kLabelCount; ++i) {
    const auto c = order[i];
    if (remainder[c] <= 0.0 || quota[c] >= h[c]) continue;
    ++quota[c];
    ++assigned;
  }
  return quota;
}

SplitResult stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (d.empty()) throw InvalidArgument("cannot split an empty dataset");
  const auto labels = labels_of(d);
  const auto h = histogram(d);
  const auto quota = stratified_test_quota(h, test_fraction);

  std::array<std::vector<std::size_t>, kLabelCount> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(derive_seed(seed, "split"));
  std::vector<bool> in_test(d.size(), false);
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(std::span(idx));
    for (std::size_t j = 0; j < quota[c]; ++j) in_test[idx[j]] = true;
  }
  SplitResult out;
  out.train.provenance = d.provenance;
  out.test.provenance = d.provenance;
  for (std::size_t i = 0; i < d.size(); ++i) {
    (in_test[i] ? out.test : out.train).records.push_back(d.records[i]);
  }
  return out;
}

AgreementResult annotation_agreement(const std::map<std::string, std::string>& a,
                                     const std::map<std::string, std::string>& b) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw InvalidArgument("annotation maps cover different record ids");
  }
  if (a.empty()) throw InvalidArgument("annotation maps are empty");
  AgreementResult r;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (strip_trailing_ws(ia->second) == strip_trailing_ws(ib->second)) {
      ++r.agreements;
    } else {
      ++r.disagreements;
      r.disagreeing_ids.push_back(ia->first);
    }
  }
  r.rate = static_cast<double>(r.agreements) / static_cast<double>(a.size());
  return r;
}

}  // namespace smell
