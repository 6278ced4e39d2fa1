#include "smell/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "smell/error.hpp"
#include "smell/hash.hpp"

namespace smell {
namespace embedded {
std::string_view stopwords_en();
}

namespace {

std::vector<std::string> load_stop_words() {
  std::vector<std::string> out;
  std::istringstream in{std::string(embedded::stopwords_en())};
  std::string word;
  while (std::getline(in, word)) {
    if (!word.empty()) out.push_back(word);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = load_stop_words();
  return words;
}

bool is_stop_word(std::string_view token) {
  const auto& words = stop_words();
  return std::binary_search(words.begin(), words.end(), token);
}

const std::string& stop_words_hash() {
  static const std::string h = sha256_hex(embedded::stopwords_en());
  return h;
}

TokenList tokenize(std::string_view text, const TokenizerOptions& options) {
  TokenList out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    const bool too_short = !options.keep_short_tokens && current.size() < 2;
    if (!too_short && !is_stop_word(current)) out.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (word_byte(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string feature_text(const CommentRecord& record, bool with_code) {
  if (!with_code || !record.code_segment || *record.code_segment == kNaSegment) return record.comment_text;
  return record.comment_text + "\n" + *record.code_segment;
}

Vocabulary Vocabulary::fit(std::span<const TokenList> docs) {
  if (docs.empty()) throw InvalidArgument("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, std::size_t, std::less<>> df;
  std::vector<std::string_view> seen;
  for (const auto& doc : docs) {
    seen.assign(doc.begin(), doc.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto t : seen) {
      auto it = df.find(t);
      if (it == df.end()) {
        df.emplace(std::string(t), 1);
      } else {
        ++it->second;
      }
    }
  }
  Vocabulary v;
  v.n_docs_ = docs.size();
  v.terms_.reserve(df.size());
  v.df_.reserve(df.size());
  for (auto& [term, count] : df) {
    v.terms_.push_back(term);
    v.df_.push_back(count);
  }
  v.rebuild();
  return v;
}

void Vocabulary::rebuild() {
  index_.clear();
  idf_.resize(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    index_.emplace(terms_[i], static_cast<int>(i));
    idf_[i] = std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[i]))) + 1.0;
  }
}

int Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : it->second;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"format", "smell-vocabulary"},
          {"version", 1},
          {"documents", n_docs_},
          {"stop_words_sha256", stop_words_hash()},
          {"terms", terms_},
          {"df", df_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "smell-vocabulary") throw FormatError("not a vocabulary document");
  Vocabulary v;
  v.n_docs_ = j.at("documents").get<std::size_t>();
  v.terms_ = j.at("terms").get<std::vector<std::string>>();
  v.df_ = j.at("df").get<std::vector<std::size_t>>();
  if (v.terms_.size() != v.df_.size()) throw FormatError("vocabulary terms/df length mismatch");
  if (!std::is_sorted(v.terms_.begin(), v.terms_.end()) ||
      std::adjacent_find(v.terms_.begin(), v.terms_.end()) != v.terms_.end()) {
    throw FormatError("vocabulary terms must be sorted and unique");
  }
  for (auto d : v.df_) {
    if (d < 1 || d > v.n_docs_) throw FormatError("vocabulary document frequency out of range");
  }
  v.rebuild();
  return v;
}

FeatureMatrix tfidf_transform(std::span<const TokenList> docs, const Vocabulary& vocabulary,
                              std::vector<std::string> row_ids) {
  if (!row_ids.empty() && row_ids.size() != docs.size()) {
    throw InvalidArgument("row id count does not match document count");
  }
  FeatureMatrix out{SparseMatrix(vocabulary.size()), std::move(row_ids)};
  std::vector<std::pair<int, double>> counts;
  std::vector<int> cols;
  std::vector<double> vals;
  for (const auto& doc : docs) {
    counts.clear();
    for (const auto& tok : doc) {
      const int c = vocabulary.index_of(tok);
      if (c >= 0) counts.emplace_back(c, 1.0);
    }
    std::sort(counts.begin(), counts.end());
    cols.clear();
    vals.clear();
    for (const auto& [c, one] : counts) {
      if (!cols.empty() && cols.back() == c) {
        vals.back() += one;
      } else {
        cols.push_back(c);
        vals.push_back(one);
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      vals[k] *= vocabulary.idf(static_cast<std::size_t>(cols[k]));
      norm += vals[k] * vals[k];
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (auto& v : vals) v /= norm;
    }
    out.matrix.append_row(cols, vals);
  }
  return out;
}

std::string serialize_triplets(const FeatureMatrix& m) {
  nlohmann::json header = {{"format", "smell-triplets"},
                           {"version", 1},
                           {"rows", m.rows()},
                           {"cols", m.cols()},
                           {"nnz", m.matrix.nnz()},
                           {"row_ids", m.row_ids}};
  std::string out = header.dump();
  out.push_back('\n');
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.matrix.row(r);
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu %d %.17g\n", r, row.cols[k], row.values[k]);
      out += buf;
    }
  }
  return out;
}

FeatureMatrix parse_triplets(std::string_view text) {
  const auto nl = text.find('\n');
  nlohmann::json header;
  std::size_t rows = 0, cols = 0, nnz = 0;
  try {
    header = nlohmann::json::parse(text.substr(0, nl));
    if (!header.is_object() || header.value("format", "") != "smell-triplets") {
      throw FormatError("not a triplet matrix");
    }
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
    nnz = header.at("nnz").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad triplet header: ") + e.what());
  }
  std::vector<std::vector<std::pair<int, double>>> entries(rows);
  std::istringstream in(std::string(nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1)));
  std::size_t r = 0;
  int c = 0;
  double v = 0.0;
  std::size_t seen = 0;
  while (in >> r >> c >> v) {
    if (r >= rows) throw FormatError("triplet row out of range");
    entries[r].emplace_back(c, v);
    ++seen;
  }
  if (seen != nnz) throw FormatError("triplet count does not match header nnz");
  FeatureMatrix m{SparseMatrix(cols), {}};
  try {
    m.row_ids = header.value("row_ids", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad triplet row ids: ") + e.what());
  }
  std::vector<int> idx;
  std::vector<double> val;
  for (auto& row : entries) {
    std::sort(row.begin(), row.end());
    idx.clear();
    val.clear();
    for (auto& [col, value] : row) {
      idx.push_back(col);
      val.push_back(value);
    }
    m.matrix.append_row(idx, val);
  }
  return m;
}

}  // namespace smell
