#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smell/corpus.hpp"
#include "smell/sparse.hpp"

namespace smell {

using TokenList = std::vector<std::string>;

struct TokenizerOptions {
  bool keep_short_tokens = false;  // keep one-character tokens
};

/// Lowercases ASCII letters, splits on every non-alphanumeric byte (bytes
/// >= 0x80 count as word characters so UTF-8 words stay whole), drops stop
/// words and, unless asked otherwise, one-character tokens.
TokenList tokenize(std::string_view text, const TokenizerOptions& options = {});

/// The bundled English stop-word list, sorted.
const std::vector<std::string>& stop_words();
bool is_stop_word(std::string_view token);
/// SHA-256 of the bundled stop-word file.
const std::string& stop_words_hash();

/// Text a record contributes to the feature space: the comment, optionally
/// followed by its associated code segment (skipped when "NA" or absent).
std::string feature_text(const CommentRecord& record, bool with_code);

/// Term -> column map with document frequencies; columns are assigned in
/// lexicographic term order.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Fit on training documents only. Throws on an empty corpus.
  static Vocabulary fit(std::span<const TokenList> docs);

  std::size_t size() const { return terms_.size(); }
  std::size_t document_count() const { return n_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& document_frequency() const { return df_; }

  /// Column of a term, or -1.
  int index_of(std::string_view term) const;
  /// Smoothed inverse document frequency ln((1+N)/(1+df)) + 1.
  double idf(std::size_t column) const { return idf_.at(column); }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_docs_ == b.n_docs_;
  }

 private:
  void rebuild();

  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
  std::map<std::string, int, std::less<>> index_;
  std::vector<double> idf_;
};

/// Document-term matrix with row ids aligned to records.
struct FeatureMatrix {
  SparseMatrix matrix;
  std::vector<std::string> row_ids;

  std::size_t rows() const { return matrix.rows(); }
  std::size_t cols() const { return matrix.cols(); }
};

/// Raw term counts times idf, each row scaled to unit L2 norm. Terms not in
/// the vocabulary are ignored; rows without any known term stay all-zero.
FeatureMatrix tfidf_transform(std::span<const TokenList> docs, const Vocabulary& vocabulary,
                              std::vector<std::string> row_ids = {});

/// Sparse triplet text format: one JSON header line
/// {"format":"smell-triplets","version":1,"rows":R,"cols":C,"nnz":N,"row_ids":[...]}
/// followed by N lines "row col value" with value printed to 17 significant digits.
std::string serialize_triplets(const FeatureMatrix& m);
FeatureMatrix parse_triplets(std::string_view text);

}  // namespace smell
