#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smell/corpus.hpp"
#include "smell/labels.hpp"

namespace smell {

struct SourceFile {
  std::string path;  // as reported in records; relative to the scan root when scanned
  Language language = Language::Unknown;
  std::vector<std::string> lines;  // line i+1 of the file, without terminator
  std::size_t invalid_utf8_bytes = 0;  // bytes replaced by U+FFFD while decoding

  int line_count() const { return static_cast<int>(lines.size()); }
  /// 1-based access.
  const std::string& line(int number) const { return lines.at(static_cast<std::size_t>(number - 1)); }
};

/// .java -> Java, .py -> Python, anything else Unknown.
Language language_for_path(const std::filesystem::path& path);

/// Splits text into lines (LF, CRLF or CR) after replacing invalid UTF-8.
SourceFile make_source(std::string path, Language language, std::string_view text);

/// Reads and decodes a file. The language is taken from the extension
/// unless overridden. Throws smell::Error when the file cannot be read.
SourceFile load_source(const std::filesystem::path& path, std::optional<Language> language = {});

enum class CommentKind { Line, Block };
enum class CommentPosition { OwnLine, Trailing };

std::string_view to_string(CommentKind kind);
std::string_view to_string(CommentPosition position);

struct InlineComment {
  std::string file_path;
  LineSpan span;
  std::string text;  // delimiters stripped; merged line comments joined by '\n'
  CommentKind kind = CommentKind::Line;
  CommentPosition position = CommentPosition::OwnLine;
  int column = 0;  // 0-based byte column of the opening delimiter on span.start

  friend bool operator==(const InlineComment&, const InlineComment&) = default;
};

/// Inline comments in document order. Javadoc blocks and Python docstrings
/// are never reported, and nothing inside string, char or text-block
/// literals is ever taken for a comment. Own-line line comments on
/// consecutive lines that start in the same column merge into one comment.
std::vector<InlineComment> extract_inline_comments(const SourceFile& src);

enum class ScopeRule { NaCategory, SingleLineAbove, SingleLineBelow, BlockLevel, Ambiguous };

std::string_view to_string(ScopeRule rule);
std::optional<ScopeRule> parse_scope_rule(std::string_view text);

struct ScopeDecision {
  ScopeRule rule = ScopeRule::Ambiguous;
  std::string segment;  // "NA" for NaCategory, empty for Ambiguous
  std::optional<LineSpan> segment_span;

  bool needs_review() const { return rule == ScopeRule::Ambiguous; }
};

class SourceAnalysis;

/// Lexical facts about a file that scope association needs (per-line code
/// with comments and literal bodies blanked, brace pairs, Python logical
/// lines). Build once per file and reuse for all of its comments.
class LexedSource {
 public:
  explicit LexedSource(const SourceFile& src);
  ~LexedSource();
  LexedSource(LexedSource&&) noexcept;
  LexedSource& operator=(LexedSource&&) noexcept;

  const SourceFile& source() const { return *src_; }
  const SourceAnalysis& analysis() const { return *analysis_; }

 private:
  const SourceFile* src_;
  std::unique_ptr<SourceAnalysis> analysis_;
};

/// Picks the code a comment talks about.
///
/// Rules are tried in order:
///  1. a label hint of beautification, commented-out-code or task gives
///     NaCategory ("NA");
///  2. a trailing comment takes the code before it on its own line
///     (SingleLineAbove: the code precedes the comment); an own-line comment
///     takes the statement directly below when that statement is a single
///     complete line standing on its own (SingleLineBelow), or, when nothing
///     follows it in the block, the single complete statement directly above
///     (SingleLineAbove);
///  3. a comment directly above a block opener, or on the first line inside
///     one, takes the whole block (BlockLevel), including else/catch/elif
///     continuations;
///  4. anything else is Ambiguous and left for a human.
ScopeDecision associate_code_segment(const InlineComment& comment, const LexedSource& lexed,
                                     std::optional<SmellLabel> label_hint = {});
ScopeDecision associate_code_segment(const InlineComment& comment, const SourceFile& src,
                                     std::optional<SmellLabel> label_hint = {});

/// Glob over '/'-separated relative paths: `*` and `?` stay within one
/// segment, `**` spans any number of segments (including none).
bool glob_match(std::string_view pattern, std::string_view path);

/// Deterministic (lexicographic) walk of `root`. A file is kept when it
/// matches some include glob (default: all .java and .py files), matches no
/// exclude glob, has a known language and is not binary.
std::vector<SourceFile> scan_tree(const std::filesystem::path& root,
                                  const std::vector<std::string>& include_globs = {},
                                  const std::vector<std::string>& exclude_globs = {});

}  // namespace smell
