#include "smell/extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <memory>

#include "smell/error.hpp"
#include "smell/io.hpp"

namespace smell {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v' || c == '\r'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && (is_space(s[b]) || s[b] == '\n')) ++b;
  std::size_t e = s.size();
  while (e > b && (is_space(s[e - 1]) || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

int indent_of(std::string_view line) {
  int col = 0;
  for (char c : line) {
    if (c == ' ') {
      ++col;
    } else if (c == '\t') {
      col = (col / 8 + 1) * 8;
    } else {
      break;
    }
  }
  return col;
}

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::string_view first_word(std::string_view s) {
  s = trim(s);
  std::size_t n = 0;
  while (n < s.size() && is_ident(s[n])) ++n;
  return s.substr(0, n);
}

template <std::size_t N>
bool word_in(std::string_view w, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

constexpr std::array<std::string_view, 3> kJavaChainWords = {"else", "catch", "finally"};
constexpr std::array<std::string_view, 4> kPythonChainWords = {"elif", "else", "except", "finally"};

// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in, std::size_t& replaced) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(in[i + k]) & 0xC0) == 0x80;
    }
    if (ok && len >= 3) {
      const auto c1 = static_cast<unsigned char>(in[i + 1]);
      if (c == 0xE0 && c1 < 0xA0) ok = false;        // overlong
      if (c == 0xED && c1 >= 0xA0) ok = false;       // surrogate
      if (c == 0xF0 && c1 < 0x90) ok = false;        // overlong
      if (c == 0xF4 && c1 >= 0x90) ok = false;       // > U+10FFFF
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.append("\xEF\xBF\xBD");
      ++replaced;
      ++i;
    }
  }
  return out;
}

// A comment as the lexer sees it, before cleanup and merging.
struct RawComment {
  int start_line = 0;  // 1-based
  int start_col = 0;   // 0-based column of the opening delimiter
  int end_line = 0;
  int end_col = 0;  // one past the closing delimiter (or end of line)
  CommentKind kind = CommentKind::Line;
  bool doc = false;
  std::string body;  // between the delimiters
};

}  // namespace

// Per-line lexical facts. `code` mirrors the raw line byte for byte with
// comment text and literal bodies replaced by spaces.
struct LineFacts {
  std::string code;
  bool blank = true;
  bool has_code = false;
  int indent = 0;
  // Python logical lines.
  bool logical_start = true;
  int logical_first = 0;
  int logical_last = 0;
};

struct BraceToken {
  int line = 0;
  int col = 0;
  bool open = false;
  int partner = -1;  // index into braces
};

class SourceAnalysis {
 public:
  explicit SourceAnalysis(const SourceFile& src) : src_(src) {
    lines_.resize(static_cast<std::size_t>(src.line_count()) + 2);
    for (int l = 1; l <= src.line_count(); ++l) {
      auto& f = facts(l);
      f.code.assign(src.line(l).size(), ' ');
      f.indent = indent_of(src.line(l));
      f.blank = trim(src.line(l)).empty();
      f.logical_first = f.logical_last = l;
    }
    if (src.language == Language::Java) {
      lex_java();
    } else if (src.language == Language::Python) {
      lex_python();
    } else {
      throw InvalidArgument("cannot lex '" + src.path + "': unknown language");
    }
    for (int l = 1; l <= src.line_count(); ++l) facts(l).has_code = !trim(facts(l).code).empty();
    if (src.language == Language::Java) match_braces();
  }

  const SourceFile& src() const { return src_; }
  const std::vector<RawComment>& comments() const { return comments_; }
  int count() const { return src_.line_count(); }
  bool valid(int l) const { return l >= 1 && l <= count(); }

  LineFacts& facts(int l) { return lines_[static_cast<std::size_t>(l)]; }
  const LineFacts& facts(int l) const { return lines_[static_cast<std::size_t>(l)]; }

  bool blank(int l) const { return !valid(l) || facts(l).blank; }
  bool has_code(int l) const { return valid(l) && facts(l).has_code; }
  bool comment_only(int l) const { return valid(l) && !facts(l).blank && !facts(l).has_code; }
  std::string_view code(int l) const { return trim(facts(l).code); }

  // Raw line l cut at the first comment that opens on it.
  std::string_view line_without_comment(int l) const {
    std::string_view line = src_.line(l);
    for (const auto& c : comments_) {
      if (c.start_line == l && static_cast<std::size_t>(c.start_col) < line.size()) {
        line = line.substr(0, static_cast<std::size_t>(c.start_col));
      }
    }
    return line;
  }

  // ---- Java ---------------------------------------------------------------

  int prev_code_line(int l) const {
    for (int p = l - 1; p >= 1; --p) {
      if (has_code(p)) return p;
    }
    return 0;
  }
  int next_code_line(int l) const {
    for (int n = l + 1; n <= count(); ++n) {
      if (has_code(n)) return n;
    }
    return 0;
  }

  bool java_annotation(int l) const {
    const auto c = code(l);
    return c.starts_with("@") && !c.starts_with("@interface") && !c.ends_with("{") && !c.ends_with(";");
  }

  // First line of a statement, as opposed to a continuation.
  bool java_statement_start(int l) const {
    const int p = prev_code_line(l);
    if (p == 0) return true;
    const auto c = code(p);
    if (c.ends_with(";") || c.ends_with("{") || c.ends_with("}") || c.ends_with(":")) return true;
    return java_annotation(p);
  }

  int brace_delta(int l) const { return count_delta(l, '{', '}'); }
  int paren_delta(int l) const { return count_delta(l, '(', ')'); }

  bool java_statement(int l) const {
    if (!has_code(l) || !java_statement_start(l)) return false;
    const auto c = code(l);
    if (c.starts_with("}") || c.starts_with("@") || c.starts_with("{")) return false;
    if (brace_delta(l) != 0 || paren_delta(l) != 0) return false;
    if (c.ends_with(";")) return true;
    return c.ends_with("}") && c.find('{') != std::string_view::npos;
  }

  // Index of the '{' that opens the block of the statement starting at line
  // l, or -1 when a ';' ends the statement first.
  int java_block_brace(int l) const {
    int parens = 0;
    for (int line = l; line <= count(); ++line) {
      const auto& code_line = facts(line).code;
      for (std::size_t col = 0; col < code_line.size(); ++col) {
        const char ch = code_line[col];
        if (ch == '(') ++parens;
        if (ch == ')') --parens;
        if (ch == ';' && parens <= 0) return -1;
        if (ch == '}' && line != l) return -1;
        if (ch == '{') {
          if (parens > 0) return -1;  // lambda body inside an argument list
          return brace_at(line, static_cast<int>(col));
        }
      }
    }
    return -1;
  }

  bool java_opener(int l) const {
    if (!has_code(l) || !java_statement_start(l)) return false;
    const auto c = code(l);
    if (c.starts_with("}") || c.starts_with("@")) return false;
    const int b = java_block_brace(l);
    if (b < 0) return false;
    const auto& tok = braces_[static_cast<std::size_t>(b)];
    if (tok.partner < 0) return false;
    // Array and annotation initialisers are not blocks.
    const char before = char_before(tok.line, tok.col);
    return before != '=' && before != ']' && before != ',' && before != '(' && before != '{';
  }

  // Lines [first, last] of the compound statement whose opener is at `l`,
  // widened backwards over else/catch/finally links and forwards over the
  // same. Returns {0, 0} when no block is found.
  LineSpan java_block(int l) const {
    int start = l;
    for (int guard = 0; guard < count(); ++guard) {
      const auto c = code(start);
      if (c.starts_with("}")) {
        const int b = first_brace_on(start);
        if (b < 0 || braces_[static_cast<std::size_t>(b)].partner < 0) break;
        int open_line = braces_[static_cast<std::size_t>(braces_[static_cast<std::size_t>(b)].partner)].line;
        start = statement_start_of(open_line);
        continue;
      }
      if (word_in(first_word(c), kJavaChainWords)) {
        const int p = prev_code_line(start);
        if (p == 0 || !code(p).starts_with("}")) break;
        start = p;
        continue;
      }
      break;
    }
    int b = java_block_brace(start);
    if (b < 0) return {0, 0};
    int end_brace = braces_[static_cast<std::size_t>(b)].partner;
    if (end_brace < 0) return {0, 0};
    for (;;) {
      const auto& close = braces_[static_cast<std::size_t>(end_brace)];
      // Continuation on the closing line ("} else {") or on the next line.
      const auto rest = trim(std::string_view(facts(close.line).code).substr(static_cast<std::size_t>(close.col) + 1));
      int cont_line = 0;
      if (word_in(first_word(rest), kJavaChainWords)) {
        cont_line = close.line;
      } else if (rest.empty()) {
        const int n = next_code_line(close.line);
        if (n != 0 && word_in(first_word(code(n)), kJavaChainWords)) cont_line = n;
      }
      if (cont_line == 0) break;
      const int next_open = next_open_brace_after(close.line, cont_line == close.line ? close.col : -1);
      if (next_open < 0 || braces_[static_cast<std::size_t>(next_open)].partner < 0) break;
      end_brace = braces_[static_cast<std::size_t>(next_open)].partner;
    }
    return {start, braces_[static_cast<std::size_t>(end_brace)].line};
  }

  int statement_start_of(int l) const {
    int s = l;
    while (s > 1 && !java_statement_start(s)) {
      const int p = prev_code_line(s);
      if (p == 0) break;
      s = p;
    }
    return s;
  }

  // ---- Python -------------------------------------------------------------

  bool py_decorator(int l) const { return has_code(l) && facts(l).logical_start && code(l).starts_with("@"); }

  bool py_statement(int l) const {
    if (!has_code(l)) return false;
    const auto& f = facts(l);
    if (!f.logical_start || f.logical_last != l) return false;
    const auto c = code(l);
    return !c.ends_with(":") && !c.starts_with("@");
  }

  bool py_opener(int l) const {
    if (!has_code(l)) return false;
    const auto& f = facts(l);
    if (!f.logical_start || py_decorator(l)) return false;
    return code(f.logical_last).ends_with(":");
  }

  LineSpan py_block(int l) const {
    int start = l;
    while (word_in(first_word(code(start)), kPythonChainWords)) {
      const int indent = facts(start).indent;
      int p = start - 1;
      while (p >= 1 && !(has_code(p) && facts(p).logical_start && facts(p).indent <= indent)) --p;
      if (p < 1 || facts(p).indent != indent || !py_opener(p)) break;
      start = p;
    }
    const int indent = facts(start).indent;
    int last_code = facts(start).logical_last;
    for (int n = last_code + 1; n <= count(); ++n) {
      if (!has_code(n)) continue;
      const auto& f = facts(n);
      if (f.logical_start && f.indent <= indent) {
        if (f.indent == indent && word_in(first_word(code(n)), kPythonChainWords) && py_opener(n)) {
          last_code = f.logical_last;
          n = f.logical_last;
          continue;
        }
        break;
      }
      last_code = std::max(last_code, f.logical_last);
    }
    return {start, last_code};
  }

 private:
  int count_delta(int l, char open, char close) const {
    int d = 0;
    for (char ch : facts(l).code) {
      if (ch == open) ++d;
      if (ch == close) --d;
    }
    return d;
  }

  char char_before(int line, int col) const {
    for (int l = line; l >= 1; --l) {
      const auto& c = facts(l).code;
      int start = l == line ? col - 1 : static_cast<int>(c.size()) - 1;
      for (int i = start; i >= 0; --i) {
        if (!is_space(c[static_cast<std::size_t>(i)])) return c[static_cast<std::size_t>(i)];
      }
    }
    return '\0';
  }

  int brace_at(int line, int col) const {
    auto it = std::lower_bound(braces_.begin(), braces_.end(), std::pair{line, col},
                               [](const BraceToken& t, const std::pair<int, int>& key) {
                                 return std::pair{t.line, t.col} < key;
                               });
    if (it == braces_.end() || it->line != line || it->col != col) return -1;
    return static_cast<int>(it - braces_.begin());
  }

  int first_brace_on(int line) const {
    auto it = std::lower_bound(braces_.begin(), braces_.end(), line,
                               [](const BraceToken& t, int key) { return t.line < key; });
    if (it == braces_.end() || it->line != line) return -1;
    return static_cast<int>(it - braces_.begin());
  }

  int next_open_brace_after(int line, int col) const {
    for (std::size_t i = 0; i < braces_.size(); ++i) {
      const auto& t = braces_[i];
      if (t.line < line || (t.line == line && t.col <= col)) continue;
      return t.open ? static_cast<int>(i) : -1;
    }
    return -1;
  }

  void add_comment(RawComment c) { comments_.push_back(std::move(c)); }

  void lex_java();
  void lex_python();
  void match_braces();

  const SourceFile& src_;
  std::vector<LineFacts> lines_;
  std::vector<RawComment> comments_;
  std::vector<BraceToken> braces_;
};

void SourceAnalysis::lex_java() {
  enum class State { Code, LineComment, BlockComment, String, Char, TextBlock };
  State state = State::Code;
  RawComment current;
  const int n = count();
  for (int l = 1; l <= n; ++l) {
    const std::string& line = src_.line(l);
    auto& code_line = facts(l).code;
    const std::size_t len = line.size();
    std::size_t i = 0;
    if (state == State::String || state == State::Char) state = State::Code;  // unterminated literal
    while (i < len) {
      const char ch = line[i];
      const char next = i + 1 < len ? line[i + 1] : '\0';
      switch (state) {
        case State::Code:
          if (ch == '/' && next == '/') {
            current = RawComment{l, static_cast<int>(i), l, static_cast<int>(len), CommentKind::Line, false,
                                 line.substr(i + 2)};
            add_comment(std::move(current));
            i = len;
            continue;
          }
          if (ch == '/' && next == '*') {
            const bool doc = i + 2 < len && line[i + 2] == '*' && !(i + 3 < len && line[i + 3] == '/');
            current = RawComment{l, static_cast<int>(i), 0, 0, CommentKind::Block, doc, {}};
            state = State::BlockComment;
            i += 2;
            continue;
          }
          if (ch == '"') {
            code_line[i] = '"';
            if (next == '"' && i + 2 < len && line[i + 2] == '"') {
              code_line[i + 1] = code_line[i + 2] = '"';
              state = State::TextBlock;
              i += 3;
            } else {
              state = State::String;
              ++i;
            }
            continue;
          }
          if (ch == '\'') {
            code_line[i] = '\'';
            state = State::Char;
            ++i;
            continue;
          }
          code_line[i] = ch;
          ++i;
          break;
        case State::BlockComment:
          if (ch == '*' && next == '/') {
            current.end_line = l;
            current.end_col = static_cast<int>(i) + 2;
            add_comment(std::move(current));
            current = {};
            state = State::Code;
            i += 2;
            continue;
          }
          current.body.push_back(ch);
          ++i;
          break;
        case State::String:
        case State::Char: {
          const char quote = state == State::String ? '"' : '\'';
          if (ch == '\\') {
            i += 2;
            continue;
          }
          if (ch == quote) {
            code_line[i] = quote;
            state = State::Code;
          }
          ++i;
          break;
        }
        case State::TextBlock:
          if (ch == '\\') {
            i += 2;
            continue;
          }
          if (ch == '"' && next == '"' && i + 2 < len && line[i + 2] == '"') {
            code_line[i] = code_line[i + 1] = code_line[i + 2] = '"';
            state = State::Code;
            i += 3;
            continue;
          }
          ++i;
          break;
        case State::LineComment:
          ++i;
          break;
      }
    }
    if (state == State::BlockComment) current.body.push_back('\n');
  }
  if (state == State::BlockComment) {
    // Unterminated block comment runs to end of file.
    current.end_line = n;
    current.end_col = n > 0 ? static_cast<int>(src_.line(n).size()) : 0;
    add_comment(std::move(current));
  }
}

void SourceAnalysis::lex_python() {
  enum class State { Code, String };
  State state = State::Code;
  char quote = '"';
  bool triple = false;
  int depth = 0;
  bool backslash_continuation = false;
  int logical_first = 1;
  const int n = count();
  for (int l = 1; l <= n; ++l) {
    const std::string& line = src_.line(l);
    auto& f = facts(l);
    const bool continuation = depth > 0 || backslash_continuation || (state == State::String && triple);
    if (!continuation) logical_first = l;
    // A blank line or comment-only line cannot start a logical line, but
    // it does not continue one either unless brackets are open.
    f.logical_start = !continuation;
    f.logical_first = logical_first;
    backslash_continuation = false;

    const std::size_t len = line.size();
    std::size_t i = 0;
    while (i < len) {
      const char ch = line[i];
      if (state == State::Code) {
        if (ch == '#') {
          if (!(l == 1 && i == 0 && i + 1 < len && line[i + 1] == '!')) {
            add_comment(RawComment{l, static_cast<int>(i), l, static_cast<int>(len), CommentKind::Line, false,
                                   line.substr(i + 1)});
          }
          break;
        }
        if (ch == '"' || ch == '\'') {
          quote = ch;
          triple = i + 2 < len && line[i + 1] == ch && line[i + 2] == ch;
          const std::size_t w = triple ? 3 : 1;
          for (std::size_t k = 0; k < w; ++k) f.code[i + k] = ch;
          state = State::String;
          i += w;
          continue;
        }
        if (ch == '\\' && i + 1 == len) {
          backslash_continuation = true;
          f.code[i] = ch;
          ++i;
          continue;
        }
        if (ch == '(' || ch == '[' || ch == '{') ++depth;
        if ((ch == ')' || ch == ']' || ch == '}') && depth > 0) --depth;
        f.code[i] = ch;
        ++i;
        continue;
      }
      // String state.
      if (ch == '\\') {
        if (i + 1 == len && !triple) backslash_continuation = true;  // escaped newline
        i += 2;
        continue;
      }
      if (ch == quote) {
        if (!triple) {
          f.code[i] = ch;
          state = State::Code;
          ++i;
          continue;
        }
        if (i + 2 < len && line[i + 1] == quote && line[i + 2] == quote) {
          f.code[i] = f.code[i + 1] = f.code[i + 2] = ch;
          state = State::Code;
          i += 3;
          continue;
        }
      }
      ++i;
    }
    if (state == State::String && !triple && !backslash_continuation) state = State::Code;
  }
  // Propagate the last physical line of every logical line.
  for (int l = n; l >= 1; --l) {
    auto& f = facts(l);
    f.logical_last = (l < n && facts(l + 1).logical_first == f.logical_first) ? facts(l + 1).logical_last : l;
  }
}

void SourceAnalysis::match_braces() {
  for (int l = 1; l <= count(); ++l) {
    const auto& c = facts(l).code;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] == '{' || c[i] == '}') braces_.push_back({l, static_cast<int>(i), c[i] == '{', -1});
    }
  }
  std::vector<int> stack;
  for (std::size_t i = 0; i < braces_.size(); ++i) {
    if (braces_[i].open) {
      stack.push_back(static_cast<int>(i));
    } else if (!stack.empty()) {
      const int o = stack.back();
      stack.pop_back();
      braces_[i].partner = o;
      braces_[static_cast<std::size_t>(o)].partner = static_cast<int>(i);
    }
  }
}

LexedSource::LexedSource(const SourceFile& src)
    : src_(&src), analysis_(std::make_unique<SourceAnalysis>(src)) {}
LexedSource::~LexedSource() = default;
LexedSource::LexedSource(LexedSource&&) noexcept = default;
LexedSource& LexedSource::operator=(LexedSource&&) noexcept = default;

// ---------------------------------------------------------------------------

std::string_view to_string(CommentKind kind) { return kind == CommentKind::Line ? "line" : "block"; }

std::string_view to_string(CommentPosition position) {
  return position == CommentPosition::OwnLine ? "own-line" : "trailing";
}

std::string_view to_string(ScopeRule rule) {
  switch (rule) {
    case ScopeRule::NaCategory: return "na-category";
    case ScopeRule::SingleLineAbove: return "single-line-above";
    case ScopeRule::SingleLineBelow: return "single-line-below";
    case ScopeRule::BlockLevel: return "block-level";
    case ScopeRule::Ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

std::optional<ScopeRule> parse_scope_rule(std::string_view text) {
  for (auto r : {ScopeRule::NaCategory, ScopeRule::SingleLineAbove, ScopeRule::SingleLineBelow,
                 ScopeRule::BlockLevel, ScopeRule::Ambiguous}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

Language language_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".java") return Language::Java;
  if (ext == ".py") return Language::Python;
  return Language::Unknown;
}

SourceFile make_source(std::string path, Language language, std::string_view text) {
  SourceFile src;
  src.path = std::move(path);
  src.language = language;
  const std::string clean = sanitize_utf8(text, src.invalid_utf8_bytes);
  std::string_view rest = clean;
  if (rest.starts_with("\xEF\xBB\xBF")) rest.remove_prefix(3);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    const auto nl = rest.find_first_of("\r\n", pos);
    if (nl == std::string_view::npos) {
      src.lines.emplace_back(rest.substr(pos));
      break;
    }
    src.lines.emplace_back(rest.substr(pos, nl - pos));
    pos = nl + 1;
    if (rest[nl] == '\r' && pos < rest.size() && rest[pos] == '\n') ++pos;
  }
  return src;
}

SourceFile load_source(const std::filesystem::path& path, std::optional<Language> language) {
  return make_source(path.generic_string(), language.value_or(language_for_path(path)), read_file(path));
}

namespace {

std::string clean_line_body(std::string_view body, char delimiter) {
  while (!body.empty() && body.front() == delimiter) body.remove_prefix(1);
  return std::string(trim(body));
}

std::string clean_block_body(std::string_view body) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = trim(body.substr(pos, nl - pos));
    while (!line.empty() && line.front() == '*') line.remove_prefix(1);
    while (!line.empty() && line.back() == '*') line.remove_suffix(1);
    out.emplace_back(trim(line));
    pos = nl + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  std::size_t first = 0;
  while (first < out.size() && out[first].empty()) ++first;
  std::string text;
  for (std::size_t i = first; i < out.size(); ++i) {
    if (i != first) text.push_back('\n');
    text += out[i];
  }
  return text;
}

std::string join_trimmed(const std::vector<std::string>& parts) {
  std::size_t first = 0;
  std::size_t last = parts.size();
  while (first < last && parts[first].empty()) ++first;
  while (last > first && parts[last - 1].empty()) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i != first) out.push_back('\n');
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<InlineComment> extract_inline_comments(const SourceFile& src) {
  const SourceAnalysis an(src);
  const char delimiter = src.language == Language::Python ? '#' : '/';

  struct Pending {
    InlineComment comment;
    std::vector<std::string> parts;
  };
  std::vector<Pending> pending;

  for (const auto& raw : an.comments()) {
    if (raw.doc) continue;
    InlineComment c;
    c.file_path = src.path;
    c.span = {raw.start_line, raw.end_line};
    c.kind = raw.kind;
    c.column = raw.start_col;
    const auto& start_code = an.facts(raw.start_line).code;
    const auto& end_code = an.facts(raw.end_line).code;
    const bool code_before = !trim(std::string_view(start_code).substr(0, static_cast<std::size_t>(raw.start_col))).empty();
    const bool code_after =
        static_cast<std::size_t>(raw.end_col) < end_code.size() &&
        !trim(std::string_view(end_code).substr(static_cast<std::size_t>(raw.end_col))).empty();
    c.position = (code_before || code_after) ? CommentPosition::Trailing : CommentPosition::OwnLine;

    if (raw.kind == CommentKind::Line) {
      std::string part = clean_line_body(raw.body, delimiter);
      if (!pending.empty()) {
        auto& prev = pending.back();
        if (prev.comment.kind == CommentKind::Line && prev.comment.position == CommentPosition::OwnLine &&
            c.position == CommentPosition::OwnLine && prev.comment.span.end + 1 == c.span.start &&
            prev.comment.column == c.column) {
          prev.comment.span.end = c.span.end;
          prev.parts.push_back(std::move(part));
          continue;
        }
      }
      pending.push_back({std::move(c), {std::move(part)}});
    } else {
      pending.push_back({std::move(c), {clean_block_body(raw.body)}});
    }
  }

  std::vector<InlineComment> out;
  out.reserve(pending.size());
  for (auto& p : pending) {
    p.comment.text = join_trimmed(p.parts);
    if (!p.comment.text.empty()) out.push_back(std::move(p.comment));
  }
  return out;
}

namespace {

ScopeDecision single_line(ScopeRule rule, int line, std::string_view text) {
  return {rule, std::string(trim(text)), LineSpan{line, line}};
}

ScopeDecision block_decision(const SourceFile& src, LineSpan span) {
  std::string seg;
  for (int l = span.start; l <= span.end; ++l) {
    if (l != span.start) seg.push_back('\n');
    seg += src.line(l);
  }
  return {ScopeRule::BlockLevel, std::move(seg), span};
}

ScopeDecision associate_java(const InlineComment& c, const SourceAnalysis& an) {
  const auto& src = an.src();
  const int s = c.span.start;
  const int e = c.span.end;
  const int below = e + 1;
  const int above = s - 1;

  // Rule 2: single line.
  if (an.java_statement(below)) {
    const int after = below + 1;
    const bool alone = !an.valid(after) || an.blank(after) || an.comment_only(after) ||
                       an.code(after).starts_with("}");
    if (alone) return single_line(ScopeRule::SingleLineBelow, below, an.line_without_comment(below));
  }
  const bool nothing_below = !an.valid(below) || an.blank(below) || (an.has_code(below) && an.code(below).starts_with("}"));
  if (nothing_below && an.java_statement(above)) {
    return single_line(ScopeRule::SingleLineAbove, above, an.line_without_comment(above));
  }

  // Rule 3: block directly below (annotations included) or enclosing block.
  int opener = below;
  while (an.has_code(opener) && an.java_annotation(opener)) ++opener;
  if (an.java_opener(opener)) {
    const auto span = an.java_block(opener);
    if (span.start != 0) return block_decision(src, {below, span.end});
  }
  if (an.has_code(above) && an.code(above).ends_with("{")) {
    const int start = an.statement_start_of(above);
    if (an.java_opener(start) || an.code(above) == "{") {
      const auto span = an.java_block(start);
      if (span.start != 0) return block_decision(src, span);
    }
  }
  return {ScopeRule::Ambiguous, {}, std::nullopt};
}

ScopeDecision associate_python(const InlineComment& c, const SourceAnalysis& an) {
  const auto& src = an.src();
  const int s = c.span.start;
  const int e = c.span.end;
  const int below = e + 1;
  const int above = s - 1;

  if (an.py_statement(below)) {
    const int after = below + 1;
    const bool alone = !an.valid(after) || an.blank(after) || an.comment_only(after) ||
                       (an.has_code(after) && an.facts(after).logical_start &&
                        an.facts(after).indent < an.facts(below).indent);
    if (alone) return single_line(ScopeRule::SingleLineBelow, below, an.line_without_comment(below));
  }
  const bool nothing_below = !an.valid(below) || an.blank(below) ||
                             (an.has_code(below) && an.facts(below).logical_start &&
                              an.facts(below).indent < c.column);
  if (nothing_below && an.py_statement(above)) {
    return single_line(ScopeRule::SingleLineAbove, above, an.line_without_comment(above));
  }

  int opener = below;
  while (an.py_decorator(opener)) opener = an.facts(opener).logical_last + 1;
  if (an.valid(opener) && an.py_opener(opener)) {
    const auto span = an.py_block(opener);
    return block_decision(src, {below, span.end});
  }
  if (an.has_code(above) && an.code(above).ends_with(":")) {
    const int start = an.facts(above).logical_first;
    if (an.facts(start).logical_last == above && an.py_opener(start)) {
      return block_decision(src, an.py_block(start));
    }
  }
  return {ScopeRule::Ambiguous, {}, std::nullopt};
}

}  // namespace

ScopeDecision associate_code_segment(const InlineComment& comment, const LexedSource& lexed,
                                     std::optional<SmellLabel> label_hint) {
  if (label_hint && is_na_category(*label_hint)) {
    return {ScopeRule::NaCategory, std::string(kNaSegment), std::nullopt};
  }
  const auto& src = lexed.source();
  if (comment.file_path != src.path || comment.span.start < 1 || comment.span.end > src.line_count() ||
      comment.span.start > comment.span.end) {
    throw InvalidArgument("comment at " + comment.file_path + ":" + std::to_string(comment.span.start) +
                          " does not belong to " + src.path);
  }
  if (comment.position == CommentPosition::Trailing) {
    const auto& first = src.line(comment.span.start);
    auto before = trim(std::string_view(first).substr(0, static_cast<std::size_t>(comment.column)));
    if (!before.empty()) return single_line(ScopeRule::SingleLineAbove, comment.span.start, before);
    // Code follows the comment instead ("/* x */ call();").
    return single_line(ScopeRule::SingleLineAbove, comment.span.end, src.line(comment.span.end));
  }
  const auto& an = lexed.analysis();
  return src.language == Language::Java ? associate_java(comment, an) : associate_python(comment, an);
}

ScopeDecision associate_code_segment(const InlineComment& comment, const SourceFile& src,
                                     std::optional<SmellLabel> label_hint) {
  if (label_hint && is_na_category(*label_hint)) {
    return {ScopeRule::NaCategory, std::string(kNaSegment), std::nullopt};
  }
  const LexedSource lexed(src);
  return associate_code_segment(comment, lexed, label_hint);
}

// ---------------------------------------------------------------------------

bool glob_match(std::string_view pattern, std::string_view path) {
  if (pattern.starts_with("**")) {
    std::string_view rest = pattern.substr(2);
    if (rest.starts_with("/")) {
      rest.remove_prefix(1);
      // "**/" matches zero or more whole segments.
      if (glob_match(rest, path)) return true;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == '/' && glob_match(rest, path.substr(i + 1))) return true;
      }
      return false;
    }
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (glob_match(rest, path.substr(i))) return true;
    }
    return false;
  }
  if (pattern.empty()) return path.empty();
  const char p = pattern.front();
  if (p == '*') {
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (glob_match(pattern.substr(1), path.substr(i))) return true;
      if (i < path.size() && path[i] == '/') break;
    }
    return false;
  }
  if (path.empty()) return false;
  if (p == '?') return path.front() != '/' && glob_match(pattern.substr(1), path.substr(1));
  return p == path.front() && glob_match(pattern.substr(1), path.substr(1));
}

std::vector<SourceFile> scan_tree(const std::filesystem::path& root, const std::vector<std::string>& include_globs,
                                  const std::vector<std::string>& exclude_globs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error("cannot scan '" + root.string() + "': not a readable directory");
  const std::vector<std::string> includes =
      include_globs.empty() ? std::vector<std::string>{"**/*.java", "**/*.py"} : include_globs;

  std::vector<std::string> rel_paths;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error("cannot scan '" + root.string() + "': " + ec.message());
  for (const auto& entry : it) {
    if (!entry.is_regular_file(ec)) continue;
    rel_paths.push_back(fs::relative(entry.path(), root).generic_string());
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  std::vector<SourceFile> out;
  for (const auto& rel : rel_paths) {
    const bool included =
        std::any_of(includes.begin(), includes.end(), [&](const auto& g) { return glob_match(g, rel); });
    if (!included) continue;
    const bool excluded =
        std::any_of(exclude_globs.begin(), exclude_globs.end(), [&](const auto& g) { return glob_match(g, rel); });
    if (excluded) continue;
    const auto lang = language_for_path(rel);
    if (lang == Language::Unknown) continue;
    const std::string bytes = read_file(root / rel);
    if (bytes.substr(0, 8192).find('\0') != std::string::npos) continue;  // binary
    out.push_back(make_source(rel, lang, bytes));
  }
  return out;
}

}  // namespace smell
