#include "smell/labels.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "smell/error.hpp"

namespace smell {
namespace {

struct LabelNames {
  std::string_view canonical;
  std::string_view display;
};

constexpr std::array<LabelNames, kLabelCount> kNames = {{
    {"beautification", "Beautification"},
    {"commented-out-code", "Commented-out code"},
    {"irrelevant", "Irrelevant"},
    {"misleading", "Misleading"},
    {"non-local-info", "Non-local info"},
    {"not-a-smell", "Not a smell"},
    {"obvious", "Obvious"},
    {"task", "Task"},
    {"too-much-info", "Too much info"},
    {"vague", "Vague"},
}};

// Keys are in folded form (see fold()).
constexpr std::array<std::pair<std::string_view, SmellLabel>, 20> kAliases = {{
    {"beautification", SmellLabel::Beautification},
    {"commented-out-code", SmellLabel::CommentedOutCode},
    {"commentedout-code", SmellLabel::CommentedOutCode},
    {"irrelevant", SmellLabel::Irrelevant},
    {"misleading", SmellLabel::Misleading},
    {"non-local-info", SmellLabel::NonLocalInfo},
    {"non-local-information", SmellLabel::NonLocalInfo},
    {"nonlocal-info", SmellLabel::NonLocalInfo},
    {"nonlocal-information", SmellLabel::NonLocalInfo},
    {"not-a-smell", SmellLabel::NotASmell},
    {"notasmell", SmellLabel::NotASmell},
    {"no-smell", SmellLabel::NotASmell},
    {"obvious", SmellLabel::Obvious},
    {"task", SmellLabel::Task},
    {"too-much-info", SmellLabel::TooMuchInfo},
    {"too-much-information", SmellLabel::TooMuchInfo},
    {"toomuchinfo", SmellLabel::TooMuchInfo},
    {"vague", SmellLabel::Vague},
    {"commented-code", SmellLabel::CommentedOutCode},
    {"beautify", SmellLabel::Beautification},
}};

// Lowercase, trim, and collapse every run of space/underscore/hyphen into '-'.
std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_sep = false;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (ch == ' ' || ch == '_' || ch == '-' || ch == '\t') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) {
      out.push_back('-');
      pending_sep = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

}  // namespace

std::string_view to_string(SmellLabel label) {
  return kNames[static_cast<std::size_t>(label)].canonical;
}

std::string_view display_name(SmellLabel label) {
  return kNames[static_cast<std::size_t>(label)].display;
}

std::optional<SmellLabel> parse_label(std::string_view text) {
  const std::string key = fold(text);
  if (key.empty()) return std::nullopt;
  const auto* it = std::find_if(kAliases.begin(), kAliases.end(),
                                [&](const auto& entry) { return entry.first == key; });
  if (it == kAliases.end()) return std::nullopt;
  return it->second;
}

SmellLabel parse_label_or_throw(std::string_view text) {
  if (auto label = parse_label(text)) return *label;
  throw FormatError("unknown smell label '" + std::string(text) + "'");
}

bool is_na_category(SmellLabel label) {
  return label == SmellLabel::Beautification || label == SmellLabel::CommentedOutCode ||
         label == SmellLabel::Task;
}

}  // namespace smell
