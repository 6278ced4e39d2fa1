#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace smell {

/// Closed vocabulary of comment-smell categories. Enumerator order is the
/// canonical (lexicographic over canonical names) order.
enum class SmellLabel : std::uint8_t {
  Beautification,
  CommentedOutCode,
  Irrelevant,
  Misleading,
  NonLocalInfo,
  NotASmell,
  Obvious,
  Task,
  TooMuchInfo,
  Vague,
};

inline constexpr std::size_t kLabelCount = 10;

inline constexpr std::array<SmellLabel, kLabelCount> kAllLabels = {
    SmellLabel::Beautification, SmellLabel::CommentedOutCode, SmellLabel::Irrelevant,
    SmellLabel::Misleading,     SmellLabel::NonLocalInfo,     SmellLabel::NotASmell,
    SmellLabel::Obvious,        SmellLabel::Task,             SmellLabel::TooMuchInfo,
    SmellLabel::Vague,
};

/// Lowercase hyphenated name, e.g. "commented-out-code".
std::string_view to_string(SmellLabel label);

/// Human-facing spelling used in report tables, e.g. "Commented-out code".
std::string_view display_name(SmellLabel label);

/// Strict lookup through the alias table. Accepts canonical names and the
/// display spellings, case-insensitively, with space/underscore/hyphen
/// treated alike. Returns nullopt for anything else.
std::optional<SmellLabel> parse_label(std::string_view text);

/// parse_label that throws smell::Error naming the offending value.
SmellLabel parse_label_or_throw(std::string_view text);

/// Labels whose code context is irrelevant; their code field is "NA".
bool is_na_category(SmellLabel label);

inline constexpr std::string_view kNaSegment = "NA";

}  // namespace smell
