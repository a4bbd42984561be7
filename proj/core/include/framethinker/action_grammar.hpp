#pragma once

// Structured model output: <think>...</think><action>...</action>, and the
// three action syntaxes an agent may emit per turn.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace framethinker {

using FrameIndex = std::int64_t;

/// Single option letter, 'A'..'Z'.
using AnswerLabel = char;

struct ChooseFrames {
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  friend bool operator==(const ChooseFrames&, const ChooseFrames&) = default;
};

struct GetFrameNumber {
  int minutes = 0;
  int seconds = 0;
  friend bool operator==(const GetFrameNumber&, const GetFrameNumber&) = default;
};

struct OutputAnswer {
  AnswerLabel choice = 'A';
  friend bool operator==(const OutputAnswer&, const OutputAnswer&) = default;
};

using Action = std::variant<ChooseFrames, GetFrameNumber, OutputAnswer>;

inline bool is_answer(const Action& a) { return std::holds_alternative<OutputAnswer>(a); }

struct ParsedResponse {
  std::string thought;
  Action action;
  std::string raw;
};

enum class ParseErrorKind { MalformedTags, UnknownAction, BadParams, TrailingContent };

std::string_view to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

/// Non-throwing parse. Exactly one of the members is engaged.
struct ParseOutcome {
  std::optional<ParsedResponse> response;
  std::optional<ParseErrorKind> error;
  std::string message;

  explicit operator bool() const { return response.has_value(); }
};

ParseOutcome try_parse_response(std::string_view raw);

/// Throws ParseError on any grammar violation.
ParsedResponse parse_response(std::string_view raw);

/// Parse only the interior of an <action> block.
Action parse_action(std::string_view text);

/// Canonical action text: "choose frames between S and E",
/// "get frame number at time MM:SS", "output answer X".
std::string action_text(const Action& action);

std::string serialize_response(std::string_view thought, const Action& action);

/// Every standalone decimal integer in `thought` whose value lies in [0, max_frame],
/// in order of appearance. Tokens glued to letters, parts of MM:SS timestamps and
/// parts of decimal numbers are not mentions.
std::vector<FrameIndex> extract_frame_mentions(std::string_view thought, FrameIndex max_frame);

}  // namespace framethinker
