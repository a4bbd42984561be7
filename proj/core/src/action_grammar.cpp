#include "framethinker/action_grammar.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace framethinker {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kActionOpen = "<action>";
constexpr std::string_view kActionClose = "</action>";

constexpr std::string_view kChoosePrefix = "choose frames between ";
constexpr std::string_view kTimePrefix = "get frame number at time ";
constexpr std::string_view kAnswerPrefix = "output answer";

constexpr std::array<std::string_view, 4> kTags = {kThinkOpen, kThinkClose, kActionOpen,
                                                   kActionClose};

bool contains_tag(std::string_view s) {
  for (auto tag : kTags)
    if (s.find(tag) != std::string_view::npos) return true;
  return false;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

[[noreturn]] void fail(ParseErrorKind kind, const std::string& what) { throw ParseError(kind, what); }

// Unsigned decimal; at most 18 digits so the value fits in int64.
std::optional<std::int64_t> parse_uint(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char c : s) {
    if (!is_digit(c)) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

ChooseFrames parse_choose(std::string_view rest) {
  const auto sep = rest.find(" and ");
  if (sep == std::string_view::npos) fail(ParseErrorKind::BadParams, "choose frames: expected 'S and E'");
  auto start = parse_uint(rest.substr(0, sep));
  auto end = parse_uint(rest.substr(sep + 5));
  if (!start || !end) fail(ParseErrorKind::BadParams, "choose frames: non-numeric frame index");
  if (*start > *end) fail(ParseErrorKind::BadParams, "choose frames: start exceeds end");
  return {*start, *end};
}

GetFrameNumber parse_time(std::string_view rest) {
  const auto colon = rest.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 2 || rest.size() - colon - 1 != 2)
    fail(ParseErrorKind::BadParams, "get frame number: expected M:SS or MM:SS");
  auto minutes = parse_uint(rest.substr(0, colon));
  auto seconds = parse_uint(rest.substr(colon + 1));
  if (!minutes || !seconds) fail(ParseErrorKind::BadParams, "get frame number: non-numeric timestamp");
  if (*seconds >= 60) fail(ParseErrorKind::BadParams, "get frame number: seconds must be below 60");
  return {static_cast<int>(*minutes), static_cast<int>(*seconds)};
}

OutputAnswer parse_answer(std::string_view rest) {
  if (rest.size() != 2 || rest[0] != ' ' || rest[1] < 'A' || rest[1] > 'Z')
    fail(ParseErrorKind::BadParams, "output answer: expected a single option letter");
  return {rest[1]};
}

ParsedResponse parse_strict(std::string_view raw) {
  if (raw.substr(0, kThinkOpen.size()) != kThinkOpen)
    fail(ParseErrorKind::MalformedTags, "response must start with <think>");
  const auto think_begin = kThinkOpen.size();
  const auto think_end = raw.find(kThinkClose, think_begin);
  if (think_end == std::string_view::npos) fail(ParseErrorKind::MalformedTags, "missing </think>");
  const auto thought = raw.substr(think_begin, think_end - think_begin);
  if (contains_tag(thought)) fail(ParseErrorKind::MalformedTags, "nested tag inside think block");

  const auto after_think = think_end + kThinkClose.size();
  if (raw.substr(after_think, kActionOpen.size()) != kActionOpen)
    fail(ParseErrorKind::MalformedTags, "<action> must immediately follow </think>");
  const auto action_begin = after_think + kActionOpen.size();
  const auto action_end = raw.find(kActionClose, action_begin);
  if (action_end == std::string_view::npos) fail(ParseErrorKind::MalformedTags, "missing </action>");
  const auto body = raw.substr(action_begin, action_end - action_begin);
  if (contains_tag(body)) fail(ParseErrorKind::MalformedTags, "nested tag inside action block");

  const auto tail = raw.substr(action_end + kActionClose.size());
  if (!tail.empty()) {
    if (contains_tag(tail)) fail(ParseErrorKind::MalformedTags, "extra tag block after </action>");
    fail(ParseErrorKind::TrailingContent, "content after </action>");
  }
  return {std::string(thought), parse_action(body), std::string(raw)};
}

}  // namespace

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedTags: return "MalformedTags";
    case ParseErrorKind::UnknownAction: return "UnknownAction";
    case ParseErrorKind::BadParams: return "BadParams";
    case ParseErrorKind::TrailingContent: return "TrailingContent";
  }
  return "?";
}

Action parse_action(std::string_view text) {
  const std::string norm = normalize_whitespace(text);
  const std::string_view s = norm;
  if (s.substr(0, kChoosePrefix.size()) == kChoosePrefix) return parse_choose(s.substr(kChoosePrefix.size()));
  if (s.substr(0, kTimePrefix.size()) == kTimePrefix) return parse_time(s.substr(kTimePrefix.size()));
  if (s.substr(0, kAnswerPrefix.size()) == kAnswerPrefix) return parse_answer(s.substr(kAnswerPrefix.size()));
  fail(ParseErrorKind::UnknownAction, "unknown action: '" + norm + "'");
}

ParsedResponse parse_response(std::string_view raw) { return parse_strict(raw); }

ParseOutcome try_parse_response(std::string_view raw) {
  ParseOutcome out;
  try {
    out.response = parse_strict(raw);
  } catch (const ParseError& e) {
    out.error = e.kind();
    out.message = e.what();
  }
  return out;
}

std::string action_text(const Action& action) {
  struct Visitor {
    std::string operator()(const ChooseFrames& a) const {
      return "choose frames between " + std::to_string(a.start_frame) + " and " +
             std::to_string(a.end_frame);
    }
    std::string operator()(const GetFrameNumber& a) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%02d:%02d", a.minutes, a.seconds);
      return std::string("get frame number at time ") + buf;
    }
    std::string operator()(const OutputAnswer& a) const {
      return std::string("output answer ") + a.choice;
    }
  };
  return std::visit(Visitor{}, action);
}

std::string serialize_response(std::string_view thought, const Action& action) {
  std::string out;
  out.reserve(thought.size() + 64);
  out.append(kThinkOpen).append(thought).append(kThinkClose);
  out.append(kActionOpen).append(action_text(action)).append(kActionClose);
  return out;
}

std::vector<FrameIndex> extract_frame_mentions(std::string_view thought, FrameIndex max_frame) {
  std::vector<FrameIndex> mentions;
  const std::size_t n = thought.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(thought[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_digit(thought[j])) ++j;
    const bool glued_before = i > 0 && is_word(thought[i - 1]);
    const bool glued_after = j < n && is_word(thought[j]);
    // MM:SS components and decimal fractions on either side.
    const bool timestamp = (i >= 2 && thought[i - 1] == ':' && is_digit(thought[i - 2])) ||
                           (j + 1 < n && thought[j] == ':' && is_digit(thought[j + 1]));
    const bool fraction = (i >= 2 && thought[i - 1] == '.' && is_digit(thought[i - 2])) ||
                          (j + 1 < n && thought[j] == '.' && is_digit(thought[j + 1]));
    if (!glued_before && !glued_after && !timestamp && !fraction) {
      if (auto v = parse_uint(thought.substr(i, j - i)); v && *v <= max_frame) mentions.push_back(*v);
    }
    i = j;
  }
  return mentions;
}

}  // namespace framethinker
