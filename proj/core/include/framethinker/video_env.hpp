#pragma once

// Synthetic long-video environment. Videos carry symbolic evidence tokens on
// frame intervals instead of pixels; an observation reveals a token exactly
// when one of its sampled indices falls inside the token's interval.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "framethinker/action_grammar.hpp"

namespace framethinker {

struct Timestamp {
  int minutes = 0;
  int seconds = 0;
  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

std::string format_timestamp(const Timestamp& ts);
/// Accepts "M:SS" or "MM:SS"; throws std::invalid_argument otherwise.
Timestamp parse_timestamp(std::string_view text);

struct EvidenceEvent {
  std::string token;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  std::optional<Timestamp> timestamp_hint;
  // Option label this evidence settles, if any. Distractor events carry none.
  std::optional<AnswerLabel> supports;
};

struct SyntheticVideo {
  std::string video_id;
  double duration_s = 0.0;
  double fps = 30.0;
  FrameIndex total_frames = 0;
  std::vector<EvidenceEvent> events;

  FrameIndex max_frame() const { return total_frames - 1; }
  const EvidenceEvent* find_event(std::string_view token) const;
};

/// Builds a video with total_frames = round(duration_s * fps) and checks every invariant.
/// Throws std::invalid_argument on violation.
SyntheticVideo make_video(std::string video_id, double duration_s, double fps,
                          std::vector<EvidenceEvent> events);
void validate(const SyntheticVideo& video);

enum class QuestionKind { TimestampSpecific, IntervalSearch, Direct };

std::string_view to_string(QuestionKind kind);
QuestionKind parse_question_kind(std::string_view text);

struct Task {
  std::string task_id;
  std::shared_ptr<const SyntheticVideo> video;
  QuestionKind question_kind = QuestionKind::Direct;
  std::vector<std::string> required_tokens;
  std::vector<AnswerLabel> options;
  AnswerLabel correct = 'A';

  /// Timestamp named in the query: the hint of the first required event that has one.
  std::optional<Timestamp> timestamp_hint() const;
  bool has_option(AnswerLabel label) const;
};

void validate(const Task& task);

struct FramesObservation {
  std::vector<FrameIndex> indices;
  std::set<std::string> tokens_revealed;
  // Frame count the retrieval asked for; indices may hold fewer after dedup.
  int requested = 0;
  friend bool operator==(const FramesObservation&, const FramesObservation&) = default;
};

struct FrameNumberObservation {
  FrameIndex index = 0;
  friend bool operator==(const FrameNumberObservation&, const FrameNumberObservation&) = default;
};

struct TerminalObservation {
  friend bool operator==(const TerminalObservation&, const TerminalObservation&) = default;
};

using Observation = std::variant<FramesObservation, FrameNumberObservation, TerminalObservation>;

class InvalidInterval : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TimestampBeyondVideo : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct EnvOptions {
  // Reject timestamps past the end of the video instead of clamping them.
  bool strict_timestamps = false;
};

FrameIndex timestamp_to_frame(const SyntheticVideo& video, int minutes, int seconds,
                              bool strict = false);

/// n indices spread uniformly over [start, end], both ends included,
/// start + round(i * (end - start) / (n - 1)), deduplicated and ascending.
std::vector<FrameIndex> sample_frames(FrameIndex start, FrameIndex end, int n);

/// Frames per retrieval: 12 for videos longer than 300 s, otherwise 8.
int frames_per_turn(const SyntheticVideo& video);

/// Tokens of every event intersecting the sorted index list.
std::set<std::string> reveal_tokens(const SyntheticVideo& video,
                                    const std::vector<FrameIndex>& sorted_indices);

FramesObservation initial_observation(const Task& task);

enum class EnvStatus { Running, Answered, Error };

/// Per-episode mutable state. Single owner; not shared across episodes.
class EnvState {
 public:
  /// Starts an episode: takes the initial sparse scan and counts it against the budget.
  static std::pair<EnvState, FramesObservation> start(const Task& task, EnvOptions options = {});

  bool terminal() const { return status_ != EnvStatus::Running; }
  EnvStatus status() const { return status_; }
  int turn() const { return static_cast<int>(history_.size()); }
  const std::vector<Action>& history() const { return history_; }
  const std::optional<AnswerLabel>& answer() const { return answer_; }
  const std::string& error() const { return error_; }

  /// Distinct frames observed so far, initial scan included.
  FrameIndex frame_budget() const { return static_cast<FrameIndex>(seen_.size()); }
  /// Sum of per-retrieval sampled index counts, repeats across turns included.
  FrameIndex frames_sampled() const { return frames_sampled_; }
  const std::set<std::string>& revealed_tokens() const { return revealed_; }

 private:
  friend Observation env_step(const Task&, EnvState&, const Action&);

  void record_frames(const FramesObservation& obs);

  EnvOptions options_;
  EnvStatus status_ = EnvStatus::Running;
  std::vector<Action> history_;
  std::optional<AnswerLabel> answer_;
  std::string error_;
  std::set<FrameIndex> seen_;
  FrameIndex frames_sampled_ = 0;
  std::set<std::string> revealed_;
};

/// Executes one action. Out-of-bounds actions put the state into EnvStatus::Error and
/// return a terminal observation. Throws std::logic_error when the state is terminal.
Observation env_step(const Task& task, EnvState& state, const Action& action);

}  // namespace framethinker
