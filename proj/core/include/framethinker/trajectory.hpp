#pragma once

// Thought-action-observation trajectories and the rollout loop that drives a
// policy against the environment.

#include <optional>
#include <string>
#include <vector>

#include "framethinker/action_grammar.hpp"
#include "framethinker/rng.hpp"
#include "framethinker/video_env.hpp"

namespace framethinker {

struct Turn {
  // Verbatim policy output for this turn.
  std::string raw;
  std::string thought;
  // Absent when the output failed to parse.
  std::optional<Action> action;
  // Absent when the action was never executed (parse failure or online CCV stop).
  std::optional<Observation> observation;
};

enum class TerminalStatus { Answered, ExecError, CcvTerminated, TurnLimit };

std::string_view to_string(TerminalStatus status);
TerminalStatus parse_terminal_status(std::string_view text);

struct Trajectory {
  std::string task_id;
  FrameIndex max_frame = 0;
  FramesObservation initial_observation;
  std::vector<Turn> turns;
  TerminalStatus terminal_status = TerminalStatus::TurnLimit;
  std::optional<AnswerLabel> answer;
  // The answer came from the post-CCV fallback prompt rather than an action.
  bool fallback = false;
  int n_turns = 0;
  FrameIndex distinct_frames_seen = 0;
  std::size_t response_length = 0;

  /// Tokens revealed by the initial scan and by every executed retrieval.
  std::set<std::string> revealed_tokens() const;
  /// The most recent frame number returned by get-frame-number, if any.
  std::optional<FrameIndex> last_frame_number() const;
};

/// Characters of thought text plus canonical action text; raw length for unparsed turns.
std::size_t turn_length(const Turn& turn);

/// Anything that can act in the environment. Implementations must be
/// deterministic given the rng stream they are handed.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Raw `<think>...</think><action>...</action>` text for the next turn.
  /// `history` holds every turn so far with its observation.
  virtual std::string act(const Task& task, const Trajectory& history, Rng& rng) const = 0;

  /// Direct final answer after an online CCV stop.
  virtual AnswerLabel fallback(const Task& task, const Trajectory& partial, Rng& rng) const = 0;
};

struct RolloutLimits {
  int max_turns = 6;
  EnvOptions env;
};

Trajectory rollout(const Policy& policy, const Task& task, const RolloutLimits& limits,
                   bool ccv_online, Rng& rng);

/// Asks the policy for a direct answer and records it on the trajectory.
/// Requires terminal_status == CcvTerminated.
AnswerLabel fallback_answer(const Policy& policy, const Task& task, Trajectory& partial, Rng& rng);

}  // namespace framethinker
