#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "framethinker/action_grammar.hpp"
#include "framethinker/trajectory.hpp"
#include "framethinker/video_env.hpp"

namespace testsupport {

using namespace framethinker;

inline std::shared_ptr<const SyntheticVideo> video(double duration_s, double fps,
                                                   std::vector<EvidenceEvent> events = {}) {
  return std::make_shared<const SyntheticVideo>(make_video("v", duration_s, fps, std::move(events)));
}

inline Task task(std::shared_ptr<const SyntheticVideo> v, QuestionKind kind = QuestionKind::Direct,
                 std::vector<std::string> required = {}, AnswerLabel correct = 'A',
                 std::vector<AnswerLabel> options = {'A', 'B', 'C', 'D'}) {
  Task t;
  t.task_id = "t";
  t.video = std::move(v);
  t.question_kind = kind;
  t.required_tokens = std::move(required);
  t.options = std::move(options);
  t.correct = correct;
  return t;
}

/// Interval-search task on a 30 fps, 200 s video; the key event spans frames 1000-1100.
inline Task plain_task(AnswerLabel correct = 'B') {
  return task(video(200, 30, {{"key", 1000, 1100, std::nullopt, correct}}), QuestionKind::IntervalSearch, {"key"},
              correct);
}

/// Plays the given (thought, action) steps through the environment, stopping at a terminal state.
inline Trajectory play(const Task& t, const std::vector<std::pair<std::string, Action>>& steps) {
  auto [state, initial] = EnvState::start(t);
  Trajectory traj;
  traj.task_id = t.task_id;
  traj.max_frame = t.video->max_frame();
  traj.initial_observation = initial;
  for (const auto& [thought, action] : steps) {
    Turn turn;
    turn.raw = serialize_response(thought, action);
    turn.thought = thought;
    turn.action = action;
    turn.observation = env_step(t, state, action);
    traj.turns.push_back(std::move(turn));
    if (state.status() == EnvStatus::Answered) {
      traj.terminal_status = TerminalStatus::Answered;
      traj.answer = state.answer();
    } else if (state.status() == EnvStatus::Error) {
      traj.terminal_status = TerminalStatus::ExecError;
    }
    if (state.terminal()) break;
  }
  traj.n_turns = static_cast<int>(traj.turns.size());
  traj.distinct_frames_seen = state.frame_budget();
  for (const auto& turn : traj.turns) traj.response_length += turn_length(turn);
  return traj;
}

/// Action turns only, without running the environment.
inline Trajectory actions_only(const std::vector<std::pair<std::string, Action>>& steps, FrameIndex max_frame) {
  Trajectory traj;
  traj.max_frame = max_frame;
  for (const auto& [thought, action] : steps) {
    Turn turn;
    turn.raw = serialize_response(thought, action);
    turn.thought = thought;
    turn.action = action;
    traj.turns.push_back(std::move(turn));
  }
  traj.n_turns = static_cast<int>(traj.turns.size());
  return traj;
}

/// Emits canned raw responses in order.
class CannedPolicy : public Policy {
 public:
  explicit CannedPolicy(std::vector<std::string> responses, AnswerLabel fallback = 'A')
      : responses_(std::move(responses)), fallback_(fallback) {}
  std::string act(const Task&, const Trajectory& history, Rng&) const override {
    return responses_.at(history.turns.size());
  }
  AnswerLabel fallback(const Task&, const Trajectory&, Rng&) const override { return fallback_; }

 private:
  std::vector<std::string> responses_;
  AnswerLabel fallback_;
};

}  // namespace testsupport
