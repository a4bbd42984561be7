#include "framethinker/trajectory.hpp"

#include <stdexcept>

#include "framethinker/ccv.hpp"

namespace framethinker {

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::Answered: return "answered";
    case TerminalStatus::ExecError: return "exec_error";
    case TerminalStatus::CcvTerminated: return "ccv_terminated";
    case TerminalStatus::TurnLimit: return "turn_limit";
  }
  return "?";
}

TerminalStatus parse_terminal_status(std::string_view text) {
  if (text == "answered") return TerminalStatus::Answered;
  if (text == "exec_error") return TerminalStatus::ExecError;
  if (text == "ccv_terminated") return TerminalStatus::CcvTerminated;
  if (text == "turn_limit") return TerminalStatus::TurnLimit;
  throw std::invalid_argument("unknown terminal status: " + std::string(text));
}

std::set<std::string> Trajectory::revealed_tokens() const {
  std::set<std::string> out = initial_observation.tokens_revealed;
  for (const auto& t : turns)
    if (t.observation)
      if (const auto* f = std::get_if<FramesObservation>(&*t.observation))
        out.insert(f->tokens_revealed.begin(), f->tokens_revealed.end());
  return out;
}

std::optional<FrameIndex> Trajectory::last_frame_number() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it)
    if (it->observation)
      if (const auto* f = std::get_if<FrameNumberObservation>(&*it->observation)) return f->index;
  return std::nullopt;
}

std::size_t turn_length(const Turn& turn) {
  if (!turn.action) return turn.raw.size();
  return turn.thought.size() + action_text(*turn.action).size();
}

Trajectory rollout(const Policy& policy, const Task& task, const RolloutLimits& limits,
                   bool ccv_online, Rng& rng) {
  if (limits.max_turns < 1) throw std::invalid_argument("rollout: max_turns must be at least 1");
  auto [state, initial] = EnvState::start(task, limits.env);

  Trajectory traj;
  traj.task_id = task.task_id;
  traj.max_frame = task.video->max_frame();
  traj.initial_observation = std::move(initial);
  traj.terminal_status = TerminalStatus::TurnLimit;

  for (int t = 0; t < limits.max_turns; ++t) {
    Turn turn;
    turn.raw = policy.act(task, traj, rng);
    auto parsed = try_parse_response(turn.raw);
    if (!parsed) {
      traj.turns.push_back(std::move(turn));
      traj.terminal_status = TerminalStatus::ExecError;
      break;
    }
    turn.thought = std::move(parsed.response->thought);
    turn.action = parsed.response->action;
    traj.turns.push_back(std::move(turn));

    if (ccv_online && !ccv::verify(traj).pass) {
      traj.terminal_status = TerminalStatus::CcvTerminated;
      break;
    }

    auto& current = traj.turns.back();
    current.observation = env_step(task, state, *current.action);
    if (state.status() == EnvStatus::Error) {
      traj.terminal_status = TerminalStatus::ExecError;
      break;
    }
    if (state.status() == EnvStatus::Answered) {
      traj.terminal_status = TerminalStatus::Answered;
      traj.answer = state.answer();
      break;
    }
  }

  traj.n_turns = static_cast<int>(traj.turns.size());
  traj.distinct_frames_seen = state.frame_budget();
  for (const auto& t : traj.turns) traj.response_length += turn_length(t);

  if (traj.terminal_status == TerminalStatus::CcvTerminated) fallback_answer(policy, task, traj, rng);
  return traj;
}

AnswerLabel fallback_answer(const Policy& policy, const Task& task, Trajectory& partial, Rng& rng) {
  if (partial.terminal_status != TerminalStatus::CcvTerminated)
    throw std::logic_error("fallback_answer requires a CCV-terminated trajectory");
  const AnswerLabel label = policy.fallback(task, partial, rng);
  partial.answer = label;
  partial.fallback = true;
  return label;
}

}  // namespace framethinker
