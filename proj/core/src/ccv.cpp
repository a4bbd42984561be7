#include "framethinker/ccv.hpp"

#include <algorithm>
#include <stdexcept>

namespace framethinker {

std::string_view to_string(CcvReason reason) {
  switch (reason) {
    case CcvReason::Redundancy: return "Redundancy";
    case CcvReason::LogicalFlow: return "LogicalFlow";
    case CcvReason::Fidelity: return "Fidelity";
  }
  return "?";
}

CcvReason parse_ccv_reason(std::string_view text) {
  if (text == "Redundancy") return CcvReason::Redundancy;
  if (text == "LogicalFlow") return CcvReason::LogicalFlow;
  if (text == "Fidelity") return CcvReason::Fidelity;
  throw std::invalid_argument("unknown CCV reason: " + std::string(text));
}

namespace ccv {

CcvVerdict check_redundancy(const Trajectory& traj) {
  std::vector<const Action*> seen;
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    const auto& action = traj.turns[i].action;
    if (!action || is_answer(*action)) continue;
    for (const Action* prev : seen)
      if (*prev == *action)
        return CcvVerdict::fail(CcvReason::Redundancy, i,
                                "'" + action_text(*action) + "' repeats an earlier action");
    seen.push_back(&*action);
  }
  return CcvVerdict::ok();
}

CcvVerdict check_logical_flow(const Trajectory& traj) {
  // Frame numbers not yet consumed by a choose-frames action.
  std::vector<FrameIndex> pending;
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    const auto& turn = traj.turns[i];
    if (!turn.action) continue;
    if (std::holds_alternative<GetFrameNumber>(*turn.action)) {
      if (turn.observation)
        if (const auto* fn = std::get_if<FrameNumberObservation>(&*turn.observation))
          pending.push_back(fn->index);
      continue;
    }
    if (const auto* cf = std::get_if<ChooseFrames>(&*turn.action)) {
      for (FrameIndex f : pending)
        if (f < cf->start_frame || f > cf->end_frame)
          return CcvVerdict::fail(CcvReason::LogicalFlow, i,
                                  "interval " + std::to_string(cf->start_frame) + "-" +
                                      std::to_string(cf->end_frame) + " does not contain frame " +
                                      std::to_string(f));
      pending.clear();
    }
  }
  return CcvVerdict::ok();
}

CcvVerdict check_fidelity(const Trajectory& traj, FrameIndex max_frame, CcvOptions options) {
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    const auto& turn = traj.turns[i];
    if (!turn.action) continue;
    const auto* cf = std::get_if<ChooseFrames>(&*turn.action);
    if (!cf) continue;
    const auto mentions = extract_frame_mentions(turn.thought, max_frame);
    if (mentions.empty()) continue;
    const FrameIndex lo = cf->start_frame - options.fidelity_tolerance;
    const FrameIndex hi = cf->end_frame + options.fidelity_tolerance;
    const bool consistent =
        std::any_of(mentions.begin(), mentions.end(), [&](FrameIndex m) { return m >= lo && m <= hi; });
    if (!consistent)
      return CcvVerdict::fail(CcvReason::Fidelity, i,
                              "thought mentions frame " + std::to_string(mentions.front()) +
                                  " but action targets " + std::to_string(cf->start_frame) + "-" +
                                  std::to_string(cf->end_frame));
  }
  return CcvVerdict::ok();
}

CcvVerdict verify(const Trajectory& traj, FrameIndex max_frame, CcvOptions options) {
  if (auto v = check_redundancy(traj); !v.pass) return v;
  if (auto v = check_logical_flow(traj); !v.pass) return v;
  return check_fidelity(traj, max_frame, options);
}

}  // namespace ccv
}  // namespace framethinker
