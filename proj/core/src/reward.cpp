#include "framethinker/reward.hpp"

#include <algorithm>
#include <cmath>

#include "framethinker/errors.hpp"

namespace framethinker {

void RewardConfig::validate() const {
  for (double v : {lambda_cf, lambda_gfn, turn_reward_k, turn_reward_cap, format_reward})
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("reward weights must be finite and non-negative");
  if (turn_reward_k > 0.0 && (lambda_cf > 0.0 || lambda_gfn > 0.0))
    throw ConfigError("turn reward replaces the action bonus; set lambda_cf = lambda_gfn = 0");
}

RewardConfig reward_preset(std::string_view name) {
  RewardConfig c;
  if (name == "large-scale") return c;
  if (name == "small-scale" || name == "format-ablation") {
    c.lambda_gfn = 0.2;
    c.lambda_cf = 0.0;
    if (name == "format-ablation") c.format_reward = 1.0;
    return c;
  }
  if (name == "unconditional-gfn" || name == "unconditional-cf") {
    const bool gfn = name == "unconditional-gfn";
    c.lambda_gfn = gfn ? 0.2 : 0.0;
    c.lambda_cf = gfn ? 0.0 : 0.2;
    c.conditional_bonus = false;
    c.ccv_gate = false;
    return c;
  }
  if (name == "turn-unconditional" || name == "turn-conditional") {
    c.lambda_gfn = 0.0;
    c.lambda_cf = 0.0;
    c.turn_reward_k = 0.2;
    c.turn_reward_cap = 0.6;
    c.turn_reward_conditional = name == "turn-conditional";
    return c;
  }
  throw ConfigError("unknown reward preset: " + std::string(name));
}

const std::vector<std::string>& reward_preset_names() {
  static const std::vector<std::string> names = {
      "small-scale",        "large-scale",      "unconditional-gfn", "unconditional-cf",
      "turn-unconditional", "turn-conditional", "format-ablation"};
  return names;
}

namespace reward {

namespace {

template <typename A>
int count_executed(const Trajectory& traj) {
  int n = 0;
  for (const auto& t : traj.turns)
    if (t.action && std::holds_alternative<A>(*t.action) && t.observation &&
        !std::holds_alternative<TerminalObservation>(*t.observation))
      ++n;
  return n;
}

}  // namespace

int accuracy_reward(const Trajectory& traj, const Task& task) {
  return traj.terminal_status == TerminalStatus::Answered && traj.answer && *traj.answer == task.correct
             ? 1
             : 0;
}

int count_choose_frames(const Trajectory& traj) { return count_executed<ChooseFrames>(traj); }
int count_get_frame_number(const Trajectory& traj) { return count_executed<GetFrameNumber>(traj); }

double action_bonus(const Trajectory& traj, const RewardConfig& cfg, int r_acc) {
  if (cfg.turn_reward_k > 0.0) {
    const double bonus = std::max(0.0, std::min(cfg.turn_reward_k * (traj.n_turns - 1), cfg.turn_reward_cap));
    return cfg.turn_reward_conditional ? bonus * r_acc : bonus;
  }
  const int cf = count_choose_frames(traj);
  const int gfn = count_get_frame_number(traj);
  const double b = cfg.count_occurrences
                       ? cfg.lambda_cf * cf + cfg.lambda_gfn * gfn
                       : cfg.lambda_cf * (cf > 0 ? 1 : 0) + cfg.lambda_gfn * (gfn > 0 ? 1 : 0);
  return cfg.conditional_bonus ? b * r_acc : b;
}

bool well_formed(const Trajectory& traj) {
  return std::all_of(traj.turns.begin(), traj.turns.end(), [](const Turn& t) { return t.action.has_value(); });
}

RewardBreakdown score(const Trajectory& traj, const Task& task, const RewardConfig& cfg,
                      const CcvVerdict& verdict) {
  RewardBreakdown b;
  b.r_acc = accuracy_reward(traj, task);
  b.r_action = action_bonus(traj, cfg, b.r_acc);
  b.r_format = cfg.format_reward > 0.0 && well_formed(traj) ? cfg.format_reward : 0.0;
  b.r_total = b.r_acc + b.r_action + b.r_format;
  b.v_ccv = cfg.ccv_gate && !verdict.pass ? 0 : 1;
  if (b.v_ccv == 0) b.ccv_reason = verdict.reason;
  b.r_final = b.r_total * b.v_ccv;
  return b;
}

}  // namespace reward
}  // namespace framethinker
