#pragma once

// Reward design space: accuracy, conditional/unconditional action-presence
// bonuses, the turn-count bonus, the format bonus and the CCV gate.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "framethinker/ccv.hpp"
#include "framethinker/trajectory.hpp"

namespace framethinker {

struct RewardConfig {
  double lambda_cf = 0.02;
  double lambda_gfn = 0.5;
  // Action bonus paid only together with a correct answer.
  bool conditional_bonus = true;
  bool ccv_gate = true;
  // k of the turn bonus min(k * (T - 1), cap); 0 disables it. Replaces the lambda bonuses.
  double turn_reward_k = 0.0;
  double turn_reward_cap = 0.6;
  bool turn_reward_conditional = false;
  // Paid when every turn's output parsed. Ablation only.
  double format_reward = 0.0;
  // Count every occurrence instead of presence. Experimental, off by default.
  bool count_occurrences = false;

  /// Throws ConfigError on negative or non-finite values, or turn bonus mixed with lambdas.
  void validate() const;
};

/// Named presets: small-scale, large-scale, unconditional-gfn, unconditional-cf,
/// turn-unconditional, turn-conditional, format-ablation. Throws ConfigError if unknown.
RewardConfig reward_preset(std::string_view name);
const std::vector<std::string>& reward_preset_names();

struct RewardBreakdown {
  int r_acc = 0;
  double r_action = 0.0;
  double r_format = 0.0;
  double r_total = 0.0;
  int v_ccv = 1;
  double r_final = 0.0;
  std::optional<CcvReason> ccv_reason;
};

namespace reward {

int accuracy_reward(const Trajectory& traj, const Task& task);

/// Executed actions only: a turn counts when its action produced a non-terminal observation.
int count_choose_frames(const Trajectory& traj);
int count_get_frame_number(const Trajectory& traj);

double action_bonus(const Trajectory& traj, const RewardConfig& cfg, int r_acc);

/// True when every turn's raw output parsed.
bool well_formed(const Trajectory& traj);

RewardBreakdown score(const Trajectory& traj, const Task& task, const RewardConfig& cfg,
                      const CcvVerdict& verdict);

}  // namespace reward
}  // namespace framethinker
