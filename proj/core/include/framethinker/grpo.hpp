#pragma once

// Group Relative Policy Optimization without a KL term: group-normalized
// advantages and the clipped ratio surrogate, with analytic gradients for
// the softmax-table policy.

#include <memory>
#include <span>
#include <vector>

#include "framethinker/policy.hpp"
#include "framethinker/trajectory.hpp"

namespace framethinker {

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double std_delta = 1e-6;
  double learning_rate = 1.0e-6;

  /// Throws ConfigError unless G >= 2, 0 < epsilon < 1, delta > 0 and lr >= 0.
  void validate() const;

  static GrpoConfig small_scale();
  static GrpoConfig large_scale();
};

struct GroupBatch {
  std::string query_id;
  std::shared_ptr<const Task> task;
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> logprob_old;
  std::vector<double> logprob_new;
  // Softmax decisions behind each trajectory, shared by the old and new policy.
  std::vector<std::vector<Decision>> decisions;
};

namespace grpo {

/// A_i = (R_i - mean R) / (population std R + delta).
std::vector<double> compute_advantages(std::span<const double> rewards, double delta);

/// min(r A, clip(r, 1 - eps, 1 + eps) A).
double surrogate_term(double ratio, double advantage, double epsilon);

/// (1/G) sum_i min(r_i A_i, clip(r_i) A_i), r_i = exp(logprob_new - logprob_old).
/// Throws NumericalError ("NonFiniteRatio") when a ratio is not finite.
double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg);

/// Builds a batch from sampled trajectories: fills rewards, advantages, decisions and
/// logprob_old = logprob_new under `policy`.
GroupBatch make_batch(std::shared_ptr<const Task> task, std::vector<Trajectory> trajectories,
                      std::vector<double> rewards, const PolicyParams& policy, const GrpoConfig& cfg);

/// Recomputes logprob_new of every batch under `policy`.
void refresh_logprobs(const PolicyParams& policy, std::span<GroupBatch> batches);

struct ObjectiveGradient {
  double objective = 0.0;
  std::vector<double> gradient;
};

/// Mean over batches of grpo_objective and its analytic gradient with respect to the
/// policy's logits, evaluated at the batches' logprob_new.
ObjectiveGradient objective_and_gradient(const PolicyParams& policy, std::span<const GroupBatch> batches,
                                         const GrpoConfig& cfg);

/// One plain gradient-ascent step. Throws NumericalError ("NonFiniteGradient").
PolicyParams policy_gradient_step(const PolicyParams& policy, std::span<GroupBatch> batches,
                                  const GrpoConfig& cfg);

}  // namespace grpo
}  // namespace framethinker
