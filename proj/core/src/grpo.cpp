#include "framethinker/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "framethinker/errors.hpp"

namespace framethinker {

void GrpoConfig::validate() const {
  if (group_size < 2) throw ConfigError("group_size must be at least 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("clip_epsilon must lie in (0, 1)");
  if (!(std_delta > 0.0) || !std::isfinite(std_delta)) throw ConfigError("std_delta must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be non-negative");
}

GrpoConfig GrpoConfig::small_scale() { return {}; }

GrpoConfig GrpoConfig::large_scale() {
  GrpoConfig c;
  c.learning_rate = 5.0e-7;
  return c;
}

namespace grpo {

std::vector<double> compute_advantages(std::span<const double> rewards, double delta) {
  const double n = static_cast<double>(rewards.size());
  // Mean and variance of offsets from the first reward.
  const double ref = rewards.empty() ? 0.0 : rewards.front();
  double offset = 0.0;
  for (double r : rewards) offset += r - ref;
  offset /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - ref - offset) * (r - ref - offset);
  const double denom = std::sqrt(var / n) + delta;
  std::vector<double> adv;
  adv.reserve(rewards.size());
  for (double r : rewards) adv.push_back((r - ref - offset) / denom);
  return adv;
}

double surrogate_term(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

double ratio_of(const GroupBatch& b, std::size_t i) {
  const double r = std::exp(b.logprob_new[i] - b.logprob_old[i]);
  if (!std::isfinite(r)) throw NumericalError("NonFiniteRatio in batch " + b.query_id);
  return r;
}

}  // namespace

double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg) {
  const std::size_t g = batch.advantages.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) sum += surrogate_term(ratio_of(batch, i), batch.advantages[i], cfg.clip_epsilon);
  return sum / static_cast<double>(g);
}

GroupBatch make_batch(std::shared_ptr<const Task> task, std::vector<Trajectory> trajectories,
                      std::vector<double> rewards, const PolicyParams& policy, const GrpoConfig& cfg) {
  GroupBatch b;
  b.query_id = task->task_id;
  b.task = std::move(task);
  b.trajectories = std::move(trajectories);
  b.rewards = std::move(rewards);
  b.advantages = compute_advantages(b.rewards, cfg.std_delta);
  for (const auto& t : b.trajectories) b.decisions.push_back(softmax_decisions(policy.menu, *b.task, t));
  for (const auto& d : b.decisions) b.logprob_old.push_back(decisions_logprob(policy.weights, policy.menu.slots(), d));
  b.logprob_new = b.logprob_old;
  return b;
}

void refresh_logprobs(const PolicyParams& policy, std::span<GroupBatch> batches) {
  for (auto& b : batches)
    for (std::size_t i = 0; i < b.decisions.size(); ++i)
      b.logprob_new[i] = decisions_logprob(policy.weights, policy.menu.slots(), b.decisions[i]);
}

ObjectiveGradient objective_and_gradient(const PolicyParams& policy, std::span<const GroupBatch> batches,
                                         const GrpoConfig& cfg) {
  ObjectiveGradient out;
  out.gradient.assign(policy.weights.size(), 0.0);
  const int slots = policy.menu.slots();
  const double per_batch = 1.0 / static_cast<double>(batches.size());
  for (const auto& b : batches) {
    const double g = static_cast<double>(b.advantages.size());
    for (std::size_t i = 0; i < b.advantages.size(); ++i) {
      const double r = ratio_of(b, i);
      const double a = b.advantages[i];
      const double unclipped = r * a;
      const double clipped = std::clamp(r, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * a;
      out.objective += per_batch * std::min(unclipped, clipped) / g;
      // The clipped branch is constant in r; only the unclipped branch carries gradient.
      if (unclipped <= clipped)
        accumulate_logprob_gradient(policy.weights, slots, b.decisions[i], per_batch * a * r / g, out.gradient);
    }
  }
  return out;
}

PolicyParams policy_gradient_step(const PolicyParams& policy, std::span<GroupBatch> batches,
                                  const GrpoConfig& cfg) {
  if (batches.empty()) throw std::invalid_argument("policy_gradient_step: no batches");
  refresh_logprobs(policy, batches);
  const auto og = objective_and_gradient(policy, batches, cfg);
  for (double g : og.gradient)
    if (!std::isfinite(g)) throw NumericalError("NonFiniteGradient");
  PolicyParams next = policy;
  for (std::size_t k = 0; k < next.weights.size(); ++k) next.weights[k] += cfg.learning_rate * og.gradient[k];
  return next;
}

}  // namespace grpo
}  // namespace framethinker
