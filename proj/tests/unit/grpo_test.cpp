#include "framethinker/grpo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles/advantage_oracle.hpp"
#include "../oracles/finite_difference.hpp"
#include "../support.hpp"
#include "framethinker/errors.hpp"
#include "framethinker/task_gen.hpp"

using namespace framethinker;

namespace {

GroupBatch manual_batch(std::vector<double> adv, std::vector<double> lp_old, std::vector<double> lp_new) {
  GroupBatch b;
  b.query_id = "q";
  b.advantages = std::move(adv);
  b.logprob_old = std::move(lp_old);
  b.logprob_new = std::move(lp_new);
  return b;
}

}  // namespace

TEST(Advantages, Examples) {
  for (double a : grpo::compute_advantages(std::vector<double>{1, 1, 1, 1}, 1e-6)) EXPECT_EQ(a, 0.0);
  const auto a = grpo::compute_advantages(std::vector<double>{1, 0, 0, 1}, 1e-6);
  const double m = 0.5 / (0.5 + 1e-6);
  EXPECT_NEAR(a[0], m, 1e-12);
  EXPECT_NEAR(a[1], -m, 1e-12);
  EXPECT_NEAR(a[2], -m, 1e-12);
  EXPECT_NEAR(a[3], m, 1e-12);
  EXPECT_NEAR(m, 0.999998000004, 1e-12);
  // Independent high-precision evaluation, frozen.
  const auto b = grpo::compute_advantages(std::vector<double>{1.52, 0, 0, 1.0}, 1e-6);
  const std::vector<double> frozen = {1.356131828513158, -0.9599584853520108, -0.9599584853520108, 0.5637851421908634};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(b[i], frozen[i], 1e-12);
}

TEST(Advantages, CenteringScaleShiftAgainstOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int g = 2 + static_cast<int>(rng() % 15);
    std::vector<double> r(g);
    for (double& x : r) x = u(rng);
    const auto a = grpo::compute_advantages(r, 1e-6);
    const auto o = oracle::advantages(r, 1e-6);
    double mean = 0;
    for (int i = 0; i < g; ++i) {
      ASSERT_NEAR(a[i], o[i], 1e-9);
      mean += a[i];
    }
    ASSERT_NEAR(mean / g, 0.0, 1e-9);
    double var = 0;
    for (double x : a) var += x * x;
    ASSERT_LT(std::sqrt(var / g), 1.0);
    const double c = u(rng) * 10;
    std::vector<double> shifted = r;
    for (double& x : shifted) x += c;
    const auto s = grpo::compute_advantages(shifted, 1e-6);
    for (int i = 0; i < g; ++i) ASSERT_NEAR(s[i], a[i], 1e-9);
  }
}

TEST(Objective, Examples) {
  GrpoConfig cfg;
  const auto adv = grpo::compute_advantages(std::vector<double>{1, 0, 0.5, 0.2}, cfg.std_delta);
  const std::vector<double> lp = {-1, -2, -3, -4};
  EXPECT_NEAR(grpo::grpo_objective(manual_batch(adv, lp, lp), cfg), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(grpo::grpo_objective(manual_batch({1.0}, {0.0}, {std::log(1.5)}), cfg), 1.2);
  EXPECT_DOUBLE_EQ(grpo::grpo_objective(manual_batch({-1.0}, {0.0}, {std::log(0.5)}), cfg), -0.8);
}

TEST(Objective, ClipIdentityProperty) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ur(0.0, 3.0), ua(-4, 4), ue(0.01, 0.99);
  for (int i = 0; i < 10000; ++i) {
    const double r = ur(rng), a = ua(rng), e = ue(rng);
    ASSERT_DOUBLE_EQ(grpo::surrogate_term(r, a, e), oracle::clipped_term(r, a, e));
    if (r >= 1 - e && r <= 1 + e) {
      ASSERT_DOUBLE_EQ(grpo::surrogate_term(r, a, e), r * a);
    }
  }
}

TEST(Objective, NonFiniteRatio) {
  EXPECT_THROW(grpo::grpo_objective(manual_batch({1.0}, {-1000.0}, {0.0}), GrpoConfig{}), NumericalError);
}

TEST(GrpoConfig, Validation) {
  GrpoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.group_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GrpoConfig{};
  c.clip_epsilon = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GrpoConfig{};
  c.std_delta = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(GrpoConfig::small_scale().learning_rate, 1.0e-6);
  EXPECT_EQ(GrpoConfig::large_scale().learning_rate, 5.0e-7);
  EXPECT_EQ(GrpoConfig{}.group_size, 8);
}

// Two states, two actions: rows 0 and 1, slots 0 and 1 of the table.
TEST(Gradient, TwoStateTwoActionMatchesFiniteDifferences) {
  auto policy = PolicyParams::learnable({}, 0);
  const int slots = policy.menu.slots();
  policy.weights[0] = 0.3;
  policy.weights[1] = -0.4;
  policy.weights[slots] = 1.1;
  policy.weights[slots + 1] = 0.2;
  GroupBatch b;
  b.query_id = "toy";
  b.decisions = {{{0, {0, 1}, {0}}, {1, {0, 1}, {1}}}, {{0, {0, 1}, {1}}, {1, {0, 1}, {1}}},
                 {{0, {0, 1}, {0}}, {1, {0, 1}, {0}}}};
  b.advantages = grpo::compute_advantages(std::vector<double>{1.0, 0.0, 0.4}, 1e-6);
  for (const auto& d : b.decisions) b.logprob_old.push_back(decisions_logprob(policy.weights, slots, d) + 0.05);
  b.logprob_new = b.logprob_old;
  GrpoConfig cfg;
  std::vector<GroupBatch> batches{b};
  grpo::refresh_logprobs(policy, batches);
  const auto og = grpo::objective_and_gradient(policy, batches, cfg);
  const std::vector<std::size_t> idx = {0, 1, static_cast<std::size_t>(slots), static_cast<std::size_t>(slots) + 1};
  std::vector<double> x;
  for (auto k : idx) x.push_back(policy.weights[k]);
  auto f = [&](const std::vector<double>& v) {
    auto p = policy;
    for (std::size_t i = 0; i < idx.size(); ++i) p.weights[idx[i]] = v[i];
    auto copy = batches;
    grpo::refresh_logprobs(p, copy);
    return grpo::grpo_objective(copy[0], cfg);
  };
  const auto fd = oracle::central_gradient(f, x, 1e-6);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    num += (fd[i] - og.gradient[idx[i]]) * (fd[i] - og.gradient[idx[i]]);
    den += fd[i] * fd[i];
  }
  EXPECT_GT(den, 0.0);
  EXPECT_LE(std::sqrt(num / den), 1e-5);
}

namespace {

std::vector<GroupBatch> sampled_batches(const PolicyParams& policy, const std::vector<double>& rewards) {
  const auto task = std::make_shared<const Task>(testsupport::plain_task());
  std::vector<Trajectory> trajs;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    Rng rng = make_rng(i, "grpo-test");
    trajs.push_back(rollout(ZooPolicy(policy), *task, RolloutLimits{}, false, rng));
  }
  return {grpo::make_batch(task, trajs, rewards, policy, GrpoConfig{})};
}

}  // namespace

TEST(Gradient, ZeroAdvantagesLeaveParametersUnchanged) {
  const auto policy = PolicyParams::learnable({}, 0);
  auto batches = sampled_batches(policy, {0.7, 0.7, 0.7, 0.7});
  GrpoConfig cfg;
  cfg.learning_rate = 10.0;
  EXPECT_EQ(grpo::policy_gradient_step(policy, batches, cfg).weights, policy.weights);
}

TEST(Gradient, ZeroLearningRateLeavesParametersUnchanged) {
  const auto policy = PolicyParams::learnable({}, 0);
  auto batches = sampled_batches(policy, {1, 0, 0, 1});
  GrpoConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_EQ(grpo::policy_gradient_step(policy, batches, cfg).weights, policy.weights);
  cfg.learning_rate = 1.0;
  EXPECT_NE(grpo::policy_gradient_step(policy, batches, cfg).weights, policy.weights);
}

TEST(Gradient, ClippedElementsContributeNothing) {
  const auto policy = PolicyParams::learnable({}, 0);
  auto batches = sampled_batches(policy, {1, 0});
  auto& b = batches[0];
  GrpoConfig cfg;
  // Positive advantage with r above 1 + eps and negative advantage with r below 1 - eps.
  b.logprob_old[0] = b.logprob_new[0] - std::log(1.5);
  b.logprob_old[1] = b.logprob_new[1] - std::log(0.5);
  const auto og = grpo::objective_and_gradient(policy, batches, cfg);
  for (double g : og.gradient) EXPECT_EQ(g, 0.0);
  EXPECT_NEAR(og.objective, (1.2 * b.advantages[0] + 0.8 * b.advantages[1]) / 2, 1e-12);
}

TEST(Gradient, FullObjectiveMatchesFiniteDifferences) {
  CorpusSpec spec;
  spec.n = 6;
  spec.seed = 3;
  const auto tasks = generate_corpus(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto policy = PolicyParams::learnable({}, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.5);
    for (double& w : policy.weights) w = n(rng);
    auto old = policy;
    for (double& w : old.weights) w += 0.1 * n(rng);
    std::vector<GroupBatch> batches;
    for (const auto& t : tasks) {
      auto task = std::make_shared<const Task>(t);
      std::vector<Trajectory> trajs;
      std::vector<double> rewards;
      for (int g = 0; g < 4; ++g) {
        Rng r = make_rng(seed, "fd", {static_cast<std::uint64_t>(g)});
        trajs.push_back(rollout(ZooPolicy(old), *task, RolloutLimits{}, false, r));
        rewards.push_back(std::uniform_real_distribution<double>(0, 1.5)(rng));
      }
      batches.push_back(grpo::make_batch(task, trajs, rewards, old, GrpoConfig{}));
    }
    GrpoConfig cfg;
    grpo::refresh_logprobs(policy, batches);
    const auto og = grpo::objective_and_gradient(policy, batches, cfg);
    std::vector<std::size_t> touched;
    for (const auto& b : batches)
      for (const auto& ds : b.decisions)
        for (const auto& d : ds)
          for (int s : d.available) touched.push_back(static_cast<std::size_t>(d.row) * policy.menu.slots() + s);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::vector<double> x;
    for (auto k : touched) x.push_back(policy.weights[k]);
    auto f = [&](const std::vector<double>& v) {
      auto p = policy;
      for (std::size_t i = 0; i < touched.size(); ++i) p.weights[touched[i]] = v[i];
      auto copy = batches;
      grpo::refresh_logprobs(p, copy);
      double sum = 0;
      for (const auto& b : copy) sum += grpo::grpo_objective(b, cfg);
      return sum / static_cast<double>(copy.size());
    };
    EXPECT_NEAR(f(x), og.objective, 1e-12);
    const auto fd = oracle::central_gradient(f, x, 1e-6);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < touched.size(); ++i) {
      num += (fd[i] - og.gradient[touched[i]]) * (fd[i] - og.gradient[touched[i]]);
      den += fd[i] * fd[i];
    }
    ASSERT_GT(den, 0.0);
    EXPECT_LE(std::sqrt(num / den), 1e-4) << "seed " << seed;
  }
}
