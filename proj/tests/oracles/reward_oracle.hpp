#pragma once

// Scores a trajectory summary from the reward formulas directly. Inputs are the
// facts a human scorer reads off a trajectory, not library objects.

#include <algorithm>
#include <stdexcept>
#include <string>

namespace oracle {

struct TrajectoryFacts {
  bool answered = false;
  bool correct = false;
  int executed_cf = 0;
  int executed_gfn = 0;
  int turns = 0;
  bool all_parsed = true;
  bool ccv_pass = true;
};

struct RewardKnobs {
  double lambda_cf = 0.02;
  double lambda_gfn = 0.5;
  bool conditional = true;
  bool gate = true;
  double turn_k = 0.0;
  double turn_cap = 0.6;
  bool turn_conditional = false;
  double format = 0.0;
  bool count = false;
};

struct Score {
  int acc = 0;
  double action = 0.0;
  double total = 0.0;
  int v = 1;
  double final_reward = 0.0;
};

inline RewardKnobs preset_knobs(const std::string& name) {
  RewardKnobs k;
  if (name == "large-scale") return k;
  k.lambda_cf = 0.0;
  k.lambda_gfn = 0.2;
  if (name == "small-scale") return k;
  if (name == "format-ablation") {
    k.format = 1.0;
    return k;
  }
  if (name == "unconditional-gfn" || name == "unconditional-cf") {
    k.conditional = false;
    k.gate = false;
    if (name == "unconditional-cf") std::swap(k.lambda_cf, k.lambda_gfn);
    return k;
  }
  if (name == "turn-unconditional" || name == "turn-conditional") {
    k.lambda_gfn = 0.0;
    k.turn_k = 0.2;
    k.turn_conditional = name == "turn-conditional";
    return k;
  }
  throw std::invalid_argument("unknown preset " + name);
}

inline Score score(const TrajectoryFacts& f, const RewardKnobs& k) {
  Score s;
  s.acc = (f.answered && f.correct) ? 1 : 0;
  if (k.turn_k > 0.0) {
    const double raw = std::min(k.turn_k * (f.turns - 1), k.turn_cap);
    s.action = (k.turn_conditional && s.acc == 0) ? 0.0 : std::max(raw, 0.0);
  } else {
    const double cf = k.count ? f.executed_cf : (f.executed_cf > 0 ? 1 : 0);
    const double gfn = k.count ? f.executed_gfn : (f.executed_gfn > 0 ? 1 : 0);
    s.action = k.lambda_cf * cf + k.lambda_gfn * gfn;
    if (k.conditional && s.acc == 0) s.action = 0.0;
  }
  const double fmt = f.all_parsed ? k.format : 0.0;
  s.total = s.acc + s.action + fmt;
  s.v = (k.gate && !f.ccv_pass) ? 0 : 1;
  s.final_reward = s.total * s.v;
  return s;
}

}  // namespace oracle
