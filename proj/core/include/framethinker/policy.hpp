#pragma once

// Scripted and learnable policies. The learnable policy is a softmax table:
// one row of logits per abstract state (query names a timestamp, option
// evidence seen so far, turn index), one column per slot of a fixed action menu.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "framethinker/trajectory.hpp"

namespace framethinker {

enum class PolicyKind { Oracle, Random, GfnSpammer, CfSpammer, TurnSpammer, GiveUp, Learnable };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view text);

class ActionOffMenu : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MenuSpec {
  // Must equal the rollout's max_turns: the last turn offers answers only.
  int max_turns = 6;
  // The video is cut into this many equal bins; the menu covers each bin and each adjacent pair.
  int bins = 8;
  // Half-width of the zoom window around a returned frame number.
  double zoom_half_width_s = 2.0;
  // Answer slots; tasks with more options are rejected.
  int max_options = 4;
  // Non-answer turns a scripted spammer takes before guessing.
  int spam_turns = 3;

  int answer_slots() const { return max_options; }
  int first_bin_slot() const { return max_options; }
  int first_pair_slot() const { return max_options + bins; }
  int gfn_slot() const { return max_options + 2 * bins - 1; }
  int zoom_slot() const { return gfn_slot() + 1; }
  int slots() const { return zoom_slot() + 1; }
  int rows() const { return 2 * (1 << max_options) * max_turns; }
  friend bool operator==(const MenuSpec&, const MenuSpec&) = default;
};

struct PolicyParams {
  PolicyKind kind = PolicyKind::Learnable;
  std::uint64_t seed = 0;
  MenuSpec menu;
  // Row-major rows() x slots() logits; populated for Learnable only.
  std::vector<double> weights;

  static PolicyParams learnable(MenuSpec menu, std::uint64_t seed);
  static PolicyParams scripted(PolicyKind kind, MenuSpec menu, std::uint64_t seed);

  std::span<const double> row(int r) const {
    return std::span<const double>(weights).subspan(static_cast<std::size_t>(r) * menu.slots(),
                                                    static_cast<std::size_t>(menu.slots()));
  }
};

struct MenuEntry {
  int slot = 0;
  Action action;
  std::string thought;
};

/// Abstract state a decision is taken in, reconstructed from the trajectory so far.
struct PolicyState {
  bool query_has_timestamp = false;
  unsigned evidence_bits = 0;
  int turn = 0;
  std::optional<FrameIndex> last_frame_number;

  int row(const MenuSpec& menu) const;
};

PolicyState policy_state(const MenuSpec& menu, const Task& task, const Trajectory& history);

/// Available menu entries in a state, ascending by slot.
std::vector<MenuEntry> menu_entries(const MenuSpec& menu, const Task& task, const PolicyState& state);

/// One sampled action of a softmax policy: the state row, the slots available there,
/// and the slots whose action equals the action actually taken.
struct Decision {
  int row = 0;
  std::vector<int> available;
  std::vector<int> taken;
};

/// Decisions behind every action turn of `traj`. Throws ActionOffMenu when an action
/// is not on the menu of its state. Depends on the menu only, not on the weights.
std::vector<Decision> softmax_decisions(const MenuSpec& menu, const Task& task, const Trajectory& traj);

/// Softmax over `available` slots of one logit row.
std::vector<double> masked_softmax(std::span<const double> logits, std::span<const int> available);

/// Sum over decisions of log P(taken) under the table `weights` (row-major, `slots` wide).
double decisions_logprob(std::span<const double> weights, int slots, std::span<const Decision> decisions);

/// grad += scale * d/dweights decisions_logprob.
void accumulate_logprob_gradient(std::span<const double> weights, int slots,
                                 std::span<const Decision> decisions, double scale,
                                 std::span<double> grad);

/// Trajectory log-probability. Scripted policies return 0 for their own trajectories
/// and throw ActionOffMenu for anything else.
double logprob(const PolicyParams& policy, const Task& task, const Trajectory& traj);

/// Polymorphic wrapper used by rollout. Holds an immutable snapshot of the parameters.
class ZooPolicy final : public Policy {
 public:
  explicit ZooPolicy(PolicyParams params);

  std::string act(const Task& task, const Trajectory& history, Rng& rng) const override;
  AnswerLabel fallback(const Task& task, const Trajectory& partial, Rng& rng) const override;

  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
};

/// Serialized raw response a policy emits next; convenience over ZooPolicy::act.
std::string act(const PolicyParams& policy, const Task& task, const Trajectory& history, Rng& rng);

/// Versioned flat-text checkpoint: kind, seed, menu and the weight table.
std::string save_checkpoint(const PolicyParams& policy);
PolicyParams load_checkpoint(std::string_view text);

}  // namespace framethinker
