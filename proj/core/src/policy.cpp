#include "framethinker/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "framethinker/errors.hpp"

namespace framethinker {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::Random: return "random";
    case PolicyKind::GfnSpammer: return "gfn_spammer";
    case PolicyKind::CfSpammer: return "cf_spammer";
    case PolicyKind::TurnSpammer: return "turn_spammer";
    case PolicyKind::GiveUp: return "give_up";
    case PolicyKind::Learnable: return "learnable";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
  for (auto k : {PolicyKind::Oracle, PolicyKind::Random, PolicyKind::GfnSpammer, PolicyKind::CfSpammer,
                 PolicyKind::TurnSpammer, PolicyKind::GiveUp, PolicyKind::Learnable})
    if (to_string(k) == text) return k;
  throw ConfigError("unknown policy kind: " + std::string(text));
}

PolicyParams PolicyParams::learnable(MenuSpec menu, std::uint64_t seed) {
  PolicyParams p;
  p.kind = PolicyKind::Learnable;
  p.seed = seed;
  p.menu = menu;
  p.weights.assign(static_cast<std::size_t>(menu.rows()) * menu.slots(), 0.0);
  return p;
}

PolicyParams PolicyParams::scripted(PolicyKind kind, MenuSpec menu, std::uint64_t seed) {
  if (kind == PolicyKind::Learnable) return learnable(menu, seed);
  PolicyParams p;
  p.kind = kind;
  p.seed = seed;
  p.menu = menu;
  return p;
}

int PolicyState::row(const MenuSpec& menu) const {
  const int t = std::clamp(turn, 0, menu.max_turns - 1);
  const int feature = (query_has_timestamp ? (1 << menu.max_options) : 0) + static_cast<int>(evidence_bits);
  return feature * menu.max_turns + t;
}

PolicyState policy_state(const MenuSpec& menu, const Task& task, const Trajectory& history) {
  PolicyState s;
  s.query_has_timestamp = task.timestamp_hint().has_value();
  s.turn = static_cast<int>(history.turns.size());
  s.last_frame_number = history.last_frame_number();
  for (const auto& token : history.revealed_tokens()) {
    const auto* e = task.video->find_event(token);
    if (!e || !e->supports) continue;
    const int idx = *e->supports - 'A';
    if (idx >= 0 && idx < menu.max_options && task.has_option(*e->supports)) s.evidence_bits |= 1u << idx;
  }
  return s;
}

namespace {

Timestamp probe_timestamp(const Task& task) {
  if (auto hint = task.timestamp_hint()) return *hint;
  const int mid = static_cast<int>(task.video->duration_s / 2.0);
  return {std::min(mid / 60, 99), mid % 60};
}

std::pair<FrameIndex, FrameIndex> bin_range(const SyntheticVideo& v, int bins, int b) {
  return {static_cast<FrameIndex>(b) * v.total_frames / bins,
          static_cast<FrameIndex>(b + 1) * v.total_frames / bins - 1};
}

std::string interval_thought(FrameIndex s, FrameIndex e) {
  return "scan frames " + std::to_string(s) + " to " + std::to_string(e) + " for the missing evidence";
}

std::string answer_thought(AnswerLabel label, unsigned bits) {
  if (bits == 0) return std::string("no decisive evidence yet, settle on option ") + label;
  return std::string("the retrieved evidence supports option ") + label;
}

AnswerLabel deterministic_guess(const PolicyParams& p, const Task& task) {
  return task.options[derive_seed(p.seed, task.task_id) % task.options.size()];
}

int non_answer_turns(const Trajectory& h) {
  int n = 0;
  for (const auto& t : h.turns)
    if (t.action && !is_answer(*t.action)) ++n;
  return n;
}

bool executed(const Trajectory& h, const Action& a) {
  for (const auto& t : h.turns)
    if (t.action && *t.action == a && t.observation) return true;
  return false;
}

MenuEntry oracle_entry(const Task& task, const Trajectory& history) {
  const auto revealed = history.revealed_tokens();
  const auto last = history.last_frame_number();
  for (const auto& token : task.required_tokens) {
    if (revealed.count(token)) continue;
    const auto* e = task.video->find_event(token);
    if (e->timestamp_hint) {
      GetFrameNumber gfn{e->timestamp_hint->minutes, e->timestamp_hint->seconds};
      if (!executed(history, gfn))
        return {0, gfn, "the question points to " + format_timestamp(*e->timestamp_hint) + ", locate that moment"};
    }
    ChooseFrames cf{e->start_frame, e->end_frame};
    if (executed(history, cf)) break;
    std::string thought = "frames " + std::to_string(e->start_frame) + " to " + std::to_string(e->end_frame) +
                          " should hold the evidence";
    if (last) thought = "frame " + std::to_string(*last) + " anchors the search; " + thought;
    return {0, cf, thought};
  }
  return {0, OutputAnswer{task.correct}, std::string("the evidence settles option ") + task.correct};
}

MenuEntry scripted_entry(const PolicyParams& p, const Task& task, const Trajectory& history) {
  const MenuSpec& m = p.menu;
  const int spent = non_answer_turns(history);
  const AnswerLabel guess = deterministic_guess(p, task);
  switch (p.kind) {
    case PolicyKind::Oracle: return oracle_entry(task, history);
    case PolicyKind::GiveUp: return {0, OutputAnswer{task.options.front()}, "give up"};
    case PolicyKind::GfnSpammer: {
      if (spent >= m.spam_turns) return {0, OutputAnswer{guess}, "I need to first answer"};
      const auto ts = probe_timestamp(task);
      return {0, GetFrameNumber{ts.minutes, ts.seconds}, "I need to first I need to first"};
    }
    case PolicyKind::CfSpammer: {
      if (spent >= m.spam_turns) return {0, OutputAnswer{guess}, "the options and the choices"};
      return {0, ChooseFrames{0, task.video->max_frame()},
              "considering the options and the choices, the choice among the options is a choice"};
    }
    case PolicyKind::TurnSpammer: {
      if (spent >= m.spam_turns) {
        const Action a = OutputAnswer{guess};
        return {0, a, action_text(a)};
      }
      const auto [s, e] = bin_range(*task.video, m.bins, spent % m.bins);
      const Action a = ChooseFrames{s, std::max(s, e)};
      return {0, a, action_text(a)};
    }
    case PolicyKind::Random:
    case PolicyKind::Learnable: break;
  }
  throw std::logic_error("scripted_entry: not a scripted policy");
}

bool is_softmax(PolicyKind k) { return k == PolicyKind::Learnable || k == PolicyKind::Random; }

std::vector<double> state_probabilities(const PolicyParams& p, int row, std::span<const int> available) {
  if (p.kind == PolicyKind::Random || p.weights.empty()) return std::vector<double>(available.size(), 1.0 / available.size());
  return masked_softmax(p.row(row), available);
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = uniform_unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

void check_task_fits(const MenuSpec& menu, const Task& task) {
  for (AnswerLabel l : task.options)
    if (l < 'A' || l - 'A' >= menu.max_options)
      throw ActionOffMenu("task " + task.task_id + " has option " + l + " beyond the answer menu");
}

}  // namespace

std::vector<MenuEntry> menu_entries(const MenuSpec& menu, const Task& task, const PolicyState& state) {
  check_task_fits(menu, task);
  const SyntheticVideo& v = *task.video;
  std::vector<MenuEntry> out;
  for (int i = 0; i < menu.max_options; ++i) {
    const AnswerLabel label = static_cast<AnswerLabel>('A' + i);
    if (task.has_option(label)) out.push_back({i, OutputAnswer{label}, answer_thought(label, state.evidence_bits)});
  }
  if (state.turn >= menu.max_turns - 1) return out;

  auto add_interval = [&](int slot, FrameIndex s, FrameIndex e) {
    if (s <= e) out.push_back({slot, ChooseFrames{s, e}, interval_thought(s, e)});
  };
  for (int b = 0; b < menu.bins; ++b) {
    const auto [s, e] = bin_range(v, menu.bins, b);
    add_interval(menu.first_bin_slot() + b, s, e);
  }
  for (int b = 0; b + 1 < menu.bins; ++b) {
    const auto lo = bin_range(v, menu.bins, b);
    const auto hi = bin_range(v, menu.bins, b + 1);
    add_interval(menu.first_pair_slot() + b, lo.first, hi.second);
  }
  const Timestamp ts = probe_timestamp(task);
  out.push_back({menu.gfn_slot(), GetFrameNumber{ts.minutes, ts.seconds},
                 "the moment at " + format_timestamp(ts) + " matters, locate its frame"});
  if (state.last_frame_number) {
    const FrameIndex f = *state.last_frame_number;
    const auto w = static_cast<FrameIndex>(std::round(menu.zoom_half_width_s * v.fps));
    const FrameIndex s = std::max<FrameIndex>(0, f - w);
    const FrameIndex e = std::min(v.max_frame(), f + w);
    out.push_back({menu.zoom_slot(), ChooseFrames{s, e},
                   "zoom in around frame " + std::to_string(f) + ", frames " + std::to_string(s) + " to " +
                       std::to_string(e)});
  }
  return out;
}

std::vector<double> masked_softmax(std::span<const double> logits, std::span<const int> available) {
  double hi = -std::numeric_limits<double>::infinity();
  for (int s : available) hi = std::max(hi, logits[s]);
  std::vector<double> p(available.size());
  double z = 0.0;
  for (std::size_t i = 0; i < available.size(); ++i) z += p[i] = std::exp(logits[available[i]] - hi);
  for (double& x : p) x /= z;
  return p;
}

std::vector<Decision> softmax_decisions(const MenuSpec& menu, const Task& task, const Trajectory& traj) {
  std::vector<Decision> out;
  Trajectory prefix;
  prefix.task_id = traj.task_id;
  prefix.max_frame = traj.max_frame;
  prefix.initial_observation = traj.initial_observation;
  for (const auto& turn : traj.turns) {
    if (!turn.action) throw ActionOffMenu("unparsed turn in trajectory of " + traj.task_id);
    const PolicyState state = policy_state(menu, task, prefix);
    Decision d;
    d.row = state.row(menu);
    for (const auto& entry : menu_entries(menu, task, state)) {
      d.available.push_back(entry.slot);
      if (entry.action == *turn.action) d.taken.push_back(entry.slot);
    }
    if (d.taken.empty())
      throw ActionOffMenu("'" + action_text(*turn.action) + "' is not on the menu at turn " +
                          std::to_string(state.turn));
    out.push_back(std::move(d));
    prefix.turns.push_back(turn);
  }
  return out;
}

double decisions_logprob(std::span<const double> weights, int slots, std::span<const Decision> decisions) {
  double lp = 0.0;
  for (const auto& d : decisions) {
    const auto p = masked_softmax(weights.subspan(static_cast<std::size_t>(d.row) * slots, slots), d.available);
    double taken = 0.0;
    for (std::size_t i = 0; i < d.available.size(); ++i)
      if (std::find(d.taken.begin(), d.taken.end(), d.available[i]) != d.taken.end()) taken += p[i];
    lp += std::log(taken);
  }
  return lp;
}

void accumulate_logprob_gradient(std::span<const double> weights, int slots,
                                 std::span<const Decision> decisions, double scale,
                                 std::span<double> grad) {
  for (const auto& d : decisions) {
    const std::size_t base = static_cast<std::size_t>(d.row) * slots;
    const auto p = masked_softmax(weights.subspan(base, slots), d.available);
    double taken = 0.0;
    std::vector<bool> in_taken(d.available.size());
    for (std::size_t i = 0; i < d.available.size(); ++i) {
      in_taken[i] = std::find(d.taken.begin(), d.taken.end(), d.available[i]) != d.taken.end();
      if (in_taken[i]) taken += p[i];
    }
    // d/dz_k log sum_{s in taken} p_s = [k in taken] p_k / P_taken - p_k
    for (std::size_t i = 0; i < d.available.size(); ++i)
      grad[base + d.available[i]] += scale * ((in_taken[i] ? p[i] / taken : 0.0) - p[i]);
  }
}

double logprob(const PolicyParams& policy, const Task& task, const Trajectory& traj) {
  if (is_softmax(policy.kind)) {
    const auto decisions = softmax_decisions(policy.menu, task, traj);
    if (policy.kind == PolicyKind::Random) {
      double lp = 0.0;
      for (const auto& d : decisions)
        lp += std::log(static_cast<double>(d.taken.size()) / static_cast<double>(d.available.size()));
      return lp;
    }
    return decisions_logprob(policy.weights, policy.menu.slots(), decisions);
  }
  Trajectory prefix;
  prefix.task_id = traj.task_id;
  prefix.max_frame = traj.max_frame;
  prefix.initial_observation = traj.initial_observation;
  for (const auto& turn : traj.turns) {
    const MenuEntry expected = scripted_entry(policy, task, prefix);
    if (!turn.action || *turn.action != expected.action)
      throw ActionOffMenu(std::string(to_string(policy.kind)) + " would not take this action");
    prefix.turns.push_back(turn);
  }
  return 0.0;
}

ZooPolicy::ZooPolicy(PolicyParams params) : params_(std::move(params)) {
  if (params_.kind == PolicyKind::Learnable &&
      params_.weights.size() != static_cast<std::size_t>(params_.menu.rows()) * params_.menu.slots())
    throw std::invalid_argument("learnable policy weight table has the wrong shape");
}

std::string ZooPolicy::act(const Task& task, const Trajectory& history, Rng& rng) const {
  if (!is_softmax(params_.kind)) {
    const MenuEntry e = scripted_entry(params_, task, history);
    return serialize_response(e.thought, e.action);
  }
  const PolicyState state = policy_state(params_.menu, task, history);
  const auto entries = menu_entries(params_.menu, task, state);
  std::vector<int> available;
  available.reserve(entries.size());
  for (const auto& e : entries) available.push_back(e.slot);
  const auto probs = state_probabilities(params_, state.row(params_.menu), available);
  const auto& chosen = entries[sample_index(probs, rng)];
  return serialize_response(chosen.thought, chosen.action);
}

AnswerLabel ZooPolicy::fallback(const Task& task, const Trajectory& partial, Rng& rng) const {
  switch (params_.kind) {
    case PolicyKind::Oracle: return task.correct;
    case PolicyKind::GiveUp: return 'A';
    case PolicyKind::Random: return task.options[uniform_index(rng, task.options.size())];
    case PolicyKind::Learnable: {
      const PolicyState state = policy_state(params_.menu, task, partial);
      std::vector<int> answers;
      for (const auto& e : menu_entries(params_.menu, task, state))
        if (is_answer(e.action)) answers.push_back(e.slot);
      const auto probs = masked_softmax(params_.row(state.row(params_.menu)), answers);
      return static_cast<AnswerLabel>('A' + answers[sample_index(probs, rng)]);
    }
    default: return deterministic_guess(params_, task);
  }
}

std::string act(const PolicyParams& policy, const Task& task, const Trajectory& history, Rng& rng) {
  return ZooPolicy(policy).act(task, history, rng);
}

std::string save_checkpoint(const PolicyParams& p) {
  std::ostringstream os;
  os << "framethinker-policy v1\n";
  os << "kind " << to_string(p.kind) << "\n";
  os << "seed " << p.seed << "\n";
  os << "max_turns " << p.menu.max_turns << "\n";
  os << "bins " << p.menu.bins << "\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p.menu.zoom_half_width_s);
  os << "zoom_half_width_s " << buf << "\n";
  os << "max_options " << p.menu.max_options << "\n";
  os << "spam_turns " << p.menu.spam_turns << "\n";
  const bool table = !p.weights.empty();
  os << "rows " << (table ? p.menu.rows() : 0) << "\n";
  os << "slots " << p.menu.slots() << "\n";
  if (table) {
    for (int r = 0; r < p.menu.rows(); ++r) {
      const auto row = p.row(r);
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        os << (i ? " " : "") << buf;
      }
      os << "\n";
    }
  }
  os << "end\n";
  return os.str();
}

PolicyParams load_checkpoint(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "framethinker-policy" || version != "v1")
    throw DataError("not a v1 policy checkpoint");
  auto field = [&](const char* key) {
    std::string k, v;
    if (!(is >> k >> v) || k != key) throw DataError(std::string("checkpoint: expected field ") + key);
    return v;
  };
  try {
    PolicyParams p;
    p.kind = parse_policy_kind(field("kind"));
    p.seed = std::stoull(field("seed"));
    p.menu.max_turns = std::stoi(field("max_turns"));
    p.menu.bins = std::stoi(field("bins"));
    p.menu.zoom_half_width_s = std::stod(field("zoom_half_width_s"));
    p.menu.max_options = std::stoi(field("max_options"));
    p.menu.spam_turns = std::stoi(field("spam_turns"));
    const int rows = std::stoi(field("rows"));
    const int slots = std::stoi(field("slots"));
    if (slots != p.menu.slots() || (rows != 0 && rows != p.menu.rows()))
      throw DataError("checkpoint: table shape disagrees with menu");
    p.weights.resize(static_cast<std::size_t>(rows) * slots);
    for (double& w : p.weights) {
      std::string tok;
      if (!(is >> tok)) throw DataError("checkpoint: truncated weight table");
      w = std::stod(tok);
      if (!std::isfinite(w)) throw DataError("checkpoint: non-finite logit");
    }
    std::string end;
    if (!(is >> end) || end != "end") throw DataError("checkpoint: missing end marker");
    if (p.kind == PolicyKind::Learnable && p.weights.empty()) throw DataError("checkpoint: learnable policy without weights");
    return p;
  } catch (const std::logic_error& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace framethinker
