#include "framethinker/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "framethinker/errors.hpp"
#include "framethinker/rng.hpp"

namespace framethinker {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long x = std::stoull(v, &pos);
      if (pos == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a finite number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<QuestionKind> to_kinds(const std::string& key, const std::string& v) {
  std::vector<QuestionKind> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_question_kind(trim(item)));
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty kind list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"corpus", [](auto& c, auto&, auto& v) { c.corpus = v; }},
      {"corpus.n", [](auto& c, auto& k, auto& v) { c.corpus_spec.n = static_cast<int>(to_int(k, v)); }},
      {"corpus.profile",
       [](auto& c, auto&, auto& v) { c.corpus_spec.profile = parse_duration_profile(v); }},
      {"corpus.kinds", [](auto& c, auto& k, auto& v) { c.corpus_spec.kinds = to_kinds(k, v); }},
      {"corpus.options",
       [](auto& c, auto& k, auto& v) { c.corpus_spec.options = static_cast<int>(to_int(k, v)); }},
      {"corpus.distractors",
       [](auto& c, auto& k, auto& v) { c.corpus_spec.distractors = static_cast<int>(to_int(k, v)); }},
      {"reward.preset", [](auto&, auto&, auto&) {}},
      {"reward.lambda_cf", [](auto& c, auto& k, auto& v) { c.reward.lambda_cf = to_double(k, v); }},
      {"reward.lambda_gfn", [](auto& c, auto& k, auto& v) { c.reward.lambda_gfn = to_double(k, v); }},
      {"reward.conditional_bonus",
       [](auto& c, auto& k, auto& v) { c.reward.conditional_bonus = to_bool(k, v); }},
      {"reward.ccv_gate", [](auto& c, auto& k, auto& v) { c.reward.ccv_gate = to_bool(k, v); }},
      {"reward.turn_k", [](auto& c, auto& k, auto& v) { c.reward.turn_reward_k = to_double(k, v); }},
      {"reward.turn_cap", [](auto& c, auto& k, auto& v) { c.reward.turn_reward_cap = to_double(k, v); }},
      {"reward.turn_conditional",
       [](auto& c, auto& k, auto& v) { c.reward.turn_reward_conditional = to_bool(k, v); }},
      {"reward.format", [](auto& c, auto& k, auto& v) { c.reward.format_reward = to_double(k, v); }},
      {"reward.count_occurrences",
       [](auto& c, auto& k, auto& v) { c.reward.count_occurrences = to_bool(k, v); }},
      {"grpo.group_size",
       [](auto& c, auto& k, auto& v) { c.grpo.group_size = static_cast<int>(to_int(k, v)); }},
      {"grpo.clip_epsilon", [](auto& c, auto& k, auto& v) { c.grpo.clip_epsilon = to_double(k, v); }},
      {"grpo.std_delta", [](auto& c, auto& k, auto& v) { c.grpo.std_delta = to_double(k, v); }},
      {"grpo.learning_rate", [](auto& c, auto& k, auto& v) { c.grpo.learning_rate = to_double(k, v); }},
      {"policy.kind",
       [](auto& c, auto& k, auto& v) {
         try {
           c.policy = parse_policy_kind(v);
         } catch (const std::exception& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"policy.checkpoint", [](auto& c, auto&, auto& v) { c.checkpoint = v; }},
      {"menu.bins", [](auto& c, auto& k, auto& v) { c.menu.bins = static_cast<int>(to_int(k, v)); }},
      {"menu.zoom_half_width_s",
       [](auto& c, auto& k, auto& v) { c.menu.zoom_half_width_s = to_double(k, v); }},
      {"menu.spam_turns",
       [](auto& c, auto& k, auto& v) { c.menu.spam_turns = static_cast<int>(to_int(k, v)); }},
      {"limits.max_turns", [](auto& c, auto& k, auto& v) { c.max_turns = static_cast<int>(to_int(k, v)); }},
      {"limits.queries_per_step",
       [](auto& c, auto& k, auto& v) { c.queries_per_step = static_cast<int>(to_int(k, v)); }},
      {"limits.total_steps",
       [](auto& c, auto& k, auto& v) { c.total_steps = static_cast<int>(to_int(k, v)); }},
      {"train.checkpoint_every",
       [](auto& c, auto& k, auto& v) { c.checkpoint_every = static_cast<int>(to_int(k, v)); }},
      {"train.eval_samples",
       [](auto& c, auto& k, auto& v) { c.eval_samples = static_cast<int>(to_int(k, v)); }},
      {"ccv.online", [](auto& c, auto& k, auto& v) { c.ccv_online = to_bool(k, v); }},
      {"ccv.fidelity_tolerance",
       [](auto& c, auto& k, auto& v) { c.ccv.fidelity_tolerance = to_int(k, v); }},
      {"env.strict_timestamps",
       [](auto& c, auto& k, auto& v) { c.env.strict_timestamps = to_bool(k, v); }},
      {"workers", [](auto& c, auto& k, auto& v) { c.workers = static_cast<int>(to_int(k, v)); }},
      {"out", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
  }
  const auto it = kv.find("schema");
  if (it == kv.end()) throw ConfigError("config: missing schema line (expected schema = v1)");
  if (it->second != kSchemaVersion) throw ConfigError("config: unsupported schema " + it->second);
  return kv;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys{"schema"};
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

ExperimentConfig load_config(const std::map<std::string, std::string>& kv,
                             const std::optional<std::string>& preset) {
  ExperimentConfig cfg;
  for (const auto& [k, _] : kv)
    if (k != "schema" && !setters().count(k)) throw ConfigError("config: unknown key " + k);

  if (preset) {
    cfg.reward_preset = *preset;
  } else if (auto it = kv.find("reward.preset"); it != kv.end()) {
    cfg.reward_preset = it->second;
  }
  cfg.reward = reward_preset(cfg.reward_preset);
  for (const auto& [k, v] : kv)
    if (k != "schema") setters().at(k)(cfg, k, v);
  cfg.corpus_spec.seed = derive_seed(cfg.seed, "corpus");
  cfg.menu.max_turns = cfg.max_turns;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, const std::optional<std::string>& preset) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  auto kv = parse_flat_config(text);
  if (auto it = kv.find("corpus"); it != kv.end() && std::filesystem::path(it->second).is_relative())
    it->second = (path.parent_path() / it->second).string();
  return load_config(kv, preset);
}

void ExperimentConfig::validate() const {
  reward.validate();
  grpo.validate();
  if (max_turns < 1) throw ConfigError("limits.max_turns must be at least 1");
  if (queries_per_step < 1) throw ConfigError("limits.queries_per_step must be at least 1");
  if (total_steps < 0) throw ConfigError("limits.total_steps must be non-negative");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be non-negative");
  if (eval_samples < 1) throw ConfigError("train.eval_samples must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (menu.bins < 1) throw ConfigError("menu.bins must be at least 1");
  if (menu.spam_turns < 0) throw ConfigError("menu.spam_turns must be non-negative");
  if (!(menu.zoom_half_width_s >= 0.0)) throw ConfigError("menu.zoom_half_width_s must be non-negative");
  if (ccv.fidelity_tolerance < 0) throw ConfigError("ccv.fidelity_tolerance must be non-negative");
  if (corpus_spec.options > menu.max_options)
    throw ConfigError("corpus.options exceeds the answer menu (" + std::to_string(menu.max_options) + ")");
  if (corpus_spec.n < 1) throw ConfigError("corpus.n must be at least 1");
  if (corpus_spec.options < 2) throw ConfigError("corpus.options must be at least 2");
  if (corpus_spec.distractors < 0) throw ConfigError("corpus.distractors must be non-negative");
  if (!corpus.empty() && !std::filesystem::exists(corpus))
    throw ConfigError("corpus file does not exist: " + corpus.string());
  if (!checkpoint.empty() && !std::filesystem::exists(checkpoint))
    throw ConfigError("checkpoint file does not exist: " + checkpoint.string());
}

RolloutLimits ExperimentConfig::limits() const { return RolloutLimits{max_turns, env}; }

std::vector<Task> experiment_corpus(const ExperimentConfig& cfg) {
  if (!cfg.corpus.empty()) return read_task_corpus(cfg.corpus);
  return generate_corpus(cfg.corpus_spec);
}

namespace {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ScoredRollout score_rollout(const Policy& policy, const Task& task, const ExperimentConfig& cfg, Rng& rng,
                            std::uint64_t seed) {
  ScoredRollout out;
  out.entry.seed = seed;
  out.entry.trajectory = rollout(policy, task, cfg.limits(), cfg.ccv_online, rng);
  const auto verdict = ccv::verify(out.entry.trajectory, cfg.ccv);
  out.entry.verdict = verdict;
  out.entry.reward = reward::score(out.entry.trajectory, task, cfg.reward, verdict);
  out.choose_frames = reward::count_choose_frames(out.entry.trajectory);
  out.get_frame_number = reward::count_get_frame_number(out.entry.trajectory);
  return out;
}

}  // namespace

std::vector<ScoredRollout> scored_rollouts(const PolicyParams& policy, const std::vector<Task>& tasks,
                                           const ExperimentConfig& cfg, int samples, std::string_view stream) {
  const ZooPolicy zoo(policy);
  // Deterministic order by task id, independent of corpus file order.
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tasks[a].task_id < tasks[b].task_id; });
  const auto per = static_cast<std::size_t>(samples);
  std::vector<ScoredRollout> out(tasks.size() * per);
  parallel_for(out.size(), cfg.workers, [&](std::size_t k) {
    const std::size_t i = order[k / per];
    const std::uint64_t s = k % per;
    Rng rng = make_rng(cfg.seed, stream, {static_cast<std::uint64_t>(i), s});
    out[k] = score_rollout(zoo, tasks[i], cfg, rng, cfg.seed);
  });
  return out;
}

RolloutSummary summarize(const std::vector<ScoredRollout>& rollouts) {
  RolloutSummary s;
  s.trajectories = rollouts.size();
  if (rollouts.empty()) return s;
  double cf = 0, gfn = 0, failures = 0;
  for (const auto& r : rollouts) {
    const auto& t = r.entry.trajectory;
    s.accuracy += r.entry.reward->r_acc;
    s.mean_reward += r.entry.reward->r_final;
    s.mean_frames += static_cast<double>(t.distinct_frames_seen);
    s.mean_turns += t.n_turns;
    s.mean_response_length += static_cast<double>(t.response_length);
    s.fallback_rate += t.fallback ? 1.0 : 0.0;
    cf += r.choose_frames;
    gfn += r.get_frame_number;
    if (!r.entry.verdict->pass) {
      failures += 1;
      s.ccv_failure_by_reason[std::string(to_string(*r.entry.verdict->reason))] += 1;
    }
  }
  const auto n = static_cast<double>(rollouts.size());
  s.accuracy /= n;
  s.mean_reward /= n;
  s.mean_frames /= n;
  s.mean_turns /= n;
  s.mean_response_length /= n;
  s.fallback_rate /= n;
  s.ccv_failure_rate = failures / n;
  for (auto& [_, v] : s.ccv_failure_by_reason) v /= n;
  s.mean_actions = (cf + gfn) / n;
  s.gfn_share = cf + gfn > 0 ? gfn / (cf + gfn) : 0.0;
  return s;
}

std::string metrics_csv_header() {
  return "step,mean_accuracy,mean_action_reward,mean_actions_per_traj,mean_turns,mean_response_length";
}

std::string metrics_csv_row(const MetricRow& r) {
  return std::to_string(r.step) + "," + fmt(r.mean_accuracy) + "," + fmt(r.mean_action_reward) + "," +
         fmt(r.mean_actions_per_traj) + "," + fmt(r.mean_turns) + "," + fmt(r.mean_response_length);
}

TrainResult train(const ExperimentConfig& cfg, const std::vector<Task>& tasks) {
  if (cfg.policy != PolicyKind::Learnable) throw ConfigError("train requires policy.kind = learnable");
  if (tasks.empty()) throw DataError("empty task corpus");
  TrainResult result;
  if (!cfg.checkpoint.empty()) {
    result.policy = load_checkpoint(read_file(cfg.checkpoint));
    if (result.policy.kind != PolicyKind::Learnable || !(result.policy.menu == cfg.menu))
      throw ConfigError("checkpoint does not match the configured learnable menu");
  } else {
    result.policy = PolicyParams::learnable(cfg.menu, derive_seed(cfg.seed, "policy"));
  }

  std::vector<std::shared_ptr<const Task>> shared;
  for (const auto& t : tasks) shared.push_back(std::make_shared<const Task>(t));
  const auto q = static_cast<std::size_t>(std::min<int>(cfg.queries_per_step, static_cast<int>(tasks.size())));
  const auto g = static_cast<std::size_t>(cfg.grpo.group_size);

  for (int step = 1; step <= cfg.total_steps; ++step) {
    // Queries drawn without replacement from the batch sub-stream.
    Rng pick = make_rng(cfg.seed, "batch", {static_cast<std::uint64_t>(step)});
    std::vector<std::size_t> idx(tasks.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < q; ++i) std::swap(idx[i], idx[i + uniform_index(pick, idx.size() - i)]);
    idx.resize(q);

    const ZooPolicy snapshot(result.policy);
    std::vector<ScoredRollout> samples(q * g);
    parallel_for(samples.size(), cfg.workers, [&](std::size_t k) {
      Rng rng = make_rng(cfg.seed, "rollout",
                         {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(k / g),
                          static_cast<std::uint64_t>(k % g)});
      samples[k] = score_rollout(snapshot, tasks[idx[k / g]], cfg, rng, cfg.seed);
    });

    MetricRow row;
    row.step = step;
    std::vector<GroupBatch> batches;
    for (std::size_t b = 0; b < q; ++b) {
      std::vector<Trajectory> trajs;
      std::vector<double> rewards;
      for (std::size_t j = 0; j < g; ++j) {
        auto& s = samples[b * g + j];
        row.mean_accuracy += s.entry.reward->r_acc;
        row.mean_action_reward += s.entry.reward->r_action;
        row.mean_actions_per_traj += s.choose_frames + s.get_frame_number;
        row.mean_turns += s.entry.trajectory.n_turns;
        row.mean_response_length += static_cast<double>(s.entry.trajectory.response_length);
        rewards.push_back(s.entry.reward->r_final);
        trajs.push_back(std::move(s.entry.trajectory));
      }
      batches.push_back(grpo::make_batch(shared[idx[b]], std::move(trajs), std::move(rewards), result.policy,
                                         cfg.grpo));
    }
    const auto n = static_cast<double>(q * g);
    row.mean_accuracy /= n;
    row.mean_action_reward /= n;
    row.mean_actions_per_traj /= n;
    row.mean_turns /= n;
    row.mean_response_length /= n;
    result.metrics.push_back(row);

    try {
      result.policy = grpo::policy_gradient_step(result.policy, batches, cfg.grpo);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(step));
    }
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && step != cfg.total_steps)
      result.checkpoints.emplace_back(step, save_checkpoint(result.policy));
  }
  result.checkpoints.emplace_back(cfg.total_steps, save_checkpoint(result.policy));
  return result;
}

std::string cmd_gen_tasks(int n, DurationProfile profile, std::uint64_t seed, const std::filesystem::path& out,
                          const std::vector<QuestionKind>& kinds) {
  CorpusSpec spec;
  spec.n = n;
  spec.profile = profile;
  spec.seed = seed;
  if (!kinds.empty()) spec.kinds = kinds;
  const auto tasks = generate_corpus(spec);
  write_task_corpus(out, tasks);
  int long_videos = 0;
  for (const auto& t : tasks) long_videos += frames_per_turn(*t.video) == 12 ? 1 : 0;
  return "wrote " + std::to_string(tasks.size()) + " tasks (" + std::to_string(long_videos) +
         " long videos) to " + out.string() + "\n";
}

namespace {

std::string summary_text(const RolloutSummary& s) {
  std::string out;
  out += "trajectories " + std::to_string(s.trajectories) + "\n";
  out += "accuracy " + fmt(s.accuracy) + "\n";
  out += "mean_reward " + fmt(s.mean_reward) + "\n";
  out += "mean_frames " + fmt(s.mean_frames) + "\n";
  out += "mean_turns " + fmt(s.mean_turns) + "\n";
  out += "mean_actions " + fmt(s.mean_actions) + "\n";
  out += "gfn_share " + fmt(s.gfn_share) + "\n";
  out += "fallback_rate " + fmt(s.fallback_rate) + "\n";
  out += "ccv_failure_rate " + fmt(s.ccv_failure_rate) + "\n";
  for (const auto& [reason, rate] : s.ccv_failure_by_reason) out += "ccv_failure_rate." + reason + " " + fmt(rate) + "\n";
  return out;
}

std::string trajectory_log(const std::vector<ScoredRollout>& rollouts) {
  std::string out;
  for (const auto& r : rollouts) out += trajectory_to_json_line(r.entry) + "\n";
  return out;
}

PolicyParams configured_policy(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint.empty()) return load_checkpoint(read_file(cfg.checkpoint));
  return PolicyParams::scripted(cfg.policy, cfg.menu, derive_seed(cfg.seed, "policy"));
}

}  // namespace

std::string cmd_rollout(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const auto tasks = experiment_corpus(cfg);
  const auto rollouts = scored_rollouts(configured_policy(cfg), tasks, cfg, 1, "rollout");
  const std::string text = "seed " + std::to_string(cfg.seed) + "\n" + summary_text(summarize(rollouts));
  write_file(out / "trajectories.jsonl", trajectory_log(rollouts));
  write_file(out / "summary.txt", text);
  return text;
}

std::string cmd_verify(const std::filesystem::path& log, const std::filesystem::path& out, CcvOptions options) {
  std::vector<LoggedTrajectory> entries;
  try {
    entries = read_trajectory_log(log);
  } catch (const DataError& e) {
    throw DataError(std::string("MalformedLog: ") + e.what(), e.line());
  }
  std::string lines;
  std::map<std::string, int> counts;
  int failures = 0;
  for (const auto& e : entries) {
    const auto v = ccv::verify(e.trajectory, options);
    lines += verdict_to_json_line(e.trajectory.task_id, v) + "\n";
    if (!v.pass) {
      ++failures;
      ++counts[std::string(to_string(*v.reason))];
    }
  }
  std::string summary = "trajectories " + std::to_string(entries.size()) + "\n";
  summary += "pass " + std::to_string(static_cast<int>(entries.size()) - failures) + "\n";
  summary += "fail " + std::to_string(failures) + "\n";
  for (const auto& [reason, n] : counts) summary += "fail." + reason + " " + std::to_string(n) + "\n";
  write_file(out / "verdicts.jsonl", lines);
  write_file(out / "verify_summary.txt", summary);
  return summary;
}

std::string cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const auto tasks = experiment_corpus(cfg);
  const auto result = train(cfg, tasks);

  std::string csv = "# seed " + std::to_string(cfg.seed) + "\n" + metrics_csv_header() + "\n";
  for (const auto& row : result.metrics) csv += metrics_csv_row(row) + "\n";
  write_file(out / "metrics.csv", csv);
  for (const auto& [step, text] : result.checkpoints) {
    char name[48];
    std::snprintf(name, sizeof name, "step-%06d.ckpt", step);
    write_file(out / "checkpoints" / name, text);
  }
  write_file(out / "policy.ckpt", result.checkpoints.back().second);

  const auto trained = scored_rollouts(result.policy, tasks, cfg, cfg.eval_samples, "eval");
  const auto baseline = scored_rollouts(PolicyParams::scripted(PolicyKind::Random, cfg.menu, derive_seed(cfg.seed, "baseline")),
                                        tasks, cfg, cfg.eval_samples, "eval");
  write_file(out / "eval_trajectories.jsonl", trajectory_log(trained));
  const auto ts = summarize(trained);
  const auto bs = summarize(baseline);
  std::string text = "seed " + std::to_string(cfg.seed) + "\nsteps " + std::to_string(cfg.total_steps) + "\n";
  text += summary_text(ts);
  text += "random_baseline_accuracy " + fmt(bs.accuracy) + "\n";
  text += std::string("improved_over_random ") + (ts.accuracy > bs.accuracy ? "yes" : "no") + "\n";
  write_file(out / "summary.txt", text);
  return text;
}

std::vector<ColumnReport> report_columns(std::string_view csv, int window) {
  if (window < 1) throw ConfigError("report window must be at least 1");
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
  std::size_t line_no = 0, pos = 0;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    const std::string line = trim(csv.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      header = cells;
      cols.resize(header.size());
      continue;
    }
    if (cells.size() != header.size())
      throw DataError("MalformedCsv: expected " + std::to_string(header.size()) + " columns", line_no);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size() || !std::isfinite(v)) throw std::invalid_argument("bad");
        cols[c].push_back(v);
      } catch (const std::exception&) {
        throw DataError("MalformedCsv: non-numeric cell '" + cells[c] + "'", line_no);
      }
    }
  }
  if (header.empty()) throw DataError("MalformedCsv: missing header");

  std::vector<ColumnReport> out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "step") continue;
    ColumnReport r;
    r.name = header[c];
    const auto& v = cols[c];
    if (!v.empty()) {
      r.min = *std::min_element(v.begin(), v.end());
      r.max = *std::max_element(v.begin(), v.end());
      r.final = v.back();
      const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), v.size());
      double sum = std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(w), 0.0);
      r.moving_average.push_back(sum / static_cast<double>(w));
      for (std::size_t i = w; i < v.size(); ++i) {
        sum += v[i] - v[i - w];
        r.moving_average.push_back(sum / static_cast<double>(w));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string cmd_report(const std::filesystem::path& metrics_csv, const std::filesystem::path& out, int window) {
  const auto cols = report_columns(read_file(metrics_csv), window);
  std::string summary = "metric,min,max,final\n";
  for (const auto& c : cols) summary += c.name + "," + fmt(c.min) + "," + fmt(c.max) + "," + fmt(c.final) + "\n";
  std::string ma = "index";
  for (const auto& c : cols) ma += "," + c.name;
  ma += "\n";
  const std::size_t rows = cols.empty() ? 0 : cols.front().moving_average.size();
  for (std::size_t i = 0; i < rows; ++i) {
    ma += std::to_string(i);
    for (const auto& c : cols) ma += "," + fmt(c.moving_average[i]);
    ma += "\n";
  }
  write_file(out / "report_summary.csv", summary);
  write_file(out / "report_moving_average.csv", ma);
  return summary;
}

}  // namespace framethinker
