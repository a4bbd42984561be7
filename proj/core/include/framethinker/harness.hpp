#pragma once

// Experiment plumbing behind the command-line tool: flat key=value configs,
// corpus generation, scored rollouts, CCV linting, GRPO training and reports.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framethinker/grpo.hpp"
#include "framethinker/reward.hpp"
#include "framethinker/serialization.hpp"
#include "framethinker/task_gen.hpp"

namespace framethinker {

/// Parses `key = value` lines; `#` starts a comment. Requires `schema = v1`.
/// Throws ConfigError on syntax errors, duplicate keys or a missing schema line.
std::map<std::string, std::string> parse_flat_config(std::string_view text);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  // Task corpus file; when empty the corpus is generated from `corpus_spec` and the seed.
  std::filesystem::path corpus;
  CorpusSpec corpus_spec;
  std::string reward_preset = "small-scale";
  RewardConfig reward = framethinker::reward_preset("small-scale");
  GrpoConfig grpo = GrpoConfig::small_scale();
  PolicyKind policy = PolicyKind::Learnable;
  std::filesystem::path checkpoint;
  MenuSpec menu;
  int max_turns = 6;
  int queries_per_step = 4;
  int total_steps = 500;
  int checkpoint_every = 100;
  // Rollouts per task when measuring accuracy of a policy.
  int eval_samples = 8;
  bool ccv_online = false;
  CcvOptions ccv;
  EnvOptions env;
  int workers = 1;
  std::filesystem::path out_dir = "out";

  /// Throws ConfigError on inconsistent values or a missing corpus file.
  void validate() const;
  RolloutLimits limits() const;
};

/// Unknown keys are errors. A `preset` argument replaces reward.preset; explicit reward.*
/// keys are applied on top of the preset either way.
ExperimentConfig load_config(const std::map<std::string, std::string>& kv,
                             const std::optional<std::string>& preset = std::nullopt);
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  const std::optional<std::string>& preset = std::nullopt);
std::vector<std::string> config_keys();

/// Loads the configured corpus file, or generates it.
std::vector<Task> experiment_corpus(const ExperimentConfig& cfg);

struct ScoredRollout {
  LoggedTrajectory entry;
  // Non-answer actions the trajectory executed, by kind.
  int choose_frames = 0;
  int get_frame_number = 0;
};

/// Rolls `policy` out on every task `samples` times. Results are ordered by task then sample
/// and do not depend on `workers`. Sample s of task i draws from rollout sub-stream (stream, i, s).
std::vector<ScoredRollout> scored_rollouts(const PolicyParams& policy, const std::vector<Task>& tasks,
                                           const ExperimentConfig& cfg, int samples,
                                           std::string_view stream);

struct RolloutSummary {
  std::size_t trajectories = 0;
  double accuracy = 0.0;
  double mean_frames = 0.0;
  double mean_turns = 0.0;
  double mean_reward = 0.0;
  double fallback_rate = 0.0;
  double ccv_failure_rate = 0.0;
  std::map<std::string, double> ccv_failure_by_reason;
  // Share of non-answer actions that were get-frame-number.
  double gfn_share = 0.0;
  double mean_actions = 0.0;
  double mean_response_length = 0.0;
};

RolloutSummary summarize(const std::vector<ScoredRollout>& rollouts);

struct MetricRow {
  int step = 0;
  double mean_accuracy = 0.0;
  double mean_action_reward = 0.0;
  double mean_actions_per_traj = 0.0;
  double mean_turns = 0.0;
  double mean_response_length = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricRow& row);

struct TrainResult {
  PolicyParams policy;
  std::vector<MetricRow> metrics;
  // (step, checkpoint text) pairs for every periodic checkpoint and the final one.
  std::vector<std::pair<int, std::string>> checkpoints;
};

/// GRPO training of a learnable policy in memory. Throws NumericalError naming the step.
TrainResult train(const ExperimentConfig& cfg, const std::vector<Task>& tasks);


// Commands. Each writes its artifacts under `out` and returns a short human summary.
std::string cmd_gen_tasks(int n, DurationProfile profile, std::uint64_t seed,
                          const std::filesystem::path& out, const std::vector<QuestionKind>& kinds = {});
std::string cmd_rollout(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::string cmd_verify(const std::filesystem::path& log, const std::filesystem::path& out,
                       CcvOptions options = {});
std::string cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::string cmd_report(const std::filesystem::path& metrics_csv, const std::filesystem::path& out,
                       int window = 10);

struct ColumnReport {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double final = 0.0;
  std::vector<double> moving_average;
};

/// Parses a metrics CSV and aggregates each numeric column. Throws DataError ("MalformedCsv").
std::vector<ColumnReport> report_columns(std::string_view csv, int window);

}  // namespace framethinker
