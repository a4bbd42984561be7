#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "framethinker/errors.hpp"
#include "framethinker/harness.hpp"

using namespace framethinker;

namespace {

ExperimentConfig resolve(const std::string& config, const std::optional<std::string>& preset,
                         const std::optional<std::uint64_t>& seed, const std::optional<int>& workers) {
  ExperimentConfig cfg = config.empty() ? load_config(parse_flat_config("schema = v1\n"), preset)
                                        : load_config_file(config, preset);
  if (seed) {
    cfg.seed = *seed;
    cfg.corpus_spec.seed = derive_seed(cfg.seed, "corpus");
  }
  if (workers) cfg.workers = *workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic long-video reasoning agents: rollouts, CCV linting and GRPO training"};
  app.require_subcommand(1);

  std::string config, out = "out", profile = "mixed", kinds, log, csv;
  std::optional<std::string> preset, policy;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  int n = 64, window = 10;

  auto* gen = app.add_subcommand("gen-tasks", "Generate a seeded task corpus (JSON Lines)");
  gen->add_option("-n,--count", n, "Number of tasks")->check(CLI::PositiveNumber);
  gen->add_option("--profile", profile, "Duration profile")->check(CLI::IsMember({"short", "long", "mixed"}));
  gen->add_option("--kinds", kinds, "Comma-separated question kinds");
  gen->add_option("--seed", seed, "Global seed");
  gen->add_option("--out", out, "Output corpus file")->required();

  auto* roll = app.add_subcommand("rollout", "Roll a policy out over a corpus and score it");
  roll->add_option("--config", config, "Experiment config file");
  roll->add_option("--preset", preset, "Reward preset");
  roll->add_option("--policy", policy, "Policy kind (overrides policy.kind)");
  roll->add_option("--seed", seed, "Global seed");
  roll->add_option("--workers", workers, "Rollout worker threads");
  roll->add_option("--out", out, "Output directory");

  auto* ver = app.add_subcommand("verify", "Lint a trajectory log with CCV");
  ver->add_option("log", log, "Trajectory JSON Lines file")->required();
  ver->add_option("--out", out, "Output directory");

  auto* tr = app.add_subcommand("train", "GRPO training of the learnable policy");
  tr->add_option("--config", config, "Experiment config file");
  tr->add_option("--preset", preset, "Reward preset");
  tr->add_option("--seed", seed, "Global seed");
  tr->add_option("--workers", workers, "Rollout worker threads");
  tr->add_option("--out", out, "Output directory");

  auto* rep = app.add_subcommand("report", "Aggregate a metrics CSV");
  rep->add_option("csv", csv, "Metrics CSV")->required();
  rep->add_option("--window", window, "Moving-average window")->check(CLI::PositiveNumber);
  rep->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      std::vector<QuestionKind> ks;
      if (!kinds.empty()) {
        auto kv = parse_flat_config("schema = v1\ncorpus.kinds = " + kinds + "\n");
        ks = load_config(kv).corpus_spec.kinds;
      }
      std::cout << cmd_gen_tasks(n, parse_duration_profile(profile), seed.value_or(0), out, ks);
    } else if (*roll) {
      auto cfg = resolve(config, preset, seed, workers);
      if (policy) cfg.policy = parse_policy_kind(*policy);
      std::cout << cmd_rollout(cfg, out);
    } else if (*ver) {
      std::cout << cmd_verify(log, out);
    } else if (*tr) {
      std::cout << cmd_train(resolve(config, preset, seed, workers), out);
    } else if (*rep) {
      std::cout << cmd_report(csv, out, window);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
