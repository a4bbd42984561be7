#pragma once

// JSON Lines schemas (version "v1") for task corpora and trajectory logs.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "framethinker/ccv.hpp"
#include "framethinker/reward.hpp"
#include "framethinker/trajectory.hpp"
#include "framethinker/video_env.hpp"

namespace framethinker {

inline constexpr std::string_view kSchemaVersion = "v1";

std::string task_to_json_line(const Task& task);
/// Throws DataError on schema violations.
Task task_from_json_line(std::string_view line);

void write_task_corpus(const std::filesystem::path& path, const std::vector<Task>& tasks);
/// Throws DataError naming the offending line, IoError when unreadable.
std::vector<Task> read_task_corpus(const std::filesystem::path& path);

struct LoggedTrajectory {
  Trajectory trajectory;
  std::optional<RewardBreakdown> reward;
  std::optional<CcvVerdict> verdict;
  std::uint64_t seed = 0;
};

std::string trajectory_to_json_line(const LoggedTrajectory& entry);
LoggedTrajectory trajectory_from_json_line(std::string_view line);

std::vector<LoggedTrajectory> read_trajectory_log(const std::filesystem::path& path);

std::string verdict_to_json_line(const std::string& task_id, const CcvVerdict& verdict);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace framethinker
