#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "framethinker/video_env.hpp"

namespace framethinker {

enum class DurationProfile { Short, Long, Mixed };

std::string_view to_string(DurationProfile p);
DurationProfile parse_duration_profile(std::string_view text);

struct CorpusSpec {
  int n = 64;
  DurationProfile profile = DurationProfile::Mixed;
  std::uint64_t seed = 0;
  // Question kinds cycled over the corpus in task order.
  std::vector<QuestionKind> kinds{QuestionKind::TimestampSpecific, QuestionKind::IntervalSearch,
                                  QuestionKind::Direct};
  int options = 4;
  int distractors = 2;
};

/// Seeded synthetic corpus. Correct labels are balanced across options. Required
/// evidence of timestamp and interval tasks is never hit by the initial sparse scan;
/// direct tasks carry their evidence on frame 0.
std::vector<Task> generate_corpus(const CorpusSpec& spec);

}  // namespace framethinker
