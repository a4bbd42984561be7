#include "framethinker/task_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "framethinker/errors.hpp"
#include "framethinker/rng.hpp"

namespace framethinker {

std::string_view to_string(DurationProfile p) {
  switch (p) {
    case DurationProfile::Short: return "short";
    case DurationProfile::Long: return "long";
    case DurationProfile::Mixed: return "mixed";
  }
  return "mixed";
}

DurationProfile parse_duration_profile(std::string_view text) {
  if (text == "short") return DurationProfile::Short;
  if (text == "long") return DurationProfile::Long;
  if (text == "mixed") return DurationProfile::Mixed;
  throw ConfigError("unknown duration profile: " + std::string(text));
}

namespace {

constexpr double kFpsChoices[] = {24.0, 25.0, 30.0};

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04d", prefix, i);
  return buf;
}

bool overlaps_any(FrameIndex start, FrameIndex end, const std::vector<FrameIndex>& points) {
  return std::any_of(points.begin(), points.end(), [&](FrameIndex p) { return p >= start && p <= end; });
}

}  // namespace

std::vector<Task> generate_corpus(const CorpusSpec& spec) {
  if (spec.n < 1) throw ConfigError("corpus size must be at least 1");
  if (spec.options < 2 || spec.options > 26) throw ConfigError("option count must be in [2, 26]");
  if (spec.kinds.empty()) throw ConfigError("at least one question kind is required");

  // Balanced labels, shuffled once for the whole corpus.
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) labels[static_cast<std::size_t>(i)] = i % spec.options;
  Rng label_rng = make_rng(spec.seed, "corpus-labels");
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_index(label_rng, i)]);

  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    Rng rng = make_rng(spec.seed, "corpus", {static_cast<std::uint64_t>(i)});

    bool long_video = spec.profile == DurationProfile::Long ||
                      (spec.profile == DurationProfile::Mixed && i % 2 == 1);
    const double duration = long_video ? static_cast<double>(301 + uniform_index(rng, 600))
                                       : static_cast<double>(60 + uniform_index(rng, 241));
    const double fps = kFpsChoices[uniform_index(rng, 3)];
    const auto total = static_cast<FrameIndex>(std::llround(duration * fps));

    Task task;
    task.task_id = numbered("task", i);
    task.question_kind = spec.kinds[static_cast<std::size_t>(i) % spec.kinds.size()];
    for (int o = 0; o < spec.options; ++o) task.options.push_back(static_cast<AnswerLabel>('A' + o));
    task.correct = task.options[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];

    // Initial scan positions the key event must avoid.
    SyntheticVideo probe;
    probe.duration_s = duration;
    probe.fps = fps;
    probe.total_frames = total;
    const auto scan = sample_frames(0, total - 1, frames_per_turn(probe));

    std::vector<EvidenceEvent> events;
    EvidenceEvent key;
    key.token = "key";
    key.supports = task.correct;
    switch (task.question_kind) {
      case QuestionKind::TimestampSpecific: {
        const auto half = static_cast<FrameIndex>(std::llround(fps / 2.0));
        for (;;) {
          const int sec = 2 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(duration) - 4));
          const auto centre = static_cast<FrameIndex>(std::llround(sec * fps));
          key.start_frame = centre - half;
          key.end_frame = centre + half;
          key.timestamp_hint = Timestamp{sec / 60, sec % 60};
          if (!overlaps_any(key.start_frame, key.end_frame, scan)) break;
        }
        break;
      }
      case QuestionKind::IntervalSearch: {
        const FrameIndex width = std::max<FrameIndex>(2, total / 16);
        for (;;) {
          key.start_frame = static_cast<FrameIndex>(uniform_index(rng, static_cast<std::size_t>(total - width)));
          key.end_frame = key.start_frame + width - 1;
          if (!overlaps_any(key.start_frame, key.end_frame, scan)) break;
        }
        break;
      }
      case QuestionKind::Direct:
        key.start_frame = 0;
        key.end_frame = static_cast<FrameIndex>(std::llround(fps));
        break;
    }
    events.push_back(key);
    if (task.question_kind != QuestionKind::Direct) task.required_tokens.push_back(key.token);

    for (int d = 0; d < spec.distractors; ++d) {
      EvidenceEvent ev;
      ev.token = "distractor-" + std::to_string(d);
      const auto width = static_cast<FrameIndex>(std::llround(fps * (1.0 + static_cast<double>(uniform_index(rng, 4)))));
      ev.start_frame = static_cast<FrameIndex>(uniform_index(rng, static_cast<std::size_t>(total - width)));
      ev.end_frame = ev.start_frame + width - 1;
      events.push_back(std::move(ev));
    }

    task.video = std::make_shared<const SyntheticVideo>(
        make_video(numbered("video", i), duration, fps, std::move(events)));
    validate(task);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

}  // namespace framethinker
