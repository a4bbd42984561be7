#include "framethinker/video_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace framethinker {

std::string format_timestamp(const Timestamp& ts) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", ts.minutes, ts.seconds);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 2 || text.size() != colon + 3)
    throw std::invalid_argument("timestamp must be M:SS or MM:SS: " + std::string(text));
  auto digits = [&](std::string_view s) {
    int v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw std::invalid_argument("non-numeric timestamp: " + std::string(text));
      v = v * 10 + (c - '0');
    }
    return v;
  };
  Timestamp ts{digits(text.substr(0, colon)), digits(text.substr(colon + 1))};
  if (ts.seconds >= 60) throw std::invalid_argument("timestamp seconds must be below 60: " + std::string(text));
  return ts;
}

const EvidenceEvent* SyntheticVideo::find_event(std::string_view token) const {
  for (const auto& e : events)
    if (e.token == token) return &e;
  return nullptr;
}

void validate(const SyntheticVideo& video) {
  if (!(video.duration_s > 0.0) || !std::isfinite(video.duration_s))
    throw std::invalid_argument(video.video_id + ": duration must be positive");
  if (!(video.fps > 0.0) || !std::isfinite(video.fps))
    throw std::invalid_argument(video.video_id + ": fps must be positive");
  if (video.total_frames < 1) throw std::invalid_argument(video.video_id + ": video has no frames");
  if (video.total_frames != static_cast<FrameIndex>(std::round(video.duration_s * video.fps)))
    throw std::invalid_argument(video.video_id + ": total_frames disagrees with duration x fps");
  std::set<std::string> tokens;
  for (const auto& e : video.events) {
    if (!tokens.insert(e.token).second)
      throw std::invalid_argument(video.video_id + ": duplicate evidence token " + e.token);
    if (e.start_frame < 0 || e.start_frame > e.end_frame || e.end_frame > video.max_frame())
      throw std::invalid_argument(video.video_id + ": event " + e.token + " outside video bounds");
    if (e.timestamp_hint) {
      const FrameIndex f = timestamp_to_frame(video, e.timestamp_hint->minutes, e.timestamp_hint->seconds);
      if (f < e.start_frame || f > e.end_frame)
        throw std::invalid_argument(video.video_id + ": hint of " + e.token + " falls outside its event");
    }
  }
}

SyntheticVideo make_video(std::string video_id, double duration_s, double fps,
                          std::vector<EvidenceEvent> events) {
  SyntheticVideo v;
  v.video_id = std::move(video_id);
  v.duration_s = duration_s;
  v.fps = fps;
  v.total_frames = static_cast<FrameIndex>(std::round(duration_s * fps));
  v.events = std::move(events);
  validate(v);
  return v;
}

std::string_view to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::TimestampSpecific: return "timestamp-specific";
    case QuestionKind::IntervalSearch: return "interval-search";
    case QuestionKind::Direct: return "direct";
  }
  return "?";
}

QuestionKind parse_question_kind(std::string_view text) {
  if (text == "timestamp-specific") return QuestionKind::TimestampSpecific;
  if (text == "interval-search") return QuestionKind::IntervalSearch;
  if (text == "direct") return QuestionKind::Direct;
  throw std::invalid_argument("unknown question kind: " + std::string(text));
}

std::optional<Timestamp> Task::timestamp_hint() const {
  for (const auto& tok : required_tokens)
    if (const auto* e = video->find_event(tok); e && e->timestamp_hint) return e->timestamp_hint;
  return std::nullopt;
}

bool Task::has_option(AnswerLabel label) const {
  return std::find(options.begin(), options.end(), label) != options.end();
}

void validate(const Task& task) {
  if (!task.video) throw std::invalid_argument(task.task_id + ": task has no video");
  validate(*task.video);
  if (!task.has_option(task.correct)) throw std::invalid_argument(task.task_id + ": correct label not among options");
  for (const auto& tok : task.required_tokens)
    if (!task.video->find_event(tok))
      throw std::invalid_argument(task.task_id + ": required token " + tok + " not in video");
  if (task.question_kind == QuestionKind::Direct && !task.required_tokens.empty())
    throw std::invalid_argument(task.task_id + ": direct tasks need no required tokens");
}

FrameIndex timestamp_to_frame(const SyntheticVideo& video, int minutes, int seconds, bool strict) {
  if (seconds < 0 || seconds > 59 || minutes < 0) throw std::invalid_argument("timestamp out of range");
  const double t = 60.0 * minutes + seconds;
  const auto frame = static_cast<FrameIndex>(std::round(t * video.fps));
  if (strict && frame > video.max_frame())
    throw TimestampBeyondVideo("timestamp " + format_timestamp({minutes, seconds}) + " beyond video end");
  return std::clamp<FrameIndex>(frame, 0, video.max_frame());
}

std::vector<FrameIndex> sample_frames(FrameIndex start, FrameIndex end, int n) {
  if (start < 0 || start > end || n < 1) throw InvalidInterval("sample_frames: invalid interval or count");
  std::vector<FrameIndex> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    out.push_back(start);
    return out;
  }
  const FrameIndex len = end - start;
  const FrameIndex den = 2 * static_cast<FrameIndex>(n - 1);
  for (FrameIndex i = 0; i < n; ++i) {
    // floor(x + 1/2) for x = i * len / (n - 1) >= 0, exact in integers.
    const FrameIndex idx = start + (2 * i * len + (n - 1)) / den;
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

int frames_per_turn(const SyntheticVideo& video) { return video.duration_s > 300.0 ? 12 : 8; }

std::set<std::string> reveal_tokens(const SyntheticVideo& video,
                                    const std::vector<FrameIndex>& sorted_indices) {
  std::set<std::string> out;
  for (const auto& e : video.events) {
    auto it = std::lower_bound(sorted_indices.begin(), sorted_indices.end(), e.start_frame);
    if (it != sorted_indices.end() && *it <= e.end_frame) out.insert(e.token);
  }
  return out;
}

namespace {

FramesObservation retrieve(const SyntheticVideo& video, FrameIndex start, FrameIndex end) {
  FramesObservation obs;
  obs.requested = frames_per_turn(video);
  obs.indices = sample_frames(start, end, obs.requested);
  obs.tokens_revealed = reveal_tokens(video, obs.indices);
  return obs;
}

}  // namespace

FramesObservation initial_observation(const Task& task) {
  return retrieve(*task.video, 0, task.video->max_frame());
}

void EnvState::record_frames(const FramesObservation& obs) {
  seen_.insert(obs.indices.begin(), obs.indices.end());
  frames_sampled_ += static_cast<FrameIndex>(obs.indices.size());
  revealed_.insert(obs.tokens_revealed.begin(), obs.tokens_revealed.end());
}

std::pair<EnvState, FramesObservation> EnvState::start(const Task& task, EnvOptions options) {
  EnvState state;
  state.options_ = options;
  auto obs = initial_observation(task);
  state.record_frames(obs);
  return {std::move(state), std::move(obs)};
}

Observation env_step(const Task& task, EnvState& state, const Action& action) {
  if (state.terminal()) throw std::logic_error("env_step called on a terminal episode");
  const SyntheticVideo& video = *task.video;
  state.history_.push_back(action);

  auto error = [&](std::string what) -> Observation {
    state.status_ = EnvStatus::Error;
    state.error_ = std::move(what);
    return TerminalObservation{};
  };

  if (const auto* cf = std::get_if<ChooseFrames>(&action)) {
    if (cf->start_frame < 0 || cf->start_frame > cf->end_frame || cf->end_frame > video.max_frame())
      return error("choose frames interval outside [0, " + std::to_string(video.max_frame()) + "]");
    auto obs = retrieve(video, cf->start_frame, cf->end_frame);
    state.record_frames(obs);
    return obs;
  }
  if (const auto* gfn = std::get_if<GetFrameNumber>(&action)) {
    try {
      return FrameNumberObservation{
          timestamp_to_frame(video, gfn->minutes, gfn->seconds, state.options_.strict_timestamps)};
    } catch (const std::exception& e) {
      return error(e.what());
    }
  }
  const auto& ans = std::get<OutputAnswer>(action);
  if (!task.has_option(ans.choice)) return error(std::string("answer ") + ans.choice + " is not an option");
  state.status_ = EnvStatus::Answered;
  state.answer_ = ans.choice;
  return TerminalObservation{};
}

}  // namespace framethinker
