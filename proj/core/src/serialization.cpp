#include "framethinker/serialization.hpp"

#include <fstream>
#include <sstream>

#include "framethinker/errors.hpp"
#include <nlohmann/json.hpp>

namespace framethinker {

using nlohmann::json;

namespace {

std::string label_string(AnswerLabel l) { return std::string(1, l); }

AnswerLabel label_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'Z') throw DataError("answer label must be one letter: " + s);
  return s[0];
}

void check_schema(const json& j) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != kSchemaVersion)
    throw DataError("missing or unsupported schema version (expected \"v1\")");
}

json video_to_json(const SyntheticVideo& v) {
  json events = json::array();
  for (const auto& e : v.events) {
    events.push_back({{"token", e.token},
                      {"start_frame", e.start_frame},
                      {"end_frame", e.end_frame},
                      {"timestamp_hint", e.timestamp_hint ? json(format_timestamp(*e.timestamp_hint)) : json(nullptr)},
                      {"supports", e.supports ? json(label_string(*e.supports)) : json(nullptr)}});
  }
  return {{"video_id", v.video_id},
          {"duration_s", v.duration_s},
          {"fps", v.fps},
          {"total_frames", v.total_frames},
          {"events", events}};
}

SyntheticVideo video_from_json(const json& j) {
  std::vector<EvidenceEvent> events;
  for (const auto& e : j.at("events")) {
    EvidenceEvent ev;
    ev.token = e.at("token").get<std::string>();
    ev.start_frame = e.at("start_frame").get<FrameIndex>();
    ev.end_frame = e.at("end_frame").get<FrameIndex>();
    if (e.contains("timestamp_hint") && !e.at("timestamp_hint").is_null())
      ev.timestamp_hint = parse_timestamp(e.at("timestamp_hint").get<std::string>());
    if (e.contains("supports") && !e.at("supports").is_null()) ev.supports = label_from(e.at("supports"));
    events.push_back(std::move(ev));
  }
  SyntheticVideo v = make_video(j.at("video_id").get<std::string>(), j.at("duration_s").get<double>(),
                                j.at("fps").get<double>(), std::move(events));
  if (j.contains("total_frames") && j.at("total_frames").get<FrameIndex>() != v.total_frames)
    throw DataError(v.video_id + ": total_frames disagrees with round(duration_s * fps)");
  return v;
}

json observation_to_json(const Observation& obs) {
  if (const auto* f = std::get_if<FramesObservation>(&obs))
    return {{"type", "frames"}, {"indices", f->indices}, {"tokens", f->tokens_revealed}, {"requested", f->requested}};
  if (const auto* n = std::get_if<FrameNumberObservation>(&obs)) return {{"type", "frame_number"}, {"index", n->index}};
  return {{"type", "terminal"}};
}

Observation observation_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "frames") {
    FramesObservation f;
    f.indices = j.at("indices").get<std::vector<FrameIndex>>();
    for (const auto& t : j.at("tokens")) f.tokens_revealed.insert(t.get<std::string>());
    f.requested = j.at("requested").get<int>();
    return f;
  }
  if (type == "frame_number") return FrameNumberObservation{j.at("index").get<FrameIndex>()};
  if (type == "terminal") return TerminalObservation{};
  throw DataError("unknown observation type: " + type);
}

json reward_to_json(const RewardBreakdown& r) {
  return {{"r_acc", r.r_acc},
          {"r_action", r.r_action},
          {"r_format", r.r_format},
          {"r_total", r.r_total},
          {"v_ccv", r.v_ccv},
          {"r_final", r.r_final},
          {"ccv_reason", r.ccv_reason ? json(std::string(to_string(*r.ccv_reason))) : json(nullptr)}};
}

RewardBreakdown reward_from_json(const json& j) {
  RewardBreakdown r;
  r.r_acc = j.at("r_acc").get<int>();
  r.r_action = j.at("r_action").get<double>();
  r.r_format = j.value("r_format", 0.0);
  r.r_total = j.at("r_total").get<double>();
  r.v_ccv = j.at("v_ccv").get<int>();
  r.r_final = j.at("r_final").get<double>();
  if (j.contains("ccv_reason") && !j.at("ccv_reason").is_null())
    r.ccv_reason = parse_ccv_reason(j.at("ccv_reason").get<std::string>());
  return r;
}

json verdict_to_json(const CcvVerdict& v) {
  return {{"pass", v.pass},
          {"reason", v.reason ? json(std::string(to_string(*v.reason))) : json(nullptr)},
          {"failing_turn", v.failing_turn ? json(*v.failing_turn) : json(nullptr)},
          {"detail", v.detail}};
}

CcvVerdict verdict_from_json(const json& j) {
  CcvVerdict v;
  v.pass = j.at("pass").get<bool>();
  if (!j.at("reason").is_null()) v.reason = parse_ccv_reason(j.at("reason").get<std::string>());
  if (!j.at("failing_turn").is_null()) v.failing_turn = j.at("failing_turn").get<std::size_t>();
  v.detail = j.value("detail", "");
  return v;
}

template <typename F>
auto with_data_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

}  // namespace

std::string task_to_json_line(const Task& task) {
  json options = json::array();
  for (AnswerLabel l : task.options) options.push_back(label_string(l));
  json j = {{"schema", kSchemaVersion},
            {"task_id", task.task_id},
            {"question_kind", std::string(to_string(task.question_kind))},
            {"required_tokens", task.required_tokens},
            {"options", options},
            {"correct", label_string(task.correct)},
            {"video", video_to_json(*task.video)}};
  return j.dump();
}

Task task_from_json_line(std::string_view line) {
  return with_data_errors([&] {
    const json j = json::parse(line);
    check_schema(j);
    Task t;
    t.task_id = j.at("task_id").get<std::string>();
    t.question_kind = parse_question_kind(j.at("question_kind").get<std::string>());
    t.required_tokens = j.at("required_tokens").get<std::vector<std::string>>();
    for (const auto& o : j.at("options")) t.options.push_back(label_from(o));
    t.correct = label_from(j.at("correct"));
    t.video = std::make_shared<const SyntheticVideo>(video_from_json(j.at("video")));
    validate(t);
    return t;
  });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_lines(const std::filesystem::path& path, Parse parse) {
  const std::string text = read_file(path);
  std::vector<T> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace

void write_task_corpus(const std::filesystem::path& path, const std::vector<Task>& tasks) {
  std::string out;
  for (const auto& t : tasks) out += task_to_json_line(t) + "\n";
  write_file(path, out);
}

std::vector<Task> read_task_corpus(const std::filesystem::path& path) {
  return read_lines<Task>(path, task_from_json_line);
}

std::string trajectory_to_json_line(const LoggedTrajectory& entry) {
  const Trajectory& t = entry.trajectory;
  json turns = json::array();
  for (const auto& turn : t.turns)
    turns.push_back({{"raw", turn.raw},
                     {"observation", turn.observation ? observation_to_json(*turn.observation) : json(nullptr)}});
  json j = {{"schema", kSchemaVersion},
            {"task_id", t.task_id},
            {"seed", entry.seed},
            {"max_frame", t.max_frame},
            {"status", std::string(to_string(t.terminal_status))},
            {"answer", t.answer ? json(label_string(*t.answer)) : json(nullptr)},
            {"fallback", t.fallback},
            {"n_turns", t.n_turns},
            {"distinct_frames_seen", t.distinct_frames_seen},
            {"response_length", t.response_length},
            {"initial_observation", observation_to_json(t.initial_observation)},
            {"turns", turns}};
  if (entry.reward) j["reward"] = reward_to_json(*entry.reward);
  if (entry.verdict) j["ccv"] = verdict_to_json(*entry.verdict);
  return j.dump();
}

LoggedTrajectory trajectory_from_json_line(std::string_view line) {
  return with_data_errors([&] {
    const json j = json::parse(line);
    check_schema(j);
    LoggedTrajectory entry;
    Trajectory& t = entry.trajectory;
    t.task_id = j.at("task_id").get<std::string>();
    entry.seed = j.value("seed", std::uint64_t{0});
    t.max_frame = j.at("max_frame").get<FrameIndex>();
    t.terminal_status = parse_terminal_status(j.at("status").get<std::string>());
    if (!j.at("answer").is_null()) t.answer = label_from(j.at("answer"));
    t.fallback = j.value("fallback", false);
    const auto init = observation_from_json(j.at("initial_observation"));
    if (!std::holds_alternative<FramesObservation>(init)) throw DataError("initial observation must be frames");
    t.initial_observation = std::get<FramesObservation>(init);
    for (const auto& jt : j.at("turns")) {
      Turn turn;
      turn.raw = jt.at("raw").get<std::string>();
      if (auto parsed = try_parse_response(turn.raw)) {
        turn.thought = parsed.response->thought;
        turn.action = parsed.response->action;
      }
      if (!jt.at("observation").is_null()) turn.observation = observation_from_json(jt.at("observation"));
      t.turns.push_back(std::move(turn));
    }
    t.n_turns = j.at("n_turns").get<int>();
    if (t.n_turns != static_cast<int>(t.turns.size())) throw DataError("n_turns disagrees with turn list");
    t.distinct_frames_seen = j.at("distinct_frames_seen").get<FrameIndex>();
    t.response_length = j.at("response_length").get<std::size_t>();
    if (j.contains("reward")) entry.reward = reward_from_json(j.at("reward"));
    if (j.contains("ccv")) entry.verdict = verdict_from_json(j.at("ccv"));
    return entry;
  });
}

std::vector<LoggedTrajectory> read_trajectory_log(const std::filesystem::path& path) {
  return read_lines<LoggedTrajectory>(path, trajectory_from_json_line);
}

std::string verdict_to_json_line(const std::string& task_id, const CcvVerdict& verdict) {
  json j = verdict_to_json(verdict);
  j["task_id"] = task_id;
  return j.dump();
}

}  // namespace framethinker
