#include "tracetable/service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <stdexcept>

#include "tracetable/json_io.hpp"

namespace tracetable {

using nlohmann::json;

const char* to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::Selection: return "selection";
    case TaskKind::FillIn: return "fillin";
    case TaskKind::Ordering: return "ordering";
  }
  return "?";
}

namespace {

std::optional<TaskKind> task_kind(std::string_view s) {
  if (s == "selection") return TaskKind::Selection;
  if (s == "fillin") return TaskKind::FillIn;
  if (s == "ordering") return TaskKind::Ordering;
  return std::nullopt;
}

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require_learner(const std::string& learner) {
  if (learner.empty()) throw ServiceError(400, "learner name is required");
}

// Stepping through a choice that cannot happen still needs one row per line.
Trace flat_trace(const ProgramPtr& program, std::span<const ResolvedLine> lines) {
  Trace trace;
  trace.program = program;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const StaticEvent& se = program->program_order(l.thread)[l.ordinal];
    const Statement& st = program->statement(se.stmt);
    trace.events.push_back(
        Event{i + 1, l.threadName, l.thread, l.ordinal, l.statementRef, se.depth, 0, st.displayText, st.sourceLine});
    trace.schedule.steps.push_back(l.threadName);
  }
  return trace;
}

ServedExercise prepare(Exercise ex) {
  ServedExercise served;
  served.correct = correct_execution(ex);
  const auto correctLines = render_trace_text(served.correct.trace);
  for (const auto& var : ex.trackedVars) served.sheets.push_back(expected_value_timeline(served.correct, var));
  for (const auto& choice : ex.choices) {
    const auto resolved = parse_trace_text(choice.lines, *ex.program);
    const bool ok = feasible(*ex.program, event_keys(resolved)).feasible;
    served.choiceFeasible.push_back(ok);
    served.choiceTraces.push_back(ok ? replay(ex.program, schedule_of(resolved)).trace
                                     : flat_trace(ex.program, resolved));
    served.choiceCorrect.push_back(choice_is_correct(ex.program, choice.lines, correctLines, ex.givenOutput));
  }
  served.exercise = std::move(ex);
  return served;
}

}  // namespace

std::string format_utc(std::int64_t epochMs) {
  const std::time_t secs = static_cast<std::time_t>(epochMs / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(epochMs % 1000));
  return out;
}

json to_json(const SessionStats& s) {
  return json{{"learnerName", s.learnerName},
              {"exerciseId", s.exerciseId},
              {"selectionAttempts", s.selectionAttempts},
              {"fillinAttempts", s.fillinAttempts},
              {"startedAt", format_utc(s.startedAtMs)},
              {"completed", s.completed},
              {"learningDurationSeconds", s.learningDurationSeconds}};
}

// --- SessionTracker ---------------------------------------------------------

SessionTracker::Session& SessionTracker::open(const std::string& learner, const std::string& exerciseId,
                                              std::int64_t atMs) {
  const auto key = std::make_pair(learner, exerciseId);
  if (const auto it = open_.find(key); it != open_.end()) return sessions_[it->second];
  Session s;
  s.stats.learnerName = learner;
  s.stats.exerciseId = exerciseId;
  s.stats.startedAtMs = atMs;
  s.lastActivityMs = atMs;
  sessions_.push_back(std::move(s));
  open_.emplace(key, sessions_.size() - 1);
  return sessions_.back();
}

void SessionTracker::apply(const json& record) {
  const std::string type = record.at("type").get<std::string>();
  const std::string learner = record.at("learner").get<std::string>();
  const std::string exerciseId = record.at("exerciseId").get<std::string>();

  if (type == "session-start") {
    open(learner, exerciseId, record.at("atMs").get<std::int64_t>());
    return;
  }
  if (type != "attempt") return;

  const auto kind = task_kind(record.at("taskKind").get<std::string>());
  if (!kind) return;
  ++attempts_[{learner, exerciseId, *kind}];
  if (*kind == TaskKind::Ordering) return;

  const std::int64_t at = record.at("submittedAtMs").get<std::int64_t>();
  Session& s = open(learner, exerciseId, at);
  s.lastActivityMs = std::max(s.lastActivityMs, at);
  const json& verdict = record.at("verdict");
  if (*kind == TaskKind::Selection) {
    ++s.stats.selectionAttempts;
    if (verdict.value("correct", false)) s.unlocked = true;
    return;
  }
  ++s.stats.fillinAttempts;
  if (verdict.value("complete", false)) {
    s.stats.completed = true;
    s.stats.learningDurationSeconds = static_cast<double>(at - s.stats.startedAtMs) / 1000.0;
    open_.erase({learner, exerciseId});
  }
}

std::vector<SessionStats> SessionTracker::stats(std::string_view learner) const {
  std::vector<SessionStats> out;
  for (const auto& s : sessions_) {
    if (!learner.empty() && s.stats.learnerName != learner) continue;
    SessionStats st = s.stats;
    if (!st.completed) st.learningDurationSeconds = static_cast<double>(s.lastActivityMs - st.startedAtMs) / 1000.0;
    out.push_back(std::move(st));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SessionStats& a, const SessionStats& b) { return a.startedAtMs < b.startedAtMs; });
  return out;
}

bool SessionTracker::has_open_session(const std::string& learner, const std::string& exerciseId) const {
  return open_.contains({learner, exerciseId});
}

bool SessionTracker::fill_in_unlocked(const std::string& learner, const std::string& exerciseId) const {
  const auto it = open_.find({learner, exerciseId});
  return it != open_.end() && sessions_[it->second].unlocked;
}

std::size_t SessionTracker::attempts(const std::string& learner, const std::string& exerciseId,
                                     TaskKind kind) const {
  const auto it = attempts_.find({learner, exerciseId, kind});
  return it == attempts_.end() ? 0 : it->second;
}

std::vector<SessionStats> fold_sessions(std::span<const json> records, std::string_view learner) {
  SessionTracker tracker;
  for (const auto& r : records) tracker.apply(r);
  return tracker.stats(learner);
}

// --- AttemptLog -------------------------------------------------------------

AttemptLog::AttemptLog(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  if (std::ifstream in(file_); in) {
    std::size_t lineNo = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineNo;
      if (line.empty()) continue;
      try {
        records_.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw Error(file_.string() + ":" + std::to_string(lineNo) + ": " + e.what());
      }
    }
  }
  out_.open(file_, std::ios::app);
  if (!out_) throw Error("cannot open attempt log " + file_.string());
}

void AttemptLog::append(const json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("failed writing attempt log " + file_.string());
  records_.push_back(record);
}

// --- Service ----------------------------------------------------------------

Service::Service(Options options) : options_(std::move(options)), log_(options_.dataDir / "attempts.jsonl") {
  if (!options_.clock) options_.clock = system_clock_ms;
  load_store();
  for (const auto& r : log_.records()) tracker_.apply(r);
}

void Service::load_store() {
  const auto dir = options_.dataDir / "exercises";
  if (!std::filesystem::is_directory(dir)) return;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    Exercise ex = load_exercise_file(file);
    if (ex.choices.empty()) {
      // Shipped without choices: author them now.
      auto authored = author_exercise(ex.id, ex.title, ex.programSource, ex.correctSchedule, ex.trackedVars, 3,
                                      options_.seed ^ fnv1a(ex.id));
      if (authored.givenOutput != ex.givenOutput) {
        throw ExerciseError(file.string() + ": correct schedule does not print the given output");
      }
      ex = std::move(authored);
    }
    const auto report = validate_exercise(ex);
    if (!report.ok()) {
      throw ExerciseError(file.string() + ": invalid exercise: " + report.issues.front().rule + ": " +
                          report.issues.front().message);
    }
    const std::string id = ex.id;
    if (store_.contains(id)) throw ExerciseError("duplicate exercise id '" + id + "'");
    store_.emplace(id, prepare(std::move(ex)));
  }
}

const ServedExercise& Service::exercise(const std::string& id) const {
  const auto it = store_.find(id);
  if (it == store_.end()) throw ServiceError(404, "unknown exercise '" + id + "'");
  return it->second;
}

json Service::list_exercises() const {
  json list = json::array();
  for (const auto& [id, served] : store_) {
    list.push_back(json{{"id", id},
                        {"title", served.exercise.title},
                        {"choiceCount", served.exercise.choices.size()},
                        {"rowCount", served.correct.trace.size()}});
  }
  return json{{"exercises", std::move(list)}};
}

json Service::get_exercise(const std::string& id, const std::optional<std::string>& learner) {
  const ServedExercise& served = exercise(id);
  const Exercise& ex = served.exercise;
  if (learner) {
    require_learner(*learner);
    std::unique_lock lock(mutex_);
    if (!tracker_.has_open_session(*learner, id)) {
      const std::int64_t now = options_.clock();
      const json record{{"type", "session-start"},
                        {"learner", *learner},
                        {"exerciseId", id},
                        {"at", format_utc(now)},
                        {"atMs", now}};
      log_.append(record);
      tracker_.apply(record);
    }
  }

  // Ordering items go out shuffled, the same way on every request.
  auto items = ex.orderingItems;
  std::mt19937_64 rng(fnv1a(id));
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(rng, i)]);

  json choices = json::array();
  for (const auto& c : ex.choices) choices.push_back(c.lines);
  return json{{"id", ex.id},
              {"title", ex.title},
              {"programSource", ex.program->sourceLines},
              {"givenOutput", ex.givenOutput},
              {"choices", std::move(choices)},
              {"trackedVars", ex.trackedVars},
              {"orderingItems", std::move(items)},
              {"rowCount", served.correct.trace.size()}};
}

json Service::record_attempt(const std::string& learner, const std::string& exerciseId, TaskKind kind,
                             json payload, json verdict) {
  const std::int64_t now = options_.clock();
  json record{{"type", "attempt"},
              {"learner", learner},
              {"exerciseId", exerciseId},
              {"taskKind", to_string(kind)},
              {"attemptNumber", tracker_.attempts(learner, exerciseId, kind) + 1},
              {"submittedAt", format_utc(now)},
              {"submittedAtMs", now},
              {"payload", std::move(payload)},
              {"verdict", std::move(verdict)}};
  log_.append(record);
  tracker_.apply(record);
  return record;
}

json Service::submit_selection(const std::string& learner, const std::string& exerciseId,
                               std::int64_t choiceIndex) {
  require_learner(learner);
  const ServedExercise& served = exercise(exerciseId);
  if (choiceIndex < 0 || static_cast<std::size_t>(choiceIndex) >= served.exercise.choices.size()) {
    throw ServiceError(400, "choice index " + std::to_string(choiceIndex) + " is out of range");
  }
  const auto index = static_cast<std::size_t>(choiceIndex);
  const bool correct = served.choiceCorrect[index];

  std::unique_lock lock(mutex_);
  const json record =
      record_attempt(learner, exerciseId, TaskKind::Selection, json{{"choiceIndex", index}}, json{{"correct", correct}});
  lock.unlock();

  const Trace& trace = served.choiceTraces[index];
  json sourceLines = json::array();
  for (const auto& e : trace.events) sourceLines.push_back(e.sourceLine);
  json replayBundle{{"choiceIndex", index},
                    {"lines", served.exercise.choices[index].lines},
                    {"sourceLines", std::move(sourceLines)},
                    {"feasible", served.choiceFeasible[index]},
                    {"layout", served.choiceFeasible[index] ? to_json(layout(trace)) : json(nullptr)},
                    {"state", to_json(replay_init(trace))},
                    {"endpoint", "/exercises/" + exerciseId + "/replay?choice=" + std::to_string(index)}};

  json response{{"exerciseId", exerciseId},
                {"correct", correct},
                {"attemptNumber", record.at("attemptNumber")},
                {"reanswer", !correct},
                {"fillinUnlocked", correct},
                {"replay", std::move(replayBundle)}};
  if (correct) {
    json vars = json::array();
    for (const auto& sheet : served.sheets) vars.push_back(json{{"variable", sheet.variable}, {"rows", sheet.rows()}});
    response["fillin"] = json{{"layout", to_json(layout(served.correct.trace))}, {"variables", std::move(vars)}};
  }
  return response;
}

json Service::submit_fill_in(const std::string& learner, const std::string& exerciseId, const json& answers) {
  require_learner(learner);
  const ServedExercise& served = exercise(exerciseId);
  if (!answers.is_object()) throw ServiceError(400, "answers must be an object");

  // Accept {"row": value} directly when there is a single tracked variable.
  json byVar = answers;
  if (served.sheets.size() == 1 && std::none_of(answers.begin(), answers.end(),
                                                [](const json& v) { return v.is_object(); })) {
    byVar = json{{served.sheets.front().variable, answers}};
  }
  for (const auto& [var, _] : byVar.items()) {
    const bool tracked = std::any_of(served.sheets.begin(), served.sheets.end(),
                                     [&](const FillInSheet& s) { return s.variable == var; });
    if (!tracked) throw ServiceError(400, "'" + var + "' is not a tracked variable");
  }

  std::vector<FillInGrade> grades;
  for (const auto& sheet : served.sheets) {
    FillInAnswers parsed;
    if (byVar.contains(sheet.variable)) {
      const json& cells = byVar.at(sheet.variable);
      if (!cells.is_object()) throw ServiceError(400, "answers for '" + sheet.variable + "' must be an object");
      for (const auto& [row, value] : cells.items()) {
        std::size_t r = 0;
        const auto [end, ec] = std::from_chars(row.data(), row.data() + row.size(), r);
        if (ec != std::errc{} || end != row.data() + row.size() || row.empty()) {
          throw ServiceError(400, "row key '" + row + "' is not a number");
        }
        if (value.is_null()) {
          parsed[r] = std::nullopt;
        } else if (value.is_number_integer()) {
          parsed[r] = value.get<std::int64_t>();
        } else {
          throw ServiceError(400, "row " + row + ": answer must be an integer or null");
        }
      }
    }
    try {
      grades.push_back(grade_fill_in(sheet, parsed));
    } catch (const std::invalid_argument& e) {
      throw ServiceError(400, e.what());
    }
  }
  const bool allCorrect = std::all_of(grades.begin(), grades.end(), [](const FillInGrade& g) { return g.allCorrect; });

  std::unique_lock lock(mutex_);
  if (!tracker_.fill_in_unlocked(learner, exerciseId)) {
    throw ServiceError(409, "answer the selection question correctly first");
  }
  const json record = record_attempt(learner, exerciseId, TaskKind::FillIn, byVar,
                                     json{{"correct", allCorrect}, {"complete", allCorrect}});
  lock.unlock();

  json vars = json::array();
  for (std::size_t i = 0; i < grades.size(); ++i) {
    json cells = json::array();
    for (const auto& c : grades[i].cells) {
      cells.push_back(json{{"row", c.row}, {"submitted", c.submitted ? json(*c.submitted) : json(nullptr)},
                           {"correct", c.correct}});
    }
    vars.push_back(json{{"variable", served.sheets[i].variable},
                        {"allCorrect", grades[i].allCorrect},
                        {"cells", std::move(cells)},
                        {"hintRows", grades[i].hintRows}});
  }
  return json{{"exerciseId", exerciseId},
              {"correct", allCorrect},
              {"complete", allCorrect},
              {"attemptNumber", record.at("attemptNumber")},
              {"variables", std::move(vars)}};
}

json Service::submit_ordering(const std::string& learner, const std::string& testId,
                              const std::vector<std::string>& arrangement) {
  require_learner(learner);
  const ServedExercise& served = exercise(testId);
  GradeReport report;
  try {
    report = grade_ordering(served.exercise, arrangement);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(400, e.what());
  } catch (const TraceTextError& e) {
    throw ServiceError(400, e.what());
  }
  json verdict = to_json(report);

  std::unique_lock lock(mutex_);
  const json record = record_attempt(learner, testId, TaskKind::Ordering, json{{"arrangement", arrangement}}, verdict);
  lock.unlock();

  verdict["testId"] = testId;
  verdict["attemptNumber"] = record.at("attemptNumber");
  return verdict;
}

std::vector<SessionStats> Service::session_stats(const std::string& learner) const {
  std::shared_lock lock(mutex_);
  return tracker_.stats(learner);
}

json Service::replay(const std::string& exerciseId, std::size_t choice, std::size_t cursor,
                     std::optional<Direction> direction) const {
  const ServedExercise& served = exercise(exerciseId);
  if (choice >= served.choiceTraces.size()) {
    throw ServiceError(400, "choice index " + std::to_string(choice) + " is out of range");
  }
  const Trace& trace = served.choiceTraces[choice];
  if (trace.events.empty()) throw ServiceError(400, "nothing to replay: the trace is empty");
  ReplayState state = replay_at(trace, cursor);
  if (direction) state = replay_step(state, *direction, trace);
  return json{{"exerciseId", exerciseId},
              {"choice", choice},
              {"rowCount", trace.size()},
              {"state", to_json(state)},
              {"traceLine", served.exercise.choices[choice].lines[state.cursor - 1]}};
}

}  // namespace tracetable
