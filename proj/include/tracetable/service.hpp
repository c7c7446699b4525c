#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tracetable/error.hpp"
#include "tracetable/exercise.hpp"
#include "tracetable/layout.hpp"

namespace tracetable {

/// Request-level failure; `status()` is the HTTP status to report.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

enum class TaskKind { Selection, FillIn, Ordering };

const char* to_string(TaskKind kind) noexcept;

struct SessionStats {
  std::string learnerName;
  std::string exerciseId;
  std::size_t selectionAttempts = 0;
  std::size_t fillinAttempts = 0;
  std::int64_t startedAtMs = 0;
  bool completed = false;
  /// First fetch to fill-in completion; for open sessions, to the latest attempt.
  double learningDurationSeconds = 0.0;

  bool operator==(const SessionStats&) const = default;
};

nlohmann::json to_json(const SessionStats& stats);

/// Folds attempt-log records into per-session state. Pure: the same records
/// always give the same sessions.
class SessionTracker {
 public:
  void apply(const nlohmann::json& record);

  /// Sessions of `learner` ordered by start time; every learner when empty.
  std::vector<SessionStats> stats(std::string_view learner = {}) const;
  bool has_open_session(const std::string& learner, const std::string& exerciseId) const;
  bool fill_in_unlocked(const std::string& learner, const std::string& exerciseId) const;
  std::size_t attempts(const std::string& learner, const std::string& exerciseId, TaskKind kind) const;

 private:
  struct Session {
    SessionStats stats;
    std::int64_t lastActivityMs = 0;
    bool unlocked = false;
  };
  Session& open(const std::string& learner, const std::string& exerciseId, std::int64_t atMs);

  std::vector<Session> sessions_;
  std::map<std::pair<std::string, std::string>, std::size_t> open_;
  std::map<std::tuple<std::string, std::string, TaskKind>, std::size_t> attempts_;
};

std::vector<SessionStats> fold_sessions(std::span<const nlohmann::json> records, std::string_view learner = {});

/// Append-only JSON-lines file; one writer at a time.
class AttemptLog {
 public:
  explicit AttemptLog(std::filesystem::path file);

  void append(const nlohmann::json& record);
  const std::vector<nlohmann::json>& records() const noexcept { return records_; }
  const std::filesystem::path& path() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  std::ofstream out_;
  std::vector<nlohmann::json> records_;
};

/// Exercises plus everything precomputed for serving them.
struct ServedExercise {
  Exercise exercise;
  ExecutionResult correct;
  std::vector<FillInSheet> sheets;
  /// Trace each choice induces; infeasible choices get a flat trace for stepping.
  std::vector<Trace> choiceTraces;
  std::vector<bool> choiceFeasible;
  std::vector<bool> choiceCorrect;
};

class Service {
 public:
  struct Options {
    std::filesystem::path dataDir;
    /// Seed for exercises shipped without answer choices.
    std::uint64_t seed = 42;
    /// Milliseconds since the Unix epoch; defaults to the system clock.
    std::function<std::int64_t()> clock;
  };

  explicit Service(Options options);

  nlohmann::json list_exercises() const;
  /// Answer-free view. Passing a learner opens their session (learning time starts).
  nlohmann::json get_exercise(const std::string& id, const std::optional<std::string>& learner = std::nullopt);
  nlohmann::json submit_selection(const std::string& learner, const std::string& exerciseId,
                                  std::int64_t choiceIndex);
  nlohmann::json submit_fill_in(const std::string& learner, const std::string& exerciseId,
                                const nlohmann::json& answers);
  nlohmann::json submit_ordering(const std::string& learner, const std::string& testId,
                                 const std::vector<std::string>& arrangement);
  std::vector<SessionStats> session_stats(const std::string& learner) const;
  nlohmann::json replay(const std::string& exerciseId, std::size_t choice, std::size_t cursor,
                        std::optional<Direction> direction) const;

  const AttemptLog& log() const noexcept { return log_; }
  const ServedExercise& exercise(const std::string& id) const;

 private:
  void load_store();
  nlohmann::json record_attempt(const std::string& learner, const std::string& exerciseId, TaskKind kind,
                                nlohmann::json payload, nlohmann::json verdict);

  Options options_;
  std::map<std::string, ServedExercise> store_;
  AttemptLog log_;
  SessionTracker tracker_;
  mutable std::shared_mutex mutex_;
};

/// "2026-10-19T08:30:00.250Z"
std::string format_utc(std::int64_t epochMs);

}  // namespace tracetable
