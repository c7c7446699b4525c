#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tracetable/program.hpp"
#include "tracetable/trace.hpp"

namespace tracetable {

struct TimelinePoint {
  std::size_t row = 0;
  std::int64_t valueAfter = 0;

  bool operator==(const TimelinePoint&) const = default;
};

/// Where a printed value came from: the event that read shared variable `var`.
struct PrintFeed {
  std::size_t var = 0;
  std::size_t retrievalSeq = 0;
  std::int64_t value = 0;

  bool operator==(const PrintFeed&) const = default;
};

struct PrintRecord {
  std::size_t seq = 0;
  std::string text;
  std::vector<PrintFeed> feeds;

  bool operator==(const PrintRecord&) const = default;
};

struct ExecutionResult {
  Trace trace;
  std::vector<std::string> outputLines;
  /// Change points only: one entry per row that writes the variable.
  std::map<std::string, std::vector<TimelinePoint>> timelines;
  std::map<std::string, std::int64_t> finalValues;
  std::vector<PrintRecord> prints;
};

/// Executes `program` under `schedule`, one statement per step. Throws ReplayError
/// naming the first step that cannot run, or step N+1 when the schedule stops early.
ExecutionResult replay(const ProgramPtr& program, const Schedule& schedule);

/// Visits every feasible schedule once, in lexicographic order of thread index
/// (main, then declared threads). Returns the number visited. Throws
/// EnumerationError when the program has more than `maxEvents` events.
std::size_t for_each_schedule(const ProgramModel& program, std::size_t maxEvents,
                              const std::function<void(std::span<const std::size_t>)>& visit);

/// Same enumeration, replaying each schedule.
std::size_t enumerate_schedules(const ProgramPtr& program, std::size_t maxEvents,
                                const std::function<void(const ExecutionResult&)>& visit);

struct Feasibility {
  bool feasible = true;
  /// 1-based position of the first event whose prerequisite has not occurred; 0 when feasible.
  std::size_t firstViolation = 0;
};

/// True iff every thread runs in program order and no spawned thread runs before
/// its start event. Throws std::invalid_argument if `eventOrder` is not a
/// permutation of the program's complete event multiset.
Feasibility feasible(const ProgramModel& program, std::span<const EventKey> eventOrder);

/// Uniformly picks one runnable thread at every step.
Schedule sample_schedule(const ProgramModel& program, std::mt19937_64& rng);

Schedule schedule_from_threads(const ProgramModel& program, std::span<const std::size_t> threads);
Schedule schedule_of(std::span<const ResolvedLine> lines);

/// Portable bounded draw; std distributions differ across standard libraries.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound);

}  // namespace tracetable
