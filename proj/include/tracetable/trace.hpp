#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracetable/program.hpp"

namespace tracetable {

/// Global interleaving: the thread that runs at each step.
struct Schedule {
  std::vector<std::string> steps;

  bool operator==(const Schedule&) const = default;
};

/// One recorded statement execution; `seq` is the trace-table row number.
struct Event {
  std::size_t seq = 0;
  std::string threadName;
  std::size_t thread = 0;
  /// Position in the thread's program order.
  std::size_t ordinal = 0;
  StatementRef statementRef;
  std::size_t depth = 0;
  /// 0 when the event sits directly in the thread's root method.
  std::size_t parentSeq = 0;
  std::string displayText;
  std::size_t sourceLine = 0;

  bool operator==(const Event&) const = default;
};

struct Trace {
  ProgramPtr program;
  std::vector<Event> events;
  Schedule schedule;

  std::size_t size() const noexcept { return events.size(); }
  const Event& row(std::size_t seq) const { return events.at(seq - 1); }
};

/// A trace line resolved against a program.
struct EventKey {
  std::string threadName;
  StatementRef statementRef;

  bool operator==(const EventKey&) const = default;
};

struct ResolvedLine {
  std::string threadName;
  std::size_t thread = 0;
  StatementRef statementRef;
  std::size_t ordinal = 0;
};

std::string render_trace_line(std::string_view threadName, std::string_view displayText);

/// "[thread] text" for every event, in order.
std::vector<std::string> render_trace_text(const Trace& trace);

/// Maps bracketed trace lines back to program statements. Repeated identical
/// lines of one thread resolve by occurrence: the k-th copy in the input is the
/// k-th matching event in that thread's program order. Throws TraceTextError.
std::vector<ResolvedLine> parse_trace_text(std::span<const std::string> lines, const ProgramModel& program);

std::vector<EventKey> event_keys(std::span<const ResolvedLine> lines);
std::vector<EventKey> event_keys(const Trace& trace);

/// Events of one thread, order preserved. Throws std::invalid_argument for an unknown thread.
std::vector<Event> project_thread(const Trace& trace, std::string_view threadName);

}  // namespace tracetable
