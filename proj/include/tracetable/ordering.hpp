#pragma once

// Grading of the trace-ordering test: a learner rearranges the lines of a
// recorded trace and is charged for lines whose prerequisites come later.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracetable/program.hpp"
#include "tracetable/trace.hpp"

namespace tracetable {

struct Exercise;

enum class AccessKind { Retrieval, Update };

const char* to_string(AccessKind kind) noexcept;

/// One read or write of a tracked variable, identified by its place in a thread's program order.
struct AccessEvent {
  std::string thread;
  std::size_t ordinal = 0;
  AccessKind kind = AccessKind::Retrieval;

  bool operator==(const AccessEvent&) const = default;
};

/// The predefined order in which the correct trace reads and writes one variable.
struct RUOrder {
  std::string variable;
  std::vector<AccessEvent> sequence;

  bool operator==(const RUOrder&) const = default;
};

/// How `stmt` touches shared variable `var`, if at all.
std::optional<AccessKind> access_kind(const Statement& stmt, std::size_t var);

/// Projection of `trace` onto the events that read or write `variable`.
RUOrder derive_ru_order(const Trace& trace, const std::string& variable);

struct GradeReport {
  std::vector<std::size_t> execViolationPositions;
  std::vector<std::size_t> ruViolationPositions;
  std::size_t errors = 0;
  std::size_t totalChoices = 0;

  /// 1 - errors / totalChoices; 1.0 for an empty test.
  double accuracy() const noexcept {
    return totalChoices == 0 ? 1.0 : 1.0 - static_cast<double>(errors) / static_cast<double>(totalChoices);
  }
};

/// Positions (1-based) of events whose prerequisite is not placed earlier. The
/// prerequisite is the previous event of the same thread, or the start event
/// for a thread's first event. Throws TraceTextError for unparseable lines.
std::vector<std::size_t> execution_order_violations(const ProgramModel& program,
                                                    std::span<const std::string> arrangement);

/// Positions of tracked-variable accesses whose predecessor in the exercise's
/// retrieval-update order is not placed earlier. Meaningful only when there are
/// no execution-order violations.
std::vector<std::size_t> retrieval_update_violations(const Exercise& exercise,
                                                     std::span<const std::string> arrangement);

/// Execution-order violations take precedence; retrieval-update violations are
/// charged only when there are none. Throws std::invalid_argument when the
/// arrangement is not a permutation of the exercise's ordering items.
GradeReport grade_ordering(const Exercise& exercise, std::span<const std::string> arrangement);

}  // namespace tracetable
