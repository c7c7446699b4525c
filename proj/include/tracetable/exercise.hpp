#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracetable/interpreter.hpp"
#include "tracetable/ordering.hpp"
#include "tracetable/program.hpp"
#include "tracetable/trace.hpp"

namespace tracetable {

struct ChoiceTrace {
  std::vector<std::string> lines;

  bool operator==(const ChoiceTrace&) const = default;
};

struct Exercise {
  std::string id;
  std::string title;
  std::string programSource;
  ProgramPtr program;
  std::vector<std::string> givenOutput;
  Schedule correctSchedule;
  std::vector<ChoiceTrace> choices;
  std::size_t correctChoiceIndex = 0;
  std::vector<std::string> trackedVars;
  /// Lines of the ordering test, stored in the recorded order.
  std::vector<std::string> orderingItems;
  std::vector<RUOrder> ruOrders;
};

/// Replays the exercise's correct schedule.
ExecutionResult correct_execution(const Exercise& exercise);

/// A choice is correct when its order is feasible and replaying it prints
/// exactly `givenOutput`. Lines that are not a permutation of `correctLines`
/// are never correct. Throws TraceTextError for an unparseable line.
bool choice_is_correct(const ProgramPtr& program, std::span<const std::string> lines,
                       std::span<const std::string> correctLines, std::span<const std::string> givenOutput);

/// Throws std::out_of_range for a bad index and TraceTextError for an unparseable line.
bool is_correct_choice(const Exercise& exercise, std::size_t choiceIndex);

struct ValidationIssue {
  std::string rule;
  std::optional<std::size_t> choice;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
};

ValidationReport validate_exercise(const Exercise& exercise);

/// Reasons `variable` cannot be a tracked variable for this execution: it must
/// be shared, written (inc/dec) by at least two threads, and read by a
/// retrieval whose value reaches a print. Empty when acceptable.
std::vector<std::string> tracked_variable_issues(const ExecutionResult& execution, const std::string& variable);

/// Wrong answer choices for a selection question, deterministic in `seed`.
/// Throws DistractorError if `count` distinct distractors cannot be found.
std::vector<ChoiceTrace> generate_distractors(const ProgramPtr& program, const Trace& correctTrace,
                                              std::span<const std::string> givenOutput, std::size_t count,
                                              std::uint64_t seed);

/// Builds a complete exercise from a program and its correct schedule. With no
/// tracked variables given, every variable that qualifies is tracked.
Exercise author_exercise(std::string id, std::string title, std::string programSource, Schedule correctSchedule,
                         std::vector<std::string> trackedVars, std::size_t distractorCount, std::uint64_t seed);

struct FillInCell {
  std::size_t row = 0;
  std::int64_t expected = 0;

  bool operator==(const FillInCell&) const = default;
};

struct FillInSheet {
  std::string variable;
  std::vector<FillInCell> cells;
  /// Rows whose events write the variable (initialization included), ascending.
  std::vector<std::size_t> updateRows;

  std::vector<std::size_t> rows() const;
};

/// Value of `variable` right after each row, from its initialization row to the end.
FillInSheet expected_value_timeline(const ExecutionResult& execution, const std::string& variable);

using FillInAnswers = std::map<std::size_t, std::optional<std::int64_t>>;

struct CellVerdict {
  std::size_t row = 0;
  std::optional<std::int64_t> submitted;
  std::int64_t expected = 0;
  bool correct = false;
};

struct FillInGrade {
  std::vector<CellVerdict> cells;
  bool allCorrect = false;
  std::vector<std::size_t> hintRows;
};

/// Exact match per cell; blank or missing cells are wrong. Throws
/// std::invalid_argument for answers on rows the sheet does not have.
FillInGrade grade_fill_in(const FillInSheet& sheet, const FillInAnswers& answers);

}  // namespace tracetable
