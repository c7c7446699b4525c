#include "tracetable/exercise.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

#include "tracetable/error.hpp"

namespace tracetable {

namespace {

bool same_multiset(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) return false;
  std::vector<std::string_view> x(a.begin(), a.end());
  std::vector<std::string_view> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace

ExecutionResult correct_execution(const Exercise& exercise) {
  if (!exercise.program) throw ExerciseError("exercise '" + exercise.id + "' has no parsed program");
  return replay(exercise.program, exercise.correctSchedule);
}

bool choice_is_correct(const ProgramPtr& program, std::span<const std::string> lines,
                       std::span<const std::string> correctLines, std::span<const std::string> givenOutput) {
  const auto resolved = parse_trace_text(lines, *program);
  if (!same_multiset(lines, correctLines)) return false;
  const auto keys = event_keys(resolved);
  if (!feasible(*program, keys).feasible) return false;
  const auto run = replay(program, schedule_of(resolved));
  return std::equal(run.outputLines.begin(), run.outputLines.end(), givenOutput.begin(), givenOutput.end());
}

bool is_correct_choice(const Exercise& exercise, std::size_t choiceIndex) {
  if (choiceIndex >= exercise.choices.size()) {
    throw std::out_of_range("choice index " + std::to_string(choiceIndex) + " out of range");
  }
  const auto correctLines = render_trace_text(correct_execution(exercise).trace);
  return choice_is_correct(exercise.program, exercise.choices[choiceIndex].lines, correctLines,
                           exercise.givenOutput);
}

std::vector<std::string> tracked_variable_issues(const ExecutionResult& execution, const std::string& variable) {
  std::vector<std::string> issues;
  const ProgramModel& program = *execution.trace.program;
  const auto var = program.find_shared(variable);
  if (!var) {
    issues.push_back("'" + variable + "' is not a shared variable");
    return issues;
  }

  std::set<std::size_t> writers;
  for (const auto& e : execution.trace.events) {
    const Statement& st = program.statement(e.statementRef);
    if ((st.kind == StatementKind::IncShared || st.kind == StatementKind::DecShared) && st.sharedVar == var) {
      writers.insert(e.thread);
    }
  }
  if (writers.size() < 2) {
    issues.push_back("'" + variable + "' is written by " + std::to_string(writers.size()) +
                     " thread(s); a tracked variable needs at least two");
  }

  const bool reachesOutput = std::any_of(execution.prints.begin(), execution.prints.end(), [&](const PrintRecord& p) {
    return std::any_of(p.feeds.begin(), p.feeds.end(), [&](const PrintFeed& f) { return f.var == *var; });
  });
  if (!reachesOutput) issues.push_back("no retrieval of '" + variable + "' reaches the output");
  return issues;
}

ValidationReport validate_exercise(const Exercise& exercise) {
  ValidationReport report;
  auto issue = [&](std::string rule, std::optional<std::size_t> choice, std::string message) {
    report.issues.push_back(ValidationIssue{std::move(rule), choice, std::move(message)});
  };

  if (!exercise.program) {
    issue("program", std::nullopt, "program is missing");
    return report;
  }
  ExecutionResult run;
  try {
    run = correct_execution(exercise);
  } catch (const ReplayError& e) {
    issue("correctSchedule", std::nullopt, e.what());
    return report;
  }
  if (run.outputLines != exercise.givenOutput) {
    issue("givenOutput", std::nullopt, "replaying the correct schedule does not print the given output");
  }
  const auto correctLines = render_trace_text(run.trace);

  if (exercise.choices.empty()) issue("choices", std::nullopt, "exercise has no answer choices");
  if (exercise.correctChoiceIndex >= exercise.choices.size()) {
    issue("correctChoiceIndex", std::nullopt, "correct choice index is out of range");
  }

  std::vector<std::size_t> correct;
  for (std::size_t i = 0; i < exercise.choices.size(); ++i) {
    const auto& lines = exercise.choices[i].lines;
    for (std::size_t j = 0; j < i; ++j) {
      if (exercise.choices[j].lines == lines) issue("duplicateChoice", i, "same as choice " + std::to_string(j));
    }
    if (!same_multiset(lines, correctLines)) {
      issue("choicePermutation", i, "choice is not a reordering of the recorded trace");
    }
    try {
      if (choice_is_correct(exercise.program, lines, correctLines, exercise.givenOutput)) correct.push_back(i);
    } catch (const TraceTextError& e) {
      issue("choiceUnparseable", i, e.what());
    }
  }
  if (correct.empty()) {
    issue("exactlyOneCorrect", std::nullopt, "no choice is correct");
  } else if (correct.size() > 1) {
    for (const std::size_t i : correct) {
      if (i != exercise.correctChoiceIndex) {
        issue("exactlyOneCorrect", i, "choice is also correct; exactly one correct choice is allowed");
      }
    }
  }
  if (!correct.empty() && std::find(correct.begin(), correct.end(), exercise.correctChoiceIndex) == correct.end()) {
    issue("correctChoiceIndex", exercise.correctChoiceIndex, "the choice marked correct is not correct");
  }

  if (exercise.trackedVars.empty()) issue("trackedVars", std::nullopt, "no tracked variables");
  for (const auto& var : exercise.trackedVars) {
    for (auto& msg : tracked_variable_issues(run, var)) issue("trackedVars", std::nullopt, std::move(msg));
    const auto stored = std::find_if(exercise.ruOrders.begin(), exercise.ruOrders.end(),
                                     [&](const RUOrder& o) { return o.variable == var; });
    if (stored == exercise.ruOrders.end()) {
      issue("retrievalUpdateOrder", std::nullopt, "no retrieval-update order for '" + var + "'");
    } else if (exercise.program->find_shared(var) && *stored != derive_ru_order(run.trace, var)) {
      issue("retrievalUpdateOrder", std::nullopt,
            "retrieval-update order for '" + var + "' does not match the correct trace");
    }
  }

  if (exercise.orderingItems != correctLines) {
    issue("orderingItems", std::nullopt, "ordering items must be the recorded trace lines in recorded order");
  }
  return report;
}

std::vector<ChoiceTrace> generate_distractors(const ProgramPtr& program, const Trace& correctTrace,
                                              std::span<const std::string> givenOutput, std::size_t count,
                                              std::uint64_t seed) {
  std::vector<ChoiceTrace> out;
  if (count == 0) return out;

  const auto correctLines = render_trace_text(correctTrace);
  const auto& events = correctTrace.events;
  std::mt19937_64 rng(seed);
  std::set<std::vector<std::string>> seen{correctLines};

  auto accept = [&](std::vector<std::string> lines) {
    if (seen.contains(lines)) return;
    seen.insert(lines);
    if (choice_is_correct(program, lines, correctLines, givenOutput)) return;
    out.push_back(ChoiceTrace{std::move(lines)});
  };
  auto swapped = [&](std::size_t i, std::size_t j) {
    auto lines = correctLines;
    std::swap(lines[i], lines[j]);
    return lines;
  };

  std::vector<std::size_t> candidates;
  const std::size_t budget = 64 * count + 64;
  for (std::size_t attempt = 0; attempt < budget && out.size() < count; ++attempt) {
    candidates.clear();
    switch (attempt % 4) {
      case 0:  // a call event trades places with its first nested event
        for (std::size_t i = 0; i < events.size(); ++i) {
          if (events[i].parentSeq != 0 && events[i].ordinal > 0 &&
              events[events[i].parentSeq - 1].ordinal + 1 == events[i].ordinal) {
            candidates.push_back(i);
          }
        }
        if (!candidates.empty()) {
          const std::size_t child = candidates[uniform_index(rng, candidates.size())];
          accept(swapped(events[child].parentSeq - 1, child));
        }
        break;
      case 1: {  // another interleaving that prints something else
        if (program->thread_count() < 2) break;
        const auto run = replay(program, sample_schedule(*program, rng));
        if (!std::equal(run.outputLines.begin(), run.outputLines.end(), givenOutput.begin(), givenOutput.end())) {
          accept(render_trace_text(run.trace));
        }
        break;
      }
      case 2:  // neighbouring events of different threads trade places
        for (std::size_t i = 0; i + 1 < events.size(); ++i) {
          if (events[i].thread != events[i + 1].thread) candidates.push_back(i);
        }
        if (!candidates.empty()) {
          const std::size_t i = candidates[uniform_index(rng, candidates.size())];
          accept(swapped(i, i + 1));
        }
        break;
      case 3:  // two events of one thread in reverse program order
        for (std::size_t i = 0; i < events.size(); ++i) {
          for (std::size_t j = i + 1; j < events.size(); ++j) {
            if (events[j].thread == events[i].thread) {
              candidates.push_back(i * events.size() + j);
              break;
            }
          }
        }
        if (!candidates.empty()) {
          const std::size_t pick = candidates[uniform_index(rng, candidates.size())];
          accept(swapped(pick / events.size(), pick % events.size()));
        }
        break;
    }
  }
  if (out.size() < count) {
    throw DistractorError("found only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                          " distinct wrong orderings");
  }
  return out;
}

Exercise author_exercise(std::string id, std::string title, std::string programSource, Schedule correctSchedule,
                         std::vector<std::string> trackedVars, std::size_t distractorCount, std::uint64_t seed) {
  Exercise ex;
  ex.id = std::move(id);
  ex.title = std::move(title);
  ex.programSource = std::move(programSource);
  ex.program = parse_program(ex.programSource);
  ex.correctSchedule = std::move(correctSchedule);

  const auto run = correct_execution(ex);
  ex.givenOutput = run.outputLines;
  const auto correctLines = render_trace_text(run.trace);

  if (trackedVars.empty()) {
    for (const auto& v : ex.program->sharedVars) {
      if (tracked_variable_issues(run, v.name).empty()) trackedVars.push_back(v.name);
    }
    if (trackedVars.empty()) throw ExerciseError("no shared variable qualifies for tracking");
  }
  ex.trackedVars = std::move(trackedVars);

  auto distractors = generate_distractors(ex.program, run.trace, ex.givenOutput, distractorCount, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ex.correctChoiceIndex = uniform_index(rng, distractors.size() + 1);
  for (auto& d : distractors) ex.choices.push_back(std::move(d));
  ex.choices.insert(ex.choices.begin() + static_cast<std::ptrdiff_t>(ex.correctChoiceIndex),
                    ChoiceTrace{correctLines});

  ex.orderingItems = correctLines;
  for (const auto& v : ex.trackedVars) ex.ruOrders.push_back(derive_ru_order(run.trace, v));
  return ex;
}

std::vector<std::size_t> FillInSheet::rows() const {
  std::vector<std::size_t> r;
  r.reserve(cells.size());
  for (const auto& c : cells) r.push_back(c.row);
  return r;
}

FillInSheet expected_value_timeline(const ExecutionResult& execution, const std::string& variable) {
  const auto it = execution.timelines.find(variable);
  if (it == execution.timelines.end() || it->second.empty()) {
    throw ExerciseError("variable '" + variable + "' is never initialized in this execution");
  }
  const auto& points = it->second;
  FillInSheet sheet;
  sheet.variable = variable;
  std::size_t next = 0;
  std::int64_t value = 0;
  for (std::size_t row = points.front().row; row <= execution.trace.size(); ++row) {
    while (next < points.size() && points[next].row == row) {
      value = points[next].valueAfter;
      if (sheet.updateRows.empty() || sheet.updateRows.back() != row) sheet.updateRows.push_back(row);
      ++next;
    }
    sheet.cells.push_back(FillInCell{row, value});
  }
  return sheet;
}

FillInGrade grade_fill_in(const FillInSheet& sheet, const FillInAnswers& answers) {
  for (const auto& [row, value] : answers) {
    const bool known = std::any_of(sheet.cells.begin(), sheet.cells.end(),
                                   [row = row](const FillInCell& c) { return c.row == row; });
    if (!known) throw std::invalid_argument("row " + std::to_string(row) + " has no input field");
  }
  FillInGrade grade;
  grade.allCorrect = true;
  for (const auto& cell : sheet.cells) {
    CellVerdict v;
    v.row = cell.row;
    v.expected = cell.expected;
    if (const auto it = answers.find(cell.row); it != answers.end()) v.submitted = it->second;
    v.correct = v.submitted.has_value() && *v.submitted == cell.expected;
    grade.allCorrect = grade.allCorrect && v.correct;
    grade.cells.push_back(v);
  }
  grade.hintRows = sheet.updateRows;
  return grade;
}

}  // namespace tracetable
