#include "tracetable/ordering.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "tracetable/exercise.hpp"

namespace tracetable {

namespace {

constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

// 1-based arrangement position of every (thread, ordinal); kAbsent if not placed.
std::vector<std::vector<std::size_t>> positions(const ProgramModel& program, std::span<const ResolvedLine> lines) {
  std::vector<std::vector<std::size_t>> pos(program.thread_count());
  for (std::size_t t = 0; t < program.thread_count(); ++t) pos[t].assign(program.program_order(t).size(), kAbsent);
  for (std::size_t i = 0; i < lines.size(); ++i) pos[lines[i].thread][lines[i].ordinal] = i + 1;
  return pos;
}

}  // namespace

const char* to_string(AccessKind kind) noexcept {
  return kind == AccessKind::Retrieval ? "retrieval" : "update";
}

std::optional<AccessKind> access_kind(const Statement& stmt, std::size_t var) {
  switch (stmt.kind) {
    case StatementKind::SharedInit:
      for (const auto& init : stmt.inits) {
        if (init.var == var) return AccessKind::Update;
      }
      return std::nullopt;
    case StatementKind::IncShared:
    case StatementKind::DecShared:
      return stmt.sharedVar == var ? std::optional(AccessKind::Update) : std::nullopt;
    default:
      break;
  }
  if (stmt.expr) {
    const auto reads = stmt.expr->shared_reads();
    if (std::find(reads.begin(), reads.end(), var) != reads.end()) return AccessKind::Retrieval;
  }
  return std::nullopt;
}

RUOrder derive_ru_order(const Trace& trace, const std::string& variable) {
  const ProgramModel& program = *trace.program;
  const auto var = program.find_shared(variable);
  if (!var) throw std::invalid_argument("'" + variable + "' is not a shared variable");
  RUOrder order;
  order.variable = variable;
  for (const auto& e : trace.events) {
    if (const auto kind = access_kind(program.statement(e.statementRef), *var)) {
      order.sequence.push_back(AccessEvent{e.threadName, e.ordinal, *kind});
    }
  }
  return order;
}

std::vector<std::size_t> execution_order_violations(const ProgramModel& program,
                                                    std::span<const std::string> arrangement) {
  const auto lines = parse_trace_text(arrangement, program);
  const auto pos = positions(program, lines);
  std::vector<std::size_t> violations;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    std::size_t prereq = 0;
    if (l.ordinal > 0) {
      prereq = pos[l.thread][l.ordinal - 1];
    } else if (l.thread != 0) {
      prereq = pos[0][program.spawn_ordinal(l.thread)];
    }
    if (prereq > i + 1) violations.push_back(i + 1);
  }
  return violations;
}

std::vector<std::size_t> retrieval_update_violations(const Exercise& exercise,
                                                     std::span<const std::string> arrangement) {
  const ProgramModel& program = *exercise.program;
  const auto lines = parse_trace_text(arrangement, program);
  const auto pos = positions(program, lines);
  auto where = [&](const AccessEvent& a) {
    const auto thread = program.find_thread(a.thread);
    if (!thread || a.ordinal >= pos[*thread].size()) {
      throw std::invalid_argument("retrieval-update order names an event the program does not have");
    }
    return pos[*thread][a.ordinal];
  };

  std::vector<std::size_t> violations;
  for (const auto& order : exercise.ruOrders) {
    for (std::size_t k = 1; k < order.sequence.size(); ++k) {
      const std::size_t here = where(order.sequence[k]);
      if (here == kAbsent) continue;
      if (where(order.sequence[k - 1]) > here) violations.push_back(here);
    }
  }
  std::sort(violations.begin(), violations.end());
  violations.erase(std::unique(violations.begin(), violations.end()), violations.end());
  return violations;
}

GradeReport grade_ordering(const Exercise& exercise, std::span<const std::string> arrangement) {
  std::vector<std::string_view> given(arrangement.begin(), arrangement.end());
  std::vector<std::string_view> items(exercise.orderingItems.begin(), exercise.orderingItems.end());
  std::sort(given.begin(), given.end());
  std::sort(items.begin(), items.end());
  if (given != items) throw std::invalid_argument("arrangement is not a reordering of the test items");

  GradeReport report;
  report.totalChoices = exercise.orderingItems.size();
  report.execViolationPositions = execution_order_violations(*exercise.program, arrangement);
  if (!report.execViolationPositions.empty()) {
    report.errors = report.execViolationPositions.size();
    return report;
  }
  report.ruViolationPositions = retrieval_update_violations(exercise, arrangement);
  report.errors = report.ruViolationPositions.size();
  return report;
}

}  // namespace tracetable
