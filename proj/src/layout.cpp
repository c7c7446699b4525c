#include "tracetable/layout.hpp"

#include <algorithm>
#include <stdexcept>

namespace tracetable {

TableLayout layout(const Trace& trace) {
  const ProgramModel& program = *trace.program;
  TableLayout table;
  table.rowCount = trace.size();

  // Columns: main, then threads in the order they were started.
  std::vector<std::size_t> columnThreads{0};
  for (const auto& e : trace.events) {
    const Statement& st = program.statement(e.statementRef);
    if (st.kind == StatementKind::SpawnStart) columnThreads.push_back(*st.thread);
  }
  for (std::size_t t = 1; t < program.thread_count(); ++t) {
    if (std::find(columnThreads.begin(), columnThreads.end(), t) == columnThreads.end()) columnThreads.push_back(t);
  }
  std::vector<std::size_t> color(program.thread_count(), 0);
  for (std::size_t c = 0; c < columnThreads.size(); ++c) {
    color[columnThreads[c]] = c;
    table.threadColumns.emplace_back(program.thread_name(columnThreads[c]));
  }

  for (const std::size_t t : columnThreads) {
    std::size_t first = 0;
    std::size_t last = 0;
    for (const auto& e : trace.events) {
      if (e.thread != t) continue;
      if (first == 0) first = e.seq;
      last = e.seq;
    }
    if (first == 0) continue;
    const std::size_t entry = t == 0 ? program.mainMethod : program.threadDecls[t - 1].entryMethod;
    table.boxes.push_back(
        Box{std::string(program.thread_name(t)), 0, first, last, program.methods[entry].name + "()", true, color[t], 0});
  }

  // A call's box reaches down to its last descendant.
  std::vector<std::size_t> endRow(trace.size() + 1);
  for (std::size_t seq = trace.size(); seq >= 1; --seq) {
    endRow[seq] = std::max(endRow[seq], seq);
    const std::size_t parent = trace.row(seq).parentSeq;
    if (parent != 0) endRow[parent] = std::max(endRow[parent], endRow[seq]);
  }
  for (const auto& e : trace.events) {
    table.boxes.push_back(Box{e.threadName, e.depth + 1, e.seq, endRow[e.seq], e.displayText, false, color[e.thread],
                              e.seq});
  }

  std::size_t firstInit = 0;
  for (const auto& e : trace.events) {
    if (program.statement(e.statementRef).kind == StatementKind::SharedInit) {
      firstInit = e.seq;
      break;
    }
  }
  if (firstInit != 0) {
    for (std::size_t row = firstInit; row <= trace.size(); ++row) table.inputRows.push_back(row);
  }
  return table;
}

std::vector<std::size_t> interior_gaps(const TableLayout& table, std::string_view threadName) {
  std::vector<std::size_t> gaps;
  const auto root = std::find_if(table.boxes.begin(), table.boxes.end(),
                                 [&](const Box& b) { return b.synthetic && b.threadName == threadName; });
  if (root == table.boxes.end()) return gaps;
  std::vector<bool> occupied(table.rowCount + 1, false);
  for (const auto& b : table.boxes) {
    if (!b.synthetic && b.threadName == threadName) occupied[b.eventSeq] = true;
  }
  for (std::size_t row = root->startRow; row <= root->endRow; ++row) {
    if (!occupied[row]) gaps.push_back(row);
  }
  return gaps;
}

ReplayState replay_at(const Trace& trace, std::size_t cursor) {
  if (trace.events.empty()) throw std::invalid_argument("cannot replay an empty trace");
  cursor = std::clamp<std::size_t>(cursor, 1, trace.size());
  return ReplayState{cursor, trace.row(cursor).sourceLine, cursor};
}

ReplayState replay_init(const Trace& trace) { return replay_at(trace, 1); }

ReplayState replay_step(const ReplayState& state, Direction direction, const Trace& trace) {
  if (direction == Direction::Forward) return replay_at(trace, state.cursor + 1);
  return replay_at(trace, state.cursor > 1 ? state.cursor - 1 : 1);
}

}  // namespace tracetable
