#include "tracetable/interpreter.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include "tracetable/error.hpp"

namespace tracetable {

ReplayError::ReplayError(std::size_t step, const std::string& message)
    : Error("schedule step " + std::to_string(step) + ": " + message), step_(step) {}

namespace {

struct Value {
  std::int64_t value = 0;
  // Shared variable and the row that read it, when the value came from shared state.
  std::optional<PrintFeed> origin;
};

struct Frame {
  std::size_t method = 0;
  std::vector<Value> locals;
  std::optional<std::size_t> returnSlot;
};

struct ThreadState {
  std::size_t next = 0;
  std::vector<Frame> frames;
  std::vector<std::size_t> seqOfOrdinal;
};

class Machine {
 public:
  explicit Machine(const ProgramPtr& program) : program_(*program), shared_(program->sharedVars.size()) {
    result_.trace.program = program;
    threads_.resize(program_.thread_count());
    for (std::size_t t = 0; t < threads_.size(); ++t) {
      const std::size_t entry = t == 0 ? program_.mainMethod : program_.threadDecls[t - 1].entryMethod;
      threads_[t].frames.push_back(make_frame(entry, std::nullopt));
      threads_[t].seqOfOrdinal.assign(program_.program_order(t).size(), 0);
    }
  }

  bool started(std::size_t thread) const {
    return thread == 0 || threads_[0].next > program_.spawn_ordinal(thread);
  }
  bool finished(std::size_t thread) const { return threads_[thread].next >= program_.program_order(thread).size(); }

  void step(std::size_t thread, std::size_t seq) {
    if (!started(thread)) {
      throw ReplayError(seq, "thread '" + std::string(program_.thread_name(thread)) + "' has not been started");
    }
    if (finished(thread)) {
      throw ReplayError(seq, "thread '" + std::string(program_.thread_name(thread)) + "' has already finished");
    }
    ThreadState& ts = threads_[thread];
    const StaticEvent& se = program_.program_order(thread)[ts.next];
    const Statement& st = program_.statement(se.stmt);
    while (ts.frames.size() > se.depth + 1) ts.frames.pop_back();
    Frame& frame = ts.frames.back();

    switch (st.kind) {
      case StatementKind::SharedInit:
        for (const auto& init : st.inits) write(init.var, init.value, seq);
        break;
      case StatementKind::ThreadDecl:
      case StatementKind::SpawnStart:
        break;
      case StatementKind::LocalDecl:
      case StatementKind::AssignLocal:
        frame.locals[*st.target] = evaluate(*st.expr, frame, seq);
        break;
      case StatementKind::IncShared:
        write(*st.sharedVar, shared_[*st.sharedVar] + 1, seq);
        break;
      case StatementKind::DecShared:
        write(*st.sharedVar, shared_[*st.sharedVar] - 1, seq);
        break;
      case StatementKind::CallVoid:
        ts.frames.push_back(make_frame(*st.callee, std::nullopt));
        break;
      case StatementKind::CallAssign:
        ts.frames.push_back(make_frame(*st.callee, st.target));
        break;
      case StatementKind::Print:
        print(*st.expr, frame, seq);
        break;
      case StatementKind::ReturnExpr: {
        const Value v = evaluate(*st.expr, frame, seq);
        const auto slot = frame.returnSlot;
        ts.frames.pop_back();
        if (slot) ts.frames.back().locals[*slot] = v;
        break;
      }
    }

    Event e;
    e.seq = seq;
    e.threadName = std::string(program_.thread_name(thread));
    e.thread = thread;
    e.ordinal = ts.next;
    e.statementRef = se.stmt;
    e.depth = se.depth;
    e.parentSeq = se.parent ? ts.seqOfOrdinal[*se.parent] : 0;
    e.displayText = st.displayText;
    e.sourceLine = st.sourceLine;
    result_.trace.events.push_back(std::move(e));
    result_.trace.schedule.steps.emplace_back(program_.thread_name(thread));
    ts.seqOfOrdinal[ts.next] = seq;
    ++ts.next;
  }

  ExecutionResult finish() && {
    for (std::size_t v = 0; v < shared_.size(); ++v) {
      if (!result_.timelines[program_.sharedVars[v].name].empty()) {
        result_.finalValues[program_.sharedVars[v].name] = shared_[v];
      }
    }
    return std::move(result_);
  }

 private:
  Frame make_frame(std::size_t method, std::optional<std::size_t> returnSlot) const {
    return Frame{method, std::vector<Value>(program_.methods[method].locals.size()), returnSlot};
  }

  void write(std::size_t var, std::int64_t value, std::size_t seq) {
    shared_[var] = value;
    result_.timelines[program_.sharedVars[var].name].push_back(TimelinePoint{seq, value});
  }

  Value operand_value(const Operand& op, const Frame& frame, std::size_t seq) const {
    switch (op.kind) {
      case Operand::Kind::Int: return Value{op.value, std::nullopt};
      case Operand::Kind::Local: return frame.locals[op.slot];
      case Operand::Kind::Shared: return Value{shared_[op.slot], PrintFeed{op.slot, seq, shared_[op.slot]}};
      case Operand::Kind::Text: break;
    }
    return {};
  }

  Value evaluate(const Expression& expr, const Frame& frame, std::size_t seq) const {
    return operand_value(expr.operands.front(), frame, seq);
  }

  void print(const Expression& expr, const Frame& frame, std::size_t seq) {
    PrintRecord rec;
    rec.seq = seq;
    for (const auto& op : expr.operands) {
      if (op.kind == Operand::Kind::Text) {
        rec.text += op.text;
        continue;
      }
      const Value v = operand_value(op, frame, seq);
      rec.text += std::to_string(v.value);
      if (v.origin) rec.feeds.push_back(*v.origin);
    }
    result_.outputLines.push_back(rec.text);
    result_.prints.push_back(std::move(rec));
  }

  const ProgramModel& program_;
  std::vector<std::int64_t> shared_;
  std::vector<ThreadState> threads_;
  ExecutionResult result_;
};

}  // namespace

ExecutionResult replay(const ProgramPtr& program, const Schedule& schedule) {
  Machine machine(program);
  for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
    const auto thread = program->find_thread(schedule.steps[i]);
    if (!thread) throw ReplayError(i + 1, "unknown thread '" + schedule.steps[i] + "'");
    machine.step(*thread, i + 1);
  }
  for (std::size_t t = 0; t < program->thread_count(); ++t) {
    if (!machine.finished(t)) {
      throw ReplayError(schedule.steps.size() + 1, "schedule ends before thread '" +
                                                       std::string(program->thread_name(t)) + "' finishes");
    }
  }
  return std::move(machine).finish();
}

std::size_t for_each_schedule(const ProgramModel& program, std::size_t maxEvents,
                              const std::function<void(std::span<const std::size_t>)>& visit) {
  const std::size_t total = program.total_events();
  if (total > maxEvents) {
    throw EnumerationError("program has " + std::to_string(total) + " events, above the bound of " +
                           std::to_string(maxEvents));
  }
  const std::size_t threads = program.thread_count();
  std::vector<std::size_t> next(threads, 0);
  std::vector<std::size_t> steps;
  steps.reserve(total);
  std::size_t count = 0;

  std::function<void()> descend = [&] {
    if (steps.size() == total) {
      ++count;
      visit(steps);
      return;
    }
    for (std::size_t t = 0; t < threads; ++t) {
      if (next[t] >= program.program_order(t).size()) continue;
      if (t != 0 && next[0] <= program.spawn_ordinal(t)) continue;
      ++next[t];
      steps.push_back(t);
      descend();
      steps.pop_back();
      --next[t];
    }
  };
  descend();
  return count;
}

std::size_t enumerate_schedules(const ProgramPtr& program, std::size_t maxEvents,
                                const std::function<void(const ExecutionResult&)>& visit) {
  return for_each_schedule(*program, maxEvents, [&](std::span<const std::size_t> threads) {
    visit(replay(program, schedule_from_threads(*program, threads)));
  });
}

Feasibility feasible(const ProgramModel& program, std::span<const EventKey> eventOrder) {
  std::map<std::pair<std::size_t, StatementRef>, long> balance;
  for (std::size_t t = 0; t < program.thread_count(); ++t) {
    for (const auto& se : program.program_order(t)) ++balance[{t, se.stmt}];
  }
  std::vector<std::size_t> threadOf;
  threadOf.reserve(eventOrder.size());
  for (const auto& key : eventOrder) {
    const auto thread = program.find_thread(key.threadName);
    if (!thread) throw std::invalid_argument("unknown thread '" + key.threadName + "'");
    threadOf.push_back(*thread);
    --balance[{*thread, key.statementRef}];
  }
  for (const auto& [key, n] : balance) {
    if (n != 0) throw std::invalid_argument("event order is not a permutation of the program's events");
  }

  std::vector<std::size_t> next(program.thread_count(), 0);
  for (std::size_t i = 0; i < eventOrder.size(); ++i) {
    const std::size_t t = threadOf[i];
    const bool spawned = t == 0 || next[0] > program.spawn_ordinal(t);
    if (!spawned || program.program_order(t)[next[t]].stmt != eventOrder[i].statementRef) {
      return Feasibility{false, i + 1};
    }
    ++next[t];
  }
  return Feasibility{true, 0};
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: empty range");
  return static_cast<std::size_t>(rng() % bound);
}

Schedule sample_schedule(const ProgramModel& program, std::mt19937_64& rng) {
  std::vector<std::size_t> next(program.thread_count(), 0);
  std::vector<std::size_t> steps;
  std::vector<std::size_t> runnable;
  while (steps.size() < program.total_events()) {
    runnable.clear();
    for (std::size_t t = 0; t < program.thread_count(); ++t) {
      if (next[t] >= program.program_order(t).size()) continue;
      if (t != 0 && next[0] <= program.spawn_ordinal(t)) continue;
      runnable.push_back(t);
    }
    const std::size_t t = runnable[uniform_index(rng, runnable.size())];
    ++next[t];
    steps.push_back(t);
  }
  return schedule_from_threads(program, steps);
}

Schedule schedule_from_threads(const ProgramModel& program, std::span<const std::size_t> threads) {
  Schedule s;
  s.steps.reserve(threads.size());
  for (const std::size_t t : threads) s.steps.emplace_back(program.thread_name(t));
  return s;
}

Schedule schedule_of(std::span<const ResolvedLine> lines) {
  Schedule s;
  s.steps.reserve(lines.size());
  for (const auto& l : lines) s.steps.push_back(l.threadName);
  return s;
}

}  // namespace tracetable
