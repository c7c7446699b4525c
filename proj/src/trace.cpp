#include "tracetable/trace.hpp"

#include <map>
#include <stdexcept>
#include <utility>

#include "tracetable/error.hpp"

namespace tracetable {

TraceTextError::TraceTextError(Kind kind, std::size_t line, const std::string& message)
    : Error("trace line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

std::string render_trace_line(std::string_view threadName, std::string_view displayText) {
  std::string line;
  line.reserve(threadName.size() + displayText.size() + 3);
  line += '[';
  line += threadName;
  line += "] ";
  line += displayText;
  return line;
}

std::vector<std::string> render_trace_text(const Trace& trace) {
  std::vector<std::string> lines;
  lines.reserve(trace.events.size());
  for (const auto& e : trace.events) lines.push_back(render_trace_line(e.threadName, e.displayText));
  return lines;
}

std::vector<ResolvedLine> parse_trace_text(std::span<const std::string> lines, const ProgramModel& program) {
  using Kind = TraceTextError::Kind;

  // (thread, text) -> ordinals in program order carrying that text
  std::vector<std::map<std::string_view, std::vector<std::size_t>>> byText(program.thread_count());
  for (std::size_t t = 0; t < program.thread_count(); ++t) {
    const auto& order = program.program_order(t);
    for (std::size_t k = 0; k < order.size(); ++k) {
      byText[t][program.statement(order[k].stmt).displayText].push_back(k);
    }
  }
  std::vector<std::map<std::string_view, std::size_t>> seen(program.thread_count());

  std::vector<ResolvedLine> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    const std::size_t close = line.find("] ");
    if (line.empty() || line.front() != '[' || close == std::string_view::npos) {
      throw TraceTextError(Kind::Malformed, i + 1, "expected \"[thread] statement\", got \"" + lines[i] + "\"");
    }
    const std::string_view threadName = line.substr(1, close - 1);
    const std::string_view text = line.substr(close + 2);
    const auto thread = program.find_thread(threadName);
    if (!thread) throw TraceTextError(Kind::UnknownThread, i + 1, "unknown thread '" + std::string(threadName) + "'");

    const auto it = byText[*thread].find(text);
    if (it == byText[*thread].end()) {
      throw TraceTextError(Kind::UnmatchedStatement, i + 1,
                           "no statement \"" + std::string(text) + "\" in thread " + std::string(threadName));
    }
    std::size_t& count = seen[*thread][it->first];
    if (count >= it->second.size()) {
      throw TraceTextError(Kind::TooManyOccurrences, i + 1,
                           "\"" + std::string(text) + "\" occurs only " + std::to_string(it->second.size()) +
                               " time(s) in thread " + std::string(threadName));
    }
    const std::size_t ordinal = it->second[count++];
    out.push_back(ResolvedLine{std::string(threadName), *thread, program.program_order(*thread)[ordinal].stmt,
                               ordinal});
  }
  return out;
}

std::vector<EventKey> event_keys(std::span<const ResolvedLine> lines) {
  std::vector<EventKey> keys;
  keys.reserve(lines.size());
  for (const auto& l : lines) keys.push_back(EventKey{l.threadName, l.statementRef});
  return keys;
}

std::vector<EventKey> event_keys(const Trace& trace) {
  std::vector<EventKey> keys;
  keys.reserve(trace.events.size());
  for (const auto& e : trace.events) keys.push_back(EventKey{e.threadName, e.statementRef});
  return keys;
}

std::vector<Event> project_thread(const Trace& trace, std::string_view threadName) {
  if (trace.program && !trace.program->find_thread(threadName)) {
    throw std::invalid_argument("unknown thread '" + std::string(threadName) + "'");
  }
  std::vector<Event> out;
  for (const auto& e : trace.events) {
    if (e.threadName == threadName) out.push_back(e);
  }
  return out;
}

}  // namespace tracetable
