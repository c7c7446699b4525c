#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "tracetable/error.hpp"
#include "tracetable/interpreter.hpp"
#include "tracetable/trace.hpp"

using namespace tracetable;

namespace {

TraceTextError::Kind text_error(const std::vector<std::string>& lines) {
  try {
    parse_trace_text(lines, *fixtures::counter_program());
  } catch (const TraceTextError& e) {
    return e.kind();
  }
  FAIL("expected a TraceTextError");
  return TraceTextError::Kind::Malformed;
}

}  // namespace

TEST_CASE("rendered lines") {
  const auto run = replay(fixtures::counter_program(), fixtures::race_schedule());
  const auto text = render_trace_text(run.trace);
  CHECK(text[6] == "[thread-1] c++");
  CHECK(text[11] == "[thread-1] System.out.println(\"Value for Thread After increment \" + value)");
  CHECK(render_trace_line("main", "x") == "[main] x");

  Trace empty;
  CHECK(render_trace_text(empty).empty());
}

TEST_CASE("parsing the recorded trace resolves occurrences in order") {
  const auto p = fixtures::counter_program();
  const auto lines = parse_trace_text(fixtures::recorded_trace(), *p);
  REQUIRE(lines.size() == 25);
  CHECK(lines[0].threadName == "main");
  CHECK(lines[0].ordinal == 0);
  // Rows 11 and 16 are textually identical "return c" lines of thread-1.
  CHECK(lines[10].thread == 1);
  CHECK(lines[10].ordinal == 3);
  CHECK(lines[15].ordinal == 8);
  CHECK(lines[10].statementRef == lines[15].statementRef);

  const auto run = replay(p, fixtures::race_schedule());
  CHECK(event_keys(lines) == event_keys(run.trace));
  CHECK(schedule_of(lines) == fixtures::race_schedule());
}

TEST_CASE("malformed trace text is rejected") {
  CHECK(text_error({"[thread-3] c++"}) == TraceTextError::Kind::UnknownThread);
  CHECK(text_error({"main Counter counter = new Counter()"}) == TraceTextError::Kind::Malformed);
  CHECK(text_error({"[main]"}) == TraceTextError::Kind::Malformed);
  CHECK(text_error({"[main] c++"}) == TraceTextError::Kind::UnmatchedStatement);
  CHECK(text_error({"[main] t1.start()", "[main] t1.start()"}) == TraceTextError::Kind::TooManyOccurrences);
  try {
    parse_trace_text(std::vector<std::string>{"[main] t1.start()", "[thread-3] c++"}, *fixtures::counter_program());
  } catch (const TraceTextError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("thread projections") {
  const auto run = replay(fixtures::counter_program(), fixtures::race_schedule());
  const auto rows = [&](const char* name) {
    std::vector<std::size_t> out;
    for (const auto& e : project_thread(run.trace, name)) out.push_back(e.seq);
    return out;
  };
  CHECK(rows("main") == std::vector<std::size_t>{1, 2, 3, 4, 5});
  CHECK(rows("thread-2") == std::vector<std::size_t>{8, 9, 18, 19, 20, 21, 22, 23, 24, 25});
  CHECK_THROWS_AS(project_thread(run.trace, "thread-3"), std::invalid_argument);
}

TEST_CASE("render then parse is the identity on event keys") {
  const auto p = fixtures::counter_program();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto run = replay(p, sample_schedule(*p, rng));
    const auto parsed = parse_trace_text(render_trace_text(run.trace), *p);
    CHECK(event_keys(parsed) == event_keys(run.trace));
    for (std::size_t k = 0; k < parsed.size(); ++k) CHECK(parsed[k].ordinal == run.trace.events[k].ordinal);
  }
}

TEST_CASE("every nested event points at an earlier call of its own thread") {
  const auto p = fixtures::counter_program();
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto run = replay(p, sample_schedule(*p, rng));
    for (const auto& e : run.trace.events) {
      if (e.parentSeq == 0) {
        CHECK(e.depth == 0);
        continue;
      }
      REQUIRE(e.parentSeq < e.seq);
      const auto& parent = run.trace.row(e.parentSeq);
      CHECK(parent.thread == e.thread);
      CHECK(parent.depth + 1 == e.depth);
      CHECK(p->statement(parent.statementRef).is_call());
    }
  }
}
