#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "tracetable/layout.hpp"

using namespace tracetable;

namespace {

const Box& root_of(const TableLayout& t, const std::string& thread) {
  for (const auto& b : t.boxes) {
    if (b.synthetic && b.threadName == thread) return b;
  }
  throw std::logic_error("no root for " + thread);
}

const Box& box_of(const TableLayout& t, std::size_t seq) {
  for (const auto& b : t.boxes) {
    if (b.eventSeq == seq) return b;
  }
  throw std::logic_error("no box for event");
}

void check_invariants(const Trace& trace) {
  const auto t = layout(trace);
  const std::size_t n = trace.size();
  CHECK(t.rowCount == n);

  // Row bijection.
  std::vector<int> perRow(n + 1, 0);
  for (const auto& b : t.boxes) {
    CHECK(b.startRow <= b.endRow);
    CHECK(b.startRow >= 1);
    CHECK(b.endRow <= n);
    if (!b.synthetic) {
      ++perRow[b.startRow];
      CHECK(b.eventSeq == b.startRow);
    }
  }
  for (std::size_t r = 1; r <= n; ++r) CHECK(perRow[r] == 1);

  // Containment along parent links, and within each thread's root.
  for (const auto& e : trace.events) {
    const auto& b = box_of(t, e.seq);
    CHECK(b.depth == e.depth + 1);
    const auto& root = root_of(t, e.threadName);
    CHECK(root.startRow <= b.startRow);
    CHECK(b.endRow <= root.endRow);
    if (e.parentSeq != 0) {
      const auto& parent = box_of(t, e.parentSeq);
      CHECK(parent.startRow <= b.startRow);
      CHECK(b.endRow <= parent.endRow);
    }
  }

  // Same thread and depth never overlap.
  std::map<std::pair<std::string, std::size_t>, std::vector<const Box*>> groups;
  for (const auto& b : t.boxes) groups[{b.threadName, b.depth}].push_back(&b);
  for (const auto& [key, boxes] : groups) {
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        CHECK((boxes[i]->endRow < boxes[j]->startRow || boxes[j]->endRow < boxes[i]->startRow));
      }
    }
  }

  // One color per thread, distinct across threads.
  std::map<std::string, std::size_t> color;
  for (const auto& b : t.boxes) {
    const auto [it, inserted] = color.emplace(b.threadName, b.colorIndex);
    if (!inserted) CHECK(it->second == b.colorIndex);
  }
  std::set<std::size_t> distinct;
  for (const auto& [_, c] : color) distinct.insert(c);
  CHECK(distinct.size() == color.size());
}

}  // namespace

TEST_CASE("layout of the race trace") {
  const auto run = replay(fixtures::counter_program(), fixtures::race_schedule());
  const auto t = layout(run.trace);
  CHECK(t.rowCount == 25);
  CHECK(t.threadColumns == std::vector<std::string>{"main", "thread-1", "thread-2"});

  const auto& mainRoot = root_of(t, "main");
  CHECK(mainRoot.startRow == 1);
  CHECK(mainRoot.endRow == 5);
  CHECK(mainRoot.depth == 0);
  CHECK(mainRoot.colorIndex == 0);
  CHECK(mainRoot.label == "main()");
  CHECK(mainRoot.eventSeq == 0);

  const auto& t1 = root_of(t, "thread-1");
  CHECK(t1.startRow == 6);
  CHECK(t1.endRow == 17);
  CHECK(t1.label == "run()");
  CHECK(t1.colorIndex == 1);
  const auto& t2 = root_of(t, "thread-2");
  CHECK(t2.startRow == 8);
  CHECK(t2.endRow == 25);
  CHECK(t2.colorIndex == 2);

  const auto& call = box_of(t, 6);
  CHECK(call.startRow == 6);
  CHECK(call.endRow == 7);
  CHECK(call.depth == 1);
  CHECK(call.label == "this.increment()");
  const auto& child = box_of(t, 7);
  CHECK(child.depth == 2);
  CHECK(child.startRow == 7);
  CHECK(child.endRow == 7);

  const auto& getValue = box_of(t, 15);
  CHECK(getValue.endRow == 16);

  CHECK(interior_gaps(t, "thread-1") == std::vector<std::size_t>{8, 9});
  CHECK(interior_gaps(t, "main").empty());
  CHECK(interior_gaps(t, "thread-2") == std::vector<std::size_t>{10, 11, 12, 13, 14, 15, 16, 17});
  CHECK(t.inputRows.size() == 25);
  CHECK(t.inputRows.front() == 1);

  CHECK(kPalette[0] == "#f5d742");
  check_invariants(run.trace);
}

TEST_CASE("single-thread layout") {
  const auto p = parse_program("method main\n  shared c = 0\n  call f\n  print \"c\" + c\nend\nmethod f\n  inc c\nend\n");
  Schedule s;
  s.steps.assign(4, "main");
  const auto run = replay(p, s);
  const auto t = layout(run.trace);
  CHECK(t.threadColumns == std::vector<std::string>{"main"});
  const auto& root = root_of(t, "main");
  CHECK(root.startRow == 1);
  CHECK(root.endRow == 4);
  CHECK(interior_gaps(t, "main").empty());
  CHECK(box_of(t, 2).endRow == 3);
  check_invariants(run.trace);
}

TEST_CASE("empty trace gives an empty layout") {
  const auto run = replay(parse_program("method main\nend\n"), Schedule{});
  const auto t = layout(run.trace);
  CHECK(t.rowCount == 0);
  CHECK(t.inputRows.empty());
}

TEST_CASE("layout invariants hold on sampled schedules") {
  const auto p = fixtures::counter_program();
  std::mt19937_64 rng(101);
  for (int i = 0; i < 150; ++i) check_invariants(replay(p, sample_schedule(*p, rng)).trace);
}

TEST_CASE("replay examples") {
  const auto p = fixtures::counter_program();
  const auto run = replay(p, fixtures::race_schedule());
  const auto& main = p->methods[p->mainMethod];

  const auto s0 = replay_init(run.trace);
  CHECK(s0.cursor == 1);
  CHECK(s0.highlightedTraceRow == 1);
  CHECK(s0.highlightedSourceLine == main.statements[0].sourceLine);

  const auto s1 = replay_step(s0, Direction::Forward, run.trace);
  CHECK(s1.cursor == 2);
  CHECK(s1.highlightedSourceLine == main.statements[1].sourceLine);

  CHECK(replay_step(s0, Direction::Backward, run.trace) == s0);
  const auto last = replay_at(run.trace, 25);
  CHECK(replay_step(last, Direction::Forward, run.trace) == last);
  CHECK(replay_at(run.trace, 99) == last);
  CHECK(replay_at(run.trace, 0) == s0);

  Trace empty;
  CHECK_THROWS_AS(replay_init(empty), std::invalid_argument);

  Schedule one;
  one.steps = {"main"};
  const auto single = replay(parse_program("method main\n  shared c = 0\nend\n"), one);
  const auto only = replay_init(single.trace);
  CHECK(only.cursor == 1);
  CHECK(replay_step(only, Direction::Forward, single.trace) == only);
}

TEST_CASE("replay steps compose as saturating cursor arithmetic") {
  const auto run = replay(fixtures::counter_program(), fixtures::race_schedule());
  const std::size_t n = run.trace.size();
  std::mt19937_64 rng(8);
  auto state = replay_init(run.trace);
  std::int64_t expected = 1;
  for (int i = 0; i < 2000; ++i) {
    const bool fwd = rng() % 2 == 0;
    state = replay_step(state, fwd ? Direction::Forward : Direction::Backward, run.trace);
    expected = std::clamp<std::int64_t>(expected + (fwd ? 1 : -1), 1, static_cast<std::int64_t>(n));
    REQUIRE(state.cursor == static_cast<std::size_t>(expected));
    CHECK(state.highlightedTraceRow == state.cursor);
    CHECK(state.highlightedSourceLine == run.trace.row(state.cursor).sourceLine);
  }
  for (std::size_t c = 2; c < n; ++c) {
    const auto s = replay_at(run.trace, c);
    CHECK(replay_step(replay_step(s, Direction::Forward, run.trace), Direction::Backward, run.trace) == s);
    CHECK(replay_step(replay_step(s, Direction::Backward, run.trace), Direction::Forward, run.trace) == s);
  }
}
