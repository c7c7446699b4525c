#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "service_fixture.hpp"
#include "tracetable/service.hpp"

using namespace tracetable;
using nlohmann::json;

namespace {

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

std::size_t wrong_choice() { return (fixtures::counter_exercise().correctChoiceIndex + 1) % 4; }
std::size_t right_choice() { return fixtures::counter_exercise().correctChoiceIndex; }

json full_answers(const Service& svc) {
  json cells = json::object();
  for (const auto& c : svc.exercise("counter-race").sheets.at(0).cells) cells[std::to_string(c.row)] = c.expected;
  return json{{"c", cells}};
}

}  // namespace

TEST_CASE("catalog and exercise view") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  const json list = svc.list_exercises();
  REQUIRE(list.at("exercises").size() == 1);
  CHECK(list["exercises"][0]["id"] == "counter-race");
  CHECK(list["exercises"][0]["rowCount"] == 25);
  CHECK(list["exercises"][0]["choiceCount"] == 4);

  const json view = svc.get_exercise("counter-race");
  CHECK(view["givenOutput"] == json(fixtures::race_output()));
  CHECK(view["choices"].size() == 4);
  CHECK(view["trackedVars"] == json::array({"c"}));
  CHECK(view["orderingItems"].size() == 25);
  CHECK(view["orderingItems"] != json(fixtures::recorded_trace()));
  CHECK(view["programSource"].is_array());

  CHECK(status_of([&] { svc.get_exercise("nope"); }) == 404);
  CHECK(status_of([&] { svc.submit_selection("ann", "nope", 0); }) == 404);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "nope", json::object()); }) == 404);
  CHECK(status_of([&] { svc.get_exercise("counter-race", ""); }) == 400);
}

TEST_CASE("empty store gives an empty catalog") {
  fixtures::TempDataDir dir(false);
  Service svc(fixtures::service_options(dir.path()));
  CHECK(svc.list_exercises().at("exercises").empty());
}

TEST_CASE("reads are byte-identical and never carry the answer key") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  const std::string a = svc.get_exercise("counter-race").dump();
  const std::string b = svc.get_exercise("counter-race", "ann").dump();
  const std::string c = svc.get_exercise("counter-race", "ann").dump();
  CHECK(a == b);
  CHECK(b == c);
  CHECK(svc.list_exercises().dump() == svc.list_exercises().dump());
  for (const auto& s : {a, svc.list_exercises().dump()}) {
    CHECK(s.find("correctChoiceIndex") == std::string::npos);
    CHECK(s.find("expected") == std::string::npos);
    CHECK(s.find("retrievalUpdate") == std::string::npos);
    CHECK(s.find("correctSchedule") == std::string::npos);
    CHECK(s.find("sequence") == std::string::npos);
  }
  // A wrong selection must not reveal which choice is right or the expected cells.
  const std::string wrong = svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(wrong_choice())).dump();
  CHECK(wrong.find("fillin\"") == std::string::npos);
  CHECK(wrong.find("expected") == std::string::npos);
  CHECK(wrong.find("correctChoiceIndex") == std::string::npos);
}

TEST_CASE("selection flow") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  svc.get_exercise("counter-race", "ann");

  const json w1 = svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(wrong_choice()));
  CHECK(w1["correct"] == false);
  CHECK(w1["reanswer"] == true);
  CHECK(w1["fillinUnlocked"] == false);
  CHECK(w1["attemptNumber"] == 1);
  CHECK_FALSE(w1.contains("fillin"));
  CHECK(w1["replay"]["lines"].size() == 25);
  CHECK(w1["replay"]["state"]["cursor"] == 1);

  const json w2 = svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(wrong_choice()));
  CHECK(w2["attemptNumber"] == 2);

  CHECK(status_of([&] { svc.submit_selection("ann", "counter-race", 4); }) == 400);
  CHECK(status_of([&] { svc.submit_selection("ann", "counter-race", -1); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", full_answers(svc)); }) == 409);

  const json ok = svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(right_choice()));
  CHECK(ok["correct"] == true);
  CHECK(ok["fillinUnlocked"] == true);
  CHECK(ok["reanswer"] == false);
  CHECK(ok["attemptNumber"] == 3);
  CHECK(ok["replay"]["feasible"] == true);
  CHECK(ok["replay"]["lines"] == json(fixtures::recorded_trace()));
  CHECK(ok["replay"]["layout"]["rowCount"] == 25);
  REQUIRE(ok["fillin"]["variables"].size() == 1);
  CHECK(ok["fillin"]["variables"][0]["rows"].size() == 25);

  // Other learners are unaffected.
  const json bob = svc.submit_selection("bob", "counter-race", static_cast<std::int64_t>(wrong_choice()));
  CHECK(bob["attemptNumber"] == 1);
}

TEST_CASE("fill-in flow") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  svc.get_exercise("counter-race", "ann");
  svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(right_choice()));

  json answers = full_answers(svc);
  answers["c"]["9"] = 1;
  const json r1 = svc.submit_fill_in("ann", "counter-race", answers);
  CHECK(r1["correct"] == false);
  CHECK(r1["complete"] == false);
  CHECK(r1["attemptNumber"] == 1);
  const json& vars = r1["variables"][0];
  CHECK(vars["hintRows"] == json::array({1, 7, 9, 14, 22}));
  std::vector<std::size_t> wrongRows;
  for (const auto& c : vars["cells"]) {
    if (c["correct"] == false) wrongRows.push_back(c["row"].get<std::size_t>());
  }
  CHECK(wrongRows == std::vector<std::size_t>{9});
  CHECK(r1.dump().find("expected") == std::string::npos);

  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json{{"zz", json::object()}}); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json{{"c", {{"99", 0}}}}); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json{{"c", {{"x", 0}}}}); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json{{"c", {{"-1", 0}}}}); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json{{"c", {{"1", "zero"}}}}); }) == 400);
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", json::array()); }) == 400);

  // Flat form is accepted for a single tracked variable.
  const json r2 = svc.submit_fill_in("ann", "counter-race", full_answers(svc)["c"]);
  CHECK(r2["complete"] == true);
  CHECK(r2["attemptNumber"] == 2);

  const auto stats = svc.session_stats("ann");
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].completed);
  CHECK(stats[0].selectionAttempts == 1);
  CHECK(stats[0].fillinAttempts == 2);
  CHECK(stats[0].learningDurationSeconds > 0.0);

  // Session closed: fill-in locks again until a new session's selection.
  CHECK(status_of([&] { svc.submit_fill_in("ann", "counter-race", full_answers(svc)); }) == 409);
}

TEST_CASE("ordering test") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  const json r1 = svc.submit_ordering("ann", "counter-race", fixtures::recorded_trace());
  CHECK(r1["accuracy"] == doctest::Approx(1.0));
  CHECK(r1["attemptNumber"] == 1);
  CHECK(r1["testId"] == "counter-race");

  const auto seq = render_trace_text(replay(fixtures::counter_program(), fixtures::sequential_schedule()).trace);
  const json r2 = svc.submit_ordering("ann", "counter-race", seq);
  CHECK(r2["accuracy"].get<double>() == doctest::Approx(0.96));
  CHECK(r2["attemptNumber"] == 2);

  auto missing = fixtures::recorded_trace();
  missing.pop_back();
  CHECK(status_of([&] { svc.submit_ordering("ann", "counter-race", missing); }) == 400);
  auto garbage = fixtures::recorded_trace();
  garbage[0] = "not a trace line";
  CHECK(status_of([&] { svc.submit_ordering("ann", "counter-race", garbage); }) == 400);
  CHECK(status_of([&] { svc.submit_ordering("ann", "nope", fixtures::recorded_trace()); }) == 404);
}

TEST_CASE("session statistics") {
  fixtures::TempDataDir dir;
  fixtures::StepClock clock;
  Service svc(fixtures::service_options(dir.path(), clock));
  CHECK(svc.session_stats("ann").empty());

  svc.get_exercise("counter-race", "ann");  // t0
  svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(right_choice()));  // t0+1s
  svc.submit_fill_in("ann", "counter-race", full_answers(svc));                            // t0+2s
  svc.get_exercise("counter-race", "ann");  // new session at t0+3s
  svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(wrong_choice()));  // t0+4s

  const auto stats = svc.session_stats("ann");
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].startedAtMs < stats[1].startedAtMs);
  CHECK(stats[0].completed);
  CHECK(stats[0].learningDurationSeconds == doctest::Approx(2.0));
  CHECK(stats[0].selectionAttempts == 1);
  CHECK(stats[0].fillinAttempts == 1);
  CHECK_FALSE(stats[1].completed);
  CHECK(stats[1].selectionAttempts == 1);
  CHECK(stats[1].learningDurationSeconds == doctest::Approx(1.0));
  CHECK(to_json(stats[0])["startedAt"] == "2023-11-14T22:13:20.000Z");
  CHECK(svc.session_stats("nobody").empty());
}

TEST_CASE("attempt log is append-only and reconstructs the same statistics") {
  fixtures::TempDataDir dir;
  std::vector<SessionStats> before;
  std::size_t recordCount = 0;
  {
    Service svc(fixtures::service_options(dir.path()));
    svc.get_exercise("counter-race", "ann");
    svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(wrong_choice()));
    svc.submit_selection("ann", "counter-race", static_cast<std::int64_t>(right_choice()));
    svc.get_exercise("counter-race", "bob");
    svc.submit_ordering("bob", "counter-race", fixtures::recorded_trace());
    json bad = full_answers(svc);
    bad["c"]["1"] = nullptr;
    svc.submit_fill_in("ann", "counter-race", bad);
    svc.submit_fill_in("ann", "counter-race", full_answers(svc));
    before = svc.session_stats("ann");
    recordCount = svc.log().records().size();
  }
  const auto logFile = dir.path() / "attempts.jsonl";
  std::ifstream in(logFile);
  std::vector<json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
  CHECK(lines.size() == recordCount);
  for (const auto& l : lines) {
    if (l["type"] == "attempt") {
      CHECK(l.contains("submittedAt"));
      CHECK(l["attemptNumber"].get<int>() >= 1);
    }
  }
  CHECK(fold_sessions(lines, "ann") == before);

  Service again(fixtures::service_options(dir.path()));
  CHECK(again.session_stats("ann") == before);
  // Counting continues where the log left off.
  const json r = again.submit_ordering("bob", "counter-race", fixtures::recorded_trace());
  CHECK(r["attemptNumber"] == 2);
  CHECK(again.log().records().size() == recordCount + 1);
}

TEST_CASE("replay endpoint") {
  fixtures::TempDataDir dir;
  Service svc(fixtures::service_options(dir.path()));
  const auto c = right_choice();
  const json s1 = svc.replay("counter-race", c, 1, Direction::Forward);
  CHECK(s1["state"]["cursor"] == 2);
  CHECK(s1["traceLine"] == "[main] Thread t1 = new Thread(counter)");
  CHECK(svc.replay("counter-race", c, 1, Direction::Backward)["state"]["cursor"] == 1);
  CHECK(svc.replay("counter-race", c, 25, Direction::Forward)["state"]["cursor"] == 25);
  CHECK(svc.replay("counter-race", c, 7, std::nullopt)["traceLine"] == "[thread-1] c++");
  CHECK(status_of([&] { svc.replay("counter-race", 9, 1, std::nullopt); }) == 400);
  CHECK(status_of([&] { svc.replay("nope", 0, 1, std::nullopt); }) == 404);
  // Every choice can be stepped through, feasible or not.
  for (std::size_t i = 0; i < 4; ++i) CHECK(svc.replay("counter-race", i, 25, std::nullopt)["rowCount"] == 25);
}

TEST_CASE("exercise files without choices are completed at load") {
  fixtures::TempDataDir dir(false);
  auto ex = fixtures::counter_exercise();
  json doc = to_json(ex);
  doc.erase("choices");
  doc.erase("correctChoiceIndex");
  doc.erase("orderingItems");
  doc.erase("retrievalUpdateOrders");
  doc["id"] = "bare";
  std::ofstream(dir.path() / "exercises" / "bare.json") << doc.dump(2);
  Service svc(fixtures::service_options(dir.path()));
  const auto& served = svc.exercise("bare");
  CHECK(served.exercise.choices.size() == 4);
  CHECK(validate_exercise(served.exercise).ok());
}

TEST_CASE("invalid exercise files stop the service from starting") {
  fixtures::TempDataDir dir(false);
  auto ex = fixtures::counter_exercise();
  ex.choices[wrong_choice()].lines = fixtures::swapped(fixtures::recorded_trace(), 7, 8);
  std::ofstream(dir.path() / "exercises" / "two.json") << to_json(ex).dump(2);
  CHECK_THROWS_AS(Service(fixtures::service_options(dir.path())), ExerciseError);
}

TEST_CASE("timestamps") {
  CHECK(format_utc(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_utc(1'700'000'000'250) == "2023-11-14T22:13:20.250Z");
}
