// tracetable: author, check and serve trace-table exercises.
//
//   tracetable validate <exercise.json>
//   tracetable enumerate <exercise.json> [--max-events N]
//   tracetable grade-ordering <exercise.json> <arrangement.txt>
//   tracetable author --program p.mc --schedule "main*5,thread-1*10,..." --id ID [-o out.json]
//   tracetable serve [--port 8080] [--data-dir data] [--seed 42]
//
// Reports go to stdout as JSON. Exit codes: 0 success, 1 the check failed,
// 2 the input could not be used.

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tracetable/error.hpp"
#include "tracetable/exercise.hpp"
#include "tracetable/http.hpp"
#include "tracetable/json_io.hpp"
#include "tracetable/ordering.hpp"
#include "tracetable/service.hpp"

namespace {

using nlohmann::json;
using namespace tracetable;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

// "main*5, thread-1 thread-2*2" -> main main main main main thread-1 thread-2 thread-2
Schedule parse_schedule_spec(const std::string& spec) {
  std::string normalized = spec;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(normalized);
  Schedule schedule;
  for (std::string token; in >> token;) {
    std::size_t repeat = 1;
    if (const auto star = token.find('*'); star != std::string::npos) {
      const std::string count = token.substr(star + 1);
      const auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), repeat);
      if (ec != std::errc{} || end != count.data() + count.size() || count.empty()) {
        throw std::invalid_argument("bad repeat count in schedule step '" + token + "'");
      }
      token.resize(star);
    }
    schedule.steps.insert(schedule.steps.end(), repeat, token);
  }
  return schedule;
}

int run_validate(const std::string& file) {
  const Exercise ex = load_exercise_file(file);
  const auto report = validate_exercise(ex);
  json out = to_json(report);
  out["exercise"] = ex.id;
  std::cout << out.dump(2) << '\n';
  return report.ok() ? 0 : 1;
}

int run_enumerate(const std::string& file, std::size_t maxEvents) {
  const Exercise ex = load_exercise_file(file);
  std::set<std::vector<std::string>> outputs;
  std::size_t infeasible = 0;
  const std::size_t count = enumerate_schedules(ex.program, maxEvents, [&](const ExecutionResult& run) {
    outputs.insert(run.outputLines);
    if (!feasible(*ex.program, event_keys(run.trace)).feasible) ++infeasible;
  });
  json out{{"exercise", ex.id},
           {"events", ex.program->total_events()},
           {"schedules", count},
           {"distinctOutputs", outputs.size()},
           {"givenOutputReachable", outputs.contains(ex.givenOutput)},
           {"infeasibleYields", infeasible}};
  std::cout << out.dump(2) << '\n';
  return infeasible == 0 ? 0 : 1;
}

int run_grade(const std::string& exerciseFile, const std::string& arrangementFile) {
  const Exercise ex = load_exercise_file(exerciseFile);
  const auto arrangement = read_lines(arrangementFile);
  const GradeReport report = grade_ordering(ex, arrangement);
  json out = to_json(report);
  out["exercise"] = ex.id;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_author(const std::string& programFile, const std::string& scheduleSpec, const std::string& id,
               const std::string& title, const std::vector<std::string>& tracked, std::size_t distractors,
               std::uint64_t seed, const std::string& outFile) {
  const Exercise ex = author_exercise(id, title.empty() ? id : title, read_file(programFile),
                                     parse_schedule_spec(scheduleSpec), tracked, distractors, seed);
  if (outFile.empty()) {
    std::cout << to_json(ex).dump(2) << '\n';
  } else {
    save_exercise_file(ex, outFile);
  }
  return 0;
}

int run_serve(const std::string& host, int port, const std::string& dataDir, std::uint64_t seed) {
  Service service(Service::Options{dataDir, seed, {}});
  HttpServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "serving " << service.list_exercises().at("exercises").size() << " exercise(s) on http://" << host
            << ':' << bound << '\n';
  server.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-table exercises for multi-threaded programs"};
  app.require_subcommand(1);

  std::string exerciseFile;
  std::string arrangementFile;
  std::size_t maxEvents = 64;

  auto* validate = app.add_subcommand("validate", "Check an exercise file");
  validate->add_option("exercise", exerciseFile, "Exercise JSON file")->required();

  auto* enumerate = app.add_subcommand("enumerate", "Replay every feasible schedule of an exercise program");
  enumerate->add_option("exercise", exerciseFile, "Exercise JSON file")->required();
  enumerate->add_option("--max-events", maxEvents, "Refuse programs with more events than this")
      ->capture_default_str();

  auto* grade = app.add_subcommand("grade-ordering", "Grade a rearranged trace");
  grade->add_option("exercise", exerciseFile, "Exercise JSON file")->required();
  grade->add_option("arrangement", arrangementFile, "Text file, one trace line per line")->required();

  std::string programFile;
  std::string scheduleSpec;
  std::string id;
  std::string title;
  std::vector<std::string> tracked;
  std::size_t distractors = 3;
  std::uint64_t seed = 42;
  std::string outFile;
  auto* author = app.add_subcommand("author", "Build an exercise file from a program and its schedule");
  author->add_option("--program", programFile, "MiniConc source")->required();
  author->add_option("--schedule", scheduleSpec, "Thread per step, e.g. \"main*5,thread-1*10\"")->required();
  author->add_option("--id", id, "Exercise id")->required();
  author->add_option("--title", title, "Exercise title");
  author->add_option("--track", tracked, "Tracked shared variable (repeatable)");
  author->add_option("--distractors", distractors, "Number of wrong choices")->capture_default_str();
  author->add_option("--seed", seed, "Distractor seed")->capture_default_str();
  author->add_option("-o,--output", outFile, "Write here instead of stdout");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string dataDir = "data";
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--data-dir", dataDir, "Holds exercises/*.json and attempts.jsonl")->capture_default_str();
  serve->add_option("--seed", seed, "Seed for exercises shipped without choices")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*validate) return run_validate(exerciseFile);
    if (*enumerate) return run_enumerate(exerciseFile, maxEvents);
    if (*grade) return run_grade(exerciseFile, arrangementFile);
    if (*author) return run_author(programFile, scheduleSpec, id, title, tracked, distractors, seed, outFile);
    if (*serve) return run_serve(host, port, dataDir, seed);
  } catch (const EnumerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
