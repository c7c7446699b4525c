#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tracetable/exercise.hpp"
#include "tracetable/interpreter.hpp"
#include "tracetable/json_io.hpp"
#include "tracetable/program.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) { return std::string(TRACETABLE_DATA_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string counter_source() { return read_file(data_path("programs/counter.mc")); }

inline tracetable::ProgramPtr counter_program() {
  static const tracetable::ProgramPtr program = tracetable::parse_program(counter_source());
  return program;
}

inline tracetable::Exercise counter_exercise() {
  return tracetable::load_exercise_file(data_path("exercises/counter-race.json"));
}

inline tracetable::Schedule repeat(std::initializer_list<std::pair<const char*, int>> runs) {
  tracetable::Schedule s;
  for (const auto& [name, n] : runs) s.steps.insert(s.steps.end(), static_cast<std::size_t>(n), name);
  return s;
}

// [main x5, t1, t1, t2, t2, t1 x8, t2 x8]: the interleaving behind the recorded counter trace.
inline tracetable::Schedule race_schedule() {
  return repeat({{"main", 5}, {"thread-1", 2}, {"thread-2", 2}, {"thread-1", 8}, {"thread-2", 8}});
}

// [main x5, t1 x10, t2 x10]: no overlap between the workers.
inline tracetable::Schedule sequential_schedule() { return repeat({{"main", 5}, {"thread-1", 10}, {"thread-2", 10}}); }

// The 25-line counter trace, verbatim.
inline const std::vector<std::string>& recorded_trace() {
  static const std::vector<std::string> lines = {
      "[main] Counter counter = new Counter()",
      "[main] Thread t1 = new Thread(counter)",
      "[main] Thread t2 = new Thread(counter)",
      "[main] t1.start()",
      "[main] t2.start()",
      "[thread-1] this.increment()",
      "[thread-1] c++",
      "[thread-2] this.increment()",
      "[thread-2] c++",
      "[thread-1] int value = this.getValue()",
      "[thread-1] return c",
      "[thread-1] System.out.println(\"Value for Thread After increment \" + value)",
      "[thread-1] this.decrement()",
      "[thread-1] c--",
      "[thread-1] value = this.getValue()",
      "[thread-1] return c",
      "[thread-1] System.out.println(\"Value for Thread at last \" + value)",
      "[thread-2] int value = this.getValue()",
      "[thread-2] return c",
      "[thread-2] System.out.println(\"Value for Thread After increment \" + value)",
      "[thread-2] this.decrement()",
      "[thread-2] c--",
      "[thread-2] value = this.getValue()",
      "[thread-2] return c",
      "[thread-2] System.out.println(\"Value for Thread at last \" + value)",
  };
  return lines;
}

// Output printed when the race occurs.
inline const std::vector<std::string>& race_output() {
  static const std::vector<std::string> lines = {
      "Value for Thread After increment 2",
      "Value for Thread at last 1",
      "Value for Thread After increment 1",
      "Value for Thread at last 0",
  };
  return lines;
}

// Output of the non-overlapping run.
inline const std::vector<std::string>& correct_output() {
  static const std::vector<std::string> lines = {
      "Value for Thread After increment 1",
      "Value for Thread at last 0",
      "Value for Thread After increment 1",
      "Value for Thread at last 0",
  };
  return lines;
}

inline std::vector<std::string> swapped(std::vector<std::string> lines, std::size_t a, std::size_t b) {
  std::swap(lines[a - 1], lines[b - 1]);
  return lines;
}

}  // namespace fixtures
