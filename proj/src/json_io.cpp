#include "tracetable/json_io.hpp"

#include <fstream>
#include <sstream>

#include "tracetable/error.hpp"

namespace tracetable {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ExerciseError(std::string("exercise file is missing \"") + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ExerciseError(std::string("exercise field \"") + key + "\": " + e.what());
  }
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

Exercise exercise_from_json(const json& doc) {
  if (!doc.is_object()) throw ExerciseError("exercise document must be a JSON object");
  const int version = field<int>(doc, "schemaVersion");
  if (version != kExerciseSchemaVersion) {
    throw ExerciseError("unsupported exercise schemaVersion " + std::to_string(version));
  }

  Exercise ex;
  ex.id = field<std::string>(doc, "id");
  ex.title = doc.value("title", ex.id);
  const json& source = doc.contains("programSource") ? doc.at("programSource") : json();
  if (source.is_array()) {
    ex.programSource = join_lines(source.get<std::vector<std::string>>());
  } else {
    ex.programSource = field<std::string>(doc, "programSource");
  }
  ex.program = parse_program(ex.programSource);
  ex.givenOutput = field<std::vector<std::string>>(doc, "givenOutput");
  ex.correctSchedule.steps = field<std::vector<std::string>>(doc, "correctSchedule");
  ex.trackedVars = field<std::vector<std::string>>(doc, "trackedVars");

  // An exercise may ship without choices and derived data; the server authors them.
  if (doc.contains("choices")) {
    for (auto& lines : field<std::vector<std::vector<std::string>>>(doc, "choices")) {
      ex.choices.push_back(ChoiceTrace{std::move(lines)});
    }
    ex.correctChoiceIndex = field<std::size_t>(doc, "correctChoiceIndex");
  }
  if (doc.contains("orderingItems")) ex.orderingItems = field<std::vector<std::string>>(doc, "orderingItems");
  const json orders = doc.contains("retrievalUpdateOrders") ? field<json>(doc, "retrievalUpdateOrders") : json::array();
  for (const auto& o : orders) {
    RUOrder order;
    order.variable = field<std::string>(o, "variable");
    for (const auto& a : field<json>(o, "sequence")) {
      const auto kind = field<std::string>(a, "kind");
      if (kind != "retrieval" && kind != "update") throw ExerciseError("unknown access kind \"" + kind + "\"");
      order.sequence.push_back(AccessEvent{field<std::string>(a, "thread"), field<std::size_t>(a, "index"),
                                           kind == "retrieval" ? AccessKind::Retrieval : AccessKind::Update});
    }
    ex.ruOrders.push_back(std::move(order));
  }
  return ex;
}

json to_json(const Exercise& ex) {
  json choices = json::array();
  for (const auto& c : ex.choices) choices.push_back(c.lines);

  json orders = json::array();
  for (const auto& o : ex.ruOrders) {
    json seq = json::array();
    for (const auto& a : o.sequence) {
      json entry{{"thread", a.thread}, {"index", a.ordinal}, {"kind", to_string(a.kind)}};
      // Display text is informational; identity is (thread, index).
      if (ex.program) {
        if (const auto t = ex.program->find_thread(a.thread); t && a.ordinal < ex.program->program_order(*t).size()) {
          entry["text"] = ex.program->statement(ex.program->program_order(*t)[a.ordinal].stmt).displayText;
        }
      }
      seq.push_back(std::move(entry));
    }
    orders.push_back(json{{"variable", o.variable}, {"sequence", std::move(seq)}});
  }

  return json{{"schemaVersion", kExerciseSchemaVersion},
              {"id", ex.id},
              {"title", ex.title},
              {"programSource", split_lines(ex.programSource)},
              {"givenOutput", ex.givenOutput},
              {"correctSchedule", ex.correctSchedule.steps},
              {"choices", std::move(choices)},
              {"correctChoiceIndex", ex.correctChoiceIndex},
              {"trackedVars", ex.trackedVars},
              {"orderingItems", ex.orderingItems},
              {"retrievalUpdateOrders", std::move(orders)}};
}

Exercise load_exercise_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExerciseError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ExerciseError(path.string() + ": " + e.what());
  }
  return exercise_from_json(doc);
}

void save_exercise_file(const Exercise& exercise, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ExerciseError("cannot write " + path.string());
  out << to_json(exercise).dump(2) << '\n';
}

json to_json(const GradeReport& r) {
  return json{{"execViolationPositions", r.execViolationPositions},
              {"ruViolationPositions", r.ruViolationPositions},
              {"errors", r.errors},
              {"totalChoices", r.totalChoices},
              {"accuracy", r.accuracy()}};
}

json to_json(const TableLayout& t) {
  json boxes = json::array();
  for (const auto& b : t.boxes) {
    boxes.push_back(json{{"thread", b.threadName},
                         {"depth", b.depth},
                         {"startRow", b.startRow},
                         {"endRow", b.endRow},
                         {"label", b.label},
                         {"synthetic", b.synthetic},
                         {"colorIndex", b.colorIndex},
                         {"eventSeq", b.eventSeq}});
  }
  json palette = json::array();
  for (const auto p : kPalette) palette.push_back(std::string(p));
  return json{{"rowCount", t.rowCount},
              {"threadColumns", t.threadColumns},
              {"boxes", std::move(boxes)},
              {"inputRows", t.inputRows},
              {"palette", std::move(palette)}};
}

json to_json(const ReplayState& s) {
  return json{{"cursor", s.cursor},
              {"highlightedSourceLine", s.highlightedSourceLine},
              {"highlightedTraceRow", s.highlightedTraceRow}};
}

json to_json(const ValidationReport& r) {
  json issues = json::array();
  for (const auto& i : r.issues) {
    json entry{{"rule", i.rule}, {"message", i.message}};
    entry["choice"] = i.choice ? json(*i.choice) : json(nullptr);
    issues.push_back(std::move(entry));
  }
  return json{{"valid", r.ok()}, {"issues", std::move(issues)}};
}

}  // namespace tracetable
