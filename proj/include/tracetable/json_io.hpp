#pragma once

// JSON forms of exercises and grading results. The exercise file schema is
// documented in docs/exercise-format.md.

#include <filesystem>

#include <json.hpp>

#include "tracetable/exercise.hpp"
#include "tracetable/layout.hpp"
#include "tracetable/ordering.hpp"

namespace tracetable {

inline constexpr int kExerciseSchemaVersion = 1;

/// Checks structure and parses the program; exercise invariants are left to
/// validate_exercise. Throws ExerciseError or ProgramError.
Exercise exercise_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Exercise& exercise);

Exercise load_exercise_file(const std::filesystem::path& path);
void save_exercise_file(const Exercise& exercise, const std::filesystem::path& path);

nlohmann::json to_json(const GradeReport& report);
nlohmann::json to_json(const TableLayout& table);
nlohmann::json to_json(const ReplayState& state);
nlohmann::json to_json(const ValidationReport& report);

}  // namespace tracetable
