#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tracetable {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A MiniConc source could not be turned into a valid program.
class ProgramError : public Error {
 public:
  enum class Kind { Syntax, UnresolvedReference, DuplicateName, Invalid };

  ProgramError(Kind kind, std::size_t line, std::size_t column, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

const char* to_string(ProgramError::Kind kind) noexcept;

/// A schedule step could not be executed. `step()` is 1-based.
class ReplayError : public Error {
 public:
  ReplayError(std::size_t step, const std::string& message);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A bracketed trace line could not be matched to the program.
class TraceTextError : public Error {
 public:
  enum class Kind { Malformed, UnknownThread, UnmatchedStatement, TooManyOccurrences };

  TraceTextError(Kind kind, std::size_t line, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  /// 1-based index of the offending input line.
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

class EnumerationError : public Error {
 public:
  using Error::Error;
};

class DistractorError : public Error {
 public:
  using Error::Error;
};

/// Malformed exercise document, or an exercise that cannot be used at all.
class ExerciseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tracetable
