#pragma once

// MiniConc: a line-oriented toy language for small concurrent programs.
// See docs/miniconc.md for the grammar.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracetable {

struct StatementRef {
  std::size_t method = 0;
  std::size_t index = 0;

  auto operator<=>(const StatementRef&) const = default;
};

enum class StatementKind {
  SharedInit,
  ThreadDecl,
  SpawnStart,
  LocalDecl,
  AssignLocal,
  IncShared,
  DecShared,
  CallVoid,
  CallAssign,
  Print,
  ReturnExpr,
};

const char* to_string(StatementKind kind) noexcept;

struct Operand {
  enum class Kind { Int, Text, Local, Shared };

  Kind kind = Kind::Int;
  std::int64_t value = 0;
  std::string text;
  /// Local slot or shared variable index, depending on kind.
  std::size_t slot = 0;
};

struct Expression {
  enum class Kind { IntLiteral, LocalRef, SharedRef, Concat };

  Kind kind = Kind::IntLiteral;
  std::vector<Operand> operands;

  /// Shared variable indices read by this expression.
  std::vector<std::size_t> shared_reads() const;
};

struct SharedInitializer {
  std::size_t var = 0;
  std::int64_t value = 0;
};

struct Statement {
  StatementKind kind = StatementKind::Print;
  std::string displayText;
  std::size_t sourceLine = 0;

  std::optional<std::size_t> callee;
  std::optional<Expression> expr;
  /// Local slot written by LocalDecl, AssignLocal and CallAssign.
  std::optional<std::size_t> target;
  /// Shared variable for IncShared and DecShared.
  std::optional<std::size_t> sharedVar;
  /// Declared thread index (1-based; 0 is main) for ThreadDecl and SpawnStart.
  std::optional<std::size_t> thread;
  std::vector<SharedInitializer> inits;

  bool is_call() const noexcept {
    return kind == StatementKind::CallVoid || kind == StatementKind::CallAssign;
  }
};

struct Method {
  std::string name;
  std::size_t sourceLine = 0;
  std::vector<Statement> statements;
  std::vector<std::string> locals;

  bool returns_value() const noexcept {
    return !statements.empty() && statements.back().kind == StatementKind::ReturnExpr;
  }
};

struct SharedVar {
  std::string name;
  std::int64_t init = 0;
};

struct ThreadDecl {
  std::string name;
  std::size_t entryMethod = 0;
};

/// One statement execution in a thread's fixed program order.
struct StaticEvent {
  StatementRef stmt;
  std::size_t depth = 0;
  /// Ordinal of the enclosing call event in the same thread, if any.
  std::optional<std::size_t> parent;
};

inline constexpr std::string_view kMainThread = "main";

class ProgramModel {
 public:
  std::string name;
  std::vector<std::string> sourceLines;
  std::vector<SharedVar> sharedVars;
  std::vector<Method> methods;
  std::size_t mainMethod = 0;
  std::vector<ThreadDecl> threadDecls;

  /// Thread 0 is main; declared threads follow in declaration order.
  std::size_t thread_count() const noexcept { return threadDecls.size() + 1; }
  std::string_view thread_name(std::size_t thread) const;
  std::optional<std::size_t> find_thread(std::string_view name) const;
  std::optional<std::size_t> find_shared(std::string_view name) const;
  std::optional<std::size_t> find_method(std::string_view name) const;

  const Statement& statement(StatementRef ref) const {
    return methods.at(ref.method).statements.at(ref.index);
  }

  /// Statically unrolled event sequence of a thread (no branches, so it is fixed).
  const std::vector<StaticEvent>& program_order(std::size_t thread) const {
    return programOrder_.at(thread);
  }
  /// Ordinal in main's program order of the event that starts `thread` (thread >= 1).
  std::size_t spawn_ordinal(std::size_t thread) const { return spawnOrdinal_.at(thread); }
  std::size_t total_events() const noexcept { return totalEvents_; }

 private:
  friend std::shared_ptr<const ProgramModel> parse_program(std::string_view source);

  void unroll();

  std::vector<std::vector<StaticEvent>> programOrder_;
  std::vector<std::size_t> spawnOrdinal_;
  std::size_t totalEvents_ = 0;
};

using ProgramPtr = std::shared_ptr<const ProgramModel>;

/// Parses and validates a MiniConc program. Throws ProgramError.
ProgramPtr parse_program(std::string_view source);

}  // namespace tracetable
