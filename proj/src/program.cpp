#include "tracetable/program.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <utility>

#include "tracetable/error.hpp"

namespace tracetable {

ProgramError::ProgramError(Kind kind, std::size_t line, std::size_t column, const std::string& message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + to_string(kind) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

const char* to_string(ProgramError::Kind kind) noexcept {
  switch (kind) {
    case ProgramError::Kind::Syntax: return "syntax error";
    case ProgramError::Kind::UnresolvedReference: return "unresolved reference";
    case ProgramError::Kind::DuplicateName: return "duplicate name";
    case ProgramError::Kind::Invalid: return "invalid program";
  }
  return "error";
}

const char* to_string(StatementKind kind) noexcept {
  switch (kind) {
    case StatementKind::SharedInit: return "sharedInit";
    case StatementKind::ThreadDecl: return "threadDecl";
    case StatementKind::SpawnStart: return "spawnStart";
    case StatementKind::LocalDecl: return "localDecl";
    case StatementKind::AssignLocal: return "assignLocal";
    case StatementKind::IncShared: return "incShared";
    case StatementKind::DecShared: return "decShared";
    case StatementKind::CallVoid: return "callVoid";
    case StatementKind::CallAssign: return "callAssign";
    case StatementKind::Print: return "print";
    case StatementKind::ReturnExpr: return "returnExpr";
  }
  return "?";
}

std::vector<std::size_t> Expression::shared_reads() const {
  std::vector<std::size_t> vars;
  for (const auto& op : operands) {
    if (op.kind == Operand::Kind::Shared && std::find(vars.begin(), vars.end(), op.slot) == vars.end()) {
      vars.push_back(op.slot);
    }
  }
  return vars;
}

std::string_view ProgramModel::thread_name(std::size_t thread) const {
  if (thread == 0) return kMainThread;
  return threadDecls.at(thread - 1).name;
}

std::optional<std::size_t> ProgramModel::find_thread(std::string_view name) const {
  if (name == kMainThread) return 0;
  for (std::size_t i = 0; i < threadDecls.size(); ++i) {
    if (threadDecls[i].name == name) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> ProgramModel::find_shared(std::string_view name) const {
  for (std::size_t i = 0; i < sharedVars.size(); ++i) {
    if (sharedVars[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> ProgramModel::find_method(std::string_view name) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i].name == name) return i;
  }
  return std::nullopt;
}

void ProgramModel::unroll() {
  programOrder_.assign(thread_count(), {});
  spawnOrdinal_.assign(thread_count(), 0);

  std::function<void(std::size_t, std::size_t, std::size_t, std::optional<std::size_t>)> emit =
      [&](std::size_t thread, std::size_t method, std::size_t depth, std::optional<std::size_t> parent) {
        auto& order = programOrder_[thread];
        const auto& body = methods[method].statements;
        for (std::size_t i = 0; i < body.size(); ++i) {
          const std::size_t ordinal = order.size();
          order.push_back(StaticEvent{StatementRef{method, i}, depth, parent});
          if (body[i].kind == StatementKind::SpawnStart) spawnOrdinal_[*body[i].thread] = ordinal;
          if (body[i].is_call()) emit(thread, *body[i].callee, depth + 1, ordinal);
        }
      };

  emit(0, mainMethod, 0, std::nullopt);
  for (std::size_t t = 1; t < thread_count(); ++t) emit(t, threadDecls[t - 1].entryMethod, 0, std::nullopt);

  totalEvents_ = 0;
  for (const auto& order : programOrder_) totalEvents_ += order.size();
}

namespace {

using Kind = ProgramError::Kind;

const std::set<std::string, std::less<>> kKeywords = {"program", "method", "end",   "shared", "thread", "start",
                                                      "local",   "call",   "inc",   "dec",    "print",  "return"};

struct Token {
  enum class Type { Word, Int, String, Punct };
  Type type = Type::Word;
  std::string text;
  std::int64_t value = 0;
  std::size_t column = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

bool is_identifier(std::string_view word) {
  return word.find('-') == std::string_view::npos && !kKeywords.contains(word);
}

// Splits a statement line at the first '|' outside a string literal.
struct SplitLine {
  std::string_view code;
  std::optional<std::string_view> display;
};

SplitLine split_display(std::string_view line) {
  bool inString = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (inString) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        inString = false;
      }
    } else if (c == '"') {
      inString = true;
    } else if (c == '|') {
      return {line.substr(0, i), line.substr(i + 1)};
    }
  }
  return {line, std::nullopt};
}

std::vector<Token> tokenize(std::string_view code, std::size_t lineNo, std::size_t columnBase) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    const std::size_t column = columnBase + i;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_word_start(c)) {
      std::size_t j = i + 1;
      while (j < code.size() && is_word_char(code[j])) ++j;
      tokens.push_back({Token::Type::Word, std::string(code.substr(i, j - i)), 0, column});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < code.size() && std::isdigit(static_cast<unsigned char>(code[i + 1])))) {
      std::size_t j = i + 1;
      while (j < code.size() && std::isdigit(static_cast<unsigned char>(code[j]))) ++j;
      const std::string digits(code.substr(i, j - i));
      Token tok{Token::Type::Int, digits, 0, column};
      try {
        tok.value = std::stoll(digits);
      } catch (const std::out_of_range&) {
        throw ProgramError(Kind::Syntax, lineNo, column, "integer literal out of range");
      }
      tokens.push_back(std::move(tok));
      i = j;
    } else if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < code.size()) {
        if (code[j] == '\\' && j + 1 < code.size()) {
          text.push_back(code[j + 1]);
          j += 2;
        } else if (code[j] == '"') {
          closed = true;
          ++j;
          break;
        } else {
          text.push_back(code[j++]);
        }
      }
      if (!closed) throw ProgramError(Kind::Syntax, lineNo, column, "unterminated string literal");
      tokens.push_back({Token::Type::String, std::move(text), 0, column});
      i = j;
    } else if (c == '=' || c == '+' || c == ',') {
      tokens.push_back({Token::Type::Punct, std::string(1, c), 0, column});
      ++i;
    } else {
      throw ProgramError(Kind::Syntax, lineNo, column, std::string("unexpected character '") + c + "'");
    }
  }
  return tokens;
}

// Statement as written, before name resolution.
struct RawOperand {
  Operand::Kind kind = Operand::Kind::Int;  // Local means "unresolved name"
  std::int64_t value = 0;
  std::string text;
  std::size_t column = 0;
};

struct RawStatement {
  enum class Form { Shared, Thread, Start, Local, Assign, Call, Inc, Dec, Print, Return };

  Form form = Form::Print;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string display;
  std::string name;  // declared/assigned/started/inc'd name
  std::size_t nameColumn = 0;
  std::string callee;  // Thread entry or called method
  std::size_t calleeColumn = 0;
  bool callRhs = false;
  std::vector<RawOperand> operands;
  std::vector<std::pair<std::string, std::int64_t>> inits;
  std::vector<std::size_t> initColumns;
};

struct RawMethod {
  std::string name;
  std::size_t line = 0;
  std::size_t column = 0;
  std::vector<RawStatement> statements;
};

class Cursor {
 public:
  Cursor(const std::vector<Token>& tokens, std::size_t line, std::size_t endColumn)
      : tokens_(tokens), line_(line), endColumn_(endColumn) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token* peek() const { return done() ? nullptr : &tokens_[pos_]; }
  std::size_t column() const { return done() ? endColumn_ : tokens_[pos_].column; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ProgramError(Kind::Syntax, line_, column(), message);
  }

  const Token& word(const char* what) {
    if (done() || tokens_[pos_].type != Token::Type::Word) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }
  const Token& identifier(const char* what) {
    const Token& tok = word(what);
    if (!is_identifier(tok.text)) {
      throw ProgramError(Kind::Syntax, line_, tok.column, std::string("'") + tok.text + "' is not a valid " + what);
    }
    return tok;
  }
  const Token& integer() {
    if (done() || tokens_[pos_].type != Token::Type::Int) fail("expected integer literal");
    return tokens_[pos_++];
  }
  void punct(char c) {
    if (!accept_punct(c)) fail(std::string("expected '") + c + "'");
  }
  bool accept_punct(char c) {
    if (!done() && tokens_[pos_].type == Token::Type::Punct && tokens_[pos_].text[0] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (!done() && tokens_[pos_].type == Token::Type::Word && tokens_[pos_].text == w) {
      ++pos_;
      return true;
    }
    return false;
  }
  void finish() const {
    if (!done()) fail("unexpected '" + tokens_[pos_].text + "'");
  }

  RawOperand operand() {
    if (done()) fail("expected expression");
    const Token& tok = tokens_[pos_];
    RawOperand op;
    op.column = tok.column;
    switch (tok.type) {
      case Token::Type::Int:
        op.kind = Operand::Kind::Int;
        op.value = tok.value;
        break;
      case Token::Type::String:
        op.kind = Operand::Kind::Text;
        op.text = tok.text;
        break;
      case Token::Type::Word:
        if (!is_identifier(tok.text)) fail("'" + tok.text + "' is not a valid name");
        op.kind = Operand::Kind::Local;
        op.text = tok.text;
        break;
      case Token::Type::Punct:
        fail("expected expression");
    }
    ++pos_;
    return op;
  }

  std::vector<RawOperand> expression() {
    std::vector<RawOperand> ops{operand()};
    while (accept_punct('+')) ops.push_back(operand());
    return ops;
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t line_;
  std::size_t endColumn_;
  std::size_t pos_ = 0;
};

RawStatement parse_statement(std::string_view trimmed, std::size_t lineNo, std::size_t indent) {
  const SplitLine split = split_display(trimmed);
  RawStatement st;
  st.line = lineNo;
  st.column = indent + 1;
  if (split.display) {
    const auto display = trim(*split.display);
    if (display.empty()) {
      throw ProgramError(Kind::Syntax, lineNo, indent + split.code.size() + 1, "empty display text after '|'");
    }
    st.display = std::string(display);
  } else {
    st.display = std::string(trimmed);
  }

  const auto tokens = tokenize(split.code, lineNo, indent + 1);
  Cursor cur(tokens, lineNo, indent + split.code.size() + 1);
  const Token& head = cur.word("statement");

  auto rhs = [&](RawStatement& s) {
    if (cur.accept_word("call")) {
      s.callRhs = true;
      const Token& callee = cur.identifier("method name");
      s.callee = callee.text;
      s.calleeColumn = callee.column;
    } else {
      s.operands = cur.expression();
    }
  };

  using Form = RawStatement::Form;
  if (head.text == "shared") {
    st.form = Form::Shared;
    do {
      const Token& name = cur.identifier("shared variable name");
      cur.punct('=');
      const Token& value = cur.integer();
      st.inits.emplace_back(name.text, value.value);
      st.initColumns.push_back(name.column);
    } while (cur.accept_punct(','));
  } else if (head.text == "thread") {
    st.form = Form::Thread;
    const Token& name = cur.word("thread name");
    if (kKeywords.contains(name.text)) {
      throw ProgramError(Kind::Syntax, lineNo, name.column, "'" + name.text + "' is not a valid thread name");
    }
    st.name = name.text;
    st.nameColumn = name.column;
    cur.punct('=');
    const Token& entry = cur.identifier("method name");
    st.callee = entry.text;
    st.calleeColumn = entry.column;
  } else if (head.text == "start") {
    st.form = Form::Start;
    const Token& name = cur.word("thread name");
    st.name = name.text;
    st.nameColumn = name.column;
  } else if (head.text == "local") {
    st.form = Form::Local;
    const Token& name = cur.identifier("local variable name");
    st.name = name.text;
    st.nameColumn = name.column;
    cur.punct('=');
    rhs(st);
  } else if (head.text == "call") {
    st.form = Form::Call;
    const Token& callee = cur.identifier("method name");
    st.callee = callee.text;
    st.calleeColumn = callee.column;
  } else if (head.text == "inc" || head.text == "dec") {
    st.form = head.text == "inc" ? Form::Inc : Form::Dec;
    const Token& name = cur.identifier("shared variable name");
    st.name = name.text;
    st.nameColumn = name.column;
  } else if (head.text == "print") {
    st.form = Form::Print;
    st.operands = cur.expression();
  } else if (head.text == "return") {
    st.form = Form::Return;
    st.operands = cur.expression();
  } else if (is_identifier(head.text)) {
    st.form = Form::Assign;
    st.name = head.text;
    st.nameColumn = head.column;
    cur.punct('=');
    rhs(st);
  } else {
    throw ProgramError(Kind::Syntax, lineNo, head.column, "unknown statement '" + head.text + "'");
  }
  cur.finish();
  return st;
}

struct RawProgram {
  std::string name;
  std::vector<RawMethod> methods;
};

RawProgram parse_raw(const std::vector<std::string>& lines) {
  RawProgram prog;
  RawMethod* open = nullptr;
  bool seenName = false;

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t lineNo = n + 1;
    const std::string_view raw = lines[n];
    const std::string_view trimmed = trim(raw);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t indent = static_cast<std::size_t>(trimmed.data() - raw.data());

    if (open == nullptr) {
      const auto tokens = tokenize(trimmed, lineNo, indent + 1);
      Cursor cur(tokens, lineNo, indent + trimmed.size() + 1);
      if (cur.accept_word("program")) {
        if (seenName) throw ProgramError(Kind::DuplicateName, lineNo, indent + 1, "program name given twice");
        prog.name = cur.word("program name").text;
        cur.finish();
        seenName = true;
      } else if (cur.accept_word("method")) {
        const Token& name = cur.identifier("method name");
        cur.finish();
        prog.methods.push_back(RawMethod{name.text, lineNo, name.column, {}});
        open = &prog.methods.back();
      } else {
        cur.fail("expected 'program' or 'method'");
      }
      continue;
    }

    if (trimmed == "end") {
      open = nullptr;
      continue;
    }
    open->statements.push_back(parse_statement(trimmed, lineNo, indent));
  }
  if (open != nullptr) {
    throw ProgramError(Kind::Syntax, lines.size() + 1, 1, "method '" + open->name + "' is missing 'end'");
  }
  return prog;
}

std::vector<std::string> split_lines(std::string_view source) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= source.size()) {
    const std::size_t nl = source.find('\n', start);
    std::string_view line = source.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

class Resolver {
 public:
  explicit Resolver(RawProgram raw) : raw_(std::move(raw)) {}

  void run(ProgramModel& model) {
    model.name = raw_.name;
    collect_methods(model);
    collect_main_declarations(model);
    for (std::size_t m = 0; m < raw_.methods.size(); ++m) resolve_method(model, m);
    check_starts(model);
    check_recursion(model);
  }

 private:
  void collect_methods(ProgramModel& model) {
    std::optional<std::size_t> main;
    for (std::size_t m = 0; m < raw_.methods.size(); ++m) {
      const auto& rm = raw_.methods[m];
      for (std::size_t k = 0; k < m; ++k) {
        if (raw_.methods[k].name == rm.name) {
          throw ProgramError(Kind::DuplicateName, rm.line, rm.column, "method '" + rm.name + "' defined twice");
        }
      }
      if (rm.name == "main") main = m;
      Method method;
      method.name = rm.name;
      method.sourceLine = rm.line;
      model.methods.push_back(std::move(method));
    }
    if (!main) throw ProgramError(Kind::Invalid, 1, 1, "program has no 'main' method");
    model.mainMethod = *main;
  }

  // Shared variables and threads are declared only in main.
  void collect_main_declarations(ProgramModel& model) {
    const auto& body = raw_.methods[model.mainMethod].statements;
    bool prefix = true;
    for (const auto& st : body) {
      if (st.form != RawStatement::Form::Shared) {
        prefix = false;
      } else if (!prefix) {
        throw ProgramError(Kind::Invalid, st.line, st.column,
                           "shared variables must be initialized before any other statement of main");
      }
      if (st.form == RawStatement::Form::Shared) {
        for (std::size_t i = 0; i < st.inits.size(); ++i) {
          const auto& [name, value] = st.inits[i];
          if (model.find_shared(name)) {
            throw ProgramError(Kind::DuplicateName, st.line, st.initColumns[i],
                               "shared variable '" + name + "' declared twice");
          }
          model.sharedVars.push_back(SharedVar{name, value});
        }
      } else if (st.form == RawStatement::Form::Thread) {
        if (st.name == kMainThread) {
          throw ProgramError(Kind::DuplicateName, st.line, st.nameColumn, "thread name 'main' is reserved");
        }
        if (model.find_thread(st.name)) {
          throw ProgramError(Kind::DuplicateName, st.line, st.nameColumn, "thread '" + st.name + "' declared twice");
        }
        const auto entry = model.find_method(st.callee);
        if (!entry) {
          throw ProgramError(Kind::UnresolvedReference, st.line, st.calleeColumn,
                             "unknown method '" + st.callee + "'");
        }
        if (*entry == model.mainMethod) {
          throw ProgramError(Kind::Invalid, st.line, st.calleeColumn, "a thread cannot run 'main'");
        }
        model.threadDecls.push_back(ThreadDecl{st.name, *entry});
      }
    }
  }

  Operand resolve_operand(const ProgramModel& model, const std::map<std::string, std::size_t>& locals,
                          const RawOperand& raw, std::size_t line) const {
    Operand op;
    op.kind = raw.kind;
    op.value = raw.value;
    op.text = raw.text;
    if (raw.kind == Operand::Kind::Local) {
      if (auto it = locals.find(raw.text); it != locals.end()) {
        op.slot = it->second;
      } else if (auto shared = model.find_shared(raw.text)) {
        op.kind = Operand::Kind::Shared;
        op.slot = *shared;
      } else {
        throw ProgramError(Kind::UnresolvedReference, line, raw.column, "unknown variable '" + raw.text + "'");
      }
    }
    return op;
  }

  Expression resolve_expression(const ProgramModel& model, const std::map<std::string, std::size_t>& locals,
                                const RawStatement& st, bool allowConcat) const {
    Expression expr;
    for (const auto& raw : st.operands) expr.operands.push_back(resolve_operand(model, locals, raw, st.line));
    if (expr.operands.size() == 1 && expr.operands[0].kind != Operand::Kind::Text) {
      switch (expr.operands[0].kind) {
        case Operand::Kind::Int: expr.kind = Expression::Kind::IntLiteral; break;
        case Operand::Kind::Local: expr.kind = Expression::Kind::LocalRef; break;
        case Operand::Kind::Shared: expr.kind = Expression::Kind::SharedRef; break;
        case Operand::Kind::Text: break;
      }
    } else {
      if (!allowConcat) {
        throw ProgramError(Kind::Invalid, st.line, st.operands.front().column,
                           "text and concatenation are only allowed in print");
      }
      expr.kind = Expression::Kind::Concat;
    }
    return expr;
  }

  std::size_t resolve_callee(const ProgramModel& model, const RawStatement& st) const {
    const auto callee = model.find_method(st.callee);
    if (!callee) {
      throw ProgramError(Kind::UnresolvedReference, st.line, st.calleeColumn, "unknown method '" + st.callee + "'");
    }
    if (*callee == model.mainMethod) {
      throw ProgramError(Kind::Invalid, st.line, st.calleeColumn, "'main' cannot be called");
    }
    return *callee;
  }

  void resolve_method(ProgramModel& model, std::size_t m) {
    const auto& rm = raw_.methods[m];
    Method& method = model.methods[m];
    const bool isMain = m == model.mainMethod;
    std::map<std::string, std::size_t> locals;
    using Form = RawStatement::Form;

    auto declare_local = [&](const RawStatement& st) {
      if (locals.contains(st.name)) {
        throw ProgramError(Kind::DuplicateName, st.line, st.nameColumn, "local '" + st.name + "' declared twice");
      }
      if (model.find_shared(st.name)) {
        throw ProgramError(Kind::DuplicateName, st.line, st.nameColumn,
                           "local '" + st.name + "' shadows a shared variable");
      }
      const std::size_t slot = method.locals.size();
      method.locals.push_back(st.name);
      locals.emplace(st.name, slot);
      return slot;
    };

    for (std::size_t i = 0; i < rm.statements.size(); ++i) {
      const RawStatement& st = rm.statements[i];
      Statement out;
      out.displayText = st.display;
      out.sourceLine = st.line;

      if (!isMain && (st.form == Form::Shared || st.form == Form::Thread || st.form == Form::Start)) {
        throw ProgramError(Kind::Invalid, st.line, st.column,
                           "shared, thread and start statements are only allowed in main");
      }

      switch (st.form) {
        case Form::Shared:
          out.kind = StatementKind::SharedInit;
          for (const auto& [name, value] : st.inits) out.inits.push_back({*model.find_shared(name), value});
          break;
        case Form::Thread:
          out.kind = StatementKind::ThreadDecl;
          out.thread = *model.find_thread(st.name);
          out.callee = model.threadDecls[*out.thread - 1].entryMethod;
          declaredThreads_.insert(*out.thread);
          break;
        case Form::Start: {
          out.kind = StatementKind::SpawnStart;
          const auto thread = model.find_thread(st.name);
          if (!thread || *thread == 0) {
            throw ProgramError(Kind::UnresolvedReference, st.line, st.nameColumn, "unknown thread '" + st.name + "'");
          }
          if (!declaredThreads_.contains(*thread)) {
            throw ProgramError(Kind::Invalid, st.line, st.nameColumn,
                               "thread '" + st.name + "' started before its declaration");
          }
          if (!startedThreads_.insert(*thread).second) {
            throw ProgramError(Kind::Invalid, st.line, st.nameColumn, "thread '" + st.name + "' started twice");
          }
          out.thread = *thread;
          break;
        }
        case Form::Local:
        case Form::Assign: {
          std::size_t slot = 0;
          if (st.form == Form::Assign) {
            const auto it = locals.find(st.name);
            if (it == locals.end()) {
              if (model.find_shared(st.name)) {
                throw ProgramError(Kind::Invalid, st.line, st.nameColumn,
                                   "shared variable '" + st.name + "' can only change through inc/dec");
              }
              throw ProgramError(Kind::UnresolvedReference, st.line, st.nameColumn,
                                 "unknown local '" + st.name + "'");
            }
            slot = it->second;
          }
          if (st.callRhs) {
            const std::size_t callee = resolve_callee(model, st);
            if (!raw_returns_value(callee)) {
              throw ProgramError(Kind::Invalid, st.line, st.calleeColumn,
                                 "method '" + st.callee + "' does not return a value");
            }
            out.kind = StatementKind::CallAssign;
            out.callee = callee;
          } else {
            out.kind = st.form == Form::Local ? StatementKind::LocalDecl : StatementKind::AssignLocal;
            out.expr = resolve_expression(model, locals, st, false);
          }
          // Declared after resolving the right-hand side so `local x = x` is rejected.
          if (st.form == Form::Local) slot = declare_local(st);
          out.target = slot;
          break;
        }
        case Form::Call:
          out.kind = StatementKind::CallVoid;
          out.callee = resolve_callee(model, st);
          break;
        case Form::Inc:
        case Form::Dec: {
          out.kind = st.form == Form::Inc ? StatementKind::IncShared : StatementKind::DecShared;
          const auto var = model.find_shared(st.name);
          if (!var) {
            throw ProgramError(Kind::UnresolvedReference, st.line, st.nameColumn,
                               "unknown shared variable '" + st.name + "'");
          }
          out.sharedVar = *var;
          break;
        }
        case Form::Print:
          out.kind = StatementKind::Print;
          out.expr = resolve_expression(model, locals, st, true);
          break;
        case Form::Return:
          if (i + 1 != rm.statements.size()) {
            throw ProgramError(Kind::Invalid, st.line, st.column, "return must be the last statement of a method");
          }
          if (isMain) throw ProgramError(Kind::Invalid, st.line, st.column, "main cannot return a value");
          out.kind = StatementKind::ReturnExpr;
          out.expr = resolve_expression(model, locals, st, false);
          break;
      }
      method.statements.push_back(std::move(out));
    }
  }

  bool raw_returns_value(std::size_t method) const {
    const auto& body = raw_.methods[method].statements;
    return !body.empty() && body.back().form == RawStatement::Form::Return;
  }

  void check_starts(const ProgramModel& model) const {
    const auto& main = raw_.methods[model.mainMethod];
    for (std::size_t t = 1; t < model.thread_count(); ++t) {
      if (!startedThreads_.contains(t)) {
        throw ProgramError(Kind::Invalid, main.line, main.column,
                           "thread '" + model.threadDecls[t - 1].name + "' is never started");
      }
    }
  }

  void check_recursion(const ProgramModel& model) const {
    enum class Mark { None, Active, Done };
    std::vector<Mark> marks(model.methods.size(), Mark::None);
    std::function<void(std::size_t)> visit = [&](std::size_t m) {
      marks[m] = Mark::Active;
      for (const auto& st : model.methods[m].statements) {
        if (!st.is_call()) continue;
        if (marks[*st.callee] == Mark::Active) {
          throw ProgramError(Kind::Invalid, st.sourceLine, 1,
                             "recursive call to '" + model.methods[*st.callee].name + "'");
        }
        if (marks[*st.callee] == Mark::None) visit(*st.callee);
      }
      marks[m] = Mark::Done;
    };
    for (std::size_t m = 0; m < model.methods.size(); ++m) {
      if (marks[m] == Mark::None) visit(m);
    }
  }

  RawProgram raw_;
  std::set<std::size_t> declaredThreads_;
  std::set<std::size_t> startedThreads_;
};

}  // namespace

ProgramPtr parse_program(std::string_view source) {
  auto model = std::make_shared<ProgramModel>();
  model->sourceLines = split_lines(source);
  Resolver(parse_raw(model->sourceLines)).run(*model);
  model->unroll();
  return model;
}

}  // namespace tracetable
