#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "iqsim/elements.hpp"
#include "iqsim/qstate.hpp"

namespace iqsim::dsl {

struct SourcePos {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
};

struct ModeDecl {
  std::string name;
  std::size_t dim = 0;
  SourcePos pos;
};

struct KetInit {
  std::string mode;
  std::size_t ket = 0;
  SourcePos pos;
};

struct InitLine {
  std::vector<KetInit> kets;
  SourcePos pos;
};

struct Arg {
  std::string name;
  double value = 0.0;
  bool is_int = false;
  SourcePos pos;
};

struct Statement {
  std::string keyword;
  std::vector<std::string> targets;
  std::vector<Arg> args;
  SourcePos pos;
};

struct CircuitAst {
  std::vector<ModeDecl> modes;
  InitLine init;
  std::vector<Statement> statements;
};

enum class Severity { kError, kWarning };

enum class DiagCode {
  kLex,            // character or token cannot be read
  kSyntax,         // tokens do not fit the line grammar
  kUnknownKeyword, // first word of a line is not a known form
  kArity,          // wrong number of mode operands
  kArgument,       // missing, repeated, unknown or out-of-range argument
  kUndeclaredMode,
  kDuplicateMode,
  kDuplicateInit,
  kMissingInit,    // no init line, or a mode left uninitialized
  kStructure,      // space too large, PBS misplaced, ket out of range
};

const char* severity_name(Severity s);
const char* diag_code_name(DiagCode c);

struct ParseDiagnostic {
  Severity severity = Severity::kError;
  DiagCode code = DiagCode::kSyntax;
  std::string message;
  int line = 0;
  int column = 0;
};

// "file:line:col: severity: message"
std::string format_diagnostic(const std::string& file,
                              const ParseDiagnostic& d);

// Exactly one of ast / diagnostics is populated. Parsing recovers at
// line boundaries, so diagnostics for independent lines accumulate.
struct ParseResult {
  std::optional<CircuitAst> ast;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return ast.has_value(); }
};

ParseResult parse(const std::string& source);

// Canonical source form; parsing it again yields a semantically equal
// AST.
std::string pretty_print(const CircuitAst& ast);

bool semantically_equal(const CircuitAst& a, const CircuitAst& b);

struct LoweredCircuit {
  PureState initial;
  Pipeline pipeline;
};

// Build the mode space, initial basis state and element pipeline of a
// parsed circuit. Stage labels are "s<n>_<keyword>" by statement
// position.
LoweredCircuit lower(const CircuitAst& ast);

}  // namespace iqsim::dsl
