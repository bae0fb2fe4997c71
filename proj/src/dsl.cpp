#include "iqsim/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace iqsim::dsl {

namespace {

enum class TokKind { kIdent, kInt, kNumber, kColon, kEquals, kPipe, kGt, kComma };

struct Token {
  TokKind kind = TokKind::kIdent;
  std::string text;
  double number = 0.0;
  long long int_value = 0;
  int column = 0;
};

struct LexOutput {
  std::vector<Token> tokens;
  std::optional<ParseDiagnostic> error;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

ParseDiagnostic error_at(DiagCode code, std::string message, int line, int column) {
  return ParseDiagnostic{Severity::kError, code, std::move(message), line, column};
}

// Tokenizes one line; stops at '#'. On a bad character or malformed
// number the whole line is rejected with a single located diagnostic.
LexOutput lex_line(const std::string& text, int line) {
  LexOutput out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    int column = static_cast<int>(i) + 1;
    if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < text.size() && is_ident_char(text[i])) ++i;
      out.tokens.push_back({TokKind::kIdent, text.substr(start, i - start), 0.0, 0, column});
      continue;
    }
    if (is_digit(c) || (c == '-' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      std::size_t start = i;
      if (text[i] == '-') ++i;
      while (i < text.size() && is_digit(text[i])) ++i;
      // the one non-decimal spelling: the balanced splitter amplitude
      if (text.compare(start, i - start, "1") == 0 &&
          text.compare(i, 6, "/sqrt2") == 0 &&
          (i + 6 >= text.size() || !is_ident_char(text[i + 6]))) {
        i += 6;
        out.tokens.push_back(
            {TokKind::kNumber, "1/sqrt2", std::sqrt(0.5), 0, column});
        continue;
      }
      bool integral = true;
      if (i < text.size() && text[i] == '.') {
        integral = false;
        ++i;
        if (i >= text.size() || !is_digit(text[i])) {
          out.error = error_at(DiagCode::kLex, "malformed number", line, column);
          return out;
        }
        while (i < text.size() && is_digit(text[i])) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        integral = false;
        ++i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        if (i >= text.size() || !is_digit(text[i])) {
          out.error = error_at(DiagCode::kLex, "malformed number", line, column);
          return out;
        }
        while (i < text.size() && is_digit(text[i])) ++i;
      }
      std::string lexeme = text.substr(start, i - start);
      double value = std::strtod(lexeme.c_str(), nullptr);
      if (!std::isfinite(value)) {
        out.error = error_at(DiagCode::kLex, "number out of range", line, column);
        return out;
      }
      long long int_value = 0;
      if (integral) {
        auto [ptr, ec] =
            std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), int_value);
        if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) integral = false;
      }
      out.tokens.push_back({integral ? TokKind::kInt : TokKind::kNumber, lexeme, value,
                            int_value, column});
      continue;
    }
    TokKind kind;
    switch (c) {
      case ':': kind = TokKind::kColon; break;
      case '=': kind = TokKind::kEquals; break;
      case '|': kind = TokKind::kPipe; break;
      case '>': kind = TokKind::kGt; break;
      case ',': kind = TokKind::kComma; break;
      default:
        out.error = error_at(DiagCode::kLex,
                             std::string("unexpected character '") + c + "'", line,
                             column);
        return out;
    }
    out.tokens.push_back({kind, std::string(1, c), 0.0, 0, column});
    ++i;
  }
  return out;
}

const std::set<std::string>& element_keywords() {
  static const std::set<std::string> kw = {"bbs", "bs",  "mirror", "ps",
                                           "hwp", "qwp", "pbs",    "block"};
  return kw;
}

// Cursor over one line's tokens with located errors.
struct LineParser {
  const std::vector<Token>& tokens;
  int line;
  std::size_t pos = 0;
  std::optional<ParseDiagnostic> error;

  bool done() const { return pos >= tokens.size(); }
  const Token& peek() const { return tokens[pos]; }
  const Token* peek2() const { return pos + 1 < tokens.size() ? &tokens[pos + 1] : nullptr; }
  int column_here() const {
    if (!done()) return tokens[pos].column;
    return tokens.empty() ? 1 : tokens.back().column + static_cast<int>(tokens.back().text.size());
  }
  void fail(std::string message) {
    if (!error) error = error_at(DiagCode::kSyntax, std::move(message), line, column_here());
  }
  const Token* expect(TokKind kind, const char* what) {
    if (done() || tokens[pos].kind != kind) {
      fail(std::string("expected ") + what);
      return nullptr;
    }
    return &tokens[pos++];
  }
  void expect_end() {
    if (!done()) fail("unexpected trailing tokens");
  }
};

using LineItem = std::variant<ModeDecl, InitLine, Statement>;

std::optional<ModeDecl> parse_mode_line(LineParser& p) {
  ModeDecl decl;
  decl.pos = {p.line, p.tokens.front().column};
  ++p.pos;  // "mode"
  const Token* name = p.expect(TokKind::kIdent, "a mode name");
  if (!name) return std::nullopt;
  decl.name = name->text;
  if (!p.expect(TokKind::kColon, "':'")) return std::nullopt;
  const Token* dim = p.expect(TokKind::kInt, "a dimension");
  if (!dim) return std::nullopt;
  if (dim->int_value < 1) {
    p.error = error_at(DiagCode::kSyntax, "mode dimension must be a positive integer",
                       p.line, dim->column);
    return std::nullopt;
  }
  decl.dim = static_cast<std::size_t>(dim->int_value);
  p.expect_end();
  if (p.error) return std::nullopt;
  return decl;
}

std::optional<InitLine> parse_init_line(LineParser& p) {
  InitLine init;
  init.pos = {p.line, p.tokens.front().column};
  ++p.pos;  // "init"
  while (true) {
    KetInit ket;
    const Token* name = p.expect(TokKind::kIdent, "a mode name");
    if (!name) return std::nullopt;
    ket.mode = name->text;
    ket.pos = {p.line, name->column};
    if (!p.expect(TokKind::kEquals, "'='")) return std::nullopt;
    if (!p.expect(TokKind::kPipe, "'|'")) return std::nullopt;
    const Token* idx = p.expect(TokKind::kInt, "a ket index");
    if (!idx) return std::nullopt;
    if (idx->int_value < 0) {
      p.error = error_at(DiagCode::kSyntax, "ket index must be non-negative", p.line,
                         idx->column);
      return std::nullopt;
    }
    ket.ket = static_cast<std::size_t>(idx->int_value);
    if (!p.expect(TokKind::kGt, "'>'")) return std::nullopt;
    init.kets.push_back(std::move(ket));
    if (p.done()) break;
    if (!p.expect(TokKind::kComma, "','")) return std::nullopt;
  }
  return init;
}

std::optional<Statement> parse_statement_line(LineParser& p) {
  Statement st;
  st.keyword = p.tokens.front().text;
  st.pos = {p.line, p.tokens.front().column};
  ++p.pos;
  // operands: identifiers not followed by '='
  while (!p.done() && p.peek().kind == TokKind::kIdent &&
         !(p.peek2() && p.peek2()->kind == TokKind::kEquals)) {
    st.targets.push_back(p.peek().text);
    ++p.pos;
  }
  // named arguments
  while (!p.done()) {
    Arg arg;
    const Token* name = p.expect(TokKind::kIdent, "an argument name");
    if (!name) return std::nullopt;
    arg.name = name->text;
    arg.pos = {p.line, name->column};
    if (!p.expect(TokKind::kEquals, "'='")) return std::nullopt;
    if (p.done() ||
        (p.peek().kind != TokKind::kInt && p.peek().kind != TokKind::kNumber)) {
      p.fail("expected a number");
      return std::nullopt;
    }
    arg.value = p.peek().number;
    arg.is_int = p.peek().kind == TokKind::kInt;
    ++p.pos;
    st.args.push_back(std::move(arg));
  }
  return st;
}

struct StatementSpec {
  std::size_t min_targets;
  std::size_t max_targets;
  std::vector<std::string> required_args;  // for the min-target form
  std::vector<std::string> two_mode_args;  // extra args required with two modes
};

const std::map<std::string, StatementSpec>& statement_specs() {
  static const std::map<std::string, StatementSpec> specs = {
      {"bbs", {1, 1, {"T"}, {}}},
      {"bs", {1, 1, {}, {}}},
      {"mirror", {1, 1, {}, {}}},
      {"ps", {1, 1, {"phi"}, {}}},
      {"hwp", {1, 2, {}, {"arm"}}},
      {"qwp", {1, 2, {}, {"arm"}}},
      {"pbs", {2, 2, {}, {}}},
      {"block", {1, 1, {"path"}, {}}},
  };
  return specs;
}

// Everything past per-line grammar: declaration order, arities,
// argument ranges, sorter placement, capacity.
class Validator {
 public:
  explicit Validator(std::vector<ParseDiagnostic>& diagnostics)
      : diagnostics_(diagnostics) {}

  void add(DiagCode code, std::string message, SourcePos pos) {
    diagnostics_.push_back(error_at(code, std::move(message), pos.line, pos.column));
  }

  void visit(const ModeDecl& decl) {
    if (sorter_seen_) {
      add(DiagCode::kStructure, "mode declared after pbs", decl.pos);
      return;
    }
    if (dims_.count(decl.name)) {
      add(DiagCode::kDuplicateMode, "duplicate mode '" + decl.name + "'", decl.pos);
      return;
    }
    dims_[decl.name] = decl.dim;
    order_.push_back(decl.name);
    total_dim_ *= decl.dim;
    if (total_dim_ > kMaxTotalDim) {
      add(DiagCode::kStructure,
          "total dimension exceeds " + std::to_string(kMaxTotalDim), decl.pos);
      capacity_ok_ = false;
    }
  }

  void visit(const InitLine& init) {
    if (init_seen_) {
      add(DiagCode::kDuplicateInit, "duplicate init line", init.pos);
      return;
    }
    init_seen_ = true;
    for (const KetInit& ket : init.kets) {
      if (initialized_.count(ket.mode)) {
        add(DiagCode::kDuplicateInit, "mode '" + ket.mode + "' initialized twice",
            ket.pos);
        continue;
      }
      initialized_.insert(ket.mode);
      auto it = dims_.find(ket.mode);
      if (it == dims_.end()) {
        add(DiagCode::kUndeclaredMode, "undeclared mode '" + ket.mode + "'", ket.pos);
        continue;
      }
      if (ket.ket >= it->second) {
        add(DiagCode::kStructure,
            "ket |" + std::to_string(ket.ket) + "> outside mode '" + ket.mode +
                "' of dimension " + std::to_string(it->second),
            ket.pos);
      }
    }
  }

  void visit(const Statement& st) {
    if (sorter_seen_) {
      add(DiagCode::kStructure, "no statements allowed after pbs", st.pos);
      return;
    }
    auto spec_it = statement_specs().find(st.keyword);
    if (spec_it == statement_specs().end()) {
      add(DiagCode::kUnknownKeyword, "unknown element keyword '" + st.keyword + "'",
          st.pos);
      return;
    }
    const StatementSpec& spec = spec_it->second;
    if (st.targets.size() < spec.min_targets || st.targets.size() > spec.max_targets) {
      std::string want = spec.min_targets == spec.max_targets
                             ? std::to_string(spec.min_targets)
                             : std::to_string(spec.min_targets) + " or " +
                                   std::to_string(spec.max_targets);
      add(DiagCode::kArity,
          "element '" + st.keyword + "' expects " + want + " mode(s), got " +
              std::to_string(st.targets.size()),
          st.pos);
      return;
    }
    bool targets_ok = check_targets(st);
    check_args(st, spec);
    if (st.keyword == "pbs") {
      sorter_seen_ = true;
      if (targets_ok &&
          (order_.size() != 2 || st.targets[0] != order_[0] ||
           st.targets[1] != order_[1])) {
        add(DiagCode::kStructure,
            "pbs requires exactly the two declared modes in declaration order",
            st.pos);
      }
    }
    if (capacity_ok_) statement_count_ += 1;
  }

  void finish(const std::vector<ModeDecl>& modes, bool have_init, int last_line) {
    if (modes.empty() && order_.empty()) {
      add(DiagCode::kStructure, "circuit declares no modes", {1, 1});
    }
    if (!have_init) {
      add(DiagCode::kMissingInit, "missing init line", {last_line, 1});
      return;
    }
    for (const ModeDecl& decl : modes) {
      if (!initialized_.count(decl.name)) {
        add(DiagCode::kMissingInit, "mode '" + decl.name + "' is not initialized",
            decl.pos);
      }
    }
  }

 private:
  bool check_targets(const Statement& st) {
    bool ok = true;
    std::set<std::string> seen;
    for (const std::string& target : st.targets) {
      if (!seen.insert(target).second) {
        add(DiagCode::kStructure, "mode '" + target + "' repeated", st.pos);
        ok = false;
        continue;
      }
      auto it = dims_.find(target);
      if (it == dims_.end()) {
        add(DiagCode::kUndeclaredMode, "undeclared mode '" + target + "'", st.pos);
        ok = false;
        continue;
      }
      if (it->second != 2) {
        add(DiagCode::kStructure,
            "element '" + st.keyword + "' requires a two-dimensional mode, but '" +
                target + "' has dimension " + std::to_string(it->second),
            st.pos);
        ok = false;
      }
    }
    return ok;
  }

  void check_args(const Statement& st, const StatementSpec& spec) {
    std::vector<std::string> required = spec.required_args;
    if (st.targets.size() == 2 && spec.max_targets == 2 && st.keyword != "pbs") {
      required.insert(required.end(), spec.two_mode_args.begin(),
                      spec.two_mode_args.end());
    }
    std::set<std::string> allowed(required.begin(), required.end());
    std::set<std::string> seen;
    for (const Arg& arg : st.args) {
      if (!seen.insert(arg.name).second) {
        add(DiagCode::kArgument, "duplicate argument '" + arg.name + "'", arg.pos);
        continue;
      }
      if (!allowed.count(arg.name)) {
        std::string message = "unknown argument '" + arg.name + "' for '" +
                              st.keyword + "'";
        if (arg.name == "arm" && st.targets.size() == 1)
          message = "argument 'arm' requires the two-mode plate form";
        add(DiagCode::kArgument, std::move(message), arg.pos);
        continue;
      }
      check_arg_value(st, arg);
    }
    for (const std::string& name : required) {
      if (!seen.count(name)) {
        add(DiagCode::kArgument,
            "element '" + st.keyword + "' requires argument '" + name + "'", st.pos);
      }
    }
  }

  void check_arg_value(const Statement& st, const Arg& arg) {
    if (arg.name == "T") {
      if (!(arg.value >= 0.0 && arg.value <= 1.0))
        add(DiagCode::kArgument, "T out of range [0,1]", arg.pos);
    } else if (arg.name == "path" || arg.name == "arm") {
      if (arg.value != 0.0 && arg.value != 1.0)
        add(DiagCode::kArgument, arg.name + " must be 0 or 1", arg.pos);
    }
    (void)st;
  }

  std::vector<ParseDiagnostic>& diagnostics_;
  std::map<std::string, std::size_t> dims_;
  std::vector<std::string> order_;
  std::set<std::string> initialized_;
  std::size_t total_dim_ = 1;
  std::size_t statement_count_ = 0;
  bool init_seen_ = false;
  bool sorter_seen_ = false;
  bool capacity_ok_ = true;
};

double argument_value(const Statement& st, const std::string& name) {
  for (const Arg& arg : st.args)
    if (arg.name == name) return arg.value;
  throw std::logic_error("argument '" + name + "' missing from validated statement");
}

// Shortest decimal form that parses back to the same double.
std::string shortest_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_arg_value(const Arg& arg) {
  if (arg.value == std::sqrt(0.5)) return "1/sqrt2";
  if (arg.is_int && arg.value == std::floor(arg.value) &&
      std::abs(arg.value) < 1e15) {
    return std::to_string(static_cast<long long>(arg.value));
  }
  return shortest_double(arg.value);
}

}  // namespace

const char* severity_name(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

const char* diag_code_name(DiagCode c) {
  switch (c) {
    case DiagCode::kLex: return "lex";
    case DiagCode::kSyntax: return "syntax";
    case DiagCode::kUnknownKeyword: return "unknown-keyword";
    case DiagCode::kArity: return "arity";
    case DiagCode::kArgument: return "argument";
    case DiagCode::kUndeclaredMode: return "undeclared-mode";
    case DiagCode::kDuplicateMode: return "duplicate-mode";
    case DiagCode::kDuplicateInit: return "duplicate-init";
    case DiagCode::kMissingInit: return "missing-init";
    case DiagCode::kStructure: return "structure";
  }
  return "unknown";
}

std::string format_diagnostic(const std::string& file, const ParseDiagnostic& d) {
  std::ostringstream out;
  out << file << ':' << d.line << ':' << d.column << ": " << severity_name(d.severity)
      << ": " << d.message;
  return out.str();
}

ParseResult parse(const std::string& source) {
  ParseResult result;
  std::vector<LineItem> items;

  std::istringstream stream(source);
  std::string text;
  int line = 0;
  while (std::getline(stream, text)) {
    ++line;
    LexOutput lexed = lex_line(text, line);
    if (lexed.error) {
      result.diagnostics.push_back(*lexed.error);
      continue;
    }
    if (lexed.tokens.empty()) continue;
    const Token& head = lexed.tokens.front();
    if (head.kind != TokKind::kIdent) {
      result.diagnostics.push_back(
          error_at(DiagCode::kSyntax, "expected a keyword", line, head.column));
      continue;
    }

    LineParser p{lexed.tokens, line, 0, std::nullopt};
    if (head.text == "mode") {
      if (auto decl = parse_mode_line(p)) items.emplace_back(std::move(*decl));
    } else if (head.text == "init") {
      if (auto init = parse_init_line(p)) items.emplace_back(std::move(*init));
    } else if (element_keywords().count(head.text)) {
      if (auto st = parse_statement_line(p)) items.emplace_back(std::move(*st));
    } else {
      result.diagnostics.push_back(error_at(
          DiagCode::kUnknownKeyword, "unknown element keyword '" + head.text + "'",
          line, head.column));
      continue;
    }
    if (p.error) result.diagnostics.push_back(*p.error);
  }
  if (line == 0) line = 1;

  CircuitAst ast;
  bool have_init = false;
  Validator validator(result.diagnostics);
  for (const LineItem& item : items) {
    std::visit([&](const auto& node) { validator.visit(node); }, item);
    if (const auto* decl = std::get_if<ModeDecl>(&item)) {
      ast.modes.push_back(*decl);
    } else if (const auto* init = std::get_if<InitLine>(&item)) {
      if (!have_init) {
        ast.init = *init;
        have_init = true;
      }
    } else {
      ast.statements.push_back(std::get<Statement>(item));
    }
  }
  validator.finish(ast.modes, have_init, line);

  if (result.diagnostics.empty()) {
    result.ast = std::move(ast);
  } else {
    std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                     [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
                       if (a.line != b.line) return a.line < b.line;
                       return a.column < b.column;
                     });
  }
  return result;
}

std::string pretty_print(const CircuitAst& ast) {
  std::ostringstream out;
  for (const ModeDecl& decl : ast.modes)
    out << "mode " << decl.name << ':' << decl.dim << '\n';
  out << "init";
  for (std::size_t i = 0; i < ast.init.kets.size(); ++i) {
    const KetInit& ket = ast.init.kets[i];
    out << (i == 0 ? " " : ", ") << ket.mode << "=|" << ket.ket << '>';
  }
  out << '\n';
  for (const Statement& st : ast.statements) {
    out << st.keyword;
    for (const std::string& target : st.targets) out << ' ' << target;
    for (const Arg& arg : st.args) out << ' ' << arg.name << '=' << format_arg_value(arg);
    out << '\n';
  }
  return out.str();
}

bool semantically_equal(const CircuitAst& a, const CircuitAst& b) {
  if (a.modes.size() != b.modes.size()) return false;
  for (std::size_t i = 0; i < a.modes.size(); ++i) {
    if (a.modes[i].name != b.modes[i].name || a.modes[i].dim != b.modes[i].dim)
      return false;
  }
  if (a.init.kets.size() != b.init.kets.size()) return false;
  for (std::size_t i = 0; i < a.init.kets.size(); ++i) {
    if (a.init.kets[i].mode != b.init.kets[i].mode ||
        a.init.kets[i].ket != b.init.kets[i].ket)
      return false;
  }
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    const Statement& sa = a.statements[i];
    const Statement& sb = b.statements[i];
    if (sa.keyword != sb.keyword || sa.targets != sb.targets) return false;
    if (sa.args.size() != sb.args.size()) return false;
    for (std::size_t j = 0; j < sa.args.size(); ++j) {
      if (sa.args[j].name != sb.args[j].name || sa.args[j].value != sb.args[j].value)
        return false;
    }
  }
  return true;
}

LoweredCircuit lower(const CircuitAst& ast) {
  std::vector<Subsystem> subsystems;
  subsystems.reserve(ast.modes.size());
  for (const ModeDecl& decl : ast.modes) subsystems.push_back({decl.name, decl.dim});
  ModeSpace space(subsystems);

  std::vector<std::size_t> kets(subsystems.size(), 0);
  for (const KetInit& ket : ast.init.kets) kets[space.index_of(ket.mode)] = ket.ket;
  PureState initial = PureState::basis_state(space, kets);

  std::vector<PipelineStage> stages;
  stages.reserve(ast.statements.size());
  for (std::size_t i = 0; i < ast.statements.size(); ++i) {
    const Statement& st = ast.statements[i];
    std::string label = "s" + std::to_string(i + 1) + "_" + st.keyword;
    Element element = [&]() -> Element {
      if (st.keyword == "bbs")
        return Element::bbs(argument_value(st, "T"), st.targets[0]);
      if (st.keyword == "bs") return Element::bs(st.targets[0]);
      if (st.keyword == "mirror") return Element::mirror(st.targets[0]);
      if (st.keyword == "ps")
        return Element::phase_shifter(argument_value(st, "phi"), st.targets[0]);
      if (st.keyword == "hwp") {
        if (st.targets.size() == 1) return Element::hwp(st.targets[0]);
        return Element::hwp_in_arm(
            st.targets[0],
            static_cast<std::size_t>(argument_value(st, "arm")), st.targets[1]);
      }
      if (st.keyword == "qwp") {
        if (st.targets.size() == 1) return Element::qwp(st.targets[0]);
        return Element::qwp_in_arm(
            st.targets[0],
            static_cast<std::size_t>(argument_value(st, "arm")), st.targets[1]);
      }
      if (st.keyword == "pbs") return Element::pbs(st.targets[0], st.targets[1]);
      if (st.keyword == "block")
        return Element::blocker(
            static_cast<std::size_t>(argument_value(st, "path")), st.targets[0]);
      throw std::logic_error("unhandled statement keyword '" + st.keyword + "'");
    }();
    stages.push_back({std::move(label), std::move(element)});
  }
  Pipeline pipeline(std::move(space), std::move(stages));
  return {std::move(initial), std::move(pipeline)};
}

}  // namespace iqsim::dsl
