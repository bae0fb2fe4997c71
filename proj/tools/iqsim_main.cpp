#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iqsim/dsl.hpp"
#include "iqsim/json_io.hpp"

using namespace iqsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CliError {
  int code;
  std::string message;
};

// Real-valued flags additionally accept the exact spelling "1/sqrt2"
// for the balanced splitter amplitude.
double parse_real(const std::string& text, const std::string& flag) {
  if (text == "1/sqrt2") return std::sqrt(0.5);
  if (!text.empty()) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin + text.size()) return v;
  }
  throw CliError{kExitValidation, "invalid number '" + text + "' for " + flag};
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitIo, "cannot open '" + path + "' for writing"};
  out << text;
  out.flush();
  if (!out.good()) throw CliError{kExitIo, "failed while writing '" + path + "'"};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitIo, "cannot open '" + path + "' for reading"};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw CliError{kExitIo, "failed while reading '" + path + "'"};
  return buffer.str();
}

// One (column name, csv cell, json value) triple of a summary row.
struct NamedCell {
  std::string name;
  std::string text;
  Json value;
};

NamedCell num_cell(const std::string& name, double v) {
  return {name, format_double(v), Json(v)};
}

NamedCell int_cell(const std::string& name, std::size_t v) {
  return {name, std::to_string(v), Json(v)};
}

NamedCell str_cell(const std::string& name, const std::string& v) {
  return {name, v, Json(v)};
}

NamedCell opt_cell(const std::string& name, std::optional<double> v) {
  if (!v) return {name, "", Json(nullptr)};
  return num_cell(name, *v);
}

double detector_value(const scenarios::StageTrace& trace, const std::string& name) {
  auto it = trace.detectors.find(name);
  return it == trace.detectors.end() ? 0.0 : it->second;
}

std::optional<double> visibility_value(const scenarios::StageTrace& trace,
                                       const std::string& name) {
  auto it = trace.sweep_visibilities.find(name);
  if (it == trace.sweep_visibilities.end()) return std::nullopt;
  return it->second;
}

std::optional<double> conditional_value(const scenarios::StageTrace& trace,
                                        const std::string& name) {
  if (!trace.conditional_detectors) return std::nullopt;
  auto it = trace.conditional_detectors->find(name);
  if (it == trace.conditional_detectors->end()) return std::nullopt;
  return it->second;
}

// The summary row quotes the budget of the stage just before the final
// element: the interior state whose coherence/predictability split is
// the interesting one.
const MeasureReport& featured_report(const scenarios::StageTrace& trace) {
  return trace.stages[trace.stages.size() - 2].report;
}

void append_budget_cells(std::vector<NamedCell>& row, const ComplementarityBudget& b) {
  row.push_back(int_cell("d", b.d));
  row.push_back(num_cell("coherence", b.coherence));
  row.push_back(num_cell("predictability", b.predictability));
  if (b.entanglement) row.push_back(num_cell("entanglement", *b.entanglement));
  row.push_back(num_cell("bound", b.bound));
  row.push_back(num_cell("residual", b.residual));
}

std::vector<NamedCell> bmzi_row(const scenarios::BmziConfig& cfg,
                                const scenarios::StageTrace& trace) {
  std::vector<NamedCell> row;
  row.push_back(num_cell("t1", cfg.t1));
  row.push_back(num_cell("t2", cfg.t2));
  row.push_back(num_cell("phi", cfg.phi));
  row.push_back(num_cell("D0", detector_value(trace, "D0")));
  row.push_back(num_cell("D1", detector_value(trace, "D1")));
  row.push_back(opt_cell("V0", visibility_value(trace, "D0")));
  row.push_back(opt_cell("V1", visibility_value(trace, "D1")));
  append_budget_cells(row, featured_report(trace).budget);
  return row;
}

std::vector<NamedCell> wdce_row(const scenarios::WdceConfig& cfg,
                                const scenarios::StageTrace& trace) {
  std::vector<NamedCell> row;
  row.push_back(num_cell("t1", cfg.t1));
  row.push_back(str_cell("bs2", cfg.bs2_present ? "present" : "absent"));
  row.push_back(num_cell("phi", cfg.phi));
  row.push_back(num_cell("D0", detector_value(trace, "D0")));
  row.push_back(num_cell("D1", detector_value(trace, "D1")));
  row.push_back(opt_cell("V0", visibility_value(trace, "D0")));
  row.push_back(opt_cell("V1", visibility_value(trace, "D1")));
  append_budget_cells(row, featured_report(trace).budget);
  return row;
}

std::vector<NamedCell> pqe_row(const scenarios::PqeConfig& cfg,
                               const scenarios::StageTrace& trace) {
  std::vector<NamedCell> row;
  row.push_back(str_cell("qwp", cfg.qwp_in ? "in" : "out"));
  row.push_back(num_cell("phi", cfg.phi));
  for (const char* d : {"D0", "D1", "D2", "D3"})
    row.push_back(num_cell(d, detector_value(trace, d)));
  append_budget_cells(row, featured_report(trace).budget);
  return row;
}

std::string block_name(scenarios::UnruhBlock block) {
  switch (block) {
    case scenarios::UnruhBlock::kNone: return "none";
    case scenarios::UnruhBlock::kPath1: return "path1";
    case scenarios::UnruhBlock::kPath2: return "path2";
  }
  return "none";
}

std::vector<NamedCell> unruh_row(const scenarios::UnruhConfig& cfg,
                                 const scenarios::StageTrace& trace) {
  std::vector<NamedCell> row;
  row.push_back(str_cell("block", block_name(cfg.block)));
  row.push_back(num_cell("phi", cfg.phi));
  row.push_back(num_cell("D0", detector_value(trace, "D0")));
  row.push_back(num_cell("D1", detector_value(trace, "D1")));
  row.push_back(opt_cell("cond_D0", conditional_value(trace, "D0")));
  row.push_back(opt_cell("cond_D1", conditional_value(trace, "D1")));
  row.push_back(num_cell("survival", trace.survival));
  append_budget_cells(row, featured_report(trace).budget);
  return row;
}

std::string csv_of_rows(const std::vector<std::vector<NamedCell>>& rows) {
  std::string text;
  if (rows.empty()) return text;
  std::vector<std::string> header;
  for (const NamedCell& cell : rows.front()) header.push_back(cell.name);
  text += csv_join(header);
  text += '\n';
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const NamedCell& cell : row) cells.push_back(cell.text);
    text += csv_join(cells);
    text += '\n';
  }
  return text;
}

Json json_of_row(const std::vector<NamedCell>& row) {
  Json j;
  for (const NamedCell& cell : row) j[cell.name] = cell.value;
  return j;
}

// Everything the four scenario subcommands share: resolved
// configuration, flag bookkeeping and uniform execution.
struct ScenarioFlags {
  std::string t1_text = "1/sqrt2";
  std::string t2_text = "1/sqrt2";
  std::string phi_text = "0";
  std::string bs2 = "present";
  std::string qwp = "out";
  std::string block = "none";

  CLI::Option* t1_opt = nullptr;
  CLI::Option* t2_opt = nullptr;
  CLI::Option* phi_opt = nullptr;
  CLI::Option* bs2_opt = nullptr;
  CLI::Option* qwp_opt = nullptr;
  CLI::Option* block_opt = nullptr;

  void add_to(CLI::App* cmd) {
    t1_opt = cmd->add_option("--t1", t1_text,
                             "first splitter amplitude transmission");
    t2_opt = cmd->add_option("--t2", t2_text,
                             "second splitter amplitude transmission");
    phi_opt = cmd->add_option("--phi", phi_text, "phase shifter setting");
    bs2_opt = cmd->add_option("--bs2", bs2, "second splitter present or absent")
                  ->check(CLI::IsMember({"present", "absent"}));
    qwp_opt = cmd->add_option("--qwp", qwp, "quarter-wave plate in or out")
                  ->check(CLI::IsMember({"in", "out"}));
    block_opt = cmd->add_option("--block", block, "arm blocker placement")
                    ->check(CLI::IsMember({"none", "path1", "path2"}));
  }

  CLI::Option* option(const std::string& name) const {
    if (name == "t1") return t1_opt;
    if (name == "t2") return t2_opt;
    if (name == "phi") return phi_opt;
    if (name == "bs2") return bs2_opt;
    if (name == "qwp") return qwp_opt;
    return block_opt;
  }

  // Flags outside the scenario's vocabulary are rejected, not ignored.
  void require_applicable(const std::string& scenario) const {
    static const std::map<std::string, std::set<std::string>> applicable = {
        {"bmzi", {"t1", "t2", "phi"}},
        {"wdce", {"t1", "bs2", "phi"}},
        {"pqe", {"qwp", "phi"}},
        {"unruh", {"block", "phi"}},
    };
    const std::set<std::string>& allowed = applicable.at(scenario);
    for (const char* name : {"t1", "t2", "phi", "bs2", "qwp", "block"}) {
      if (option(name)->count() > 0 && !allowed.count(name)) {
        throw CliError{kExitValidation, std::string("flag --") + name +
                                            " does not apply to scenario '" +
                                            scenario + "'"};
      }
    }
  }
};

struct ScenarioResult {
  Json config;
  scenarios::StageTrace trace;
  std::vector<NamedCell> row;
  std::vector<std::string> violations;
};

ScenarioResult run_scenario(const std::string& scenario, const ScenarioFlags& flags,
                            bool check) {
  if (scenario == "bmzi") {
    scenarios::BmziConfig cfg{parse_real(flags.t1_text, "--t1"),
                              parse_real(flags.t2_text, "--t2"),
                              parse_real(flags.phi_text, "--phi")};
    scenarios::StageTrace trace = scenarios::run_bmzi(cfg);
    Json config{{"t1", cfg.t1}, {"t2", cfg.t2}, {"phi", cfg.phi}};
    std::vector<std::string> violations;
    if (check) violations = scenarios::check_bmzi(cfg, trace);
    std::vector<NamedCell> row = bmzi_row(cfg, trace);
    return {config, std::move(trace), std::move(row), std::move(violations)};
  }
  if (scenario == "wdce") {
    scenarios::WdceConfig cfg{parse_real(flags.t1_text, "--t1"),
                              flags.bs2 == "present",
                              parse_real(flags.phi_text, "--phi")};
    scenarios::StageTrace trace = scenarios::run_wdce(cfg);
    Json config{{"t1", cfg.t1},
                {"bs2", cfg.bs2_present ? "present" : "absent"},
                {"phi", cfg.phi}};
    std::vector<std::string> violations;
    if (check) violations = scenarios::check_wdce(cfg, trace);
    std::vector<NamedCell> row = wdce_row(cfg, trace);
    return {config, std::move(trace), std::move(row), std::move(violations)};
  }
  if (scenario == "pqe") {
    scenarios::PqeConfig cfg{flags.qwp == "in", parse_real(flags.phi_text, "--phi")};
    scenarios::StageTrace trace = scenarios::run_pqe(cfg);
    Json config{{"qwp", cfg.qwp_in ? "in" : "out"}, {"phi", cfg.phi}};
    std::vector<std::string> violations;
    if (check) violations = scenarios::check_pqe(cfg, trace);
    std::vector<NamedCell> row = pqe_row(cfg, trace);
    return {config, std::move(trace), std::move(row), std::move(violations)};
  }
  scenarios::UnruhConfig cfg{scenarios::UnruhBlock::kNone,
                             parse_real(flags.phi_text, "--phi")};
  if (flags.block == "path1") cfg.block = scenarios::UnruhBlock::kPath1;
  if (flags.block == "path2") cfg.block = scenarios::UnruhBlock::kPath2;
  scenarios::StageTrace trace = scenarios::run_unruh(cfg);
  Json config{{"block", block_name(cfg.block)}, {"phi", cfg.phi}};
  std::vector<std::string> violations;
  if (check) violations = scenarios::check_unruh(cfg, trace);
  std::vector<NamedCell> row = unruh_row(cfg, trace);
  return {config, std::move(trace), std::move(row), std::move(violations)};
}

int cmd_run(const std::string& scenario, const ScenarioFlags& flags, bool check,
            const std::string& format, const std::string& output) {
  flags.require_applicable(scenario);
  ScenarioResult result = run_scenario(scenario, flags, check);
  if (!result.violations.empty()) {
    for (const std::string& v : result.violations)
      std::cerr << "check: " << v << '\n';
    return kExitInternal;
  }
  std::string text;
  if (format == "json") {
    text = trace_to_json(scenario, result.config, result.trace).dump(2);
    text += '\n';
  } else {
    text = csv_of_rows({result.row});
  }
  write_output(output, text);
  return kExitOk;
}

int cmd_sweep(const std::string& scenario, ScenarioFlags flags,
              const std::string& param, const std::string& from_text,
              const std::string& to_text, int steps, const std::string& format,
              const std::string& output) {
  static const std::map<std::string, std::set<std::string>> sweepable = {
      {"bmzi", {"phi", "t1", "t2"}},
      {"wdce", {"phi", "t1"}},
      {"pqe", {"phi"}},
      {"unruh", {}},
  };
  const std::set<std::string>& allowed = sweepable.at(scenario);
  if (allowed.empty()) {
    throw CliError{kExitValidation,
                   "scenario '" + scenario + "' has no sweepable parameters"};
  }
  if (!allowed.count(param)) {
    throw CliError{kExitValidation, "parameter '" + param +
                                        "' is not sweepable for scenario '" +
                                        scenario + "'"};
  }
  if (flags.option(param)->count() > 0) {
    throw CliError{kExitValidation,
                   "parameter '" + param + "' is both swept and fixed"};
  }
  flags.require_applicable(scenario);

  double from = parse_real(from_text, "--from");
  double to = parse_real(to_text, "--to");
  if (steps < 2) throw CliError{kExitValidation, "steps must be at least 2"};
  if (from == to) throw CliError{kExitValidation, "degenerate range"};

  Json fixed_config;
  std::vector<std::vector<NamedCell>> rows;
  std::vector<Json> json_rows;
  for (int i = 0; i < steps; ++i) {
    double value = i == steps - 1
                       ? to
                       : from + (to - from) * static_cast<double>(i) /
                                    static_cast<double>(steps - 1);
    ScenarioFlags point = flags;
    std::string spelled = format_double(value);
    if (param == "t1") point.t1_text = spelled;
    if (param == "t2") point.t2_text = spelled;
    if (param == "phi") point.phi_text = spelled;
    ScenarioResult result = run_scenario(scenario, point, false);
    if (i == 0) {
      fixed_config = result.config;
      fixed_config.erase(param);
    }
    json_rows.push_back(json_of_row(result.row));
    rows.push_back(std::move(result.row));
  }

  std::string text;
  if (format == "json") {
    Json j;
    j["scenario"] = scenario;
    j["param"] = param;
    j["from"] = from;
    j["to"] = to;
    j["steps"] = steps;
    j["config"] = fixed_config;
    j["rows"] = json_rows;
    text = j.dump(2);
    text += '\n';
  } else {
    text = csv_of_rows(rows);
  }
  write_output(output, text);
  return kExitOk;
}

MeasureReport circuit_stage_report(const PureState& s) {
  MeasureReport report;
  const ModeSpace& space = s.space();
  report.basis_label = space.at(0).label;
  if (space.count() == 1) {
    report.budget = budget(density_from_pure(s), report.basis_label);
  } else {
    report.budget = budget_pure(s, report.basis_label);
  }
  return report;
}

int cmd_circuit(const std::string& path, const std::string& format,
                const std::string& output) {
  std::string source = read_file(path);
  dsl::ParseResult parsed = dsl::parse(source);
  if (!parsed.ok()) {
    for (const dsl::ParseDiagnostic& d : parsed.diagnostics)
      std::cerr << dsl::format_diagnostic(path, d) << '\n';
    return kExitValidation;
  }
  dsl::LoweredCircuit lowered = dsl::lower(*parsed.ast);
  std::vector<PipelineRecord> records = run_pipeline(lowered.pipeline, lowered.initial);

  scenarios::StageTrace trace;
  for (const PipelineRecord& record : records) {
    trace.stages.push_back({record.label, record.state, record.survival,
                            circuit_stage_report(record.state)});
  }
  trace.survival = records.back().survival;
  const PureState& fin = records.back().state;
  const ModeSpace& out_space = fin.space();
  std::size_t ports = out_space.at(0).dim;
  std::map<std::string, double> detectors;
  for (std::size_t i = 0; i < ports; ++i) detectors["D" + std::to_string(i)] = 0.0;
  for (std::size_t i = 0; i < fin.dim(); ++i) {
    std::size_t port = out_space.decompose(i)[0];
    detectors["D" + std::to_string(port)] +=
        std::norm(fin.amplitudes()[i]) * trace.survival;
  }
  trace.detectors = detectors;
  if (trace.survival < 1.0 - 1e-12) {
    std::map<std::string, double> conditional;
    for (const auto& [name, p] : detectors) conditional[name] = p / trace.survival;
    trace.conditional_detectors = std::move(conditional);
  }

  std::string text;
  if (format == "json") {
    text = trace_to_json("circuit", Json{{"file", path}}, trace).dump(2);
    text += '\n';
  } else {
    std::vector<std::vector<NamedCell>> rows;
    for (const scenarios::TraceStage& stage : trace.stages) {
      std::vector<NamedCell> row;
      row.push_back(str_cell("label", stage.label));
      row.push_back(num_cell("survival", stage.survival));
      const ComplementarityBudget& b = stage.report.budget;
      row.push_back(int_cell("d", b.d));
      row.push_back(num_cell("coherence", b.coherence));
      row.push_back(num_cell("predictability", b.predictability));
      row.push_back(opt_cell("entanglement", b.entanglement));
      row.push_back(num_cell("bound", b.bound));
      row.push_back(num_cell("residual", b.residual));
      rows.push_back(std::move(row));
    }
    text = csv_of_rows(rows);
  }
  write_output(output, text);
  return kExitOk;
}

std::string joint_basis_label(const ModeSpace& space) {
  std::string label;
  for (std::size_t i = 0; i < space.count(); ++i) {
    if (i) label += '*';
    label += space.at(i).label;
  }
  return label;
}

int cmd_measures(const std::string& path, const std::string& part,
                 const std::string& format, const std::string& output) {
  std::string source = read_file(path);
  Json parsed;
  try {
    parsed = Json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw CliError{kExitValidation, "invalid json in '" + path + "': " + e.what()};
  }
  State state = state_from_json(parsed);

  MeasureReport report;
  if (!part.empty()) {
    const auto* pure = std::get_if<PureState>(&state);
    if (!pure) {
      throw CliError{kExitValidation,
                     "--part requires a pure state, got a density state"};
    }
    report.budget = budget_pure(*pure, part);
    report.basis_label = part;
  } else if (const auto* pure = std::get_if<PureState>(&state)) {
    report.basis_label = joint_basis_label(pure->space());
    report.budget = budget(density_from_pure(*pure), report.basis_label);
  } else {
    const DensityMatrix& rho = std::get<DensityMatrix>(state);
    report.basis_label = joint_basis_label(rho.space());
    report.budget = budget(rho, report.basis_label);
  }

  std::string text;
  if (format == "json") {
    text = report_to_json(report).dump(2);
    text += '\n';
  } else {
    std::vector<NamedCell> row;
    const ComplementarityBudget& b = report.budget;
    row.push_back(int_cell("d", b.d));
    row.push_back(num_cell("coherence", b.coherence));
    row.push_back(num_cell("predictability", b.predictability));
    row.push_back(opt_cell("entanglement", b.entanglement));
    row.push_back(num_cell("bound", b.bound));
    row.push_back(num_cell("residual", b.residual));
    row.push_back(str_cell("basis", report.basis_label));
    text = csv_of_rows({row});
  }
  write_output(output, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"small interferometric experiments and their complementarity budgets"};
  app.require_subcommand(1);

  std::string format = "json";
  std::string output;
  auto add_io_flags = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--output", output, "write to a file instead of stdout");
  };

  auto* run_cmd = app.add_subcommand("run", "run one scenario and report the trace");
  std::string run_scenario_name;
  run_cmd->add_option("scenario", run_scenario_name, "bmzi | wdce | pqe | unruh")
      ->required()
      ->check(CLI::IsMember({"bmzi", "wdce", "pqe", "unruh"}));
  ScenarioFlags run_flags;
  run_flags.add_to(run_cmd);
  bool check = false;
  run_cmd->add_flag("--check", check, "audit budgets and detector laws");
  add_io_flags(run_cmd);

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a scenario over a parameter grid");
  std::string sweep_scenario_name;
  sweep_cmd->add_option("scenario", sweep_scenario_name, "bmzi | wdce | pqe | unruh")
      ->required()
      ->check(CLI::IsMember({"bmzi", "wdce", "pqe", "unruh"}));
  ScenarioFlags sweep_flags;
  sweep_flags.add_to(sweep_cmd);
  std::string param, from_text, to_text;
  int steps = 0;
  sweep_cmd->add_option("--param", param, "parameter to sweep")->required();
  sweep_cmd->add_option("--from", from_text, "first grid value")->required();
  sweep_cmd->add_option("--to", to_text, "last grid value")->required();
  sweep_cmd->add_option("--steps", steps, "grid size (at least 2)")->required();
  add_io_flags(sweep_cmd);

  auto* circuit_cmd =
      app.add_subcommand("circuit", "run a circuit file and report the trace");
  std::string circuit_path;
  circuit_cmd->add_option("file", circuit_path, "circuit source file")->required();
  add_io_flags(circuit_cmd);

  auto* measures_cmd = app.add_subcommand(
      "measures", "compute the complementarity budget of a serialized state");
  std::string state_path, part;
  measures_cmd->add_option("file", state_path, "state json file")->required();
  measures_cmd->add_option("--part", part,
                           "subsystem label for a bipartite pure-state budget");
  add_io_flags(measures_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (app.got_subcommand(run_cmd))
      return cmd_run(run_scenario_name, run_flags, check, format, output);
    if (app.got_subcommand(sweep_cmd))
      return cmd_sweep(sweep_scenario_name, sweep_flags, param, from_text, to_text,
                       steps, format, output);
    if (app.got_subcommand(circuit_cmd))
      return cmd_circuit(circuit_path, format, output);
    return cmd_measures(state_path, part, format, output);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const FullyBlockedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
