#include "iqsim/json_io.hpp"

#include <charconv>
#include <stdexcept>

namespace iqsim {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object())
    throw std::invalid_argument("state json: expected an object");
  auto it = j.find(name);
  if (it == j.end())
    throw std::invalid_argument(std::string("state json: missing field '") + name +
                                "'");
  return *it;
}

double as_number(const Json& j, const char* what) {
  if (!j.is_number())
    throw std::invalid_argument(std::string("state json: ") + what +
                                " must be a number");
  return j.get<double>();
}

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument(
        "state json: complex entries are [re, im] pairs");
  return Complex(as_number(j[0], "real part"), as_number(j[1], "imaginary part"));
}

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

ModeSpace space_from_json(const Json& j) {
  if (!j.is_array())
    throw std::invalid_argument("state json: 'space' must be an array");
  std::vector<Subsystem> subsystems;
  for (const Json& entry : j) {
    const Json& label = field(entry, "label");
    const Json& dim = field(entry, "dim");
    if (!label.is_string())
      throw std::invalid_argument("state json: subsystem label must be a string");
    if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0)
      throw std::invalid_argument(
          "state json: subsystem dim must be a positive integer");
    subsystems.push_back({label.get<std::string>(), dim.get<std::size_t>()});
  }
  return ModeSpace(subsystems);
}

Json space_to_json(const ModeSpace& space) {
  Json out = Json::array();
  for (const Subsystem& s : space.subsystems())
    out.push_back(Json{{"label", s.label}, {"dim", s.dim}});
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Json state_to_json(const State& s) {
  Json j;
  if (const auto* pure = std::get_if<PureState>(&s)) {
    j["kind"] = "pure";
    j["space"] = space_to_json(pure->space());
    Json amps = Json::array();
    for (std::size_t i = 0; i < pure->dim(); ++i)
      amps.push_back(complex_to_json(pure->amplitudes()[i]));
    j["amplitudes"] = std::move(amps);
  } else {
    const auto& density = std::get<DensityMatrix>(s);
    j["kind"] = "density";
    j["space"] = space_to_json(density.space());
    Json rows = Json::array();
    for (std::size_t r = 0; r < density.dim(); ++r) {
      Json row = Json::array();
      for (std::size_t c = 0; c < density.dim(); ++c)
        row.push_back(complex_to_json(density.rho().at(r, c)));
      rows.push_back(std::move(row));
    }
    j["rho"] = std::move(rows);
  }
  return j;
}

State state_from_json(const Json& j) {
  const Json& kind = field(j, "kind");
  if (!kind.is_string())
    throw std::invalid_argument("state json: 'kind' must be a string");
  ModeSpace space = space_from_json(field(j, "space"));
  std::size_t dim = space.total_dim();

  if (kind == "pure") {
    const Json& amps = field(j, "amplitudes");
    if (!amps.is_array() || amps.size() != dim)
      throw std::invalid_argument(
          "state json: 'amplitudes' must list one [re, im] pair per basis state");
    Vector v;
    v.entries.reserve(dim);
    for (const Json& a : amps) v.entries.push_back(complex_from_json(a));
    return PureState(std::move(space), std::move(v));
  }
  if (kind == "density") {
    const Json& rho = field(j, "rho");
    if (!rho.is_array() || rho.size() != dim)
      throw std::invalid_argument("state json: 'rho' must have one row per basis state");
    Matrix m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
      const Json& row = rho[r];
      if (!row.is_array() || row.size() != dim)
        throw std::invalid_argument("state json: 'rho' rows must match the dimension");
      for (std::size_t c = 0; c < dim; ++c) m.at(r, c) = complex_from_json(row[c]);
    }
    return DensityMatrix(std::move(space), std::move(m));
  }
  throw std::invalid_argument("state json: 'kind' must be \"pure\" or \"density\"");
}

Json report_to_json(const MeasureReport& r) {
  Json j;
  j["d"] = r.budget.d;
  j["coherence"] = r.budget.coherence;
  j["predictability"] = r.budget.predictability;
  if (r.budget.entanglement) j["entanglement"] = *r.budget.entanglement;
  j["bound"] = r.budget.bound;
  j["residual"] = r.budget.residual;
  if (r.gy_visibility) j["gy_visibility"] = *r.gy_visibility;
  if (r.gy_predictability) j["gy_predictability"] = *r.gy_predictability;
  if (r.gy_relation_value) j["gy_relation_value"] = *r.gy_relation_value;
  if (r.gy_satisfied) j["gy_satisfied"] = *r.gy_satisfied;
  j["basis"] = r.basis_label;
  return j;
}

Json trace_to_json(const std::string& scenario, const Json& config,
                   const scenarios::StageTrace& trace) {
  Json j;
  j["scenario"] = scenario;
  j["config"] = config;
  j["survival"] = trace.survival;
  j["detectors"] = trace.detectors;
  if (trace.conditional_detectors)
    j["conditional_detectors"] = *trace.conditional_detectors;
  j["sweep_visibilities"] = trace.sweep_visibilities;
  Json stages = Json::array();
  for (const scenarios::TraceStage& stage : trace.stages) {
    Json s;
    s["label"] = stage.label;
    s["survival"] = stage.survival;
    s["state"] = state_to_json(State(stage.state));
    s["report"] = report_to_json(stage.report);
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  return j;
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

}  // namespace iqsim
