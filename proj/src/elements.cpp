#include "iqsim/elements.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace iqsim {

namespace {

const Complex kI{0.0, 1.0};

// Below this surviving probability a blocked state carries no usable
// information and renormalizing would amplify noise.
constexpr double kMinSurvival = 1e-14;

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

}  // namespace

FullyBlockedError::FullyBlockedError(double survival)
    : std::runtime_error("blocker absorbed the full state (survival " +
                         std::to_string(survival) + ")"),
      survival_(survival) {}

const char* element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::kBbs: return "bbs";
    case ElementKind::kBs: return "bs";
    case ElementKind::kMirror: return "mirror";
    case ElementKind::kPhaseShifter: return "ps";
    case ElementKind::kHwp: return "hwp";
    case ElementKind::kQwp: return "qwp";
    case ElementKind::kPbs: return "pbs";
    case ElementKind::kBlocker: return "block";
  }
  return "?";
}

Element Element::bbs(double transmission, std::string target) {
  require(std::isfinite(transmission) && transmission >= 0.0 &&
              transmission <= 1.0,
          "bbs: transmission must lie in [0, 1]");
  Element e;
  e.kind = ElementKind::kBbs;
  e.targets = {std::move(target)};
  e.transmission = transmission;
  e.reflection = std::sqrt(1.0 - transmission * transmission);
  return e;
}

Element Element::bs(std::string target) {
  Element e = bbs(std::sqrt(0.5), std::move(target));
  e.kind = ElementKind::kBs;
  e.reflection = e.transmission;
  return e;
}

Element Element::mirror(std::string target) {
  Element e;
  e.kind = ElementKind::kMirror;
  e.targets = {std::move(target)};
  return e;
}

Element Element::phase_shifter(double phi, std::string target) {
  require(std::isfinite(phi), "ps: phase must be finite");
  Element e;
  e.kind = ElementKind::kPhaseShifter;
  e.targets = {std::move(target)};
  e.phi = phi;
  return e;
}

Element Element::hwp(std::string target) {
  Element e;
  e.kind = ElementKind::kHwp;
  e.targets = {std::move(target)};
  return e;
}

Element Element::hwp_in_arm(std::string path, std::size_t arm,
                            std::string pol) {
  require(arm <= 1, "hwp: arm must be 0 or 1");
  Element e;
  e.kind = ElementKind::kHwp;
  e.targets = {std::move(path), std::move(pol)};
  e.control_arm = arm;
  return e;
}

Element Element::qwp(std::string target) {
  Element e;
  e.kind = ElementKind::kQwp;
  e.targets = {std::move(target)};
  return e;
}

Element Element::qwp_in_arm(std::string path, std::size_t arm,
                            std::string pol) {
  require(arm <= 1, "qwp: arm must be 0 or 1");
  Element e;
  e.kind = ElementKind::kQwp;
  e.targets = {std::move(path), std::move(pol)};
  e.control_arm = arm;
  return e;
}

Element Element::pbs(std::string path, std::string pol) {
  Element e;
  e.kind = ElementKind::kPbs;
  e.targets = {std::move(path), std::move(pol)};
  return e;
}

Element Element::blocker(std::size_t path_index, std::string target) {
  require(path_index <= 1, "block: path must be 0 or 1");
  Element e;
  e.kind = ElementKind::kBlocker;
  e.targets = {std::move(target)};
  e.blocked_path = path_index;
  return e;
}

Matrix element_matrix(const Element& e) {
  double h = std::sqrt(0.5);
  switch (e.kind) {
    case ElementKind::kBbs:
    case ElementKind::kBs: {
      double t = e.transmission;
      double r = e.reflection;
      return Matrix(2, 2, {Complex{t, 0.0}, kI * r, kI * r, Complex{t, 0.0}});
    }
    case ElementKind::kMirror:
      return Matrix(2, 2, {0.0, kI, kI, 0.0});
    case ElementKind::kPhaseShifter:
      return Matrix(2, 2, {1.0, 0.0, 0.0, std::polar(1.0, e.phi)});
    case ElementKind::kHwp:
      return Matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
    case ElementKind::kQwp:
      return Matrix(2, 2, {Complex{h, 0.0}, Complex{h, 0.0}, kI * h, -kI * h});
    case ElementKind::kPbs:
    case ElementKind::kBlocker:
      break;
  }
  throw std::invalid_argument(std::string(element_kind_name(e.kind)) +
                              " has no single-mode matrix");
}

namespace {

// Validate targets against the space and return their indices.
std::vector<std::size_t> resolve_targets(const Element& e,
                                         const ModeSpace& space) {
  std::vector<std::size_t> idx;
  for (const std::string& label : e.targets) {
    std::size_t i = space.index_of(label);
    require(space.at(i).dim == 2, std::string(element_kind_name(e.kind)) +
                                      ": subsystem '" + label +
                                      "' must have dimension 2");
    idx.push_back(i);
  }
  if (idx.size() == 2)
    require(idx[0] != idx[1], std::string(element_kind_name(e.kind)) +
                                  ": control and target coincide");
  return idx;
}

PureState apply_single_mode(const Element& e, const PureState& s) {
  std::vector<std::size_t> idx = resolve_targets(e, s.space());
  Matrix u = element_matrix(e);
  // With a control, targets are (control, target); otherwise just
  // (target).
  std::size_t target = idx.back();
  std::size_t control = 0;
  bool controlled = e.control_arm.has_value();
  if (controlled) {
    require(idx.size() == 2,
            std::string(element_kind_name(e.kind)) +
                ": arm-local element needs (path, target) subsystems");
    control = idx.front();
  } else {
    require(idx.size() == 1, std::string(element_kind_name(e.kind)) +
                                 ": expected a single target subsystem");
  }

  const ModeSpace& space = s.space();
  Vector out(space.total_dim());
  for (std::size_t j = 0; j < space.total_dim(); ++j) {
    Complex amp = s.amplitudes()[j];
    if (amp == Complex{0.0, 0.0}) continue;
    std::vector<std::size_t> coords = space.decompose(j);
    if (controlled && coords[control] != *e.control_arm) {
      out[j] += amp;
      continue;
    }
    std::size_t in = coords[target];
    for (std::size_t o = 0; o < 2; ++o) {
      Complex w = u.at(o, in);
      if (w == Complex{0.0, 0.0}) continue;
      coords[target] = o;
      out[space.compose(coords)] += w * amp;
    }
    coords[target] = in;
  }
  return PureState(space, std::move(out));
}

}  // namespace

PureState apply_pbs(const PureState& s) {
  const ModeSpace& space = s.space();
  require(space.count() == 2 && space.at(0).dim == 2 && space.at(1).dim == 2,
          "pbs: input must be (path, polarization), each of dimension 2");
  require(space.at(1).label != "detector",
          "pbs: polarization label 'detector' would collide with the output");
  ModeSpace out_space({{"detector", 4}, space.at(1)});
  Vector out(out_space.total_dim());
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t pol = 0; pol < 2; ++pol) {
      Complex amp = s.amplitudes()[p * 2 + pol];
      // H transmits to D0/D1, V reflects to D2/D3 with a factor i.
      std::size_t detector = pol == 0 ? p : p + 2;
      Complex factor = pol == 0 ? Complex{1.0, 0.0} : kI;
      out[detector * 2 + pol] = factor * amp;
    }
  return PureState(std::move(out_space), std::move(out));
}

ApplyResult apply(const Element& e, const PureState& s) {
  switch (e.kind) {
    case ElementKind::kPbs: {
      std::vector<std::size_t> idx = resolve_targets(e, s.space());
      require(idx.size() == 2 && idx[0] == 0 && idx[1] == 1,
              "pbs: targets must be the (path, polarization) subsystems in "
              "space order");
      return {apply_pbs(s), 1.0};
    }
    case ElementKind::kBlocker: {
      std::vector<std::size_t> idx = resolve_targets(e, s.space());
      require(idx.size() == 1, "block: expected a single target subsystem");
      std::size_t target = idx[0];
      const ModeSpace& space = s.space();
      Vector out = s.amplitudes();
      double blocked = 0.0;
      for (std::size_t j = 0; j < space.total_dim(); ++j) {
        if (space.decompose(j)[target] != e.blocked_path) continue;
        blocked += std::norm(out[j]);
        out[j] = 0.0;
      }
      double survival = 1.0 - blocked;
      if (survival < kMinSurvival) throw FullyBlockedError(std::max(survival, 0.0));
      double n = out.norm();
      for (Complex& z : out.entries) z /= n;
      return {PureState(space, std::move(out)), survival};
    }
    default:
      return {apply_single_mode(e, s), 1.0};
  }
}

Pipeline::Pipeline(ModeSpace space, std::vector<PipelineStage> stages)
    : input_space_(std::move(space)),
      output_space_(input_space_),
      stages_(std::move(stages)) {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const Element& e = stages_[i].element;
    if (e.kind == ElementKind::kPbs) {
      require(i + 1 == stages_.size(),
              "pipeline: pbs must be the final stage");
      require(input_space_.count() == 2 && input_space_.at(0).dim == 2 &&
                  input_space_.at(1).dim == 2,
              "pipeline: pbs needs a (path, polarization) space");
      require(e.targets.size() == 2 &&
                  e.targets[0] == input_space_.at(0).label &&
                  e.targets[1] == input_space_.at(1).label,
              "pipeline: pbs targets must match the space in order");
      output_space_ = ModeSpace({{"detector", 4}, input_space_.at(1)});
      continue;
    }
    // Shared validation: labels exist, dimensions fit.
    std::vector<std::size_t> idx;
    for (const std::string& label : e.targets) {
      std::size_t k = input_space_.index_of(label);
      require(input_space_.at(k).dim == 2,
              "pipeline: subsystem '" + label + "' must have dimension 2");
      idx.push_back(k);
    }
    std::size_t expected = e.control_arm.has_value() ? 2 : 1;
    require(idx.size() == expected,
            std::string("pipeline: ") + element_kind_name(e.kind) +
                " has the wrong number of targets");
    if (idx.size() == 2)
      require(idx[0] != idx[1], "pipeline: control and target coincide");
    if (e.kind == ElementKind::kBbs || e.kind == ElementKind::kBs) {
      double closure = e.transmission * e.transmission +
                       e.reflection * e.reflection;
      require(std::abs(closure - 1.0) <= kDefaultTol,
              "pipeline: splitter amplitudes do not close to 1");
    }
    if (e.kind == ElementKind::kBlocker)
      require(e.blocked_path <= 1, "pipeline: blocked path must be 0 or 1");
  }
}

std::vector<PipelineRecord> run_pipeline(const Pipeline& pipeline,
                                         const PureState& initial) {
  if (initial.space() != pipeline.input_space())
    throw std::invalid_argument(
        "run_pipeline: initial state does not live on the pipeline space");
  std::vector<PipelineRecord> records;
  records.push_back({"initial", initial, 1.0});
  double survival = 1.0;
  PureState state = initial;
  for (const PipelineStage& stage : pipeline.stages()) {
    ApplyResult r = apply(stage.element, state);
    survival *= r.survival;
    state = r.state;
    records.push_back({stage.label, state, survival});
  }
  return records;
}

}  // namespace iqsim
