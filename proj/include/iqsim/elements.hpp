#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iqsim/linalg.hpp"
#include "iqsim/qstate.hpp"

namespace iqsim {

// A blocker absorbed (numerically) all of the state.
class FullyBlockedError : public std::runtime_error {
 public:
  explicit FullyBlockedError(double survival);
  double survival() const { return survival_; }

 private:
  double survival_;
};

enum class ElementKind {
  kBbs,          // biased beam splitter, amplitude transmission T
  kBs,           // balanced beam splitter, T = R = 1/sqrt(2)
  kMirror,       // [[0, i], [i, 0]]
  kPhaseShifter, // diag(1, e^{i phi})
  kHwp,          // half-wave plate at 45 degrees: [[0, 1], [1, 0]]
  kQwp,          // quarter-wave plate: (1/sqrt2) [[1, 1], [i, -i]]
  kPbs,          // polarizing beam splitter, routes (path, pol) to detectors
  kBlocker,      // projective absorber on one arm
};

const char* element_kind_name(ElementKind kind);

// One optical element, bound to named subsystems of a ModeSpace.
//
// Wave plates come in two flavors: acting on the full polarization mode,
// or inserted in a single interferometer arm. The latter applies the
// plate only to the component whose control subsystem (targets[0]) sits
// in basis state `control_arm`, and is how path and polarization get
// coupled.
struct Element {
  ElementKind kind = ElementKind::kBs;
  std::vector<std::string> targets;
  double transmission = 0.0;
  double reflection = 0.0;
  double phi = 0.0;
  std::size_t blocked_path = 0;
  std::optional<std::size_t> control_arm;

  static Element bbs(double transmission, std::string target);
  static Element bs(std::string target);
  static Element mirror(std::string target);
  static Element phase_shifter(double phi, std::string target);
  static Element hwp(std::string target);
  static Element hwp_in_arm(std::string path, std::size_t arm, std::string pol);
  static Element qwp(std::string target);
  static Element qwp_in_arm(std::string path, std::size_t arm, std::string pol);
  static Element pbs(std::string path, std::string pol);
  static Element blocker(std::size_t path_index, std::string target);
};

// 2x2 unitary of a single-mode element. Throws for kPbs and kBlocker,
// which are not single-mode unitaries.
Matrix element_matrix(const Element& e);

struct ApplyResult {
  PureState state;
  double survival = 1.0;  // norm^2 kept by this element
};

// Apply an element to a state. Unitary elements keep survival 1;
// a blocker renormalizes and reports the surviving probability, or
// throws FullyBlockedError when (numerically) nothing survives.
ApplyResult apply(const Element& e, const PureState& s);

// Route a path (dim 2) x polarization (dim 2) state into four detector
// ports: (path p, H) -> D{p}, (path p, V) -> D{p+2} with an i on the
// reflected (V) ports. Output space is ("detector", 4) x polarization.
PureState apply_pbs(const PureState& s);

struct PipelineStage {
  std::string label;
  Element element;
};

// Validated sequence of elements on a fixed input space. A PBS may
// appear at most once and only as the final stage (it changes the
// space).
class Pipeline {
 public:
  Pipeline(ModeSpace space, std::vector<PipelineStage> stages);

  const ModeSpace& input_space() const { return input_space_; }
  const ModeSpace& output_space() const { return output_space_; }
  const std::vector<PipelineStage>& stages() const { return stages_; }

 private:
  ModeSpace input_space_;
  ModeSpace output_space_;
  std::vector<PipelineStage> stages_;
};

struct PipelineRecord {
  std::string label;
  PureState state;
  double survival = 1.0;  // cumulative
};

// Run every stage, recording the state after each. Record 0 is the
// initial state with label "initial" and survival 1.
std::vector<PipelineRecord> run_pipeline(const Pipeline& pipeline,
                                         const PureState& initial);

}  // namespace iqsim
