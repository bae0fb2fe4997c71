#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iqsim/elements.hpp"
#include "iqsim/measures.hpp"
#include "iqsim/qstate.hpp"

namespace iqsim::scenarios {

// Amplitude transmission of a balanced splitter.
double balanced_transmission();

// Biased Mach-Zehnder: BBS(t1) -> mirror -> phase phi -> BBS(t2) on a
// single path qubit entering in |0>.
struct BmziConfig {
  double t1 = 0.0;
  double t2 = 0.0;
  double phi = 0.0;
};

// Delayed choice: the second splitter (balanced) is either present or
// removed after the photon is inside.
struct WdceConfig {
  double t1 = 0.0;
  bool bs2_present = true;
  double phi = 0.0;
};

// Quantum eraser on path x polarization: a half-wave plate in arm 1
// marks the path, an optional quarter-wave plate in arm 0 erases the
// marking, and a PBS fans out onto four detectors.
struct PqeConfig {
  bool qwp_in = false;
  double phi = 0.0;
};

enum class UnruhBlock { kNone, kPath1, kPath2 };

// Two chained balanced interferometers with an optional blocker in one
// internal arm. The phase is pinned to zero.
struct UnruhConfig {
  UnruhBlock block = UnruhBlock::kNone;
  double phi = 0.0;
};

struct TraceStage {
  std::string label;
  PureState state;
  double survival = 1.0;
  MeasureReport report;
};

struct StageTrace {
  std::vector<TraceStage> stages;
  // Unconditional detection probabilities; they sum to the final
  // survival.
  std::map<std::string, double> detectors;
  // Post-selected on survival; present only when a blocker discarded
  // amplitude.
  std::optional<std::map<std::string, double>> conditional_detectors;
  // Fringe visibility per detector from a 256-point phase sweep of the
  // same configuration. Detectors that never fire are omitted.
  std::map<std::string, double> sweep_visibilities;
  double survival = 1.0;
};

StageTrace run_bmzi(const BmziConfig& cfg);
StageTrace run_wdce(const WdceConfig& cfg);
StageTrace run_pqe(const PqeConfig& cfg);
StageTrace run_unruh(const UnruhConfig& cfg);

// Internal-consistency audit of a finished trace: stage budgets within
// their clamping allowance, detector masses adding up, detector laws
// and swept visibilities matching their closed forms. Returns one
// message per violated check; empty means clean.
std::vector<std::string> check_bmzi(const BmziConfig& cfg,
                                    const StageTrace& trace);
std::vector<std::string> check_wdce(const WdceConfig& cfg,
                                    const StageTrace& trace);
std::vector<std::string> check_pqe(const PqeConfig& cfg,
                                   const StageTrace& trace);
std::vector<std::string> check_unruh(const UnruhConfig& cfg,
                                     const StageTrace& trace);

}  // namespace iqsim::scenarios
