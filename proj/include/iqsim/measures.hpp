#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iqsim/qstate.hpp"

namespace iqsim {

// Fringe visibility has no value when a detector never fires.
class VisibilityUndefinedError : public std::runtime_error {
 public:
  explicit VisibilityUndefinedError(const std::string& what);
};

// l1 quantifiers in a fixed reference basis. For a d-level state the
// budget identity is coherence + predictability + entanglement = d - 1,
// with entanglement present only when the state was reduced from a
// larger pure state.
struct ComplementarityBudget {
  std::size_t d = 0;
  double coherence = 0.0;
  double predictability = 0.0;
  std::optional<double> entanglement;
  double bound = 0.0;          // d - 1
  double residual = 0.0;       // bound - sum of the above, clamped at 0
  double residual_raw = 0.0;   // same, before clamping
};

struct MeasureReport {
  ComplementarityBudget budget;
  std::optional<double> gy_visibility;
  std::optional<double> gy_predictability;
  std::optional<double> gy_relation_value;  // V^2 + P^2
  std::optional<bool> gy_satisfied;
  std::string basis_label;
};

// Sum of |rho_jk| over j != k.
double l1_coherence(const DensityMatrix& rho, const std::string& basis_label);

// d - 1 - sum_{j != k} sqrt(rho_jj rho_kk).
double l1_predictability(const DensityMatrix& rho,
                         const std::string& basis_label);

// Entanglement across the cut (part_label | rest) of a pure state:
// the part's budget deficit (dA - 1) - C - P. Nonnegative for any
// valid state; values below -1e-10 mean the input was not a state and
// throw.
double l1_entanglement(const PureState& global, const std::string& part_label);

// (sum of Schmidt coefficients)^2 - 1 across the same cut. Equals the
// l1 entanglement for states whose Schmidt basis is the reference
// basis.
double robustness_pure(const PureState& global, const std::string& part_label);

// Visibility (p_max - p_min) / (p_max + p_min) of an interference
// fringe, from a 256-point phase sweep of `detector_prob` over
// [0, 2pi) unless a finer grid is requested.
double gy_visibility_sweep(const std::function<double(double)>& detector_prob,
                           std::size_t grid = 256);

// Closed-form fringe visibility of a two-beam-splitter interferometer
// with amplitude transmissions t1, t2, at detector 0 or 1.
double gy_visibility_analytic_bmzi(double t1, double t2, int detector);

// |w1 - w2| for a two-way which-path distribution.
double gy_predictability(const std::vector<double>& w);

struct GyRelation {
  double value = 0.0;  // V^2 + P^2
  bool satisfied = false;
};

GyRelation check_gy_relation(double visibility, double predictability);

// Budget of a state that is all there is: entanglement is absent, the
// residual is bound - C - P.
ComplementarityBudget budget(const DensityMatrix& rho,
                             const std::string& basis_label);

// Budget of the named part of a larger pure state: C and P of the
// reduced state plus the entanglement across the cut. The residual is
// exactly zero up to clamping noise.
ComplementarityBudget budget_pure(const PureState& global,
                                  const std::string& part_label);

}  // namespace iqsim
