#include "iqsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iqsim/linalg.hpp"

namespace iqsim {

namespace {

const double kTwoPi = 2.0 * std::acos(-1.0);

// Clamp the infinitesimally negative residuals that floating point
// leaves behind; anything past the allowance is a real violation.
double clamp_residual(double raw) {
  if (raw >= 0.0) return raw;
  if (raw < -kPositivityTol)
    throw std::runtime_error("complementarity residual " +
                             std::to_string(raw) +
                             " exceeds the clamping allowance");
  return 0.0;
}

std::vector<double> diagonal_weights(const Matrix& rho) {
  std::vector<double> w(rho.rows);
  for (std::size_t j = 0; j < rho.rows; ++j)
    w[j] = std::max(0.0, rho.at(j, j).real());
  return w;
}

}  // namespace

VisibilityUndefinedError::VisibilityUndefinedError(const std::string& what)
    : std::runtime_error(what) {}

double l1_coherence(const DensityMatrix& rho, const std::string& basis_label) {
  (void)basis_label;  // names the basis the matrix is written in
  double sum = 0.0;
  for (std::size_t j = 0; j < rho.dim(); ++j)
    for (std::size_t k = 0; k < rho.dim(); ++k)
      if (j != k) sum += std::abs(rho.rho().at(j, k));
  // mathematically bounded by d - 1; trim accumulated rounding
  return std::min(sum, static_cast<double>(rho.dim()) - 1.0);
}

double l1_predictability(const DensityMatrix& rho,
                         const std::string& basis_label) {
  (void)basis_label;
  std::vector<double> w = diagonal_weights(rho.rho());
  double cross = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    for (std::size_t k = 0; k < w.size(); ++k)
      if (j != k) cross += std::sqrt(w[j] * w[k]);
  double value = static_cast<double>(w.size()) - 1.0 - cross;
  // the cross term never exceeds d - 1 exactly; clamp rounding noise
  return std::clamp(value, 0.0, static_cast<double>(w.size()) - 1.0);
}

ComplementarityBudget budget(const DensityMatrix& rho,
                             const std::string& basis_label) {
  ComplementarityBudget b;
  b.d = rho.dim();
  b.coherence = l1_coherence(rho, basis_label);
  b.predictability = l1_predictability(rho, basis_label);
  b.bound = static_cast<double>(b.d) - 1.0;
  b.residual_raw = b.bound - b.coherence - b.predictability;
  b.residual = clamp_residual(b.residual_raw);
  return b;
}

ComplementarityBudget budget_pure(const PureState& global,
                                  const std::string& part_label) {
  DensityMatrix part = reduced_state(global, part_label);
  ComplementarityBudget b;
  b.d = part.dim();
  b.coherence = l1_coherence(part, part_label);
  b.predictability = l1_predictability(part, part_label);
  b.bound = static_cast<double>(b.d) - 1.0;
  double deficit = b.bound - b.coherence - b.predictability;
  // The deficit of a reduced pure state is its entanglement with the
  // rest; clamp_residual rejects genuine violations.
  double entanglement = clamp_residual(deficit);
  b.entanglement = entanglement;
  b.residual_raw = deficit - entanglement;
  b.residual = clamp_residual(b.residual_raw);
  return b;
}

double l1_entanglement(const PureState& global, const std::string& part_label) {
  return budget_pure(global, part_label).entanglement.value();
}

double robustness_pure(const PureState& global, const std::string& part_label) {
  std::vector<double> sv =
      singular_values(reshape_bipartite(global, part_label));
  double sum = 0.0;
  for (double s : sv) sum += s;
  double value = sum * sum - 1.0;
  if (value < 0.0 && value > -kPositivityTol) value = 0.0;
  return value;
}

double gy_visibility_sweep(const std::function<double(double)>& detector_prob,
                           std::size_t grid) {
  if (grid < 8)
    throw std::invalid_argument("gy_visibility_sweep: grid must be >= 8");
  double pmax = 0.0, pmin = 1.0;
  for (std::size_t k = 0; k < grid; ++k) {
    double phi = kTwoPi * static_cast<double>(k) / static_cast<double>(grid);
    double p = detector_prob(phi);
    if (!std::isfinite(p) || p < -kDefaultTol || p > 1.0 + kDefaultTol)
      throw std::invalid_argument(
          "gy_visibility_sweep: probability " + std::to_string(p) +
          " out of range at phi = " + std::to_string(phi));
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
  }
  double den = pmax + pmin;
  if (den < 1e-300)
    throw VisibilityUndefinedError(
        "visibility undefined: detector never fires across the sweep");
  return std::clamp((pmax - pmin) / den, 0.0, 1.0);
}

double gy_visibility_analytic_bmzi(double t1, double t2, int detector) {
  for (double t : {t1, t2})
    if (!std::isfinite(t) || t < 0.0 || t > 1.0)
      throw std::invalid_argument(
          "gy_visibility_analytic_bmzi: transmission must lie in [0, 1]");
  if (detector != 0 && detector != 1)
    throw std::invalid_argument(
        "gy_visibility_analytic_bmzi: detector must be 0 or 1");
  double r1 = std::sqrt(1.0 - t1 * t1);
  double r2 = std::sqrt(1.0 - t2 * t2);
  double num = 2.0 * t1 * r1 * t2 * r2;
  double den = detector == 0
                   ? t1 * t1 * r2 * r2 + r1 * r1 * t2 * t2
                   : t1 * t1 * t2 * t2 + r1 * r1 * r2 * r2;
  if (den < 1e-300)
    throw VisibilityUndefinedError(
        "visibility undefined: detector " + std::to_string(detector) +
        " never fires");
  return num / den;
}

double gy_predictability(const std::vector<double>& w) {
  if (w.size() != 2)
    throw std::invalid_argument(
        "gy_predictability: expected two which-path weights");
  for (double x : w)
    if (!std::isfinite(x) || x < -kDefaultTol)
      throw std::invalid_argument("gy_predictability: negative weight");
  if (std::abs(w[0] + w[1] - 1.0) > kDefaultTol)
    throw std::invalid_argument("gy_predictability: weights must sum to 1");
  return std::abs(w[0] - w[1]);
}

GyRelation check_gy_relation(double visibility, double predictability) {
  for (double x : {visibility, predictability})
    if (!std::isfinite(x) || x < -kDefaultTol || x > 1.0 + kDefaultTol)
      throw std::invalid_argument(
          "check_gy_relation: arguments must lie in [0, 1]");
  double v = std::clamp(visibility, 0.0, 1.0);
  double p = std::clamp(predictability, 0.0, 1.0);
  GyRelation r;
  r.value = v * v + p * p;
  r.satisfied = r.value <= 1.0 + kDefaultTol;
  return r;
}

}  // namespace iqsim
