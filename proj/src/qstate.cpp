#include "iqsim/qstate.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace iqsim {

bool operator==(const Subsystem& a, const Subsystem& b) {
  return a.label == b.label && a.dim == b.dim;
}

ModeSpace::ModeSpace(std::vector<Subsystem> subsystems)
    : subsystems_(std::move(subsystems)) {
  if (subsystems_.empty())
    throw std::invalid_argument("ModeSpace: at least one subsystem required");
  std::set<std::string> seen;
  total_dim_ = 1;
  for (const Subsystem& s : subsystems_) {
    if (s.label.empty())
      throw std::invalid_argument("ModeSpace: empty subsystem label");
    if (!seen.insert(s.label).second)
      throw std::invalid_argument("ModeSpace: duplicate label '" + s.label +
                                  "'");
    if (s.dim == 0)
      throw std::invalid_argument("ModeSpace: subsystem '" + s.label +
                                  "' has dimension 0");
    total_dim_ *= s.dim;
    if (total_dim_ > kMaxTotalDim)
      throw std::invalid_argument(
          "ModeSpace: total dimension exceeds " + std::to_string(kMaxTotalDim));
  }
}

bool ModeSpace::has_label(const std::string& label) const {
  for (const Subsystem& s : subsystems_)
    if (s.label == label) return true;
  return false;
}

std::size_t ModeSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    if (subsystems_[i].label == label) return i;
  throw std::invalid_argument("ModeSpace: unknown label '" + label + "'");
}

std::vector<std::size_t> ModeSpace::decompose(std::size_t index) const {
  if (index >= total_dim_)
    throw std::invalid_argument("ModeSpace: index " + std::to_string(index) +
                                " out of range");
  std::vector<std::size_t> coords(subsystems_.size());
  for (std::size_t i = subsystems_.size(); i-- > 0;) {
    coords[i] = index % subsystems_[i].dim;
    index /= subsystems_[i].dim;
  }
  return coords;
}

std::size_t ModeSpace::compose(const std::vector<std::size_t>& coords) const {
  if (coords.size() != subsystems_.size())
    throw std::invalid_argument("ModeSpace: expected " +
                                std::to_string(subsystems_.size()) +
                                " coordinates");
  std::size_t index = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= subsystems_[i].dim)
      throw std::invalid_argument("ModeSpace: coordinate " +
                                  std::to_string(coords[i]) +
                                  " out of range for '" +
                                  subsystems_[i].label + "'");
    index = index * subsystems_[i].dim + coords[i];
  }
  return index;
}

bool operator==(const ModeSpace& a, const ModeSpace& b) {
  return a.subsystems() == b.subsystems();
}

bool operator!=(const ModeSpace& a, const ModeSpace& b) { return !(a == b); }

PureState::PureState(ModeSpace space, Vector amplitudes, double tol)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (amps_.dim() != space_.total_dim())
    throw std::invalid_argument(
        "PureState: " + std::to_string(amps_.dim()) + " amplitudes on a " +
        std::to_string(space_.total_dim()) + "-dimensional space");
  for (const Complex& z : amps_.entries)
    if (!is_finite(z))
      throw std::invalid_argument("PureState: non-finite amplitude");
  double n = amps_.norm();
  if (std::abs(n - 1.0) > tol)
    throw std::invalid_argument("PureState: norm " + std::to_string(n) +
                                " is not 1");
}

PureState PureState::basis_state(ModeSpace space,
                                 const std::vector<std::size_t>& kets) {
  std::size_t index = space.compose(kets);
  Vector v(space.total_dim());
  v[index] = 1.0;
  return PureState(std::move(space), std::move(v));
}

DensityMatrix::DensityMatrix(ModeSpace space, Matrix rho, double tol)
    : space_(std::move(space)), rho_(std::move(rho)) {
  if (!rho_.square() || rho_.rows != space_.total_dim())
    throw std::invalid_argument("DensityMatrix: shape does not match space");
  for (const Complex& z : rho_.entries)
    if (!is_finite(z))
      throw std::invalid_argument("DensityMatrix: non-finite entry");
  if (!is_hermitian(rho_, tol))
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  Complex tr = trace(rho_);
  if (std::abs(tr - Complex{1.0, 0.0}) > tol)
    throw std::invalid_argument("DensityMatrix: trace is not 1");
  std::vector<double> ev = hermitian_eigenvalues(rho_, tol);
  if (ev.front() < -kPositivityTol)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(ev.front()));
}

DensityMatrix density_from_pure(const PureState& s) {
  return DensityMatrix(s.space(), outer(s.amplitudes(), s.amplitudes()));
}

namespace {

std::vector<std::size_t> space_dims(const ModeSpace& space) {
  std::vector<std::size_t> dims(space.count());
  for (std::size_t i = 0; i < space.count(); ++i) dims[i] = space.at(i).dim;
  return dims;
}

}  // namespace

DensityMatrix reduced_state(const PureState& s, const std::string& keep_label) {
  return reduced_state(density_from_pure(s), keep_label);
}

DensityMatrix reduced_state(const DensityMatrix& rho,
                            const std::string& keep_label) {
  std::size_t keep = rho.space().index_of(keep_label);
  if (rho.space().count() == 1) return rho;
  Matrix r = partial_trace(rho.rho(), space_dims(rho.space()), keep);
  return DensityMatrix(ModeSpace({rho.space().at(keep)}), std::move(r));
}

double purity(const DensityMatrix& rho) {
  return trace(matmul(rho.rho(), rho.rho())).real();
}

bool global_phase_equal(const PureState& a, const PureState& b, double tol) {
  if (a.space() != b.space())
    throw std::invalid_argument(
        "global_phase_equal: states live on different spaces");
  return std::abs(inner(a.amplitudes(), b.amplitudes())) >= 1.0 - tol;
}

Matrix reshape_bipartite(const PureState& s, const std::string& part_label) {
  const ModeSpace& space = s.space();
  std::size_t part = space.index_of(part_label);
  std::size_t dp = space.at(part).dim;
  std::size_t rest = space.total_dim() / dp;
  Matrix m(dp, rest);
  std::vector<std::size_t> dims = space_dims(space);
  for (std::size_t idx = 0; idx < space.total_dim(); ++idx) {
    std::vector<std::size_t> coords = space.decompose(idx);
    std::size_t row = coords[part];
    std::size_t col = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i == part) continue;
      col = col * dims[i] + coords[i];
    }
    m.at(row, col) = s.amplitudes()[idx];
  }
  return m;
}

}  // namespace iqsim
