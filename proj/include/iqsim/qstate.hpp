#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "iqsim/linalg.hpp"

namespace iqsim {

// Largest total Hilbert-space dimension the simulator accepts. Dense
// storage is deliberate; experiments of interest live far below this.
inline constexpr std::size_t kMaxTotalDim = 32;

struct Subsystem {
  std::string label;
  std::size_t dim = 0;
};

bool operator==(const Subsystem& a, const Subsystem& b);

// Ordered list of labeled subsystems. Subsystem 0 is the slowest-varying
// index of the composite basis.
class ModeSpace {
 public:
  ModeSpace() = default;
  explicit ModeSpace(std::vector<Subsystem> subsystems);

  std::size_t count() const { return subsystems_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  const Subsystem& at(std::size_t i) const { return subsystems_[i]; }
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }

  bool has_label(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;  // throws if unknown

  // Basis-index arithmetic for the composite space.
  std::vector<std::size_t> decompose(std::size_t index) const;
  std::size_t compose(const std::vector<std::size_t>& coords) const;

 private:
  std::vector<Subsystem> subsystems_;
  std::size_t total_dim_ = 0;
};

bool operator==(const ModeSpace& a, const ModeSpace& b);
bool operator!=(const ModeSpace& a, const ModeSpace& b);

// Normalized state vector on a ModeSpace.
class PureState {
 public:
  PureState(ModeSpace space, Vector amplitudes, double tol = kDefaultTol);

  // Computational basis state |kets[0], kets[1], ...>.
  static PureState basis_state(ModeSpace space,
                               const std::vector<std::size_t>& kets);

  const ModeSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  std::size_t dim() const { return amps_.dim(); }

 private:
  ModeSpace space_;
  Vector amps_;
};

// Unit-trace positive-semidefinite Hermitian operator on a ModeSpace.
class DensityMatrix {
 public:
  DensityMatrix(ModeSpace space, Matrix rho, double tol = kDefaultTol);

  const ModeSpace& space() const { return space_; }
  const Matrix& rho() const { return rho_; }
  std::size_t dim() const { return rho_.rows; }

 private:
  ModeSpace space_;
  Matrix rho_;
};

DensityMatrix density_from_pure(const PureState& s);

// Reduce onto the subsystem named `keep_label`, tracing everything else
// out. Throws on an unknown label.
DensityMatrix reduced_state(const PureState& s, const std::string& keep_label);
DensityMatrix reduced_state(const DensityMatrix& rho,
                            const std::string& keep_label);

double purity(const DensityMatrix& rho);

// True when a and b differ by at most a global phase: |<a|b>| >= 1 - tol.
bool global_phase_equal(const PureState& a, const PureState& b,
                        double tol = kDefaultTol);

// View a pure state on a multi-part space as a dim(part) x dim(rest)
// matrix, with `part_label` indexing rows and the remaining subsystems
// (in space order) indexing columns. Singular values of the result are
// the state's Schmidt coefficients across that cut.
Matrix reshape_bipartite(const PureState& s, const std::string& part_label);

}  // namespace iqsim
