#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace iqsim {

using Complex = std::complex<double>;

// Absolute tolerance used by all approximate comparisons unless a caller
// passes its own.
inline constexpr double kDefaultTol = 1e-12;

// Slack allowed on the smallest eigenvalue of a reduced density matrix;
// partial traces of numerically evolved states can dip infinitesimally
// negative.
inline constexpr double kPositivityTol = 1e-10;

bool is_finite(Complex z);

// Dense complex vector.
struct Vector {
  std::vector<Complex> entries;

  Vector() = default;
  explicit Vector(std::size_t dim) : entries(dim) {}
  Vector(std::initializer_list<Complex> init) : entries(init) {}

  std::size_t dim() const { return entries.size(); }
  Complex& operator[](std::size_t i) { return entries[i]; }
  Complex operator[](std::size_t i) const { return entries[i]; }

  double norm() const;
};

// <a|b>, conjugate-linear in the first argument.
Complex inner(const Vector& a, const Vector& b);

// Dense complex matrix, row-major. Subsystem 0 is the slowest-varying
// index everywhere a matrix is read as an operator on a tensor product.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> entries;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}
  Matrix(std::size_t r, std::size_t c, std::initializer_list<Complex> init);

  static Matrix identity(std::size_t n);

  Complex& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  Complex at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

  bool square() const { return rows == cols; }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& m, const Vector& v);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix dagger(const Matrix& m);
Complex trace(const Matrix& m);

// |a><b|
Matrix outer(const Vector& a, const Vector& b);

double frobenius_norm(const Matrix& m);
bool approx_equal(const Matrix& a, const Matrix& b, double tol = kDefaultTol);
bool is_hermitian(const Matrix& m, double tol = kDefaultTol);
bool is_unitary(const Matrix& m, double tol = kDefaultTol);

// Reduced matrix keeping subsystem `keep` of a square matrix over the
// tensor product of `dims`. Trace-preserving.
Matrix partial_trace(const Matrix& m, const std::vector<std::size_t>& dims,
                     std::size_t keep);

// Eigenvalues of a Hermitian matrix, ascending. Cyclic complex Jacobi
// sweeps; off-diagonal norm threshold 1e-14 (relative to the matrix
// scale), at most 100 sweeps. Throws if m is not Hermitian within
// `hermiticity_tol`.
std::vector<double> hermitian_eigenvalues(const Matrix& m,
                                          double hermiticity_tol = kDefaultTol);

// Singular values, descending. Computed from the eigenvalues of the
// smaller Gram matrix.
std::vector<double> singular_values(const Matrix& m);

}  // namespace iqsim
