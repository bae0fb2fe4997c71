#include "iqsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iqsim {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace

bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

double Vector::norm() const {
  double sq = 0.0;
  for (const Complex& z : entries) sq += std::norm(z);
  return std::sqrt(sq);
}

Complex inner(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("inner: dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    sum += std::conj(a.entries[i]) * b.entries[i];
  return sum;
}

Matrix::Matrix(std::size_t r, std::size_t c,
               std::initializer_list<Complex> init)
    : rows(r), cols(c), entries(init) {
  if (entries.size() != r * c)
    throw std::invalid_argument("Matrix: initializer has " +
                                std::to_string(entries.size()) +
                                " entries, expected " + std::to_string(r * c));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: dimension mismatch (" + shape_str(a) +
                                " * " + shape_str(b) + ")");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      Complex aik = a.at(i, k);
      for (std::size_t j = 0; j < b.cols; ++j)
        c.at(i, j) += aik * b.at(k, j);
    }
  return c;
}

Vector mat_vec(const Matrix& m, const Vector& v) {
  if (m.cols != v.dim())
    throw std::invalid_argument("mat_vec: dimension mismatch (" +
                                shape_str(m) + " * " +
                                std::to_string(v.dim()) + ")");
  Vector out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    Complex sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) sum += m.at(i, j) * v.entries[j];
    out.entries[i] = sum;
  }
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      Complex aij = a.at(i, j);
      for (std::size_t k = 0; k < b.rows; ++k)
        for (std::size_t l = 0; l < b.cols; ++l)
          c.at(i * b.rows + k, j * b.cols + l) = aij * b.at(k, l);
    }
  return c;
}

Matrix dagger(const Matrix& m) {
  Matrix d(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      d.at(j, i) = std::conj(m.at(i, j));
  return d;
}

Complex trace(const Matrix& m) {
  if (!m.square())
    throw std::invalid_argument("trace: matrix is " + shape_str(m));
  Complex t = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) t += m.at(i, i);
  return t;
}

Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.dim(), b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      m.at(i, j) = a.entries[i] * std::conj(b.entries[j]);
  return m;
}

double frobenius_norm(const Matrix& m) {
  double sq = 0.0;
  for (const Complex& z : m.entries) sq += std::norm(z);
  return std::sqrt(sq);
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    if (std::abs(a.entries[i] - b.entries[i]) > tol) return false;
  return true;
}

bool is_hermitian(const Matrix& m, double tol) {
  if (!m.square()) return false;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = i; j < m.cols; ++j)
      if (std::abs(m.at(i, j) - std::conj(m.at(j, i))) > tol) return false;
  return true;
}

bool is_unitary(const Matrix& m, double tol) {
  if (!m.square()) return false;
  return approx_equal(matmul(dagger(m), m), Matrix::identity(m.rows), tol);
}

Matrix partial_trace(const Matrix& m, const std::vector<std::size_t>& dims,
                     std::size_t keep) {
  if (!m.square())
    throw std::invalid_argument("partial_trace: matrix is " + shape_str(m));
  if (keep >= dims.size())
    throw std::invalid_argument("partial_trace: keep index " +
                                std::to_string(keep) + " out of range");
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("partial_trace: zero dimension");
    total *= d;
  }
  if (total != m.rows)
    throw std::invalid_argument(
        "partial_trace: dims multiply to " + std::to_string(total) +
        ", matrix is " + shape_str(m));

  // Stride of each subsystem in the composite index (subsystem 0 is
  // slowest).
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    strides[i] = s;
    s *= dims[i];
  }

  std::size_t dk = dims[keep];
  std::size_t env = total / dk;
  Matrix out(dk, dk);
  for (std::size_t e = 0; e < env; ++e) {
    // Base composite index with 0 in the kept slot and e spread over
    // the rest.
    std::size_t base = 0;
    std::size_t rem = e;
    for (std::size_t i = dims.size(); i-- > 0;) {
      if (i == keep) continue;
      base += (rem % dims[i]) * strides[i];
      rem /= dims[i];
    }
    for (std::size_t a = 0; a < dk; ++a)
      for (std::size_t b = 0; b < dk; ++b)
        out.at(a, b) += m.at(base + a * strides[keep], base + b * strides[keep]);
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const Matrix& m,
                                          double hermiticity_tol) {
  if (!m.square())
    throw std::invalid_argument("hermitian_eigenvalues: matrix is " +
                                shape_str(m));
  if (!is_hermitian(m, hermiticity_tol))
    throw std::invalid_argument(
        "hermitian_eigenvalues: matrix is not Hermitian within tolerance");

  std::size_t n = m.rows;
  // Work on the exactly Hermitian part; input asymmetry is below
  // hermiticity_tol.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a.at(i, j) = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));

  double scale = std::max(1.0, frobenius_norm(a));
  const double threshold = 1e-14 * scale;
  const int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::norm(a.at(i, j));
    if (std::sqrt(off) <= threshold) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Complex apq = a.at(p, q);
        double r = std::abs(apq);
        if (r == 0.0) continue;
        // De-phase the pivot so the 2x2 block is real symmetric, then
        // rotate it away.
        Complex f = apq / r;
        double app = a.at(p, p).real();
        double aqq = a.at(q, q).real();
        double tau = (aqq - app) / (2.0 * r);
        double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double sn = t * c;

        // U has columns p, q: (c, -sn conj(f)) and (sn, c conj(f)).
        Complex upp = c;
        Complex uqp = -sn * std::conj(f);
        Complex upq = sn;
        Complex uqq = c * std::conj(f);

        // A <- A U on columns p, q.
        for (std::size_t k = 0; k < n; ++k) {
          Complex akp = a.at(k, p);
          Complex akq = a.at(k, q);
          a.at(k, p) = akp * upp + akq * uqp;
          a.at(k, q) = akp * upq + akq * uqq;
        }
        // A <- U^dag A on rows p, q.
        for (std::size_t k = 0; k < n; ++k) {
          Complex apk = a.at(p, k);
          Complex aqk = a.at(q, k);
          a.at(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a.at(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
      }
    }
  }

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a.at(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> singular_values(const Matrix& m) {
  // Gram matrix on the smaller side; exactly Hermitian by construction.
  Matrix g = m.rows <= m.cols ? matmul(m, dagger(m)) : matmul(dagger(m), m);
  std::vector<double> ev = hermitian_eigenvalues(g);
  std::vector<double> sv(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i)
    sv[i] = std::sqrt(std::max(0.0, ev[ev.size() - 1 - i]));
  return sv;
}

}  // namespace iqsim
