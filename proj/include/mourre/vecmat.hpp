#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>

#include "mourre/types.hpp"

namespace mourre {

/// Dense complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  cplx* row(std::size_t i) { return a_.data() + i * cols_; }
  const cplx* row(std::size_t i) const { return a_.data() + i * cols_; }

  const std::vector<cplx>& data() const { return a_; }
  std::vector<cplx>& data() { return a_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> a_;
};

inline double norm2(const Vec& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline double norm2(const RVec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// <u, v> with conjugation on the first argument.
inline cplx dot(const Vec& u, const Vec& v) {
  assert(u.size() == v.size());
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline void axpy(cplx alpha, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& v, cplx alpha) {
  for (auto& x : v) x *= alpha;
}

inline Vec matvec(const Matrix& a, const Vec& x) {
  assert(a.cols() == x.size());
  Vec y(a.rows(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const cplx* ai = a.row(i);
    cplx s(0.0, 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

inline Matrix adjoint(const Matrix& a) {
  Matrix b(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) b(j, i) = std::conj(a(i, j));
  return b;
}

inline Matrix add(const Matrix& a, const Matrix& b, cplx beta = 1.0) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += beta * b.data()[i];
  return c;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

/// max_ij |A_ij - conj(A_ji)|, the Hermitian-symmetry defect.
inline double hermitian_defect(const Matrix& a) {
  assert(a.rows() == a.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

inline void require_hermitian(const Matrix& a, const char* who) {
  const double defect = hermitian_defect(a);
  const double scale = 1.0 + max_abs(a);
  if (defect > 1e-12 * scale)
    throw ConfigError(std::string(who) + ": matrix is not Hermitian, defect " +
                      std::to_string(defect) + " vs scale " + std::to_string(scale));
}

/// Frobenius norm.
inline double frob(const Matrix& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += std::norm(x);
  return std::sqrt(s);
}

/// Hermitize in place: A <- (A + A^dagger)/2. Cleans rounding-level asymmetry.
inline void hermitize(Matrix& a) {
  assert(a.rows() == a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    a(i, i) = cplx(a(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const cplx m = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = m;
      a(j, i) = std::conj(m);
    }
  }
}

}  // namespace mourre
