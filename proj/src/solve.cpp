#include "mourre/solve.hpp"

#include <cmath>

namespace mourre {

DenseLU::DenseLU(Matrix a) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  if (n != lu_.cols() || n == 0) throw ConfigError("DenseLU: square matrix required");
  piv_.resize(n);
  scale_ = std::max(max_abs(lu_), 1e-300);
  min_pivot_ = 1e308;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    piv_[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
    min_pivot_ = std::min(min_pivot_, std::abs(lu_(k, k)));
    if (lu_(k, k) == cplx(0.0, 0.0)) lu_(k, k) = cplx(1e-300, 0.0);
    const cplx inv = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx m = lu_(i, k) * inv;
      lu_(i, k) = m;
      if (m == cplx(0.0, 0.0)) continue;
      const cplx* rk = lu_.row(k);
      cplx* ri = lu_.row(i);
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
    }
  }
}

Vec DenseLU::solve(Vec b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw ConfigError("DenseLU::solve: size mismatch");
  // apply the full row permutation first; L is stored in final row order
  for (std::size_t k = 0; k < n; ++k)
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx bk = b[k];
    if (bk == cplx(0.0, 0.0)) continue;
    for (std::size_t i = k + 1; i < n; ++i) b[i] -= lu_(i, k) * bk;
  }
  for (std::size_t i = n; i-- > 0;) {
    cplx s = b[i];
    const cplx* ri = lu_.row(i);
    for (std::size_t j = i + 1; j < n; ++j) s -= ri[j] * b[j];
    b[i] = s / ri[i];
  }
  return b;
}

Vec shifted_solve(const Matrix& a, cplx z, const Vec& b) {
  if (a.rows() != a.cols()) throw ConfigError("shifted_solve: square matrix required");
  if (b.size() != a.rows()) throw ConfigError("shifted_solve: rhs size mismatch");
  require_hermitian(a, "shifted_solve");

  Matrix shifted = a;
  for (std::size_t i = 0; i < a.rows(); ++i) shifted(i, i) -= z;
  DenseLU lu(std::move(shifted));
  if (lu.min_pivot() <= 1e-13 * lu.scale())
    throw NumericsError("shifted_solve: shift is numerically singular (pivot " +
                        std::to_string(lu.min_pivot()) + ")");
  Vec x = lu.solve(b);
  // one refinement step
  Vec r = matvec(a, x);
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = b[i] - (r[i] - z * x[i]);
  Vec dx = lu.solve(r);
  axpy(cplx(1.0, 0.0), dx, x);
  return x;
}

GtLU<cplx> BorderedShiftLU::make_tlu(const Vec& sub, const Vec& diag, const Vec& sup,
                                     cplx z) {
  Vec d = diag;
  for (auto& x : d) x -= z;
  return GtLU<cplx>(sub, std::move(d), sup);
}

BorderedShiftLU::BorderedShiftLU(const Vec& sub, const Vec& diag, const Vec& sup,
                                 const Matrix& c, const Matrix& b, const Matrix& d,
                                 cplx z)
    : n_(diag.size()), m_(d.rows()), tlu_(make_tlu(sub, diag, sup, z)), b_(b) {
  if (c.rows() != n_ || c.cols() != m_ || b.rows() != m_ || b.cols() != n_ ||
      d.cols() != m_)
    throw ConfigError("BorderedShiftLU: block shape mismatch");

  w_ = Matrix(n_, m_);
  Vec col(n_);
  for (std::size_t j = 0; j < m_; ++j) {
    for (std::size_t i = 0; i < n_; ++i) col[i] = c(i, j);
    tlu_.solve_inplace(col);
    for (std::size_t i = 0; i < n_; ++i) w_(i, j) = col[i];
  }
  Matrix s(m_, m_);
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = 0; j < m_; ++j) {
      cplx acc = d(i, j) - (i == j ? z : cplx(0.0, 0.0));
      for (std::size_t k = 0; k < n_; ++k) acc -= b(i, k) * w_(k, j);
      s(i, j) = acc;
    }
  schur_ = DenseLU(std::move(s));
  min_pivot_ = std::min(tlu_.min_pivot(), schur_.min_pivot());
}

Vec BorderedShiftLU::solve(const Vec& rhs) const {
  if (rhs.size() != n_ + m_) throw ConfigError("BorderedShiftLU::solve: size mismatch");
  Vec u(rhs.begin(), rhs.begin() + n_);
  tlu_.solve_inplace(u);
  Vec rc(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    cplx acc = rhs[n_ + i];
    for (std::size_t k = 0; k < n_; ++k) acc -= b_(i, k) * u[k];
    rc[i] = acc;
  }
  Vec y = schur_.solve(std::move(rc));
  Vec out(n_ + m_);
  for (std::size_t i = 0; i < n_; ++i) {
    cplx acc = u[i];
    for (std::size_t j = 0; j < m_; ++j) acc -= w_(i, j) * y[j];
    out[i] = acc;
  }
  for (std::size_t j = 0; j < m_; ++j) out[n_ + j] = y[j];
  return out;
}

}  // namespace mourre
