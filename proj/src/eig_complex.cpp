#include "mourre/eig_complex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mourre {

namespace {

struct Givens {
  double c;
  cplx s;
};

// Unitary [c, s; -conj(s), c] with c real >= 0 mapping (a, b) to (r, 0).
Givens make_givens(cplx a, cplx b, cplx& r) {
  const double aa = std::abs(a), ab = std::abs(b);
  if (ab == 0.0) {
    r = a;
    return {1.0, cplx(0.0, 0.0)};
  }
  if (aa == 0.0) {
    r = ab;
    return {0.0, std::conj(b) / ab};
  }
  const double nrm = std::hypot(aa, ab);
  const cplx alpha = a / aa;
  r = alpha * nrm;
  return {aa / nrm, alpha * std::conj(b) / nrm};
}

void hessenberg(Matrix& h, Matrix* z) {
  const std::size_t n = h.rows();
  if (z) *z = Matrix::identity(n);
  Vec v(n);
  for (std::size_t j = 0; j + 2 < n; ++j) {
    const std::size_t m = n - j - 1;
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = h(j + 1 + i, j);
      xnorm2 += std::norm(v[i]);
    }
    if (xnorm2 == 0.0) continue;
    const double xnorm = std::sqrt(xnorm2);
    cplx phase(1.0, 0.0);
    if (std::abs(v[0]) > 0.0) phase = v[0] / std::abs(v[0]);
    const cplx alpha = -phase * xnorm;
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;

    for (std::size_t col = j; col < n; ++col) {
      cplx s(0.0, 0.0);
      for (std::size_t i = 0; i < m; ++i) s += std::conj(v[i]) * h(j + 1 + i, col);
      s *= beta;
      for (std::size_t i = 0; i < m; ++i) h(j + 1 + i, col) -= s * v[i];
    }
    for (std::size_t row = 0; row < n; ++row) {
      cplx s(0.0, 0.0);
      for (std::size_t i = 0; i < m; ++i) s += h(row, j + 1 + i) * v[i];
      s *= beta;
      for (std::size_t i = 0; i < m; ++i) h(row, j + 1 + i) -= s * std::conj(v[i]);
    }
    if (z) {
      for (std::size_t row = 0; row < n; ++row) {
        cplx s(0.0, 0.0);
        for (std::size_t i = 0; i < m; ++i) s += (*z)(row, j + 1 + i) * v[i];
        s *= beta;
        for (std::size_t i = 0; i < m; ++i) (*z)(row, j + 1 + i) -= s * std::conj(v[i]);
      }
    }
  }
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) h(i, j) = cplx(0.0, 0.0);
}

cplx wilkinson_shift(const Matrix& h, std::size_t hi) {
  const cplx a = h(hi - 1, hi - 1);
  const cplx b = h(hi - 1, hi);
  const cplx c = h(hi, hi - 1);
  const cplx d = h(hi, hi);
  const cplx tr2 = 0.5 * (a + d);
  const cplx disc = std::sqrt(tr2 * tr2 - (a * d - b * c));
  const cplx m1 = tr2 + disc;
  const cplx m2 = tr2 - disc;
  return (std::abs(m1 - d) < std::abs(m2 - d)) ? m1 : m2;
}

// One explicit shifted QR sweep on the active block [lo, hi].
void qr_sweep(Matrix& h, Matrix* z, std::size_t lo, std::size_t hi, cplx shift) {
  const std::size_t n = h.rows();
  for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= shift;

  std::vector<Givens> rot(hi);
  for (std::size_t k = lo; k < hi; ++k) {
    cplx r;
    const Givens g = make_givens(h(k, k), h(k + 1, k), r);
    rot[k] = g;
    h(k, k) = r;
    h(k + 1, k) = cplx(0.0, 0.0);
    for (std::size_t col = k + 1; col < n; ++col) {
      const cplx x = h(k, col);
      const cplx y = h(k + 1, col);
      h(k, col) = g.c * x + g.s * y;
      h(k + 1, col) = -std::conj(g.s) * x + g.c * y;
    }
  }
  for (std::size_t k = lo; k < hi; ++k) {
    const Givens g = rot[k];
    // right-multiply columns k, k+1 by G^dag over rows 0..k+1
    for (std::size_t row = 0; row <= k + 1; ++row) {
      const cplx x = h(row, k);
      const cplx y = h(row, k + 1);
      h(row, k) = g.c * x + std::conj(g.s) * y;
      h(row, k + 1) = -g.s * x + g.c * y;
    }
    if (z) {
      for (std::size_t row = 0; row < n; ++row) {
        const cplx x = (*z)(row, k);
        const cplx y = (*z)(row, k + 1);
        (*z)(row, k) = g.c * x + std::conj(g.s) * y;
        (*z)(row, k + 1) = -g.s * x + g.c * y;
      }
    }
  }
  for (std::size_t i = lo; i <= hi; ++i) h(i, i) += shift;
}

void schur_qr(Matrix& h, Matrix* z) {
  const std::size_t n = h.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  if (n < 2) return;

  std::size_t hi = n - 1;
  int iters_here = 0;
  long total = 0;
  const long max_total = 80L * static_cast<long>(n);

  while (true) {
    for (std::size_t i = hi; i >= 1; --i) {
      const double s = std::abs(h(i - 1, i - 1)) + std::abs(h(i, i));
      if (std::abs(h(i, i - 1)) <= eps * (s + std::abs(h(i, i - 1))))
        h(i, i - 1) = cplx(0.0, 0.0);
      if (i == 1) break;
    }
    while (hi >= 1 && h(hi, hi - 1) == cplx(0.0, 0.0)) {
      --hi;
      iters_here = 0;
    }
    if (hi == 0) break;
    std::size_t lo = hi;
    while (lo >= 1 && h(lo, lo - 1) != cplx(0.0, 0.0)) --lo;

    if (++total > max_total)
      throw NumericsError("general_eig: QR iteration did not converge");
    cplx shift = wilkinson_shift(h, hi);
    if (++iters_here % 12 == 0)
      shift = h(hi, hi) + cplx(1.5 * std::abs(h(hi, hi - 1)), 0.0);
    qr_sweep(h, z, lo, hi, shift);
  }
}

}  // namespace

GenEig general_eig(const Matrix& a, bool want_vectors) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ConfigError("general_eig: matrix must be square and nonempty");
  for (const auto& x : a.data())
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw ConfigError("general_eig: non-finite entries");

  const std::size_t n = a.rows();
  Matrix t = a;
  Matrix z;
  hessenberg(t, want_vectors ? &z : nullptr);
  schur_qr(t, want_vectors ? &z : nullptr);

  GenEig out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = t(i, i);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
    if (out.values[x].real() != out.values[y].real())
      return out.values[x].real() < out.values[y].real();
    return out.values[x].imag() < out.values[y].imag();
  });

  Vec sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = out.values[perm[i]];

  if (want_vectors) {
    const double tnorm = std::max(frob(t), 1e-300);
    const double smin = std::numeric_limits<double>::epsilon() * tnorm;
    out.vectors = Matrix(n, n);
    Vec y(n);
    for (std::size_t vi = 0; vi < n; ++vi) {
      const std::size_t i = perm[vi];  // Schur position
      const cplx lam = t(i, i);
      std::fill(y.begin(), y.end(), cplx(0.0, 0.0));
      y[i] = cplx(1.0, 0.0);
      for (std::size_t j = i; j-- > 0;) {
        cplx s(0.0, 0.0);
        for (std::size_t k = j + 1; k <= i; ++k) s += t(j, k) * y[k];
        cplx den = t(j, j) - lam;
        if (std::abs(den) < smin) den = cplx(smin, 0.0);
        y[j] = -s / den;
      }
      // v = Z y
      Vec v(n, cplx(0.0, 0.0));
      for (std::size_t r = 0; r < n; ++r) {
        cplx s(0.0, 0.0);
        for (std::size_t k = 0; k <= i; ++k) s += z(r, k) * y[k];
        v[r] = s;
      }
      const double nv = norm2(v);
      if (nv > 0.0)
        for (auto& x : v) x /= nv;
      for (std::size_t k = 0; k < n; ++k) out.vectors(vi, k) = v[k];
    }

    // residuals and defectiveness
    const double anorm = std::max(frob(a), 1e-300);
    for (std::size_t vi = 0; vi < n; ++vi) {
      Vec v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = out.vectors(vi, k);
      Vec av = matvec(a, v);
      axpy(-sorted[vi], v, av);
      out.max_residual = std::max(out.max_residual, norm2(av));
    }
    // cluster Gram check
    const double ctol = 1e-8 * (1.0 + std::abs(sorted.back()));
    std::size_t start = 0;
    while (start < n) {
      std::size_t stop = start + 1;
      while (stop < n && std::abs(sorted[stop] - sorted[stop - 1]) <= ctol) ++stop;
      const std::size_t m = stop - start;
      if (m > 1) {
        // Gram determinant-ish test via pairwise overlap
        for (std::size_t p = start; p < stop && !out.defective; ++p)
          for (std::size_t q = p + 1; q < stop && !out.defective; ++q) {
            cplx ov(0.0, 0.0);
            for (std::size_t k = 0; k < n; ++k)
              ov += std::conj(out.vectors(p, k)) * out.vectors(q, k);
            if (std::abs(ov) > 1.0 - 1e-8) out.defective = true;
          }
      }
      start = stop;
    }
    (void)anorm;
  }
  out.values = std::move(sorted);
  return out;
}

}  // namespace mourre
