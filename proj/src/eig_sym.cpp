#include "mourre/eig_sym.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "mourre/tridiag_lu.hpp"

namespace mourre {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

// Implicit-shift QL on (d, e). If acc != nullptr, the rotations are applied on
// the left of the row-major (n x ncols) buffer, so that on exit row i of the
// accumulated matrix corresponds to eigenvalue d[i].
template <typename Scalar>
void tqli(RVec& d, RVec& e, Scalar* acc, std::size_t ncols) {
  const std::size_t n = d.size();
  if (n == 0) throw ConfigError("tqli: empty matrix");
  if (n == 1) return;
  const double eps = std::numeric_limits<double>::epsilon();

  // normalize so the convergence test is well scaled even for tiny matrices
  double scale = 0.0;
  for (double x : d) scale = std::max(scale, std::abs(x));
  for (double x : e) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return;
  for (double& x : d) x /= scale;
  for (double& x : e) x /= scale;

  // absolute deflation floor: off-diagonals below eps * ||T|| are negligible,
  // otherwise rank-deficient blocks (junk-level eigenvalue clusters) stall
  const double floor_tol = eps * 3.0;

  e.resize(n, 0.0);  // e[n-1] used as workspace
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd + floor_tol) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericsError("tqli: too many QL iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          const std::size_t i = ii;
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (acc != nullptr) {
            Scalar* ri = acc + i * ncols;
            Scalar* rj = acc + (i + 1) * ncols;
            for (std::size_t k = 0; k < ncols; ++k) {
              const Scalar fi = ri[k];
              const Scalar fj = rj[k];
              ri[k] = c * fi - s * fj;
              rj[k] = s * fi + c * fj;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  for (double& x : d) x *= scale;
}

template <typename Scalar>
void sort_ascending(RVec& d, Scalar* acc, std::size_t ncols) {
  const std::size_t n = d.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&d](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  RVec ds(n);
  for (std::size_t i = 0; i < n; ++i) ds[i] = d[perm[i]];
  d.swap(ds);
  if (acc != nullptr) {
    std::vector<Scalar> scratch(n * ncols);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(acc + perm[i] * ncols, acc + (perm[i] + 1) * ncols, scratch.begin() + i * ncols);
    std::copy(scratch.begin(), scratch.end(), acc);
  }
}

// Householder reduction of a real symmetric matrix (packed row-major in a) to
// tridiagonal (d, e); u holds the accumulated transpose of the orthogonal
// factor, row-major, so that A = Q T Q^T with row i of u = row i of Q^T.
void real_tridiagonalize(std::vector<double>& a, std::size_t n, RVec& d, RVec& e,
                         std::vector<double>* u) {
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);
  std::vector<double> v(n), p(n);
  std::vector<std::pair<std::size_t, std::vector<double>>> hh;  // (j, scaled v)
  std::vector<double> betas;

  for (std::size_t j = 0; j + 2 < n; ++j) {
    const std::size_t m = n - j - 1;  // trailing size
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = a[(j + 1 + i) * n + j];
      xnorm2 += v[i] * v[i];
    }
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      e[j] = 0.0;
      if (u) {
        betas.push_back(0.0);
        hh.emplace_back(j, std::vector<double>());
      }
      continue;
    }
    const double alpha = (v[0] >= 0.0) ? -xnorm : xnorm;
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += v[i] * v[i];
    const double beta = (vnorm2 == 0.0) ? 0.0 : 2.0 / vnorm2;

    // p = beta * B v on trailing block B = a[j+1.., j+1..]
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      const double* row = &a[(j + 1 + r) * n + (j + 1)];
      for (std::size_t ccol = 0; ccol < m; ++ccol) s += row[ccol] * v[ccol];
      p[r] = beta * s;
    }
    double K = 0.0;
    for (std::size_t i = 0; i < m; ++i) K += v[i] * p[i];
    K *= 0.5 * beta;
    for (std::size_t i = 0; i < m; ++i) p[i] -= K * v[i];
    // B <- B - p v^T - v p^T
    for (std::size_t r = 0; r < m; ++r) {
      double* row = &a[(j + 1 + r) * n + (j + 1)];
      const double pr = p[r], vr = v[r];
      for (std::size_t ccol = 0; ccol < m; ++ccol) row[ccol] -= pr * v[ccol] + vr * p[ccol];
    }
    e[j] = alpha;
    if (u) {
      betas.push_back(beta);
      hh.emplace_back(j, std::vector<double>(v.begin(), v.begin() + m));
    }
  }
  if (n >= 2) e[n - 2] = a[(n - 1) * n + (n - 2)];
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];

  if (u) {
    // Q = P_0 P_1 ... ; build Q^T row-major by right-multiplying I by P_j in
    // reverse order: Q^T = ((I P_last) ... P_0).
    u->assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) (*u)[i * n + i] = 1.0;
    for (std::size_t t = hh.size(); t-- > 0;) {
      const std::size_t j = hh[t].first;
      const std::vector<double>& vv = hh[t].second;
      const double beta = betas[t];
      if (beta == 0.0) continue;
      const std::size_t m = vv.size();
      // rows r >= j+1 can have nonzero overlap only in cols >= j+1
      for (std::size_t r = j + 1; r < n; ++r) {
        double* row = &(*u)[r * n];
        double s = 0.0;
        for (std::size_t ccol = 0; ccol < m; ++ccol) s += row[j + 1 + ccol] * vv[ccol];
        s *= beta;
        for (std::size_t ccol = 0; ccol < m; ++ccol) row[j + 1 + ccol] -= s * vv[ccol];
      }
    }
  }
}

// Complex Hermitian Householder reduction; on exit (d, e) is the real
// tridiagonal and u (row-major complex) satisfies: row i of u = row i of Q^dag,
// A = Q T Q^dag.
void complex_tridiagonalize(Matrix a, RVec& d, RVec& e, Matrix* u) {
  const std::size_t n = a.rows();
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);
  Vec v(n), p(n);
  std::vector<std::pair<std::size_t, Vec>> hh;
  std::vector<double> betas;
  Vec subdiag(n > 0 ? n - 1 : 0, cplx(0.0, 0.0));

  for (std::size_t j = 0; j + 2 < n; ++j) {
    const std::size_t m = n - j - 1;
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = a(j + 1 + i, j);
      xnorm2 += std::norm(v[i]);
    }
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      subdiag[j] = 0.0;
      betas.push_back(0.0);
      hh.emplace_back(j, Vec());
      continue;
    }
    cplx phase(1.0, 0.0);
    if (std::abs(v[0]) > 0.0) phase = v[0] / std::abs(v[0]);
    const cplx alpha = -phase * xnorm;
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
    const double beta = (vnorm2 == 0.0) ? 0.0 : 2.0 / vnorm2;

    for (std::size_t r = 0; r < m; ++r) {
      cplx s(0.0, 0.0);
      for (std::size_t ccol = 0; ccol < m; ++ccol) s += a(j + 1 + r, j + 1 + ccol) * v[ccol];
      p[r] = beta * s;
    }
    cplx Kc(0.0, 0.0);
    for (std::size_t i = 0; i < m; ++i) Kc += std::conj(v[i]) * p[i];
    const cplx K = 0.5 * beta * Kc;
    for (std::size_t i = 0; i < m; ++i) p[i] -= K * v[i];
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t ccol = 0; ccol < m; ++ccol)
        a(j + 1 + r, j + 1 + ccol) -=
            p[r] * std::conj(v[ccol]) + v[r] * std::conj(p[ccol]);
    subdiag[j] = alpha;
    betas.push_back(beta);
    hh.emplace_back(j, Vec(v.begin(), v.begin() + m));
  }
  if (n >= 2) subdiag[n - 2] = a(n - 1, n - 2);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();

  // Phase gauge making the subdiagonal real nonnegative.
  Vec dn(n, cplx(1.0, 0.0));
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double mag = std::abs(subdiag[j]);
    e[j] = mag;
    const cplx ph = (mag == 0.0) ? cplx(1.0, 0.0) : subdiag[j] / mag;
    dn[j + 1] = dn[j] * ph;
  }

  if (u) {
    // Q0^dag = D^dag P_{last} ... P_0 built by right-multiplying rows.
    *u = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) (*u)(i, i) = std::conj(dn[i]);
    for (std::size_t t = hh.size(); t-- > 0;) {
      const std::size_t j = hh[t].first;
      const Vec& vv = hh[t].second;
      const double beta = betas[t];
      if (beta == 0.0) continue;
      const std::size_t m = vv.size();
      for (std::size_t r = 0; r < n; ++r) {
        cplx* row = u->row(r);
        cplx s(0.0, 0.0);
        for (std::size_t ccol = 0; ccol < m; ++ccol) s += row[j + 1 + ccol] * vv[ccol];
        s *= beta;
        for (std::size_t ccol = 0; ccol < m; ++ccol) row[j + 1 + ccol] -= s * std::conj(vv[ccol]);
      }
    }
  }
}

// splitmix64, used for deterministic inverse-iteration start vectors.
std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_uniform(std::uint64_t& s) {
  return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

SymEig tridiag_eig(RVec d, RVec e, bool want_vectors) {
  const std::size_t n = d.size();
  if (n == 0) throw ConfigError("tridiag_eig: empty");
  if (e.size() + 1 != n && !(n == 1 && e.empty()))
    throw ConfigError("tridiag_eig: size mismatch");
  SymEig out;
  if (want_vectors) {
    std::vector<double> rows(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
    tqli<double>(d, e, rows.data(), n);
    sort_ascending<double>(d, rows.data(), n);
    out.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.vectors(i, j) = rows[i * n + j];
  } else {
    tqli<double>(d, e, nullptr, 0);
    sort_ascending<double>(d, nullptr, 0);
  }
  out.values = std::move(d);
  return out;
}

std::size_t sturm_count(const RVec& d, const RVec& e, double x) {
  const std::size_t n = d.size();
  std::size_t cnt = 0;
  double q = d[0] - x;
  if (q < 0.0) ++cnt;
  for (std::size_t i = 1; i < n; ++i) {
    if (q == 0.0) q = -1e-300;
    q = (d[i] - x) - e[i - 1] * e[i - 1] / q;
    if (q < 0.0) ++cnt;
  }
  return cnt;
}

namespace {

double bisect_eigenvalue(const RVec& d, const RVec& e, std::size_t index, double lo,
                         double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(d, e, mid) > index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

GtLU<double> shifted_tridiag_lu(const RVec& d, const RVec& e, double lam) {
  const std::size_t n = d.size();
  RVec dd(n);
  for (std::size_t i = 0; i < n; ++i) dd[i] = d[i] - lam;
  RVec off(e.begin(), e.end());
  return GtLU<double>(off, dd, off);
}

}  // namespace

SelectedEig tridiag_eig_range(const RVec& d, const RVec& e, double lo, double hi,
                              bool want_vectors) {
  const std::size_t n = d.size();
  if (n == 0) throw ConfigError("tridiag_eig_range: empty");
  SelectedEig out;
  // Gershgorin bounds.
  double glo = d[0], ghi = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    glo = std::min(glo, d[i] - r);
    ghi = std::max(ghi, d[i] + r);
  }
  const double span = ghi - glo + 1.0;
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() * span;
  const std::size_t nlo = sturm_count(d, e, lo);
  const std::size_t nhi = sturm_count(d, e, hi);
  out.first_index = nlo;
  const double scale = std::max(std::abs(glo), std::abs(ghi)) + 1.0;

  for (std::size_t idx = nlo; idx < nhi; ++idx) {
    const double lam = bisect_eigenvalue(d, e, idx, glo - tol, ghi + tol, tol);
    out.values.push_back(lam);
  }
  if (!want_vectors) return out;

  std::uint64_t seed = 0x5eedf00d1234ULL;
  const double cluster_tol = std::max(1e-8, 1e-9 * scale);
  for (std::size_t t = 0; t < out.values.size(); ++t) {
    const double lam = out.values[t];
    GtLU<double> lu = shifted_tridiag_lu(d, e, lam);
    RVec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = unit_uniform(seed);
    double rnorm = norm2(v);
    for (double& x : v) x /= rnorm;
    bool ok = false;
    for (int iter = 0; iter < 8 && !ok; ++iter) {
      lu.solve_inplace(v);
      // orthogonalize against close-by previously computed vectors
      for (std::size_t s = 0; s < t; ++s) {
        if (std::abs(out.values[s] - lam) < cluster_tol) {
          double pr = 0.0;
          for (std::size_t i = 0; i < n; ++i) pr += out.vectors[s][i] * v[i];
          for (std::size_t i = 0; i < n; ++i) v[i] -= pr * out.vectors[s][i];
        }
      }
      rnorm = norm2(v);
      if (rnorm == 0.0) {
        // restart with a fresh random vector
        for (std::size_t i = 0; i < n; ++i) v[i] = unit_uniform(seed);
        rnorm = norm2(v);
      }
      for (double& x : v) x /= rnorm;
      // residual check
      double rr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double ti = d[i] * v[i] - lam * v[i];
        if (i > 0) ti += e[i - 1] * v[i - 1];
        if (i + 1 < n) ti += e[i] * v[i + 1];
        rr += ti * ti;
      }
      ok = std::sqrt(rr) <= 1e-11 * scale;
    }
    if (!ok)
      throw NumericsError("tridiag_eig_range: inverse iteration failed to converge");
    out.vectors.push_back(std::move(v));
  }
  return out;
}

SymEig hermitian_eig(const Matrix& a, bool want_vectors) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ConfigError("hermitian_eig: matrix must be square and nonempty");
  require_hermitian(a, "hermitian_eig");
  const std::size_t n = a.rows();

  double max_imag = 0.0;
  for (const auto& x : a.data()) max_imag = std::max(max_imag, std::abs(x.imag()));
  const bool realsym = max_imag <= 1e-14 * (1.0 + max_abs(a));

  RVec d, e;
  SymEig out;
  if (realsym) {
    std::vector<double> buf(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) buf[i * n + j] = a(i, j).real();
    std::vector<double> u;
    real_tridiagonalize(buf, n, d, e, want_vectors ? &u : nullptr);
    if (want_vectors) {
      tqli<double>(d, e, u.data(), n);
      sort_ascending<double>(d, u.data(), n);
      out.vectors = Matrix(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.vectors(i, j) = u[i * n + j];
    } else {
      tqli<double>(d, e, nullptr, 0);
      sort_ascending<double>(d, nullptr, 0);
    }
  } else {
    Matrix u;
    complex_tridiagonalize(a, d, e, want_vectors ? &u : nullptr);
    if (want_vectors) {
      tqli<cplx>(d, e, u.data().data(), n);
      sort_ascending<cplx>(d, u.data().data(), n);
      // rows of u are adjoints of eigenvectors; conjugate to get the vectors.
      out.vectors = Matrix(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.vectors(i, j) = std::conj(u(i, j));
    } else {
      tqli<cplx>(d, e, nullptr, 0);
      sort_ascending<cplx>(d, nullptr, 0);
    }
  }
  out.values = std::move(d);
  return out;
}

}  // namespace mourre
