#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "mourre/eig_complex.hpp"
#include "mourre/eig_sym.hpp"
#include "mourre/fft.hpp"
#include "mourre/solve.hpp"

using namespace mourre;

namespace {

std::uint64_t rng_state = 0x123456789abcdefULL;
double urand() {
  rng_state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = rng_state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

Matrix random_hermitian(std::size_t n, bool complex_entries) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = urand();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx v(urand(), complex_entries ? urand() : 0.0);
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }
  return a;
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier, then roots by
// Durand-Kerner. Independent of the QR path.
Vec charpoly_roots(const Matrix& a) {
  const std::size_t n = a.rows();
  Vec coef(n + 1);  // p(x) = x^n + coef[1] x^{n-1} + ... + coef[n]
  coef[0] = 1.0;
  Matrix m = a;
  for (std::size_t k = 1; k <= n; ++k) {
    cplx tr(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
    coef[k] = -tr / static_cast<double>(k);
    if (k == n) break;
    Matrix mk = m;
    for (std::size_t i = 0; i < n; ++i) mk(i, i) += coef[k];
    m = multiply(a, mk);
  }
  auto eval = [&](cplx x) {
    cplx p(1.0, 0.0);
    for (std::size_t k = 1; k <= n; ++k) p = p * x + coef[k];
    return p;
  };
  Vec z(n);
  cplx seed(0.4, 0.9);
  cplx w(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    w *= seed;
    z[i] = w;
  }
  for (int it = 0; it < 500; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx den(1.0, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= (z[i] - z[j]);
      const cplx step = eval(z[i]) / den;
      z[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-13) break;
  }
  std::sort(z.begin(), z.end(), [](cplx a_, cplx b_) {
    if (a_.real() != b_.real()) return a_.real() < b_.real();
    return a_.imag() < b_.imag();
  });
  return z;
}

}  // namespace

TEST_CASE("sine transform on a basis vector") {
  Vec v(4, cplx(0.0, 0.0));
  v[0] = 1.0;
  const Vec s = sine_transform(v);
  for (int j = 1; j <= 4; ++j)
    CHECK(std::abs(s[j - 1] - std::sqrt(2.0 / 5.0) * std::sin(j * kPi / 5.0)) < 1e-14);
}

TEST_CASE("sine transform concentrates eigenmodes and preserves norm") {
  const std::size_t n = 37;
  const int k = 5;
  Vec v(n);
  for (std::size_t j = 1; j <= n; ++j)
    v[j - 1] = std::sin(k * kPi * static_cast<double>(j) / (n + 1));
  const Vec s = sine_transform(v);
  for (std::size_t l = 1; l <= n; ++l)
    if (static_cast<int>(l) != k) CHECK(std::abs(s[l - 1]) < 1e-12 * norm2(v));
  CHECK(std::abs(s[k - 1]) > 1e-6);

  Vec r(n);
  for (auto& x : r) x = cplx(urand(), urand());
  CHECK(norm2(sine_transform(r)) == doctest::Approx(norm2(r)).epsilon(1e-12));
}

TEST_CASE("sine transform is an involution; fast path matches direct") {
  for (std::size_t n : {5, 31, 40, 63, 100}) {
    Vec v(n);
    for (auto& x : v) x = cplx(urand(), urand());
    const Vec once = sine_transform(v);
    const Vec twice = sine_transform(once);
    const Vec fast = sine_transform_fast(v);
    double d2 = 0.0, df = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2 = std::max(d2, std::abs(twice[i] - v[i]));
      df = std::max(df, std::abs(fast[i] - once[i]));
    }
    CHECK(d2 < 1e-12 * (1.0 + norm2(v)));
    CHECK(df < 1e-12 * (1.0 + norm2(v)));
  }
}

TEST_CASE("tridiagonal eigenvalues match the closed-form Dirichlet spectrum") {
  const std::size_t n = 100;
  const double h = 0.05;
  RVec d(n, 2.0 / (h * h)), e(n - 1, -1.0 / (h * h));
  SymEig eig = tridiag_eig(d, e, false);
  for (std::size_t j = 1; j <= n; ++j) {
    const double exact = (2.0 - 2.0 * std::cos(j * kPi / (n + 1))) / (h * h);
    CHECK(eig.values[j - 1] == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("selected tridiagonal eigenpairs agree with the full solve") {
  const std::size_t n = 400;
  RVec d(n), e(n - 1);
  for (std::size_t i = 0; i < n; ++i) d[i] = 2.0 + 0.01 * std::sin(3.0 * i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = -1.0 + 0.005 * std::cos(2.0 * i);
  SymEig full = tridiag_eig(d, e, true);
  // endpoints at midpoints between adjacent eigenvalues, away from the spectrum
  auto midpoint_near = [&](double target) {
    std::size_t i = 0;
    while (i + 1 < n && full.values[i + 1] < target) ++i;
    return 0.5 * (full.values[i] + full.values[i + 1]);
  };
  const double lo = midpoint_near(1.0), hi = midpoint_near(2.0);
  SelectedEig sel = tridiag_eig_range(d, e, lo, hi, true);
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (full.values[i] > lo && full.values[i] <= hi) {
      REQUIRE(cnt < sel.values.size());
      CHECK(sel.values[cnt] == doctest::Approx(full.values[i]).epsilon(1e-10));
      ++cnt;
    }
  CHECK(cnt == sel.values.size());
  // residuals
  const double scale = 4.1;
  for (std::size_t t = 0; t < sel.values.size(); ++t) {
    const RVec& v = sel.vectors[t];
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ti = d[i] * v[i] - sel.values[t] * v[i];
      if (i > 0) ti += e[i - 1] * v[i - 1];
      if (i + 1 < n) ti += e[i] * v[i + 1];
      rr += ti * ti;
    }
    CHECK(std::sqrt(rr) < 1e-10 * scale);
  }
}

TEST_CASE("hermitian_eig on trivial matrices") {
  Matrix a(3, 3);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  SymEig eig = hermitian_eig(a);
  CHECK(eig.values[0] == doctest::Approx(1.0));
  CHECK(eig.values[1] == doctest::Approx(2.0));
  CHECK(eig.values[2] == doctest::Approx(3.0));
  CHECK(std::abs(eig.vectors(0, 1)) == doctest::Approx(1.0));

  Matrix b(2, 2);
  b(0, 1) = 1.0;
  b(1, 0) = 1.0;
  SymEig be = hermitian_eig(b);
  CHECK(be.values[0] == doctest::Approx(-1.0));
  CHECK(be.values[1] == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
  Matrix a(2, 2);
  a(0, 1) = 1.0;
  a(1, 0) = 2.0;
  CHECK_THROWS_AS(hermitian_eig(a), ConfigError);
}

TEST_CASE("hermitian_eig: residuals, orthonormality, reconstruction") {
  for (std::size_t n : {7, 40, 120}) {
    for (bool cplx_entries : {false, true}) {
      Matrix a = random_hermitian(n, cplx_entries);
      SymEig eig = hermitian_eig(a);
      const double nrm2 =
          std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
      // residuals
      for (std::size_t i = 0; i < n; ++i) {
        Vec v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = eig.vectors(i, k);
        Vec av = matvec(a, v);
        axpy(cplx(-eig.values[i], 0.0), v, av);
        CHECK(norm2(av) < 1e-10 * (nrm2 + 1.0));
      }
      // Gram
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          cplx g(0.0, 0.0);
          for (std::size_t k = 0; k < n; ++k)
            g += std::conj(eig.vectors(i, k)) * eig.vectors(j, k);
          CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
      // reconstruction
      Matrix ql(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          ql(k, i) = eig.vectors(i, k) * eig.values[i];  // columns Q Lambda
      Matrix qh(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) qh(i, k) = std::conj(eig.vectors(i, k));
      Matrix rec = multiply(ql, qh);
      double dmax = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dmax = std::max(dmax, std::abs(rec(i, j) - a(i, j)));
      CHECK(dmax < 1e-9 * (max_abs(a) + 1.0));
    }
  }
}

TEST_CASE("hermitian_eig reconstruction at dim 500") {
  Matrix a = random_hermitian(500, true);
  SymEig eig = hermitian_eig(a);
  // spot-check residuals on a few vectors
  for (std::size_t i : {0UL, 250UL, 499UL}) {
    Vec v(500);
    for (std::size_t k = 0; k < 500; ++k) v[k] = eig.vectors(i, k);
    Vec av = matvec(a, v);
    axpy(cplx(-eig.values[i], 0.0), v, av);
    const double nrm = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
    CHECK(norm2(av) < 1e-10 * (nrm + 1.0));
  }
}

TEST_CASE("sine basis diagonalizes the Dirichlet second difference") {
  const std::size_t n = 64;
  const double h = 0.1;
  // apply T to each sine mode and check it is scaled by the dispersion value
  for (std::size_t l : {1UL, 7UL, 33UL, 64UL}) {
    Vec v(n);
    for (std::size_t j = 1; j <= n; ++j)
      v[j - 1] = std::sin(l * kPi * static_cast<double>(j) / (n + 1));
    const double lam = (2.0 - 2.0 * std::cos(l * kPi / (n + 1))) / (h * h);
    for (std::size_t j = 0; j < n; ++j) {
      cplx tv = 2.0 * v[j];
      if (j > 0) tv -= v[j - 1];
      if (j + 1 < n) tv -= v[j + 1];
      tv /= h * h;
      CHECK(std::abs(tv - lam * v[j]) < 1e-10 * (1.0 + std::abs(lam)));
    }
  }
}

TEST_CASE("general_eig on trivial matrices") {
  Matrix a(2, 2);
  a(0, 0) = cplx(0.0, 1.0);
  a(1, 1) = cplx(0.0, -1.0);
  GenEig eig = general_eig(a);
  CHECK(std::abs(eig.values[0] - cplx(0.0, -1.0)) < 1e-12);
  CHECK(std::abs(eig.values[1] - cplx(0.0, 1.0)) < 1e-12);
  CHECK_FALSE(eig.defective);

  Matrix j2(2, 2);
  j2(0, 1) = 1.0;
  GenEig je = general_eig(j2);
  CHECK(std::abs(je.values[0]) < 1e-12);
  CHECK(std::abs(je.values[1]) < 1e-12);
  CHECK(je.defective);
}

TEST_CASE("general_eig matches the characteristic-polynomial oracle") {
  const std::size_t n = 8;
  Matrix a(n, n);
  for (auto& x : a.data()) x = cplx(urand(), urand());
  GenEig eig = general_eig(a);
  Vec oracle = charpoly_roots(a);
  REQUIRE(eig.values.size() == oracle.size());
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(eig.values[i] - oracle[i]) < 1e-6);
  CHECK(eig.max_residual < 1e-8 * frob(a));
}

TEST_CASE("shifted_solve on diagonal matrices") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Vec b = {1.0, 0.0};
  Vec x = shifted_solve(a, cplx(0.0, 1.0), b);
  CHECK(std::abs(x[0] - 1.0 / cplx(1.0, -1.0)) < 1e-12);
  CHECK(std::abs(x[1]) < 1e-12);

  Matrix z(1, 1);
  Vec one = {1.0};
  Vec y = shifted_solve(z, cplx(0.0, 2.0), one);
  CHECK(std::abs(y[0] - cplx(0.0, 0.5)) < 1e-14);
}

TEST_CASE("shifted_solve matches a dense-inverse oracle on the Dirichlet Laplacian") {
  const std::size_t n = 60;
  const double h = 0.2;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 2.0 / (h * h);
    if (i + 1 < n) {
      a(i, i + 1) = -1.0 / (h * h);
      a(i + 1, i) = -1.0 / (h * h);
    }
  }
  const cplx zshift(0.5, 0.01);
  Vec b(n);
  for (auto& x : b) x = cplx(urand(), urand());
  Vec x = shifted_solve(a, zshift, b);

  // oracle: direct Gaussian inverse of the full dense shifted matrix via
  // column-by-column eliminations on an augmented system
  Matrix m = a;
  for (std::size_t i = 0; i < n; ++i) m(i, i) -= zshift;
  // Gauss-Jordan
  Matrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(aug(i, k)) > std::abs(aug(p, k))) p = i;
    if (p != k)
      for (std::size_t j = 0; j < 2 * n; ++j) std::swap(aug(k, j), aug(p, j));
    const cplx pivot = aug(k, k);
    for (std::size_t j = 0; j < 2 * n; ++j) aug(k, j) /= pivot;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const cplx f = aug(i, k);
      if (f == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < 2 * n; ++j) aug(i, j) -= f * aug(k, j);
    }
  }
  Vec oracle(n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) oracle[i] += aug(i, n + j) * b[j];
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(x[i] - oracle[i]));
  CHECK(dmax < 1e-9 * norm2(b));
}

TEST_CASE("shifted_solve linearity and singular-shift rejection") {
  Matrix a = random_hermitian(12, true);
  Vec b1(12), b2(12);
  for (auto& x : b1) x = cplx(urand(), urand());
  for (auto& x : b2) x = cplx(urand(), urand());
  const cplx alpha(0.7, -0.3);
  const cplx zshift(0.2, 0.4);
  Vec lhs(12);
  {
    Vec combo(12);
    for (std::size_t i = 0; i < 12; ++i) combo[i] = alpha * b1[i] + b2[i];
    lhs = shifted_solve(a, zshift, combo);
  }
  Vec x1 = shifted_solve(a, zshift, b1);
  Vec x2 = shifted_solve(a, zshift, b2);
  for (std::size_t i = 0; i < 12; ++i)
    CHECK(std::abs(lhs[i] - (alpha * x1[i] + x2[i])) < 1e-10 * (norm2(b1) + norm2(b2)));

  Matrix d(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  Vec b = {1.0, 1.0};
  CHECK_THROWS_AS(shifted_solve(d, cplx(1.0, 0.0), b), NumericsError);
}

TEST_CASE("bordered tridiagonal solve agrees with the dense solver") {
  const std::size_t n = 50, m = 2;
  Vec sub(n - 1), diag(n), sup(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag[i] = cplx(2.0 + 0.1 * i, 0.3);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sub[i] = cplx(-1.0, 0.05);
    sup[i] = cplx(-1.0, -0.02);
  }
  Matrix c(n, m), bm(m, n), d(m, m);
  for (auto& x : c.data()) x = cplx(urand(), urand());
  for (auto& x : bm.data()) x = cplx(urand(), urand());
  d(0, 0) = 3.0;
  d(1, 1) = cplx(4.0, 0.1);
  d(0, 1) = cplx(0.2, 0.0);
  d(1, 0) = cplx(0.1, 0.0);
  const cplx zshift(0.7, 0.2);

  BorderedShiftLU blu(sub, diag, sup, c, bm, d, zshift);
  Vec rhs(n + m);
  for (auto& x : rhs) x = cplx(urand(), urand());
  Vec x = blu.solve(rhs);

  Matrix full(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i) full(i, i) = diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    full(i + 1, i) = sub[i];
    full(i, i + 1) = sup[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) full(i, n + j) = c(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) full(n + i, j) = bm(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) full(n + i, n + j) = d(i, j);
  for (std::size_t i = 0; i < n + m; ++i) full(i, i) -= zshift;
  DenseLU lu(full);
  Vec oracle = lu.solve(rhs);
  for (std::size_t i = 0; i < n + m; ++i) CHECK(std::abs(x[i] - oracle[i]) < 1e-9);
}
