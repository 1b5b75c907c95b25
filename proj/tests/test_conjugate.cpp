#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mourre/conjugate.hpp"
#include "mourre/eig_sym.hpp"
#include "mourre/fgr.hpp"

using namespace mourre;

namespace {

std::uint64_t rng_state = 0xfeedbeefULL;
double urand() {
  rng_state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = rng_state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

TEST_CASE("symbol: identity inside the cap, supported in 4Y, odd, bounded") {
  CHECK_THROWS_AS(build_phi(0.5), ConfigError);
  SymbolPhi p2 = build_phi(2.0);
  CHECK(p2(0.0) == 0.0);
  CHECK(p2(1.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(p2(-1.5) == doctest::Approx(-1.5).epsilon(1e-15));
  SymbolPhi p1 = build_phi(1.0);
  CHECK(p1(5.0) == 0.0);
  for (double x = -12.0; x <= 12.0; x += 0.03) {
    CHECK(p2(x) == -p2(-x));
    CHECK(std::abs(p2(x)) <= 2.0 * 2.0 + 1e-12);
    if (std::abs(x) >= 8.0) CHECK(p2(x) == 0.0);
  }
}

TEST_CASE("cutoff ramps from 0 to 1") {
  CutoffChi chi;
  CHECK(chi(1.5, 1.0) == 0.0);
  CHECK(chi(4.5, 1.0) == 1.0);
  double prev = 0.0;
  for (double r = 2.0; r <= 4.0; r += 0.05) {
    const double v = chi(r, 1.0);
    CHECK(v >= prev - 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("fourier_multiplier: identity symbol, dispersion symbol, momentum cap") {
  Grid g = build_grid(1.0, 21.0, 63);
  RVec ones(g.n, 1.0);
  Matrix id = fourier_multiplier(g, ones);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      CHECK(std::abs(id(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);

  // dispersion samples reproduce the second-difference matrix exactly
  RVec disp(g.n);
  for (std::size_t l = 0; l < g.n; ++l)
    disp[l] = (2.0 - 2.0 * std::cos(g.xi(l) * g.h)) / (g.h * g.h);
  Matrix t = fourier_multiplier(g, disp);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      double expect = 0.0;
      if (i == j) expect = 2.0 / (g.h * g.h);
      if (i + 1 == j || j + 1 == i) expect = -1.0 / (g.h * g.h);
      CHECK(std::abs(t(i, j) - expect) < 1e-10 / (g.h * g.h));
    }

  // a symbol that is x everywhere on the lattice equals the momentum-magnitude operator
  const double xi_max = g.xi(g.n - 1);
  SymbolPhi big = build_phi(xi_max + 1.0);
  Matrix m1 = fourier_multiplier(g, big.sampled(g));
  RVec mag(g.n);
  for (std::size_t l = 0; l < g.n; ++l) mag[l] = g.xi(l);
  Matrix m2 = fourier_multiplier(g, mag);
  double dmax = 0.0;
  for (std::size_t i = 0; i < g.n * g.n; ++i)
    dmax = std::max(dmax, std::abs(m1.data()[i] - m2.data()[i]));
  CHECK(dmax < 1e-12 * (1.0 + max_abs(m2)));

  RVec bad(g.n - 1, 1.0);
  CHECK_THROWS_AS(fourier_multiplier(g, bad), ConfigError);
}

TEST_CASE("assembled S: Hermitian, channel-confined, real form values") {
  Grid g = build_grid(1.0, 41.0, 255);
  CutoffChi chi;
  SOperator s(g, 8.0, chi, 2);
  Matrix sd = s.dense();
  CHECK(hermitian_defect(sd) <= 1e-12 * (1.0 + max_abs(sd)));

  // discrete sector annihilated exactly
  for (std::size_t j = 0; j < 2; ++j) {
    Vec e(s.dim(), cplx(0.0, 0.0));
    e[g.n + j] = 1.0;
    CHECK(norm2(s.apply(e)) == 0.0);
  }

  // <u, S u> real for random complex u
  for (int t = 0; t < 5; ++t) {
    Vec u(s.dim());
    for (auto& x : u) x = cplx(urand(), urand());
    const cplx form = dot(u, s.apply(u));
    CHECK(std::abs(form.imag()) < 1e-10 * (1.0 + std::abs(form)));
  }

  // chi == 0 kills everything
  CutoffChi chi0;
  chi0.a0 = 100.0;  // ramp beyond R_max: chi = 0 on the whole grid
  chi0.a1 = 200.0;
  SOperator s0(g, 8.0, chi0, 0);
  Vec u(g.n);
  for (auto& x : u) x = cplx(urand(), 0.0);
  CHECK(norm2(s0.apply(u)) == 0.0);

  // dense and matrix-free applications agree
  Vec x(s.dim());
  for (auto& xx : x) xx = cplx(urand(), urand());
  Vec y1 = s.apply(x);
  Vec y2 = matvec(sd, x);
  double dd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dd = std::max(dd, std::abs(y1[i] - y2[i]));
  CHECK(dd < 1e-10 * (1.0 + norm2(y1)));
}

TEST_CASE("micro-localization is inert below the cap") {
  Grid g = build_grid(1.0, 41.0, 255);
  CutoffChi chi;
  SOperator s8(g, 8.0, chi, 0);
  SOperator s16(g, 16.0, chi, 0);
  // test states with momentum well below the smaller cap
  for (double xi : {0.5, 0.9, 1.5}) {
    Vec u(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double r = g.node(j);
      const double env = std::exp(-0.02 * (r - 20.0) * (r - 20.0));
      u[j] = env * std::sin(xi * (r - g.c));
    }
    const cplx f8 = dot(u, s8.apply(u));
    const cplx f16 = dot(u, s16.apply(u));
    CHECK(std::abs(f8 - f16) < 1e-6 * (1.0 + std::abs(f8)));
  }
}

TEST_CASE("commutator basics") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Matrix s(2, 2);
  s(0, 1) = 1.0;
  s(1, 0) = 1.0;
  Matrix c = commutator(a, s);
  // i(AS - SA) = i [[0, -1],[1, 0]] = [[0, -i],[i, 0]]
  CHECK(std::abs(c(0, 0)) == 0.0);
  CHECK(std::abs(c(0, 1) - cplx(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(c(1, 0) - cplx(0.0, 1.0)) < 1e-15);
  CHECK(hermitian_defect(c) < 1e-15);

  Matrix z = commutator(a, a);
  CHECK(max_abs(z) == 0.0);

  Matrix wrong(3, 3);
  CHECK_THROWS_AS(commutator(a, wrong), ConfigError);
}

TEST_CASE("commutator with the dilation pair reproduces 4(T - 1/4) on packets") {
  // [T_free, i(MR+RM)] ~ 4 T_free - 1 on low-frequency interior states
  Grid g = build_grid(1.0, 81.0, 799);
  CutoffChi chi;
  SOperator s(g, 40.0, chi, 0);  // cap far above the test momenta

  const double h2 = g.h * g.h;
  auto apply_t = [&](const Vec& v) {
    Vec o(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      cplx acc = (2.0 / h2 + 0.25) * v[j];
      if (j > 0) acc -= v[j - 1] / h2;
      if (j + 1 < g.n) acc -= v[j + 1] / h2;
      o[j] = acc;
    }
    return o;
  };
  for (double xi : {0.4, 0.8, 1.2}) {
    Vec u(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double r = g.node(j);
      const double env = std::exp(-0.01 * (r - 40.0) * (r - 40.0));
      u[j] = env * std::exp(cplx(0.0, xi * r));
    }
    const double nu = norm2(u);
    for (auto& x : u) x /= nu;
    // <u, [T, iS] u> = -2 Im <T u, S u>
    const Vec tu = apply_t(u);
    const Vec su = s.apply(u);
    const double lhs = -2.0 * dot(tu, su).imag();
    const double rhs = 4.0 * (dot(u, tu).real() - 0.25);
    CHECK(lhs == doctest::Approx(rhs).epsilon(0.02));
  }
}

TEST_CASE("leading-term identity: small in the bulk window, order one on ramp states") {
  Grid g = build_grid(1.0, 81.0, 511);
  CutoffChi chi;
  LeadingTermReport rep = leading_term_residual(g, 8.0, chi);
  CHECK(rep.states > 10);
  CHECK(rep.ratio() < 0.08);

  // residual drops roughly linearly with h
  Grid g2 = build_grid(1.0, 81.0, 1023);
  LeadingTermReport rep2 = leading_term_residual(g2, 8.0, chi);
  CHECK(rep2.ratio() < 0.75 * rep.ratio());

  // doubling Upsilon does not blow up the compressed residual (recorded trend)
  LeadingTermReport rep16 = leading_term_residual(g, 16.0, chi);
  CHECK(rep16.ratio() < 2.0 * rep.ratio());

  // states sitting on the cutoff ramp see an order-one remainder
  SOperator s(g, 8.0, chi, 0);
  const RVec chiv = chi.sampled(g);
  const double h2 = g.h * g.h;
  auto apply_dsq = [&](const Vec& v) {
    Vec o(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      cplx acc = -2.0 * v[j];
      if (j > 0) acc += v[j - 1];
      if (j + 1 < g.n) acc += v[j + 1];
      o[j] = acc / h2;
    }
    return o;
  };
  Vec u(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double r = g.node(j);
    const double env = std::exp(-2.0 * (r - 3.0) * (r - 3.0));  // on the ramp
    u[j] = env * std::sin(0.9 * (r - g.c));
  }
  const double nu = norm2(u);
  for (auto& x : u) x /= nu;
  const Vec du = apply_dsq(u);
  const Vec su = s.apply(u);
  const cplx lhs = dot(du, su) - dot(su, du);
  // rhs = <u, 4 X D M X u>
  Vec xu(g.n);
  for (std::size_t j = 0; j < g.n; ++j) xu[j] = chiv[j] * u[j];
  Vec mu = s.apply_multiplier(xu);
  Vec dmu(g.n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < g.n; ++j) {
    cplx acc(0.0, 0.0);
    if (j + 1 < g.n) acc += mu[j + 1];
    if (j > 0) acc -= mu[j - 1];
    dmu[j] = acc / (2.0 * g.h);
  }
  cplx rhs(0.0, 0.0);
  for (std::size_t j = 0; j < g.n; ++j) rhs += std::conj(u[j]) * 4.0 * chiv[j] * dmu[j];
  CHECK(std::abs(lhs - rhs) > 0.05 * std::abs(lhs));
}

TEST_CASE("S_hat assembly: trivial cases and rank bound") {
  Grid g = build_grid(1.0, 21.0, 127);
  ModelConfig cfg = default_model(g);
  ModelOperator h0 = assemble_h0(cfg);
  PotentialOperator v = assemble_potential(cfg);
  CutoffChi chi;
  SOperator s(g, 8.0, chi, cfg.m());
  Matrix sd = s.dense();
  std::vector<Vec> pb = k_projector_basis(h0);

  Matrix zero(h0.dim(), h0.dim());
  Matrix shat0 = assemble_s_hat(sd, pb, zero, 0.0, 0.5);
  // lambda = 0 (or B = 0): S_hat = Pbar S Pbar = S here since S kills the
  // discrete sector
  double dmax = 0.0;
  for (std::size_t i = 0; i < sd.data().size(); ++i)
    dmax = std::max(dmax, std::abs(shat0.data()[i] - sd.data()[i]));
  CHECK(dmax < 1e-12 * (1.0 + max_abs(sd)));

  const double eps = 0.2;  // wide; this coarse grid resolves little
  Matrix b = build_b_epsilon(h0, v, cfg.k, eps);
  Matrix shat = assemble_s_hat(sd, pb, b, 0.1, 0.5);
  CHECK(hermitian_defect(shat) <= 1e-12 * (1.0 + max_abs(shat)));
  // rank(S_hat - Pbar S Pbar) <= 2 dim P
  Matrix diff = add(shat, shat0, -1.0);
  SymEig eig = hermitian_eig(diff, false);
  std::size_t nonzero = 0;
  const double tol = 1e-10 * std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  for (double x : eig.values)
    if (std::abs(x) > tol) ++nonzero;
  CHECK(nonzero <= 2 * pb.size());
}
