#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mourre/eig_sym.hpp"
#include "mourre/model.hpp"

using namespace mourre;

TEST_CASE("build_grid arithmetic and validation") {
  Grid g = build_grid(1.0, 201.0, 3999);
  CHECK(g.h == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(g.node(0) == doctest::Approx(1.05).epsilon(1e-14));

  Grid g2 = build_grid(0.0, 1.0, 3);
  CHECK(g2.h == doctest::Approx(0.25));
  CHECK(g2.node(0) == doctest::Approx(0.25));
  CHECK(g2.node(1) == doctest::Approx(0.5));
  CHECK(g2.node(2) == doctest::Approx(0.75));

  CHECK_THROWS_AS(build_grid(1.0, 1.0, 10), ConfigError);
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 2), ConfigError);
}

TEST_CASE("assemble_h0 stencil and block structure") {
  ModelConfig cfg = default_model(build_grid(0.0, 3.0, 2));  // h = 1
  cfg.discrete_levels = {1.0};
  cfg.couplings = {make_profile("exp")};
  cfg.discrete_block = Matrix(1, 1);
  ModelOperator h0 = assemble_h0(cfg);
  Matrix dense = h0.dense();
  CHECK(dense(0, 0) == cplx(2.25, 0.0));
  CHECK(dense(0, 1) == cplx(-1.0, 0.0));
  CHECK(dense(1, 0) == cplx(-1.0, 0.0));
  CHECK(dense(1, 1) == cplx(2.25, 0.0));
  CHECK(dense(2, 2) == cplx(1.0, 0.0));
  CHECK(dense(0, 2) == cplx(0.0, 0.0));

  // discrete basis vector is an exact eigenvector with eigenvalue k
  Vec e(3, cplx(0.0, 0.0));
  e[2] = 1.0;
  Vec he = h0.apply(e);
  CHECK(std::abs(he[2] - cfg.k) < 1e-15);
  CHECK(std::abs(he[0]) + std::abs(he[1]) == 0.0);
}

TEST_CASE("lowest channel eigenvalue approaches the threshold formula") {
  ModelConfig cfg = default_model(build_grid(1.0, 201.0, 3999));
  ModelOperator h0 = assemble_h0(cfg);
  RVec e(h0.n() - 1, h0.chan_off);
  SelectedEig sel = tridiag_eig_range(h0.chan_diag, e, 0.2499, 0.2525, false);
  REQUIRE(sel.values.size() >= 1);
  const double expected = 0.25 + std::pow(kPi / 200.0, 2.0);
  CHECK(sel.values.front() == doctest::Approx(expected).epsilon(2e-5));
  CHECK(sel.values.front() == doctest::Approx(0.250247).epsilon(1e-4));
}

TEST_CASE("threshold convergence is second order in h") {
  const double expected = 0.25 + std::pow(kPi / 40.0, 2.0);
  RVec errs;
  for (std::size_t n : {199, 399, 799}) {
    ModelConfig cfg = default_model(build_grid(1.0, 41.0, n));
    ModelOperator h0 = assemble_h0(cfg);
    RVec e(h0.n() - 1, h0.chan_off);
    SelectedEig sel = tridiag_eig_range(h0.chan_diag, e, 0.2, expected + 0.002, false);
    REQUIRE(!sel.values.empty());
    errs.push_back(std::abs(sel.values.front() - expected));
  }
  // Richardson: each halving of h divides the error by ~4
  CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.15));
  CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("assemble_potential: coupling embedding and diagonal") {
  ModelConfig cfg = default_model(build_grid(1.0, 21.0, 399));
  PotentialOperator v = assemble_potential(cfg);
  const double sqrth = std::sqrt(cfg.grid.h);
  for (std::size_t j : {0UL, 10UL, 100UL}) {
    const double r = cfg.grid.node(j);
    CHECK(std::abs(v.w(j, 0) - sqrth * std::exp(-(r - 1.0))) < 1e-15);
    CHECK(std::abs(v.w(j, 1)) == 0.0);
    CHECK(v.v_diag[j] == 0.0);
  }

  // sup over grid of |v(r)| L(r) for the power potential sits at the first node
  ModelConfig cfg2 = cfg;
  cfg2.potential = make_profile("power", 1.5);
  PotentialOperator v2 = assemble_potential(cfg2);
  WeightL w = assemble_weight(cfg.grid, cfg.m());
  double best = 0.0;
  std::size_t arg = 999;
  for (std::size_t j = 0; j < cfg.grid.n; ++j) {
    const double val = std::abs(v2.v_diag[j]) * w.diag[j];
    if (val > best) {
      best = val;
      arg = j;
    }
  }
  CHECK(arg == 0);
  CHECK(best == doctest::Approx(std::pow(1.0 + cfg.grid.node(0), -0.5)).epsilon(1e-12));
}

TEST_CASE("coupling norm approaches the continuum L2 norm") {
  // || V ||_2 for the pure exponential coupling -> 1/sqrt(2) as h -> 0
  ModelConfig cfg = default_model(build_grid(1.0, 21.0, 9999));  // h = 0.002
  PotentialOperator v = assemble_potential(cfg);
  double nrm2 = 0.0;
  for (std::size_t j = 0; j < cfg.grid.n; ++j) nrm2 += std::norm(v.w(j, 0));
  CHECK(std::abs(std::sqrt(nrm2) - 1.0 / std::sqrt(2.0)) < 1e-3);
}

TEST_CASE("quadrature consistency of the coupling embedding") {
  // <w_grid, f_grid> converges to int w f dr at O(h^2) for smooth Dirichlet f
  auto inner = [&](std::size_t n) {
    Grid g = build_grid(1.0, 21.0, n);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double s = g.node(j) - 1.0;
      acc += g.h * std::exp(-s) * std::sin(kPi * s / 20.0);
    }
    return acc;
  };
  const double fine = inner(51199);
  const double e1 = std::abs(inner(799) - fine);
  const double e2 = std::abs(inner(1599) - fine);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("weight L is affine on the channel and unit on the discrete sector") {
  Grid g = build_grid(1.0, 21.0, 19);
  WeightL w = assemble_weight(g, 2);
  CHECK(w.diag[0] == doctest::Approx(1.0 + g.node(0)));
  CHECK(w.diag[g.n] == 1.0);
  CHECK(w.diag[g.n + 1] == 1.0);
  for (std::size_t j = 0; j + 1 < g.n; ++j) CHECK(w.diag[j] <= w.diag[j + 1]);
}

TEST_CASE("complex_scale: identity at theta = 0") {
  ModelConfig cfg = default_model(build_grid(1.0, 41.0, 199));
  cfg.lambda = 0.05;
  cfg.potential = make_profile("power", 1.5);
  ScaledOperator sc = complex_scale(cfg, 0.0);
  Matrix lhs = sc.dense();
  Matrix rhs = dense_h_lambda(assemble_h0(cfg), assemble_potential(cfg), cfg.lambda);
  double dmax = 0.0;
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t j = 0; j < lhs.cols(); ++j)
      dmax = std::max(dmax, std::abs(lhs(i, j) - rhs(i, j)));
  CHECK(dmax < 1e-13 * (1.0 + max_abs(rhs)));
}

TEST_CASE("complex_scale: k survives exactly at lambda = 0 and the continuum rotates") {
  ModelConfig cfg = default_model(build_grid(1.0, 41.0, 199));
  cfg.lambda = 0.0;
  const double theta = 0.3;
  ScaledOperator sc = complex_scale(cfg, theta);
  Vec e(sc.dim(), cplx(0.0, 0.0));
  e[sc.n] = 1.0;
  Matrix dense = sc.dense();
  Vec he = matvec(dense, e);
  Vec res = he;
  axpy(cplx(-cfg.k, 0.0), e, res);
  CHECK(norm2(res) < 1e-12);

  // channel eigenvalues: arg(z - 1/4) = -2 theta exactly for the scaled kinetic part
  for (std::size_t l : {0UL, 50UL, 150UL}) {
    const double t =
        (2.0 - 2.0 * std::cos((l + 1) * kPi / 200.0)) / (cfg.grid.h * cfg.grid.h);
    const cplx z = std::exp(cplx(0.0, -2.0 * theta)) * t + 0.25;
    CHECK(std::arg(z - 0.25) == doctest::Approx(-2.0 * theta).epsilon(1e-12));
  }
}

TEST_CASE("complex_scale rejects bad inputs") {
  ModelConfig cfg = default_model(build_grid(1.0, 41.0, 199));
  CHECK_THROWS_AS(complex_scale(cfg, 1.0), ConfigError);  // >= pi/4
  ModelConfig bad = cfg;
  bad.couplings[0].analytic = false;
  CHECK_THROWS_AS(complex_scale(bad, 0.3), ConfigError);
}

TEST_CASE("H_lambda stays Hermitian; channel spectrum sits above the threshold") {
  ModelConfig cfg = default_model(build_grid(1.0, 41.0, 199));
  ModelOperator h0 = assemble_h0(cfg);
  PotentialOperator v = assemble_potential(cfg);
  Matrix hl = dense_h_lambda(h0, v, 0.37);
  CHECK(hermitian_defect(hl) <= 1e-12 * (1.0 + max_abs(hl)));

  SymEig eig = hermitian_eig(h0.dense(), false);
  std::size_t above = 0;
  for (double x : eig.values)
    if (x > 0.25) ++above;
  CHECK(above == eig.values.size());
}

TEST_CASE("model config validation") {
  ModelConfig cfg = default_model(build_grid(1.0, 41.0, 199));
  cfg.k = 0.2;  // below threshold
  cfg.discrete_levels[0] = 0.2;
  CHECK_THROWS_AS(assemble_h0(cfg), ConfigError);

  ModelConfig cfg2 = default_model(build_grid(1.0, 41.0, 199));
  cfg2.discrete_levels = {2.0, 5.0};  // first level must equal k
  CHECK_THROWS_AS(assemble_h0(cfg2), ConfigError);

  CHECK_THROWS_AS(make_profile("nope"), ConfigError);
}
