#include "mourre/fgr.hpp"

#include <cmath>

#include "mourre/eig_sym.hpp"
#include "mourre/tridiag_lu.hpp"

namespace mourre {

std::vector<Vec> k_projector_basis(const ModelOperator& h0) {
  std::vector<Vec> basis;
  const std::size_t n = h0.n();
  for (std::size_t j = 0; j < h0.m(); ++j) {
    if (h0.disc[j] == h0.config.k) {
      Vec e(h0.dim(), cplx(0.0, 0.0));
      e[n + j] = 1.0;
      basis.push_back(std::move(e));
    }
  }
  if (basis.empty()) throw ConfigError("k_projector_basis: no discrete level equals k");
  return basis;
}

double level_spacing_near(const ModelOperator& h0, double k) {
  RVec d = h0.chan_diag;
  RVec e(h0.n() > 0 ? h0.n() - 1 : 0, h0.chan_off);
  for (double w : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    SelectedEig sel = tridiag_eig_range(d, e, k - w, k + w, false);
    if (sel.values.size() >= 2) {
      // gap between the consecutive levels bracketing k, else the adjacent
      // pair whose midpoint is nearest k
      double best_dist = 1e300, best_gap = 0.0;
      for (std::size_t i = 0; i + 1 < sel.values.size(); ++i) {
        if (sel.values[i] <= k && k <= sel.values[i + 1])
          return sel.values[i + 1] - sel.values[i];
        const double mid = 0.5 * (sel.values[i] + sel.values[i + 1]);
        if (std::abs(mid - k) < best_dist) {
          best_dist = std::abs(mid - k);
          best_gap = sel.values[i + 1] - sel.values[i];
        }
      }
      return best_gap;
    }
  }
  throw NumericsError("level_spacing_near: no channel levels found near k");
}

namespace {

// Apply ((T - k)^2 + eps^2)^{-1} on the channel via two complex tridiagonal
// solves; the discrete non-k part is diagonal; ran P is annihilated.
struct FEpsSolver {
  const ModelOperator& h0;
  double k, eps;
  GtLU<cplx> lu_plus;   // T - k + i eps  (channel)
  GtLU<cplx> lu_minus;  // T - k - i eps

  static GtLU<cplx> make(const ModelOperator& h0, cplx z) {
    const std::size_t n = h0.n();
    Vec d(n), off(n > 1 ? n - 1 : 0, cplx(h0.chan_off, 0.0));
    for (std::size_t i = 0; i < n; ++i) d[i] = h0.chan_diag[i] - z;
    return GtLU<cplx>(off, d, off);
  }

  FEpsSolver(const ModelOperator& h, double k_, double eps_)
      : h0(h), k(k_), eps(eps_),
        lu_plus(make(h, cplx(k_, eps_))),
        lu_minus(make(h, cplx(k_, -eps_))) {}

  Vec apply(const Vec& x) const {
    const std::size_t n = h0.n(), m = h0.m();
    Vec chan(x.begin(), x.begin() + n);
    lu_plus.solve_inplace(chan);
    lu_minus.solve_inplace(chan);
    Vec out(n + m, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) out[i] = chan[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double mu = h0.disc[j];
      if (mu == k) continue;  // ran P projected out
      const double den = (mu - k) * (mu - k) + eps * eps;
      out[n + j] = x[n + j] / den;
    }
    return out;
  }
};

void check_eps_floor(const ModelOperator& h0, double k, double eps) {
  const double spacing = level_spacing_near(h0, k);
  if (eps < 2.0 * spacing)
    throw ResolutionError("epsilon " + std::to_string(eps) +
                          " is below the resolution floor 2 * " +
                          std::to_string(spacing) +
                          " of the truncated continuum near k");
}

}  // namespace

Vec f_epsilon_apply(const ModelOperator& h0, double k, double eps, const Vec& x) {
  if (x.size() != h0.dim()) throw ConfigError("f_epsilon_apply: size mismatch");
  if (!(eps > 0.0)) throw ConfigError("f_epsilon_apply: eps must be positive");
  check_eps_floor(h0, k, eps);
  return FEpsSolver(h0, k, eps).apply(x);
}

FgrSample fgr_sample(const ModelOperator& h0, const PotentialOperator& v, double k,
                     double eps) {
  check_eps_floor(h0, k, eps);
  const std::vector<Vec> p = k_projector_basis(h0);
  const std::size_t rank = p.size();
  FEpsSolver fs(h0, k, eps);

  std::vector<Vec> u(rank), fu(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    u[a] = v.apply(p[a]);
    fu[a] = fs.apply(u[a]);
  }
  FgrSample s;
  s.eps = eps;
  s.g = Matrix(rank, rank);
  for (std::size_t a = 0; a < rank; ++a)
    for (std::size_t b = 0; b < rank; ++b) s.g(a, b) = dot(u[a], fu[b]);
  hermitize(s.g);
  SymEig eig = hermitian_eig(s.g, false);
  s.eig_min = eig.values.front();
  s.eig_max = eig.values.back();
  s.scaled_min = eps * s.eig_min;
  s.scaled_max = eps * s.eig_max;
  return s;
}

FgrReport fgr_limit(const ModelOperator& h0, const PotentialOperator& v, double k,
                    const RVec& eps_grid) {
  if (eps_grid.size() < 6)
    throw ConfigError("fgr_limit: need at least 6 epsilon points");
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i + 1]))
      throw ConfigError("fgr_limit: epsilon grid must be increasing");

  FgrReport rep;
  rep.eps_grid = eps_grid;
  for (double eps : eps_grid) rep.samples.push_back(fgr_sample(h0, v, k, eps));

  const std::size_t rank = rep.samples.front().g.rows();
  const double tiny = 1e-14;
  // slope of log(min eig) vs log eps
  bool positive = true;
  for (const auto& s : rep.samples) positive = positive && (s.eig_min > tiny);
  if (positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double np = static_cast<double>(rep.samples.size());
    for (const auto& s : rep.samples) {
      const double x = std::log(s.eps), y = std::log(s.eig_min);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    rep.window_valid = std::abs(rep.slope + 1.0) <= 0.2;
  } else {
    rep.slope = 0.0;
    rep.window_valid = false;
  }

  // quadratic fit of eps*G entrywise: m(eps) = gamma + a eps + b eps^2
  rep.gamma = Matrix(rank, rank);
  const std::size_t np = rep.samples.size();
  double m00 = 0, m01 = 0, m02 = 0, m11 = 0, m12 = 0, m22 = 0;
  for (const auto& s : rep.samples) {
    const double e1 = s.eps, e2 = s.eps * s.eps;
    m00 += 1.0;
    m01 += e1;
    m02 += e2;
    m11 += e1 * e1;
    m12 += e1 * e2;
    m22 += e2 * e2;
  }
  // 3x3 normal-equation solve per entry
  auto solve3 = [&](cplx b0, cplx b1, cplx b2) {
    Matrix mm(3, 3);
    mm(0, 0) = m00; mm(0, 1) = m01; mm(0, 2) = m02;
    mm(1, 0) = m01; mm(1, 1) = m11; mm(1, 2) = m12;
    mm(2, 0) = m02; mm(2, 1) = m12; mm(2, 2) = m22;
    // Gaussian elimination 3x3
    Vec rhs = {b0, b1, b2};
    for (int c = 0; c < 3; ++c) {
      int p = c;
      for (int i = c + 1; i < 3; ++i)
        if (std::abs(mm(i, c)) > std::abs(mm(p, c))) p = i;
      if (p != c) {
        for (int j = 0; j < 3; ++j) std::swap(mm(c, j), mm(p, j));
        std::swap(rhs[c], rhs[p]);
      }
      for (int i = c + 1; i < 3; ++i) {
        const cplx f = mm(i, c) / mm(c, c);
        for (int j = c; j < 3; ++j) mm(i, j) -= f * mm(c, j);
        rhs[i] -= f * rhs[c];
      }
    }
    Vec sol(3);
    for (int i = 2; i >= 0; --i) {
      cplx acc = rhs[i];
      for (int j = i + 1; j < 3; ++j) acc -= mm(i, j) * sol[j];
      sol[i] = acc / mm(i, i);
    }
    return sol;
  };

  double max_res = 0.0;
  for (std::size_t a = 0; a < rank; ++a)
    for (std::size_t b = 0; b < rank; ++b) {
      cplx s0(0, 0), s1(0, 0), s2(0, 0);
      for (const auto& smp : rep.samples) {
        const cplx y = smp.eps * smp.g(a, b);
        s0 += y;
        s1 += y * smp.eps;
        s2 += y * smp.eps * smp.eps;
      }
      const Vec coef = solve3(s0, s1, s2);
      rep.gamma(a, b) = coef[0];
      for (const auto& smp : rep.samples) {
        const cplx fitv = coef[0] + coef[1] * smp.eps + coef[2] * smp.eps * smp.eps;
        const cplx y = smp.eps * smp.g(a, b);
        max_res = std::max(max_res, std::abs(fitv - y));
      }
    }
  rep.fit_residual = max_res;
  hermitize(rep.gamma);
  SymEig geig = hermitian_eig(rep.gamma, false);
  rep.c0 = geig.values.front();
  // judged against the coupling strength: c0 / ||w||^2 is the dimensionless
  // golden-rule efficiency, ~0 for engineered spectral nodes
  double coupling_scale = 0.0;
  for (std::size_t a = 0; a < v.w.cols(); ++a) {
    double col = 0.0;
    for (std::size_t i = 0; i < v.w.rows(); ++i) col += std::norm(v.w(i, a));
    coupling_scale += col;
  }
  rep.fgr_holds = positive && rep.c0 > 1e-3 * coupling_scale;

  rep.c1 = -1e300;
  rep.c2 = 1e300;
  for (const auto& s : rep.samples) {
    rep.c1 = std::max(rep.c1, s.scaled_max);
    rep.c2 = std::min(rep.c2, s.scaled_min);
  }
  (void)np;
  return rep;
}

Vec BEpsFactors::apply(const Vec& v) const {
  Vec out(v.size(), cplx(0.0, 0.0));
  const cplx inv2i(0.0, -0.5);  // 1/(2i)
  for (std::size_t a = 0; a < x.size(); ++a) {
    const cplx ya = dot(y[a], v);
    const cplx xa = dot(x[a], v);
    // (x y^dag - y x^dag)/(2i) v = (x <y,v> - y <x,v>)/(2i)
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += inv2i * (x[a][i] * ya - y[a][i] * xa);
  }
  return out;
}

Matrix BEpsFactors::dense(std::size_t dim) const {
  Matrix b(dim, dim);
  const cplx inv2i(0.0, -0.5);
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        b(i, j) += inv2i * (x[a][i] * std::conj(y[a][j]) - y[a][i] * std::conj(x[a][j]));
  hermitize(b);
  return b;
}

BEpsFactors build_b_epsilon_factors(const ModelOperator& h0, const PotentialOperator& v,
                                    double k, double eps) {
  check_eps_floor(h0, k, eps);
  BEpsFactors f;
  f.eps = eps;
  f.y = k_projector_basis(h0);
  FEpsSolver fs(h0, k, eps);
  for (const Vec& d : f.y) f.x.push_back(fs.apply(v.apply(d)));
  return f;
}

Matrix build_b_epsilon(const ModelOperator& h0, const PotentialOperator& v, double k,
                       double eps) {
  return build_b_epsilon_factors(h0, v, k, eps).dense(h0.dim());
}

double node_coupling_slope(const Grid& grid, double k) {
  const double h2 = grid.h * grid.h;
  RVec d(grid.n, 2.0 / h2 + 0.25), e(grid.n - 1, -1.0 / h2);
  // channel level nearest k
  SelectedEig sel;
  for (double w : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    sel = tridiag_eig_range(d, e, k - w, k + w, true);
    if (!sel.values.empty()) break;
  }
  if (sel.values.empty()) throw NumericsError("node_coupling_slope: no level near k");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.values.size(); ++i)
    if (std::abs(sel.values[i] - k) < std::abs(sel.values[best] - k)) best = i;
  const RVec& phi = sel.vectors[best];
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double sarg = grid.node(j) - grid.c;
    const double w0 = std::exp(-sarg);
    num += phi[j] * w0;
    den += phi[j] * w0 * sarg;
  }
  if (den == 0.0) throw NumericsError("node_coupling_slope: degenerate projection");
  return num / den;
}

}  // namespace mourre
