#include "mourre/conjugate.hpp"

#include <cmath>

#include "mourre/eig_sym.hpp"

namespace mourre {

namespace {
double bump_psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = bump_psi(t);
  const double b = bump_psi(1.0 - t);
  return a / (a + b);
}

double SymbolPhi::operator()(double x) const {
  const double t = std::abs(x) / upsilon;
  if (t >= 4.0) return 0.0;
  if (t <= 1.0) return x;
  return x * smooth_step((4.0 - t) / 3.0);
}

RVec SymbolPhi::sampled(const Grid& grid) const {
  RVec v(grid.n);
  for (std::size_t l = 0; l < grid.n; ++l) v[l] = (*this)(grid.xi(l));
  return v;
}

SymbolPhi build_phi(double upsilon) {
  if (upsilon < 1.0) throw ConfigError("build_phi: Upsilon must be >= 1");
  SymbolPhi p;
  p.upsilon = upsilon;
  return p;
}

double CutoffChi::operator()(double r, double c) const {
  return smooth_step((r - (c + a0)) / (a1 - a0));
}

RVec CutoffChi::sampled(const Grid& grid) const {
  RVec v(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) v[j] = (*this)(grid.node(j), grid.c);
  return v;
}

Matrix fourier_multiplier(const Grid& grid, const RVec& multiplier_values) {
  if (multiplier_values.size() != grid.n)
    throw ConfigError("fourier_multiplier: symbol and grid momentum lattices differ");
  const std::size_t n = grid.n;
  SinePlan plan(n);
  Matrix out(n, n);
  Vec col(n), tmp(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), cplx(0.0, 0.0));
    col[j] = 1.0;
    plan.apply(col.data(), tmp.data());
    for (std::size_t l = 0; l < n; ++l) tmp[l] *= multiplier_values[l];
    plan.apply(tmp.data(), col.data());
    for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i].real();
  }
  hermitize(out);
  return out;
}

SOperator::SOperator(const Grid& grid, double upsilon, CutoffChi chi, std::size_t m_disc)
    : grid_(grid), m_(m_disc), phi_(build_phi(upsilon)), chi_(chi), plan_(grid.n) {
  chi_vals_ = chi_.sampled(grid_);
  kvals_.resize(grid_.n);
  gvals_.resize(grid_.n);
  for (std::size_t l = 0; l < grid_.n; ++l) {
    const double xi = grid_.xi(l);
    kvals_[l] = phi_(xi);
    gvals_[l] = 1.0 / xi;
  }
}

Vec SOperator::apply_multiplier(const Vec& xc) const {
  const std::size_t n = grid_.n;
  if (xc.size() != n) throw ConfigError("SOperator: channel size mismatch");
  const double inv2h = 1.0 / (2.0 * grid_.h);
  auto mult = [&](const Vec& v, const RVec& vals) {
    Vec t(n);
    plan_.apply(v.data(), t.data());
    for (std::size_t l = 0; l < n; ++l) t[l] *= vals[l];
    Vec o(n);
    plan_.apply(t.data(), o.data());
    return o;
  };
  auto diff = [&](const Vec& v) {
    Vec o(n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      cplx s(0.0, 0.0);
      if (j + 1 < n) s += v[j + 1];
      if (j > 0) s -= v[j - 1];
      o[j] = s * inv2h;
    }
    return o;
  };
  const Vec kdg = mult(diff(mult(xc, gvals_)), kvals_);
  const Vec gdk = mult(diff(mult(xc, kvals_)), gvals_);
  Vec out(n);
  const cplx half_mi(0.0, -0.5);
  for (std::size_t j = 0; j < n; ++j) out[j] = half_mi * (kdg[j] + gdk[j]);
  return out;
}

Vec SOperator::apply(const Vec& x) const {
  const std::size_t n = grid_.n;
  if (x.size() != dim()) throw ConfigError("SOperator::apply: size mismatch");
  Vec xc(n);
  for (std::size_t j = 0; j < n; ++j) xc[j] = chi_vals_[j] * x[j];
  Vec rx(n);
  for (std::size_t j = 0; j < n; ++j) rx[j] = grid_.node(j) * xc[j];
  Vec m_rx = apply_multiplier(rx);
  Vec m_x = apply_multiplier(xc);
  Vec out(dim(), cplx(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j)
    out[j] = chi_vals_[j] * (m_rx[j] + grid_.node(j) * m_x[j]);
  return out;
}

Matrix SOperator::dense() const {
  const std::size_t n = grid_.n;
  Matrix out(dim(), dim());
  Vec e(n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), cplx(0.0, 0.0));
    e[j] = 1.0;
    const Vec mcol = apply_multiplier(e);
    const double rj = grid_.node(j);
    for (std::size_t i = 0; i < n; ++i) {
      // S_ij = chi_i chi_j (r_i + r_j) M_ij
      out(i, j) = chi_vals_[i] * chi_vals_[j] * (grid_.node(i) + rj) * mcol[i];
    }
  }
  hermitize(out);
  return out;
}

Matrix commutator(const Matrix& a, const Matrix& s) {
  if (a.rows() != s.rows() || a.cols() != s.cols() || a.rows() != a.cols())
    throw ConfigError("commutator: dimension mismatch");
  Matrix as = multiply(a, s);
  Matrix sa = multiply(s, a);
  Matrix out(a.rows(), a.cols());
  const cplx iunit(0.0, 1.0);
  for (std::size_t t = 0; t < out.data().size(); ++t)
    out.data()[t] = iunit * (as.data()[t] - sa.data()[t]);
  return out;
}

Matrix compressed_commutator(const std::vector<Vec>& q, const Applier& apply_a,
                             const Applier& apply_s) {
  const std::size_t r = q.size();
  Matrix c(r, r);
  if (r == 0) return c;
  std::vector<Vec> aq(r), sq(r);
  for (std::size_t i = 0; i < r; ++i) {
    aq[i] = apply_a(q[i]);
    sq[i] = apply_s(q[i]);
  }
  // C = i (Z - Z^dag), Z_{ij} = <A q_i, S q_j>; <S q_i, A q_j> = conj(Z_ji)
  Matrix z(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) z(i, j) = dot(aq[i], sq[j]);
  const cplx iunit(0.0, 1.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      c(i, j) = iunit * (z(i, j) - std::conj(z(j, i)));
  hermitize(c);
  return c;
}

Matrix compressed_form(const std::vector<Vec>& q, const Applier& apply_a) {
  const std::size_t r = q.size();
  Matrix c(r, r);
  std::vector<Vec> aq(r);
  for (std::size_t i = 0; i < r; ++i) aq[i] = apply_a(q[i]);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) c(i, j) = dot(q[i], aq[j]);
  return c;
}

LeadingTermReport leading_term_residual(const Grid& grid, double upsilon, CutoffChi chi) {
  const std::size_t n = grid.n;
  SOperator s(grid, upsilon, chi, 0);
  const RVec chi_vals = chi.sampled(grid);

  // Wave packets in the chi = 1 bulk with momenta in [xi_min, Y/2].
  const double lo = grid.c + chi.a1;
  const double bulk_lo = lo + 0.1 * grid.length();
  const double bulk_hi = grid.r_max - 0.15 * grid.length();
  const double sigma = (bulk_hi - bulk_lo) / 8.0;
  const double xi_min = std::max(4.0 * kPi / grid.length(), 0.25);
  const double xi_max = upsilon / 2.0;
  std::vector<Vec> raw;
  const int n_centers = 4, n_momenta = 5;
  for (int ic = 0; ic < n_centers; ++ic) {
    const double r0 = bulk_lo + (ic + 0.5) * (bulk_hi - bulk_lo) / n_centers;
    for (int is = 0; is < n_momenta; ++is) {
      const double xi = xi_min + (is + 0.5) * (xi_max - xi_min) / n_momenta;
      Vec v(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double r = grid.node(j);
        const double env = std::exp(-0.5 * (r - r0) * (r - r0) / (sigma * sigma));
        v[j] = env * std::exp(cplx(0.0, xi * (r - grid.c)));
      }
      raw.push_back(std::move(v));
    }
  }
  // Gram-Schmidt with drop tolerance.
  std::vector<Vec> q;
  for (const Vec& v0 : raw) {
    Vec v = v0;
    for (const Vec& u : q) {
      const cplx pr = dot(u, v);
      for (std::size_t j = 0; j < n; ++j) v[j] -= pr * u[j];
    }
    const double nv = norm2(v);
    if (nv > 1e-6) {
      for (auto& x : v) x /= nv;
      q.push_back(std::move(v));
    }
  }

  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const double inv2h = 1.0 / (2.0 * grid.h);
  auto apply_dsq = [&](const Vec& v) {  // discrete d^2/dr^2 (Dirichlet)
    Vec o(n);
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc = -2.0 * v[j];
      if (j > 0) acc += v[j - 1];
      if (j + 1 < n) acc += v[j + 1];
      o[j] = acc * inv_h2;
    }
    return o;
  };
  auto apply_schan = [&](const Vec& v) { return s.apply(v); };  // m = 0, channel only

  // LHS = [d^2, S] (plain commutator, not i[,]): compressed entries
  std::vector<Vec> dq(q.size()), sq(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    dq[i] = apply_dsq(q[i]);
    sq[i] = apply_schan(q[i]);
  }
  const std::size_t r = q.size();
  Matrix lhs(r, r), rhs(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      lhs(i, j) = dot(dq[i], sq[j]) - dot(sq[i], dq[j]);  // <q_i, (d2 S - S d2) q_j>

  // RHS = 4 X D M X
  auto apply_rhs = [&](const Vec& v) {
    Vec xv(n);
    for (std::size_t j = 0; j < n; ++j) xv[j] = chi_vals[j] * v[j];
    Vec mv = s.apply_multiplier(xv);
    Vec dv(n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc(0.0, 0.0);
      if (j + 1 < n) acc += mv[j + 1];
      if (j > 0) acc -= mv[j - 1];
      dv[j] = acc * inv2h;
    }
    Vec o(n);
    for (std::size_t j = 0; j < n; ++j) o[j] = 4.0 * chi_vals[j] * dv[j];
    return o;
  };
  for (std::size_t i = 0; i < r; ++i) {
    const Vec rv = apply_rhs(q[i]);
    for (std::size_t j = 0; j < r; ++j) rhs(j, i) = dot(q[j], rv);
  }

  auto opnorm = [](const Matrix& mat) {
    // Hermitian part spectral norm via eigenvalues of M^dag M would be costly;
    // these are small matrices, use the exact 2-norm through M^dag M.
    Matrix mm = multiply(adjoint(mat), mat);
    hermitize(mm);
    SymEig eig = hermitian_eig(mm, false);
    return std::sqrt(std::max(0.0, eig.values.back()));
  };

  Matrix diff_mat(r, r);
  for (std::size_t t = 0; t < diff_mat.data().size(); ++t)
    diff_mat.data()[t] = lhs.data()[t] - rhs.data()[t];

  LeadingTermReport rep;
  rep.states = r;
  rep.residual = opnorm(diff_mat);
  rep.lhs_norm = opnorm(lhs);
  rep.rhs_norm = opnorm(rhs);
  return rep;
}

Matrix assemble_s_hat(const Matrix& s, const std::vector<Vec>& p_basis, const Matrix& b_eps,
                      double lambda, double theta) {
  const std::size_t n = s.rows();
  if (b_eps.rows() != n || b_eps.cols() != n)
    throw ConfigError("assemble_s_hat: dimension mismatch");
  // Pbar S Pbar = S - P S - S P + P S P, with low-rank P.
  Matrix out = s;
  const std::size_t p = p_basis.size();
  if (p > 0) {
    std::vector<Vec> sp(p);
    for (std::size_t a = 0; a < p; ++a) sp[a] = matvec(s, p_basis[a]);
    // subtract P S: rows along p_basis
    for (std::size_t a = 0; a < p; ++a) {
      // P S = sum_a |d_a><d_a| S ; (<d_a| S)_j = conj(S^dag d_a)_j = conj(sp[a])_j? S Hermitian: <d_a|S = (S d_a)^dag
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          out(i, j) -= p_basis[a][i] * std::conj(sp[a][j]);
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          out(i, j) -= sp[a][i] * std::conj(p_basis[a][j]);
    // add back P S P
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) {
        const cplx sab = dot(p_basis[a], sp[b]);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            out(i, j) += p_basis[a][i] * sab * std::conj(p_basis[b][j]);
      }
  }
  const double lt = lambda * theta;
  for (std::size_t t = 0; t < out.data().size(); ++t)
    out.data()[t] += lt * b_eps.data()[t];
  hermitize(out);
  return out;
}

}  // namespace mourre
