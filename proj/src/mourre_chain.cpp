#include "mourre/mourre_chain.hpp"

#include <algorithm>
#include <cmath>

#include "mourre/eig_sym.hpp"

namespace mourre {

Matrix Projector::dense(std::size_t dim) const {
  Matrix p(dim, dim);
  for (const Vec& b : basis)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) p(i, j) += b[i] * std::conj(b[j]);
  hermitize(p);
  return p;
}

Vec Projector::apply(const Vec& x) const {
  Vec out(x.size(), cplx(0.0, 0.0));
  for (const Vec& b : basis) {
    const cplx pr = dot(b, x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += pr * b[i];
  }
  return out;
}

Vec Projector::complement_apply(const Vec& x) const {
  Vec out = x;
  for (const Vec& b : basis) {
    const cplx pr = dot(b, x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] -= pr * b[i];
  }
  return out;
}

Projector spectral_projector(const Matrix& a, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("spectral_projector: degenerate interval");
  SymEig eig = hermitian_eig(a, true);
  Projector p;
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (eig.values[i] > lo && eig.values[i] <= hi) {
      Vec v(n);
      for (std::size_t j = 0; j < n; ++j) v[j] = eig.vectors(i, j);
      p.basis.push_back(std::move(v));
    }
  }
  p.empty_warning = p.basis.empty();
  return p;
}

ModelWindow model_window(const ModelOperator& h0, double lo, double hi, bool exclude_k) {
  if (!(lo < hi)) throw ConfigError("model_window: degenerate interval");
  ModelWindow w;
  const std::size_t n = h0.n(), m = h0.m();
  RVec e(n > 0 ? n - 1 : 0, h0.chan_off);
  SelectedEig sel = tridiag_eig_range(h0.chan_diag, e, lo, hi, true);
  // merge channel modes and discrete levels in ascending order
  struct Entry {
    double val;
    bool disc;
    std::size_t idx;
  };
  std::vector<Entry> entries;
  for (std::size_t t = 0; t < sel.values.size(); ++t)
    entries.push_back({sel.values[t], false, t});
  for (std::size_t j = 0; j < m; ++j) {
    const double mu = h0.disc[j];
    if (mu > lo && mu <= hi) {
      if (exclude_k && mu == h0.config.k) continue;
      entries.push_back({mu, true, j});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.val < b.val; });
  for (const Entry& t : entries) {
    Vec v(n + m, cplx(0.0, 0.0));
    if (t.disc) {
      v[n + t.idx] = 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) v[i] = sel.vectors[t.idx][i];
    }
    w.basis.push_back(std::move(v));
    w.values.push_back(t.val);
    w.in_p.push_back(t.disc && h0.disc[t.idx] == h0.config.k);
  }
  w.empty_warning = w.basis.empty();
  return w;
}

namespace {

struct BulkSplit {
  std::vector<Vec> bulk;      // orthonormal directions, >= 1 - tau bulk mass
  std::vector<Vec> removed;   // the complement within the window
  RVec boundary_mass;         // eigenvalues of the boundary-mass form
};

// Boundary region: channel nodes below bulk_lo or above bulk_hi. Discrete
// sector counts as bulk.
BulkSplit bulk_restrict(const std::vector<Vec>& q, const Grid& grid, std::size_t m,
                        double bulk_lo, double bulk_hi, double tau) {
  const std::size_t r = q.size();
  BulkSplit out;
  if (r == 0) return out;
  const std::size_t n = grid.n;
  std::vector<std::size_t> bidx;
  for (std::size_t j = 0; j < n; ++j) {
    const double rr = grid.node(j);
    if (rr < bulk_lo || rr > bulk_hi) bidx.push_back(j);
  }
  Matrix mb(r, r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = a; b < r; ++b) {
      cplx s(0.0, 0.0);
      for (std::size_t j : bidx) s += std::conj(q[a][j]) * q[b][j];
      mb(a, b) = s;
      mb(b, a) = std::conj(s);
    }
  hermitize(mb);
  SymEig eig = hermitian_eig(mb, true);
  out.boundary_mass = eig.values;
  for (std::size_t t = 0; t < r; ++t) {
    Vec lifted(n + m, cplx(0.0, 0.0));
    for (std::size_t a = 0; a < r; ++a) {
      const cplx w = eig.vectors(t, a);
      if (w == cplx(0.0, 0.0)) continue;
      for (std::size_t i = 0; i < n + m; ++i) lifted[i] += w * q[a][i];
    }
    if (eig.values[t] <= tau)
      out.bulk.push_back(std::move(lifted));
    else
      out.removed.push_back(std::move(lifted));
  }
  return out;
}

double least_eig(const Matrix& c) {
  if (c.rows() == 0) return 0.0;
  Matrix h = c;
  hermitize(h);
  SymEig eig = hermitian_eig(h, false);
  return eig.values.front();
}

double spectral_norm(const Matrix& c) {
  if (c.rows() == 0 || c.cols() == 0) return 0.0;
  Matrix mm = multiply(adjoint(c), c);
  hermitize(mm);
  SymEig eig = hermitian_eig(mm, false);
  return std::sqrt(std::max(0.0, eig.values.back()));
}

Matrix submatrix(const Matrix& c, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& cols) {
  Matrix s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = c(rows[i], cols[j]);
  return s;
}

// 90% channel-mass radius of a full-space vector.
double mass_radius(const Vec& v, const Grid& grid) {
  const std::size_t n = grid.n;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += std::norm(v[j]);
  if (total <= 0.0) return grid.c;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += std::norm(v[j]);
    if (acc >= 0.9 * total) return grid.node(j);
  }
  return grid.r_max;
}

}  // namespace

GapReport mourre_gap(const ModelOperator& h0, const SOperator& s, double j_lo,
                     double j_hi, const RemovalParams& rp, bool free_channel) {
  if (!(j_lo > 0.25)) throw ConfigError("mourre_gap: J must sit inside (1/4, oo)");
  const double cap = 2.0 * std::sqrt(j_hi - 0.25);
  if (s.upsilon() < cap)
    throw ConfigError("mourre_gap: Upsilon below the momentum cap of J (need >= " +
                      std::to_string(cap) + ")");

  const Grid& grid = h0.config.grid;
  ModelWindow w = model_window(h0, j_lo, j_hi, false);
  if (free_channel) {
    ModelWindow chan;
    for (std::size_t t = 0; t < w.basis.size(); ++t) {
      if (w.in_p[t]) continue;
      bool disc = false;
      for (std::size_t j = 0; j < h0.m(); ++j)
        if (w.basis[t][h0.n() + j] != cplx(0.0, 0.0)) disc = true;
      if (disc) continue;
      chan.basis.push_back(w.basis[t]);
      chan.values.push_back(w.values[t]);
      chan.in_p.push_back(false);
    }
    w = std::move(chan);
  }

  GapReport rep;
  rep.j_lo = j_lo;
  rep.j_hi = j_hi;
  rep.g_ref = 4.0 * (j_lo - 0.25);
  rep.dim_window = w.basis.size();
  if (w.basis.empty()) {
    rep.rank_zero_warning = true;
    return rep;
  }

  Applier apply_h = [&](const Vec& x) { return h0.apply(x); };
  Applier apply_s = [&](const Vec& x) { return s.apply(x); };
  const Matrix c = compressed_commutator(w.basis, apply_h, apply_s);
  rep.g_raw = least_eig(c);

  // compact part K = C - g_ref I and its localization diagnostics
  Matrix kmat = c;
  for (std::size_t i = 0; i < kmat.rows(); ++i) kmat(i, i) -= rep.g_ref;
  SymEig keig = hermitian_eig(kmat, true);
  rep.compact_eigs = keig.values;
  // principal directions by |eigenvalue|
  std::vector<std::size_t> order(keig.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(keig.values[a]) > std::abs(keig.values[b]);
  });
  const std::size_t nprin = std::min<std::size_t>(6, order.size());
  for (std::size_t t = 0; t < nprin; ++t) {
    Vec lifted(h0.dim(), cplx(0.0, 0.0));
    for (std::size_t a = 0; a < w.basis.size(); ++a) {
      const cplx wt = keig.vectors(order[t], a);
      for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] += wt * w.basis[a][i];
    }
    rep.compact_radius.push_back(mass_radius(lifted, grid));
  }

  // defect against the exact symbol identity, for the shrinking diagnostics
  Matrix defect = c;
  for (std::size_t a = 0; a < w.basis.size(); ++a)
    defect(a, a) -= 4.0 * (w.values[a] - 0.25);
  rep.compact_norm = spectral_norm(defect);

  const double bulk_lo = grid.c + s.cutoff().a1 + rp.inner_margin_frac * grid.length();
  const double bulk_hi = grid.r_max - rp.outer_margin_frac * grid.length();
  BulkSplit split = bulk_restrict(w.basis, grid, h0.m(), bulk_lo, bulk_hi,
                                  rp.boundary_mass_max);
  rep.dim_bulk = split.bulk.size();
  if (!split.bulk.empty()) {
    const Matrix cb = compressed_commutator(split.bulk, apply_h, apply_s);
    rep.g_bulk = least_eig(cb);
  }
  rep.eps_upsilon = std::max(0.0, rep.g_ref - rep.g_bulk);
  rep.pass = rep.dim_bulk > 0 && rep.g_bulk >= 0.9 * rep.g_ref;
  return rep;
}

ReducedGapReport reduced_gap(const ModelOperator& h0, const SOperator& s, double j0_lo,
                             double j0_hi, const RemovalParams& rp, int max_iter,
                             double shrink_factor) {
  const double k = h0.config.k;
  if (!(j0_lo < k && k < j0_hi))
    throw ConfigError("reduced_gap: k must lie inside the starting interval");
  const Grid& grid = h0.config.grid;
  const std::vector<Vec> pbasis = k_projector_basis(h0);

  Applier apply_h = [&](const Vec& x) { return h0.apply(x); };
  Applier apply_s_pbar = [&](const Vec& x) {
    // Pbar S Pbar; S annihilates the discrete sector, the projection is cheap
    Vec y = x;
    for (const Vec& p : pbasis) {
      const cplx pr = dot(p, y);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= pr * p[i];
    }
    Vec sy = s.apply(y);
    for (const Vec& p : pbasis) {
      const cplx pr = dot(p, sy);
      for (std::size_t i = 0; i < sy.size(); ++i) sy[i] -= pr * p[i];
    }
    return sy;
  };

  // The loop semantics terminate at the first interval meeting the bound; the
  // remaining schedule is still swept (until the window empties) so reports
  // carry the compact-norm decrease across nested intervals.
  ReducedGapReport rep;
  double lo = j0_lo, hi = j0_hi;
  bool succeeded = false;
  for (int it = 0; it < max_iter; ++it) {
    ModelWindow w = model_window(h0, lo, hi, true);
    ReducedGapStep step;
    step.j_lo = lo;
    step.j_hi = hi;
    step.c_min = 0.5 * 4.0 * (lo - 0.25);
    step.dim_window = w.basis.size();
    if (w.basis.empty()) break;
    const Matrix c = compressed_commutator(w.basis, apply_h, apply_s_pbar);
    step.g_raw = least_eig(c);
    Matrix defect = c;
    for (std::size_t a = 0; a < w.basis.size(); ++a)
      defect(a, a) -= 4.0 * (w.values[a] - 0.25);
    step.compact_norm = spectral_norm(defect);

    const double bulk_lo = grid.c + s.cutoff().a1 + rp.inner_margin_frac * grid.length();
    const double bulk_hi = grid.r_max - rp.outer_margin_frac * grid.length();
    BulkSplit split =
        bulk_restrict(w.basis, grid, h0.m(), bulk_lo, bulk_hi, rp.boundary_mass_max);
    step.dim_bulk = split.bulk.size();
    if (!split.bulk.empty()) {
      const Matrix cb = compressed_commutator(split.bulk, apply_h, apply_s_pbar);
      step.g_bulk = least_eig(cb);
    }
    rep.steps.push_back(step);
    if (!succeeded && step.dim_bulk > 0 && step.g_bulk >= step.c_min) {
      succeeded = true;
      rep.success = true;
      rep.c = step.g_bulk;
      rep.j_lo = lo;
      rep.j_hi = hi;
    }
    const double half = 0.5 * (hi - lo) * shrink_factor;
    lo = k - half;
    hi = k + half;
  }
  if (!succeeded) {
    rep.j_lo = lo;
    rep.j_hi = hi;
  }
  return rep;
}

BlockNorms block_norms(const ModelOperator& h0, const PotentialOperator& v,
                       const SOperator& s, const BEpsFactors& b, double lambda,
                       double theta, double eps, double j_lo, double j_hi) {
  const ModelWindow w = model_window(h0, j_lo, j_hi, false);
  return block_norms(h0, v, s, b, lambda, theta, eps, w);
}

Matrix piece_one_compressed(const ModelOperator& h0, const PotentialOperator& v,
                            const SOperator& s, const ModelWindow& w) {
  const std::vector<Vec> pbasis = k_projector_basis(h0);
  Applier apply_v = [&](const Vec& x) { return v.apply(x); };
  Applier apply_s_pbar = [&](const Vec& x) {
    Vec y = x;
    for (const Vec& p : pbasis) {
      const cplx pr = dot(p, y);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= pr * p[i];
    }
    Vec sy = s.apply(y);
    for (const Vec& p : pbasis) {
      const cplx pr = dot(p, sy);
      for (std::size_t i = 0; i < sy.size(); ++i) sy[i] -= pr * p[i];
    }
    return sy;
  };
  return compressed_commutator(w.basis, apply_v, apply_s_pbar);
}

BlockNorms block_norms(const ModelOperator& h0, const PotentialOperator& v,
                       const SOperator& s, const BEpsFactors& b, double lambda,
                       double theta, double eps, const ModelWindow& w,
                       const Matrix* c1_raw) {
  BlockNorms out;
  out.lambda = lambda;
  out.theta = theta;
  out.eps = eps;
  out.dim_window = w.basis.size();
  if (w.basis.empty()) return out;

  std::vector<std::size_t> pidx, bidx;
  for (std::size_t t = 0; t < w.basis.size(); ++t)
    (w.in_p[t] ? pidx : bidx).push_back(t);
  out.dim_p = pidx.size();

  Applier apply_h = [&](const Vec& x) { return h0.apply(x); };
  Applier apply_v = [&](const Vec& x) { return v.apply(x); };
  Applier apply_b = [&](const Vec& x) { return b.apply(x); };

  Matrix c1 = c1_raw ? *c1_raw : piece_one_compressed(h0, v, s, w);
  Matrix c2 = compressed_commutator(w.basis, apply_h, apply_b);
  Matrix c3 = compressed_commutator(w.basis, apply_v, apply_b);
  const double f1 = lambda, f2 = lambda * theta, f3 = lambda * lambda * theta;
  for (auto& x : c1.data()) x *= f1;
  for (auto& x : c2.data()) x *= f2;
  for (auto& x : c3.data()) x *= f3;

  out.p1_bb = spectral_norm(submatrix(c1, bidx, bidx));
  out.p1_off = spectral_norm(submatrix(c1, bidx, pidx));
  out.p1_pp = spectral_norm(submatrix(c1, pidx, pidx));
  out.p2_bb = spectral_norm(submatrix(c2, bidx, bidx));
  out.p2_off = spectral_norm(submatrix(c2, bidx, pidx));
  out.p2_pp = spectral_norm(submatrix(c2, pidx, pidx));
  out.p3_bb = spectral_norm(submatrix(c3, bidx, bidx));
  out.p3_off = spectral_norm(submatrix(c3, bidx, pidx));
  out.p3_pp = spectral_norm(submatrix(c3, pidx, pidx));

  if (!pidx.empty()) {
    const FgrSample smp = fgr_sample(h0, v, h0.config.k, eps);
    Matrix target = smp.g;
    for (auto& x : target.data()) x *= f3;
    Matrix diff = submatrix(c3, pidx, pidx);
    for (std::size_t i = 0; i < diff.rows(); ++i)
      for (std::size_t j = 0; j < diff.cols(); ++j) diff(i, j) -= target(i, j);
    out.p3_pp_identity_error = spectral_norm(diff);
  }
  return out;
}

FinalGapReport final_gap(const ModelConfig& config, double upsilon, CutoffChi chi,
                         double lambda, double a, double b, double i_lo, double i_hi,
                         const RemovalParams& rp) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < a))
    throw ConfigError("final_gap: scaling exponents must satisfy 0 < b < a < 1");
  FinalGapReport rep;
  rep.lambda = lambda;
  rep.i_lo = i_lo;
  rep.i_hi = i_hi;
  if (lambda == 0.0) {
    rep.lambda_zero_flag = true;  // degenerate: the gained positivity is O(lambda^2)
    return rep;
  }
  if (lambda < 0.0) throw ConfigError("final_gap: lambda must be nonnegative");
  rep.eps = std::pow(lambda, a);
  rep.theta = std::pow(lambda, b);

  const ModelOperator h0 = assemble_h0(config);
  const PotentialOperator v = assemble_potential(config);
  const Grid& grid = config.grid;

  SOperator s(grid, upsilon, chi, config.m());
  const BEpsFactors bf = build_b_epsilon_factors(h0, v, config.k, rep.eps);
  const std::vector<Vec> pbasis = k_projector_basis(h0);
  const Matrix s_dense = s.dense();
  const Matrix b_dense = bf.dense(h0.dim());
  const Matrix s_hat = assemble_s_hat(s_dense, pbasis, b_dense, lambda, rep.theta);

  const Matrix hl = dense_h_lambda(h0, v, lambda);
  SymEig eig = hermitian_eig(hl, true);
  std::vector<Vec> window;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] > i_lo && eig.values[i] <= i_hi) {
      Vec vv(hl.rows());
      for (std::size_t j = 0; j < hl.rows(); ++j) vv[j] = eig.vectors(i, j);
      window.push_back(std::move(vv));
    }
  }
  rep.dim_window = window.size();
  if (window.empty()) return rep;

  Applier apply_h = [&](const Vec& x) { return apply_h_lambda(h0, v, lambda, x); };
  Applier apply_shat = [&](const Vec& x) { return matvec(s_hat, x); };
  const Matrix c = compressed_commutator(window, apply_h, apply_shat);
  Matrix ch = c;
  hermitize(ch);
  SymEig ce = hermitian_eig(ch, false);
  rep.g_raw = ce.values.front();
  rep.c_hat_raw = rep.g_raw * rep.eps / (lambda * lambda * rep.theta);

  const double bulk_lo = grid.c + chi.a1 + rp.inner_margin_frac * grid.length();
  const double bulk_hi = grid.r_max - rp.outer_margin_frac * grid.length();
  BulkSplit split =
      bulk_restrict(window, grid, h0.m(), bulk_lo, bulk_hi, rp.boundary_mass_max);
  rep.dim_bulk = split.bulk.size();
  if (!split.bulk.empty()) {
    const Matrix cb = compressed_commutator(split.bulk, apply_h, apply_shat);
    rep.g_bulk = least_eig(cb);
    rep.c_hat = rep.g_bulk * rep.eps / (lambda * lambda * rep.theta);
  }
  return rep;
}

}  // namespace mourre
