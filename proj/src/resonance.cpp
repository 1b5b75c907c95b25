#include "mourre/resonance.hpp"

#include <cmath>

#include "mourre/eig_sym.hpp"
#include "mourre/solve.hpp"

namespace mourre {

double virial_residual(const Applier& apply_h, const Matrix& s_hat, const Vec& f,
                       double kappa, double h_norm, double s_norm) {
  const double fn2 = norm2(f) * norm2(f);
  if (fn2 == 0.0) throw ConfigError("virial_residual: zero vector");
  Vec hf = apply_h(f);
  Vec res = hf;
  axpy(cplx(-kappa, 0.0), f, res);
  if (norm2(res) > 1e-8 * norm2(f))
    throw ConfigError("virial_residual: not an eigenpair, residual " +
                      std::to_string(norm2(res) / norm2(f)));
  const Vec sf = matvec(s_hat, f);
  // <f, [H, iS] f> = -2 Im <H f, S f>
  const cplx z = dot(hf, sf);
  const double val = std::abs(-2.0 * z.imag());
  return val / (fn2 * std::max(1e-300, s_norm) * std::max(1e-300, h_norm));
}

namespace {

struct ScaledApply {
  const ScaledOperator& op;
  Vec apply(const Vec& x) const {
    const std::size_t n = op.n, m = op.m;
    Vec y(n + m, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = op.chan_diag[i] * x[i];
      if (i > 0) s += op.chan_off * x[i - 1];
      if (i + 1 < n) s += op.chan_off * x[i + 1];
      for (std::size_t j = 0; j < m; ++j) s += op.w(i, j) * x[n + j];
      y[i] = s;
    }
    for (std::size_t j = 0; j < m; ++j) {
      cplx s(0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) s += op.w(i, j) * x[i];  // symmetric coupling
      for (std::size_t jj = 0; jj < m; ++jj) s += op.disc_block(j, jj) * x[n + jj];
      y[n + j] = s;
    }
    return y;
  }
};

// One Rayleigh-iteration refinement at fixed scaled operator; returns the
// converged eigenvalue nearest the starting shift, or nullopt on stagnation.
bool rqi_refine(const ScaledOperator& op, cplx& mu, Vec& v, int max_iters) {
  const std::size_t n = op.n, m = op.m;
  Vec sub(n > 1 ? n - 1 : 0, op.chan_off), sup(n > 1 ? n - 1 : 0, op.chan_off);
  Matrix bm(m, n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) bm(j, i) = op.w(i, j);
  ScaledApply ap{op};

  double scale = 0.0;
  for (const auto& x : op.chan_diag) scale = std::max(scale, std::abs(x));
  scale += 2.0 * std::abs(op.chan_off);

  cplx mu_cur = mu;
  const Vec& diag = op.chan_diag;
  for (int it = 0; it < max_iters; ++it) {
    BorderedShiftLU lu(sub, diag, sup, op.w, bm, op.disc_block, mu_cur);
    Vec w = lu.solve(v);
    const double nw = norm2(w);
    if (!(nw > 0.0) || !std::isfinite(nw)) return false;
    for (auto& x : w) x /= nw;
    Vec hw = ap.apply(w);
    const cplx rq = dot(w, hw);  // Hermitian inner product Rayleigh quotient
    Vec res = hw;
    axpy(-rq, w, res);
    v = w;
    mu_cur = rq;
    if (norm2(res) <= 1e-11 * scale) {
      mu = mu_cur;
      return true;
    }
  }
  return false;
}

}  // namespace

cplx locate_resonance(const ModelConfig& config, double theta, double lambda,
                      const TrackOptions& opt) {
  if (!(theta > 0.0 && theta < kPi / 4.0))
    throw ConfigError("locate_resonance: theta out of range");
  config.validate();
  const std::size_t n = config.grid.n;
  // start from the unperturbed embedded eigenvector
  std::size_t kidx = 0;
  bool found = false;
  for (std::size_t j = 0; j < config.m(); ++j)
    if (config.discrete_levels[j] == config.k && !found) {
      kidx = j;
      found = true;
    }
  if (!found) throw ConfigError("locate_resonance: no discrete level equals k");

  Vec v(config.dim(), cplx(0.0, 0.0));
  v[n + kidx] = 1.0;
  cplx zeta(config.k, 0.0);
  if (lambda == 0.0) return zeta;

  double lam_cur = 0.0;
  double step = std::min(opt.initial_step, lambda);
  int halvings = 0;
  while (lam_cur < lambda) {
    const double lam_next = std::min(lambda, lam_cur + step);
    ModelConfig c2 = config;
    c2.lambda = lam_next;
    const ScaledOperator op = complex_scale(c2, theta);
    cplx mu = zeta;
    Vec v_try = v;
    const bool ok = rqi_refine(op, mu, v_try, opt.max_rqi_iters);
    const bool jump = ok && std::abs(mu - zeta) > opt.jump_guard;
    if (!ok || jump) {
      step *= 0.5;
      if (++halvings > opt.max_halvings)
        throw NumericsError(
            "locate_resonance: persistent tracking ambiguity near lambda = " +
            std::to_string(lam_next));
      continue;
    }
    zeta = mu;
    v = v_try;
    lam_cur = lam_next;
  }
  return zeta;
}

ResonanceReport width_scan(const ModelConfig& config, double theta,
                           const RVec& lambda_grid, const TrackOptions& opt) {
  if (lambda_grid.empty()) throw ConfigError("width_scan: empty lambda grid");
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] < lambda_grid[i + 1]))
      throw ConfigError("width_scan: lambda grid must be increasing");
  if (lambda_grid.back() > 0.1)
    throw ConfigError("width_scan: lambda grid must stay within (0, 0.1]");

  ResonanceReport rep;
  rep.theta = theta;
  rep.lambdas = lambda_grid;
  for (double lam : lambda_grid) {
    const cplx z = locate_resonance(config, theta, lam, opt);
    rep.zetas.push_back(z);
    rep.re_shift_max = std::max(rep.re_shift_max, std::abs(z.real() - config.k));
  }
  // fit Im zeta = -gamma lambda^2 on the small half of the grid
  const std::size_t half = std::max<std::size_t>(2, lambda_grid.size() / 2);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double l2 = lambda_grid[i] * lambda_grid[i];
    num += -rep.zetas[i].imag() * l2;
    den += l2 * l2;
  }
  rep.gamma_fit = (den > 0.0) ? num / den : 0.0;
  double resid = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double pred = -rep.gamma_fit * lambda_grid[i] * lambda_grid[i];
    const double have = rep.zetas[i].imag();
    if (std::abs(pred) > 1e-300)
      resid = std::max(resid, std::abs(have - pred) / std::abs(pred));
  }
  rep.fit_residual = resid;
  rep.fit_flagged = resid > 0.3;
  return rep;
}

CompactnessProxy compactness_proxy(const ModelConfig& config, const Matrix& s_hat,
                                   std::size_t n_radii, bool borderline) {
  config.validate();
  const ModelOperator h0 = assemble_h0(config);
  const PotentialOperator v = assemble_potential(config);
  const std::size_t n = h0.n(), dim = h0.dim();
  if (s_hat.rows() != dim) throw ConfigError("compactness_proxy: S_hat dimension mismatch");

  // K = [V, i S_hat], built from the structured V: O(dim^2)
  Matrix k(dim, dim);
  // V S: rows of S scaled by v_diag + coupling contributions
  // (V S)(i, j) = v_i S(i, j) + sum_a w(i,a) S(n+a, j)   for channel rows
  // (V S)(n+a, j) = sum_i conj(w(i,a)) S(i, j) + sum_b disc(a,b) S(n+b, j)
  Matrix vs(dim, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx vi = v.v_diag[i];
    for (std::size_t j = 0; j < dim; ++j) vs(i, j) = vi * s_hat(i, j);
    for (std::size_t a = 0; a < h0.m(); ++a) {
      const cplx wia = v.w(i, a);
      if (wia == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < dim; ++j) vs(i, j) += wia * s_hat(n + a, j);
    }
  }
  for (std::size_t a = 0; a < h0.m(); ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx wia = std::conj(v.w(i, a));
      if (wia == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < dim; ++j) vs(n + a, j) += wia * s_hat(i, j);
    }
    for (std::size_t b = 0; b < h0.m(); ++b) {
      const cplx dab = v.disc(a, b);
      if (dab == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < dim; ++j) vs(n + a, j) += dab * s_hat(n + b, j);
    }
  }
  const cplx iunit(0.0, 1.0);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      k(i, j) = iunit * (vs(i, j) - std::conj(vs(j, i)));  // i(VS - (VS)^dag) = i(VS - SV)
  hermitize(k);

  // tau(rho) via power iteration on M^dag M, M = mask K (H0+1)^{-1}
  RVec e(n > 1 ? n - 1 : 0, h0.chan_off);
  RVec d(h0.chan_diag);
  for (auto& x : d) x += 1.0;
  GtLU<double> lu(e, d, e);
  auto solve_h1 = [&](Vec x) {
    RVec re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = x[i].real();
      im[i] = x[i].imag();
    }
    lu.solve_inplace(re);
    lu.solve_inplace(im);
    for (std::size_t i = 0; i < n; ++i) x[i] = cplx(re[i], im[i]);
    for (std::size_t j = 0; j < h0.m(); ++j) x[n + j] /= (h0.disc[j] + 1.0);
    return x;
  };

  CompactnessProxy out;
  const double rho_max = 0.5 * (config.grid.r_max - config.grid.c);
  for (std::size_t t = 0; t < n_radii; ++t)
    out.radii.push_back(rho_max * std::pow(2.0, -static_cast<double>(n_radii - 1 - t)));

  std::uint64_t seed = 0xabcdef12345ULL;
  auto urand = [&seed]() {
    seed += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = seed;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53 - 0.5;
  };

  for (double rho : out.radii) {
    std::vector<char> mask(dim, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (config.grid.node(i) - config.grid.c > rho) mask[i] = 1;
    auto apply_m = [&](const Vec& x) {
      Vec y = solve_h1(x);
      Vec z = matvec(k, y);
      for (std::size_t i = 0; i < dim; ++i)
        if (!mask[i]) z[i] = cplx(0.0, 0.0);
      return z;
    };
    auto apply_mt = [&](const Vec& x) {
      Vec y = x;
      for (std::size_t i = 0; i < dim; ++i)
        if (!mask[i]) y[i] = cplx(0.0, 0.0);
      Vec z = matvec(k, y);  // K Hermitian
      return solve_h1(z);
    };
    Vec x(dim);
    for (auto& xx : x) xx = cplx(urand(), urand());
    const double nx = norm2(x);
    for (auto& xx : x) xx /= nx;
    double sigma2 = 0.0;
    for (int it = 0; it < 60; ++it) {
      Vec y = apply_m(x);
      Vec z = apply_mt(y);
      const double lam = dot(x, z).real();  // = ||M x||^2 for unit x
      const double nz = norm2(z);
      if (nz == 0.0) {
        sigma2 = 0.0;
        break;
      }
      for (auto& xx : z) xx /= nz;
      x = std::move(z);
      if (it > 4 && std::abs(lam - sigma2) <= 1e-6 * (lam + 1e-300)) {
        sigma2 = lam;
        break;
      }
      sigma2 = lam;
    }
    out.tail_norms.push_back(std::sqrt(std::max(0.0, sigma2)));
  }

  const double t0 = out.tail_norms.front();
  const double t1 = out.tail_norms.back();
  out.ratio = (t0 > 0.0) ? t1 / t0 : 0.0;
  if (borderline)
    out.verdict = "borderline-recorded";
  else
    out.verdict = (out.ratio <= 0.2) ? "decaying" : "non-decaying";
  return out;
}

}  // namespace mourre
