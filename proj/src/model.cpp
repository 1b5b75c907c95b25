#include "mourre/model.hpp"

#include <cmath>

namespace mourre {

Grid build_grid(double c, double r_max, std::size_t n) {
  if (!(r_max > c)) throw ConfigError("build_grid: R_max must exceed c");
  if (n < 3) throw ConfigError("build_grid: need at least 3 interior points");
  Grid g;
  g.c = c;
  g.r_max = r_max;
  g.n = n;
  g.h = (r_max - c) / static_cast<double>(n + 1);
  return g;
}

double Profile::operator()(double r, double c) const {
  const double s = r - c;
  if (name == "zero") return 0.0;
  if (name == "exp") return std::exp(-a * s);
  if (name == "power") return std::pow(1.0 + r, -a);
  if (name == "const") return a;
  if (name == "gauss") return std::exp(-a * s * s);
  if (name == "exp_node") return std::exp(-a * s) * (1.0 - b * s);
  throw ConfigError("Profile: unknown profile '" + name + "'");
}

cplx Profile::eval(cplx r, double c) const {
  const cplx s = r - c;
  if (name == "zero") return 0.0;
  if (name == "exp") return std::exp(-a * s);
  if (name == "power") return std::pow(cplx(1.0, 0.0) + r, -a);
  if (name == "const") return a;
  if (name == "gauss") return std::exp(-a * s * s);
  if (name == "exp_node") return std::exp(-a * s) * (cplx(1.0, 0.0) - b * s);
  throw ConfigError("Profile: unknown profile '" + name + "'");
}

Profile make_profile(const std::string& name, double a, double b) {
  if (name != "zero" && name != "exp" && name != "power" && name != "const" &&
      name != "gauss" && name != "exp_node")
    throw ConfigError("make_profile: unknown profile '" + name + "'");
  Profile p;
  p.name = name;
  p.a = a;
  p.b = b;
  p.analytic = true;
  return p;
}

void ModelConfig::validate() const {
  if (!(k > 0.25)) throw ConfigError("ModelConfig: k must exceed the threshold 1/4");
  if (discrete_levels.empty()) throw ConfigError("ModelConfig: need at least one discrete level");
  if (discrete_levels[0] != k)
    throw ConfigError("ModelConfig: the first discrete level must carry the eigenvalue k");
  for (double mu : discrete_levels)
    if (!std::isfinite(mu)) throw ConfigError("ModelConfig: discrete level not finite");
  if (couplings.size() != discrete_levels.size())
    throw ConfigError("ModelConfig: one coupling profile per discrete level required");
  if (discrete_block.rows() != m() || discrete_block.cols() != m())
    throw ConfigError("ModelConfig: discrete block must be m x m");
  require_hermitian(discrete_block, "ModelConfig.discrete_block");
}

ModelConfig default_model(Grid grid) {
  ModelConfig cfg;
  cfg.grid = grid;
  cfg.k = 1.0;
  cfg.discrete_levels = {1.0, 5.0};
  cfg.couplings = {make_profile("exp", 1.0), make_profile("zero")};
  cfg.potential = make_profile("zero");
  cfg.discrete_block = Matrix(2, 2);
  cfg.lambda = 1e-3;
  return cfg;
}

Vec ModelOperator::apply(const Vec& x) const {
  const std::size_t nn = n(), mm = m();
  if (x.size() != nn + mm) throw ConfigError("ModelOperator::apply: size mismatch");
  Vec y(nn + mm, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < nn; ++i) {
    cplx s = chan_diag[i] * x[i];
    if (i > 0) s += chan_off * x[i - 1];
    if (i + 1 < nn) s += chan_off * x[i + 1];
    y[i] = s;
  }
  for (std::size_t j = 0; j < mm; ++j) y[nn + j] = disc[j] * x[nn + j];
  return y;
}

Matrix ModelOperator::dense() const {
  const std::size_t nn = n(), mm = m();
  Matrix a(nn + mm, nn + mm);
  for (std::size_t i = 0; i < nn; ++i) {
    a(i, i) = chan_diag[i];
    if (i + 1 < nn) {
      a(i, i + 1) = chan_off;
      a(i + 1, i) = chan_off;
    }
  }
  for (std::size_t j = 0; j < mm; ++j) a(nn + j, nn + j) = disc[j];
  return a;
}

ModelOperator assemble_h0(const ModelConfig& config) {
  config.validate();
  ModelOperator op;
  op.config = config;
  const double h2 = config.grid.h * config.grid.h;
  op.chan_diag.assign(config.grid.n, 2.0 / h2 + 0.25);
  op.chan_off = -1.0 / h2;
  op.disc = config.discrete_levels;
  return op;
}

Vec PotentialOperator::apply(const Vec& x) const {
  const std::size_t nn = n(), mm = m();
  if (x.size() != nn + mm) throw ConfigError("PotentialOperator::apply: size mismatch");
  Vec y(nn + mm, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < nn; ++i) {
    cplx s = v_diag[i] * x[i];
    for (std::size_t j = 0; j < mm; ++j) s += w(i, j) * x[nn + j];
    y[i] = s;
  }
  for (std::size_t j = 0; j < mm; ++j) {
    cplx s(0.0, 0.0);
    for (std::size_t i = 0; i < nn; ++i) s += std::conj(w(i, j)) * x[i];
    for (std::size_t jj = 0; jj < mm; ++jj) s += disc(j, jj) * x[nn + jj];
    y[nn + j] = s;
  }
  return y;
}

Matrix PotentialOperator::dense() const {
  const std::size_t nn = n(), mm = m();
  Matrix a(nn + mm, nn + mm);
  for (std::size_t i = 0; i < nn; ++i) a(i, i) = v_diag[i];
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < mm; ++j) {
      a(i, nn + j) = w(i, j);
      a(nn + j, i) = std::conj(w(i, j));
    }
  for (std::size_t i = 0; i < mm; ++i)
    for (std::size_t j = 0; j < mm; ++j) a(nn + i, nn + j) = disc(i, j);
  return a;
}

PotentialOperator assemble_potential(const ModelConfig& config) {
  config.validate();
  PotentialOperator v;
  const Grid& g = config.grid;
  const double sqrth = std::sqrt(g.h);
  v.v_diag.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) v.v_diag[i] = config.potential(g.node(i), g.c);
  v.w = Matrix(g.n, config.m());
  for (std::size_t j = 0; j < config.m(); ++j) {
    const Profile& p = config.couplings[j];
    if (p.is_zero()) continue;
    for (std::size_t i = 0; i < g.n; ++i) v.w(i, j) = sqrth * p(g.node(i), g.c);
  }
  v.disc = config.discrete_block;
  return v;
}

WeightL assemble_weight(const Grid& grid, std::size_t m) {
  WeightL w;
  w.diag.resize(grid.n + m);
  for (std::size_t i = 0; i < grid.n; ++i) w.diag[i] = 1.0 + grid.node(i);
  for (std::size_t j = 0; j < m; ++j) w.diag[grid.n + j] = 1.0;
  return w;
}

Matrix dense_h_lambda(const ModelOperator& h0, const PotentialOperator& v, double lambda) {
  Matrix a = h0.dense();
  if (lambda != 0.0) {
    Matrix vm = v.dense();
    a = add(a, vm, lambda);
  }
  hermitize(a);
  return a;
}

Vec apply_h_lambda(const ModelOperator& h0, const PotentialOperator& v, double lambda,
                   const Vec& x) {
  Vec y = h0.apply(x);
  if (lambda != 0.0) {
    Vec vy = v.apply(x);
    axpy(cplx(lambda, 0.0), vy, y);
  }
  return y;
}

Matrix ScaledOperator::dense() const {
  Matrix a(dim(), dim());
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = chan_diag[i];
    if (i + 1 < n) {
      a(i, i + 1) = chan_off;
      a(i + 1, i) = chan_off;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      a(i, n + j) = w(i, j);
      a(n + j, i) = w(i, j);  // complex symmetric, not Hermitian
    }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(n + i, n + j) = disc_block(i, j);
  return a;
}

ScaledOperator complex_scale(const ModelConfig& config, double theta) {
  config.validate();
  if (!(theta >= 0.0 && theta < kPi / 4.0))
    throw ConfigError("complex_scale: theta must lie in [0, pi/4)");
  if (!config.potential.analytic)
    throw ConfigError("complex_scale: channel potential is not analytic in the sector");
  for (const Profile& p : config.couplings)
    if (!p.analytic)
      throw ConfigError("complex_scale: coupling profile is not analytic in the sector");

  const Grid& g = config.grid;
  ScaledOperator op;
  op.n = g.n;
  op.m = config.m();
  const double h2 = g.h * g.h;
  const cplx rot = std::exp(cplx(0.0, -2.0 * theta));
  const cplx phase = std::exp(cplx(0.0, theta));
  op.chan_off = rot * (-1.0 / h2);
  op.chan_diag.resize(g.n);
  const double lam = config.lambda;
  for (std::size_t i = 0; i < g.n; ++i) {
    const cplx r = g.c + (g.node(i) - g.c) * phase;
    op.chan_diag[i] = rot * (2.0 / h2) + 0.25 + lam * config.potential.eval(r, g.c);
  }
  op.w = Matrix(g.n, op.m);
  const double sqrth = std::sqrt(g.h);
  for (std::size_t j = 0; j < op.m; ++j) {
    const Profile& p = config.couplings[j];
    if (p.is_zero()) continue;
    for (std::size_t i = 0; i < g.n; ++i) {
      const cplx r = g.c + (g.node(i) - g.c) * phase;
      op.w(i, j) = lam * sqrth * p.eval(r, g.c);
    }
  }
  op.disc_block = Matrix(op.m, op.m);
  for (std::size_t i = 0; i < op.m; ++i) op.disc_block(i, i) = config.discrete_levels[i];
  for (std::size_t i = 0; i < op.m; ++i)
    for (std::size_t j = 0; j < op.m; ++j)
      op.disc_block(i, j) += lam * config.discrete_block(i, j);
  return op;
}

}  // namespace mourre
