#pragma once

#include <string>

#include "mourre/vecmat.hpp"

namespace mourre {

/// Uniform grid on the channel interval [c, R_max], Dirichlet at both ends,
/// interior nodes r_j = c + j h, j = 1..N.
struct Grid {
  double c = 1.0;
  double r_max = 201.0;
  std::size_t n = 3999;
  double h = 0.05;

  double length() const { return r_max - c; }
  double node(std::size_t i) const { return c + static_cast<double>(i + 1) * h; }
  /// Dirichlet momentum lattice xi_l = l pi / (R_max - c), l = 1..N (index 0-based).
  double xi(std::size_t l) const { return static_cast<double>(l + 1) * kPi / length(); }
};

Grid build_grid(double c, double r_max, std::size_t n);

/// Named radial profile; all registry entries extend analytically to the
/// scaling sector r = c + (r-c) e^{i theta}, 0 < theta < pi/4.
struct Profile {
  std::string name = "zero";  // zero | exp | power | const | gauss | exp_node
  double a = 1.0;             // rate, power, or constant value
  double b = 0.0;             // node slope (exp_node only)
  bool analytic = true;

  double operator()(double r, double c) const;
  cplx eval(cplx r, double c) const;
  bool is_zero() const { return name == "zero" || (name == "const" && a == 0.0); }
};

Profile make_profile(const std::string& name, double a = 1.0, double b = 0.0);

struct ModelConfig {
  Grid grid;
  double k = 1.0;                   // embedded eigenvalue, > 1/4
  RVec discrete_levels = {1.0, 5.0};
  std::vector<Profile> couplings;   // one per discrete level
  Profile potential;                // channel multiplication v(r)
  Matrix discrete_block;            // Hermitian m x m addition to V
  double lambda = 1e-3;

  std::size_t m() const { return discrete_levels.size(); }
  std::size_t dim() const { return grid.n + m(); }
  void validate() const;
};

/// Spec-default model: k = 1 embedded in the channel continuum [1/4, oo),
/// second discrete level at 5, exponential coupling on the k level.
ModelConfig default_model(Grid grid = Grid{});

/// H0 = (Dirichlet discretization of -d^2/dr^2 + 1/4) (+) diag(mu).
struct ModelOperator {
  ModelConfig config;
  RVec chan_diag;   // 2/h^2 + 1/4
  double chan_off = 0.0;  // -1/h^2
  RVec disc;        // discrete levels

  std::size_t n() const { return config.grid.n; }
  std::size_t m() const { return disc.size(); }
  std::size_t dim() const { return n() + m(); }

  Vec apply(const Vec& x) const;
  Matrix dense() const;
};

ModelOperator assemble_h0(const ModelConfig& config);

/// V: channel diagonal v(r_j), coupling columns h^{1/2} w_i(r_j), discrete block.
struct PotentialOperator {
  RVec v_diag;   // channel, size N
  Matrix w;      // N x m, real entries stored complex
  Matrix disc;   // m x m Hermitian

  std::size_t n() const { return v_diag.size(); }
  std::size_t m() const { return disc.rows(); }
  std::size_t dim() const { return n() + m(); }

  Vec apply(const Vec& x) const;
  Matrix dense() const;
};

PotentialOperator assemble_potential(const ModelConfig& config);

/// Multiplication weight L: 1 + r on the channel, 1 on the discrete sector.
struct WeightL {
  RVec diag;  // size N + m
};
WeightL assemble_weight(const Grid& grid, std::size_t m);

/// H_lambda = H0 + lambda V, materialized densely.
Matrix dense_h_lambda(const ModelOperator& h0, const PotentialOperator& v, double lambda);
Vec apply_h_lambda(const ModelOperator& h0, const PotentialOperator& v, double lambda,
                   const Vec& x);

/// Complex-scaled H_lambda(theta): kinetic channel block times e^{-2 i theta},
/// profiles evaluated on the rotated contour, discrete sector unscaled.
struct ScaledOperator {
  std::size_t n = 0, m = 0;
  Vec chan_diag;      // size N: e^{-2 i theta} 2/h^2 + 1/4 + lambda v(rotated)
  cplx chan_off;      // single off-diagonal value e^{-2 i theta} (-1/h^2)
  Matrix w;           // N x m coupling, lambda h^{1/2} w(rotated)
  Matrix disc_block;  // m x m: diag(mu) + lambda V_disc

  std::size_t dim() const { return n + m; }
  Matrix dense() const;
};

ScaledOperator complex_scale(const ModelConfig& config, double theta);

}  // namespace mourre
