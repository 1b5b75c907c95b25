#pragma once

#include "mourre/conjugate.hpp"
#include "mourre/fgr.hpp"

namespace mourre {

/// |<f, [H, i S_hat] f>| / (||f||^2 ||S_hat|| ||H||) for an eigenpair (kappa, f)
/// of H. Exact algebra in finite dimension: rounding-level for true eigenpairs.
/// Throws ConfigError when f fails the eigenpair precondition.
double virial_residual(const Applier& apply_h, const Matrix& s_hat, const Vec& f,
                       double kappa, double h_norm, double s_norm);

struct TrackOptions {
  int max_rqi_iters = 40;
  int max_halvings = 14;
  double initial_step = 0.01;   // lambda continuation step
  double jump_guard = 0.05;     // flags tracking ambiguity
};

/// Resonance position zeta(lambda): eigenvalue of the complex-scaled operator
/// tracked continuously from zeta(0) = k by shift-invert Rayleigh iteration.
cplx locate_resonance(const ModelConfig& config, double theta, double lambda,
                      const TrackOptions& opt = {});

struct ResonanceReport {
  double theta = 0.0;
  RVec lambdas;
  Vec zetas;
  double gamma_fit = 0.0;   // Im zeta = -gamma lambda^2 on the small-lambda half
  double fit_residual = 0.0;  // max relative deviation on the fitted points
  bool fit_flagged = false;   // residual > 0.3
  double re_shift_max = 0.0;  // max |Re zeta - k| over the grid
};

ResonanceReport width_scan(const ModelConfig& config, double theta,
                           const RVec& lambda_grid, const TrackOptions& opt = {});

struct CompactnessProxy {
  RVec radii;
  RVec tail_norms;  // tau(rho) = || 1_{r > rho} [V, i S_hat] (H0 + 1)^{-1} ||
  std::string verdict;  // "decaying" | "non-decaying" | "borderline-recorded"
  double ratio = 0.0;   // tau(rho_max) / tau(rho_min)
};

/// Decay proxy for the commutator tail; verdict thresholds at ratio 0.2.
/// borderline = true suppresses the verdict (recorded only).
CompactnessProxy compactness_proxy(const ModelConfig& config, const Matrix& s_hat,
                                   std::size_t n_radii = 8, bool borderline = false);

}  // namespace mourre
