#pragma once

#include "mourre/model.hpp"

namespace mourre {

/// Orthonormal basis of the eigenprojector P for the embedded eigenvalue k:
/// the discrete-sector unit vectors whose level equals k.
std::vector<Vec> k_projector_basis(const ModelOperator& h0);

/// Gap between the two channel levels of H0 bracketing k (the resolution floor
/// of the truncated continuum is twice this).
double level_spacing_near(const ModelOperator& h0, double k);

/// Pbar ((H0-k)^2 + eps^2)^{-1} Pbar x, via resolvent solves at k +- i eps.
/// Throws ResolutionError when eps is below twice the measured level spacing.
Vec f_epsilon_apply(const ModelOperator& h0, double k, double eps, const Vec& x);

/// One epsilon sample of the golden-rule form G = P V Pbar F_eps Pbar V P.
struct FgrSample {
  double eps = 0.0;
  Matrix g;             // dim-P x dim-P, Hermitian PSD
  double eig_min = 0.0; // of G
  double eig_max = 0.0;
  double scaled_min = 0.0;  // eps * eig_min
  double scaled_max = 0.0;  // eps * eig_max
};

FgrSample fgr_sample(const ModelOperator& h0, const PotentialOperator& v, double k,
                     double eps);

/// Sweep + extrapolation: slope of log(min eig G) vs log eps, and the
/// quadratic-in-eps extrapolation of eps*G to eps -> 0.
struct FgrReport {
  RVec eps_grid;
  std::vector<FgrSample> samples;
  double slope = 0.0;
  Matrix gamma;          // extrapolated limit of eps * G
  double c0 = 0.0;       // least eigenvalue of gamma
  double c1 = 0.0;       // max over window of eps * eig_max
  double c2 = 0.0;       // min over window of eps * eig_min
  double fit_residual = 0.0;
  bool window_valid = false;  // |slope + 1| <= 0.2
  bool fgr_holds = false;     // c0 above rounding scale
};

FgrReport fgr_limit(const ModelOperator& h0, const PotentialOperator& v, double k,
                    const RVec& eps_grid);

/// B_eps = Im(F_eps V P) as rank factors: B = (X Y^dag - Y X^dag) / (2i),
/// columns x_a = F_eps V d_a, y_a = d_a.
struct BEpsFactors {
  std::vector<Vec> x;
  std::vector<Vec> y;
  double eps = 0.0;

  Vec apply(const Vec& v) const;
  Matrix dense(std::size_t dim) const;
};

BEpsFactors build_b_epsilon_factors(const ModelOperator& h0, const PotentialOperator& v,
                                    double k, double eps);
Matrix build_b_epsilon(const ModelOperator& h0, const PotentialOperator& v, double k,
                       double eps);

/// Node slope b* making the lattice coupling exp(-(r-c)) (1 - b* (r-c))
/// orthogonal to the channel mode nearest k: the engineered golden-rule
/// violation.
double node_coupling_slope(const Grid& grid, double k);

}  // namespace mourre
