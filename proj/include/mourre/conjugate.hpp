#pragma once

#include <functional>

#include "mourre/fft.hpp"
#include "mourre/model.hpp"

namespace mourre {

/// Odd momentum symbol Phi_Y(x) = x beta(x/Y): identity on [-Y, Y], supported
/// in |x| <= 4Y, |Phi_Y| <= 2Y; beta is the standard exp(-1/t) bump.
struct SymbolPhi {
  double upsilon = 8.0;
  double operator()(double x) const;
  RVec sampled(const Grid& grid) const;  // Phi_Y(xi_l), l = 1..N
};

SymbolPhi build_phi(double upsilon);

/// Spatial cutoff: 0 near the channel start, 1 from c + a1 on, smooth ramp.
struct CutoffChi {
  double a0 = 1.0;
  double a1 = 3.0;
  double operator()(double r, double c) const;
  RVec sampled(const Grid& grid) const;
};

/// Smooth step built from exp(-1/t): 0 at t<=0, 1 at t>=1.
double smooth_step(double t);

/// Operator with multiplier values m_l on the Dirichlet sine modes:
/// Psi diag(m_l) Psi, real symmetric.
Matrix fourier_multiplier(const Grid& grid, const RVec& multiplier_values);

/// Micro-localized generator of dilations on the channel,
///   S = chi (M R + R M) chi,  M = -(i/2) (K D G + G D K),
/// with K, G the sine multipliers Phi_Y(xi), 1/xi, and D the centered
/// antisymmetric difference. Annihilates the discrete sector.
class SOperator {
 public:
  SOperator(const Grid& grid, double upsilon, CutoffChi chi, std::size_t m_disc);

  std::size_t dim() const { return grid_.n + m_; }
  const Grid& grid() const { return grid_; }
  double upsilon() const { return phi_.upsilon; }
  const CutoffChi& cutoff() const { return chi_; }

  Vec apply(const Vec& x) const;          // full space (n + m)
  Vec apply_multiplier(const Vec& xc) const;  // M on a channel vector (length n)
  Matrix dense() const;                   // materializes S, Hermitian

 private:
  Grid grid_;
  std::size_t m_;
  SymbolPhi phi_;
  CutoffChi chi_;
  RVec chi_vals_, kvals_, gvals_;
  SinePlan plan_;
};

/// i (A S - S A); Hermitian when both inputs are.
Matrix commutator(const Matrix& a, const Matrix& s);

/// Compressed commutator Q^dag i(A S - S A) Q for thin Q (columns) given
/// operator appliers; r x r Hermitian output.
using Applier = std::function<Vec(const Vec&)>;
Matrix compressed_commutator(const std::vector<Vec>& q, const Applier& apply_a,
                             const Applier& apply_s);

/// Compressed form Q^dag A Q.
Matrix compressed_form(const std::vector<Vec>& q, const Applier& apply_a);

struct LeadingTermReport {
  double residual = 0.0;  // || compressed ( [d^2, S] - 4 X D M X ) ||
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  std::size_t states = 0;
  double ratio() const { return residual / std::max(1e-300, std::max(lhs_norm, rhs_norm)); }
};

/// Compares [d_r^2, chi (M R + R M) chi] against its leading part 4 X D M X on
/// wave packets with momentum in [xi_min, Y/2] and position where chi = 1.
LeadingTermReport leading_term_residual(const Grid& grid, double upsilon, CutoffChi chi);

/// S_hat = Pbar S Pbar + lambda theta B; p_basis holds the columns of the rank
/// projector P (orthonormal).
Matrix assemble_s_hat(const Matrix& s, const std::vector<Vec>& p_basis, const Matrix& b_eps,
                      double lambda, double theta);

}  // namespace mourre
