#pragma once

#include "mourre/conjugate.hpp"
#include "mourre/fgr.hpp"

namespace mourre {

/// Spectral projector of a Hermitian matrix onto eigenvalues in (lo, hi].
struct Projector {
  std::vector<Vec> basis;  // orthonormal
  bool empty_warning = false;

  std::size_t rank() const { return basis.size(); }
  Matrix dense(std::size_t dim) const;
  Vec apply(const Vec& x) const;
  Vec complement_apply(const Vec& x) const;  // (1 - P) x
};

Projector spectral_projector(const Matrix& a, double lo, double hi);

/// Eigenpairs of the block-diagonal H0 with eigenvalue in (lo, hi]:
/// selected channel modes plus discrete levels. exclude_k drops the embedded
/// eigenvalue's discrete vectors (the projection to ran Pbar).
struct ModelWindow {
  std::vector<Vec> basis;
  RVec values;
  std::vector<bool> in_p;  // true for discrete vectors with level == k
  bool empty_warning = false;
};

ModelWindow model_window(const ModelOperator& h0, double lo, double hi, bool exclude_k);

/// Finite-volume compact-part removal: directions of a spectral window are
/// kept when their mass outside the bulk region [bulk_lo, bulk_hi] (walls and
/// cutoff ramp) is at most boundary_mass_max. The discrete sector counts as
/// bulk.
struct RemovalParams {
  double inner_margin_frac = 0.05;   // bulk starts at c + a1 + frac * L
  double outer_margin_frac = 0.15;   // bulk ends at R_max - frac * L
  double boundary_mass_max = 0.10;
};

struct GapReport {
  double j_lo = 0.0, j_hi = 0.0;
  double g_ref = 0.0;       // 4 (inf J - 1/4)
  double g_raw = 0.0;       // least eig of compressed commutator on the window
  double g_bulk = 0.0;      // least eig on the bulk-restricted window
  double eps_upsilon = 0.0; // max(0, g_ref - g_bulk)
  std::size_t dim_window = 0, dim_bulk = 0;
  RVec compact_eigs;        // eigenvalues of C - g_ref I (the window compact part)
  RVec compact_radius;      // 90% channel-mass radius of its principal directions
  double compact_norm = 0.0;  // || compressed ([H, iS] - 4 (H - 1/4)) ||
  bool rank_zero_warning = false;
  bool pass = false;
};

/// Localized commutator estimate on E_J(H0); free_channel restricts the
/// window to the channel sector.
GapReport mourre_gap(const ModelOperator& h0, const SOperator& s, double j_lo,
                     double j_hi, const RemovalParams& rp = {},
                     bool free_channel = false);

struct ReducedGapStep {
  double j_lo = 0.0, j_hi = 0.0;
  double g_bulk = 0.0, g_raw = 0.0;
  double c_min = 0.0;
  double compact_norm = 0.0;
  std::size_t dim_window = 0, dim_bulk = 0;
};

struct ReducedGapReport {
  std::vector<ReducedGapStep> steps;
  bool success = false;
  double c = 0.0;           // achieved bound on ran Pbar
  double j_lo = 0.0, j_hi = 0.0;
};

/// Interval-shrinking estimate on ran Pbar: shrink J around k by shrink_factor
/// until the bulk-restricted commutator clears 0.5 * 4 (inf J - 1/4).
ReducedGapReport reduced_gap(const ModelOperator& h0, const SOperator& s, double j0_lo,
                             double j0_hi, const RemovalParams& rp = {},
                             int max_iter = 12, double shrink_factor = 0.7);

/// Operator norms of the three commutator pieces on E_J(H0), split into the
/// Pbar/P blocks.
struct BlockNorms {
  double lambda = 0.0, theta = 0.0, eps = 0.0;
  double p1_bb = 0.0, p1_off = 0.0, p1_pp = 0.0;  // [lambda V, i Pbar S Pbar]
  double p2_bb = 0.0, p2_off = 0.0, p2_pp = 0.0;  // [H0, i lambda theta B]
  double p3_bb = 0.0, p3_off = 0.0, p3_pp = 0.0;  // [lambda V, i lambda theta B]
  double p3_pp_identity_error = 0.0;  // vs lambda^2 theta G_eps
  std::size_t dim_window = 0, dim_p = 0;
};

BlockNorms block_norms(const ModelOperator& h0, const PotentialOperator& v,
                       const SOperator& s, const BEpsFactors& b, double lambda,
                       double theta, double eps, double j_lo, double j_hi);

/// The lambda-independent compressed [V, i Pbar S Pbar]; sweeps compute it once.
Matrix piece_one_compressed(const ModelOperator& h0, const PotentialOperator& v,
                            const SOperator& s, const ModelWindow& w);

/// Same, with a precomputed spectral window and optional cached piece one.
BlockNorms block_norms(const ModelOperator& h0, const PotentialOperator& v,
                       const SOperator& s, const BEpsFactors& b, double lambda,
                       double theta, double eps, const ModelWindow& w,
                       const Matrix* c1_raw = nullptr);

struct FinalGapReport {
  double lambda = 0.0, eps = 0.0, theta = 0.0;
  double i_lo = 0.0, i_hi = 0.0;
  double g_raw = 0.0, g_bulk = 0.0;
  double c_hat = 0.0;       // g_bulk * eps / (lambda^2 theta)
  double c_hat_raw = 0.0;
  std::size_t dim_window = 0, dim_bulk = 0;
  bool lambda_zero_flag = false;
};

/// Full-chain estimate: compressed [H_lambda, i S_hat] on E_I(H_lambda) with
/// the scaling eps = lambda^a, theta = lambda^b, 0 < b < a < 1.
FinalGapReport final_gap(const ModelConfig& config, double upsilon, CutoffChi chi,
                         double lambda, double a, double b, double i_lo, double i_hi,
                         const RemovalParams& rp = {});

}  // namespace mourre
