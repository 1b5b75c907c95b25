#pragma once

#include "mourre/vecmat.hpp"

namespace mourre {

/// Full spectrum of a general complex matrix, sorted by (Re, Im).
/// vectors.row(i) is a unit right eigenvector for values[i] (not orthogonal in
/// general); defective is set when an eigenvalue cluster has fewer independent
/// eigenvectors than its multiplicity.
struct GenEig {
  Vec values;
  Matrix vectors;
  bool defective = false;
  double max_residual = 0.0;  // max_i ||A v_i - lambda_i v_i||_2
};

/// Hessenberg reduction + shifted QR with deflation; eigenvectors by
/// triangular back-substitution through the accumulated Schur basis.
GenEig general_eig(const Matrix& a, bool want_vectors = true);

}  // namespace mourre
