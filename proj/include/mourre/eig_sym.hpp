#pragma once

#include <cstddef>

#include "mourre/vecmat.hpp"

namespace mourre {

/// Full spectrum of a Hermitian matrix, ascending.
/// vectors.row(i) is the eigenvector of values[i]; empty when not requested.
struct SymEig {
  RVec values;
  Matrix vectors;
};

/// Real symmetric tridiagonal eigenproblem (diag d, subdiag e, e.size() == d.size()-1).
/// Implicit-shift QL with optional accumulation.
SymEig tridiag_eig(RVec d, RVec e, bool want_vectors);

/// Number of eigenvalues of the tridiagonal (d, e) strictly below x (Sturm count).
std::size_t sturm_count(const RVec& d, const RVec& e, double x);

/// Selected eigenpairs of a real symmetric tridiagonal matrix in (lo, hi],
/// by bisection plus inverse iteration.
struct SelectedEig {
  RVec values;                    // ascending
  std::vector<RVec> vectors;      // empty when not requested
  std::size_t first_index = 0;    // global ascending index of values[0]
};
SelectedEig tridiag_eig_range(const RVec& d, const RVec& e, double lo, double hi,
                              bool want_vectors);

/// Dense Hermitian eigendecomposition (Householder tridiagonalization + QL).
/// Rejects non-Hermitian input. Real-symmetric input takes a faster all-real path.
SymEig hermitian_eig(const Matrix& a, bool want_vectors = true);

}  // namespace mourre
