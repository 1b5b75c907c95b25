#pragma once

#include "mourre/tridiag_lu.hpp"
#include "mourre/vecmat.hpp"

namespace mourre {

/// Dense LU with partial pivoting.
class DenseLU {
 public:
  DenseLU() = default;
  explicit DenseLU(Matrix a);
  Vec solve(Vec b) const;
  double min_pivot() const { return min_pivot_; }
  double scale() const { return scale_; }

 private:
  Matrix lu_;
  std::vector<std::size_t> piv_;
  double min_pivot_ = 0.0;
  double scale_ = 0.0;
};

/// x with (A - z I) x = b for Hermitian A. Dense path; one step of iterative
/// refinement. Throws NumericsError when the shift is numerically singular.
Vec shifted_solve(const Matrix& a, cplx z, const Vec& b);

/// Factorization of (M - z) for the bordered-tridiagonal block matrix
///   M = [[T, C], [B, D]],  T tridiagonal n x n, C n x m, B m x n, D m x m,
/// via the Schur complement on the border.
class BorderedShiftLU {
 public:
  BorderedShiftLU(const Vec& sub, const Vec& diag, const Vec& sup, const Matrix& c,
                  const Matrix& b, const Matrix& d, cplx z);

  Vec solve(const Vec& rhs) const;  // rhs size n + m
  double min_pivot() const { return min_pivot_; }

 private:
  std::size_t n_, m_;
  GtLU<cplx> tlu_;
  Matrix w_;        // (T-z)^{-1} C, n x m
  Matrix b_;        // border rows
  DenseLU schur_;   // factored S = (D - z) - B W
  double min_pivot_ = 0.0;

  static GtLU<cplx> make_tlu(const Vec& sub, const Vec& diag, const Vec& sup, cplx z);
};

}  // namespace mourre
