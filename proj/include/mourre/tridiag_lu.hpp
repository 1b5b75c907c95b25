#pragma once

#include <cmath>
#include <vector>

#include "mourre/types.hpp"

namespace mourre {

/// LU factorization of a general tridiagonal matrix with partial pivoting
/// (gttrf/gttrs scheme). Scalar is double or cplx.
template <typename Scalar>
class GtLU {
 public:
  /// sub, diag, sup describe the matrix: A(i+1,i)=sub[i], A(i,i)=diag[i], A(i,i+1)=sup[i].
  GtLU(std::vector<Scalar> sub, std::vector<Scalar> diag, std::vector<Scalar> sup)
      : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
    const std::size_t n = d_.size();
    if (n == 0) throw ConfigError("GtLU: empty matrix");
    if (dl_.size() + 1 != n || du_.size() + 1 != n)
      if (!(n == 1 && dl_.empty() && du_.empty()))
        throw ConfigError("GtLU: band size mismatch");
    du2_.assign(n >= 2 ? n - 2 : 0, Scalar(0));
    piv_.assign(n, 0);
    min_pivot_ = 1e308;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (absval(d_[i]) >= absval(dl_[i])) {
        piv_[i] = 0;
        if (absval(d_[i]) == 0.0) d_[i] = tiny();
        const Scalar fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
        min_pivot_ = std::min(min_pivot_, absval(d_[i]));
      } else {
        piv_[i] = 1;
        const Scalar fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const Scalar temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        min_pivot_ = std::min(min_pivot_, absval(d_[i]));
      }
    }
    if (absval(d_[n - 1]) == 0.0) d_[n - 1] = tiny();
    min_pivot_ = std::min(min_pivot_, absval(d_[n - 1]));
  }

  /// Smallest pivot magnitude seen; near-zero signals a (numerically) singular shift.
  double min_pivot() const { return min_pivot_; }

  void solve_inplace(std::vector<Scalar>& b) const {
    const std::size_t n = d_.size();
    if (b.size() != n) throw ConfigError("GtLU::solve: size mismatch");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (piv_[i] == 0) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const Scalar temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n >= 2) {
      b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
      for (std::size_t i = n - 2; i-- > 0;)
        b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
  }

 private:
  static double absval(const Scalar& x) { return std::abs(x); }
  static Scalar tiny() { return Scalar(1e-300); }

  std::vector<Scalar> dl_, d_, du_, du2_;
  std::vector<int> piv_;
  double min_pivot_ = 0.0;
};

}  // namespace mourre
