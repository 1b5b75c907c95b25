#pragma once

#include <cstdint>
#include <cstddef>

#include "mourre/types.hpp"

namespace mourre {

/// In-place radix-2 FFT; a.size() must be a power of two.
/// Forward convention: X_k = sum_j a_j exp(-2 pi i j k / M).
void fft_pow2(Vec& a, bool inverse);

/// Orthonormal sine transform on N interior points of a Dirichlet interval:
///   (S v)_k = sqrt(2/(N+1)) * sum_{j=1..N} v_j sin(pi j k / (N+1)),
/// an involution (S S = I). The plan precomputes either FFT twiddles
/// (N+1 a power of two) or a sine table for the direct O(N^2) product.
class SinePlan {
 public:
  explicit SinePlan(std::size_t n);

  std::size_t size() const { return n_; }
  bool fast() const { return fast_; }

  void apply(const cplx* in, cplx* out) const;
  Vec apply(const Vec& v) const;
  RVec apply(const RVec& v) const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;  // 2 (N+1)
  bool fast_ = false;
  RVec sin_table_;  // sin(pi t / (N+1)), t = 0 .. m_-1 (direct path)
  std::vector<std::uint32_t> bitrev_;  // fast path tables
  Vec twiddle_;
};

/// Direct O(N^2) sine transform (the reference path).
Vec sine_transform(const Vec& v);
RVec sine_transform(const RVec& v);

/// Plan-based transform; uses the FFT path when N+1 is a power of two.
Vec sine_transform_fast(const Vec& v);

}  // namespace mourre
