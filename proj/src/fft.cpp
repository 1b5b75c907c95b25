#include "mourre/fft.hpp"

#include <cmath>

namespace mourre {

namespace {

void fft_core(Vec& a, const std::vector<std::uint32_t>& bitrev, const Vec& twiddle) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      const cplx* w = twiddle.data();
      for (std::size_t k = 0; k < half; ++k, w += step) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * (*w);
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

struct FftTables {
  std::vector<std::uint32_t> bitrev;
  Vec twiddle;  // exp(-2 pi i k / n), k < n/2

  explicit FftTables(std::size_t n) {
    bitrev.resize(n);
    std::size_t lg = 0;
    while ((std::size_t{1} << lg) < n) ++lg;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < lg; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (lg - 1 - b);
      bitrev[i] = static_cast<std::uint32_t>(r);
    }
    twiddle.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      twiddle[k] = cplx(std::cos(ang), std::sin(ang));
    }
  }
};

}  // namespace

void fft_pow2(Vec& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("fft_pow2: length must be a power of two");
  if (inverse)
    for (auto& x : a) x = std::conj(x);
  FftTables tables(n);
  fft_core(a, tables.bitrev, tables.twiddle);
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x = std::conj(x) * inv;
  }
}

SinePlan::SinePlan(std::size_t n) : n_(n), m_(2 * (n + 1)) {
  if (n == 0) throw ConfigError("SinePlan: N must be >= 1");
  fast_ = ((n + 1) & n) == 0;  // N+1 a power of two
  if (fast_) {
    FftTables tables(m_);
    bitrev_ = std::move(tables.bitrev);
    twiddle_ = std::move(tables.twiddle);
  } else {
    sin_table_.resize(m_);
    for (std::size_t t = 0; t < m_; ++t)
      sin_table_[t] = std::sin(kPi * static_cast<double>(t) / static_cast<double>(n + 1));
  }
}

void SinePlan::apply(const cplx* in, cplx* out) const {
  const double scale = std::sqrt(2.0 / static_cast<double>(n_ + 1));
  if (fast_) {
    Vec y(m_, cplx(0.0, 0.0));
    for (std::size_t j = 1; j <= n_; ++j) {
      y[j] = in[j - 1];
      y[m_ - j] = -in[j - 1];
    }
    fft_core(y, bitrev_, twiddle_);
    // Y_k = -2i sum_j v_j sin(pi j k/(N+1))  =>  sum = i Y_k / 2.
    for (std::size_t k = 1; k <= n_; ++k)
      out[k - 1] = scale * 0.5 * cplx(0.0, 1.0) * y[k];
    return;
  }
  for (std::size_t k = 1; k <= n_; ++k) {
    cplx s(0.0, 0.0);
    for (std::size_t j = 1; j <= n_; ++j) {
      const std::uint64_t t = (static_cast<std::uint64_t>(j) * k) % m_;
      s += in[j - 1] * sin_table_[t];
    }
    out[k - 1] = scale * s;
  }
}

Vec SinePlan::apply(const Vec& v) const {
  if (v.size() != n_) throw ConfigError("SinePlan: size mismatch");
  Vec out(n_);
  apply(v.data(), out.data());
  return out;
}

RVec SinePlan::apply(const RVec& v) const {
  if (v.size() != n_) throw ConfigError("SinePlan: size mismatch");
  Vec in(n_);
  for (std::size_t i = 0; i < n_; ++i) in[i] = v[i];
  Vec out = apply(in);
  RVec res(n_);
  for (std::size_t i = 0; i < n_; ++i) res[i] = out[i].real();
  return res;
}

Vec sine_transform(const Vec& v) {
  const std::size_t n = v.size();
  if (n == 0) throw ConfigError("sine_transform: N must be >= 1");
  const std::size_t m = 2 * (n + 1);
  RVec table(m);
  for (std::size_t t = 0; t < m; ++t)
    table[t] = std::sin(kPi * static_cast<double>(t) / static_cast<double>(n + 1));
  const double scale = std::sqrt(2.0 / static_cast<double>(n + 1));
  Vec out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    cplx s(0.0, 0.0);
    for (std::size_t j = 1; j <= n; ++j)
      s += v[j - 1] * table[(static_cast<std::uint64_t>(j) * k) % m];
    out[k - 1] = scale * s;
  }
  return out;
}

RVec sine_transform(const RVec& v) {
  Vec in(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) in[i] = v[i];
  Vec out = sine_transform(in);
  RVec res(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) res[i] = out[i].real();
  return res;
}

Vec sine_transform_fast(const Vec& v) {
  SinePlan plan(v.size());
  return plan.apply(v);
}

}  // namespace mourre
