#include <immintrin.h>

#include <cstdint>

#include "symcon/kernels.hpp"

namespace {

/* 4-wide double pack. Only mul/add are used by the kernel body, in the same
 * association order as the scalar instantiation. */
struct V4 {
  __m256d r;
  friend V4 operator+(V4 a, V4 b) { return {_mm256_add_pd(a.r, b.r)}; }
  friend V4 operator*(V4 a, V4 b) { return {_mm256_mul_pd(a.r, b.r)}; }
};

template <class P>
inline P p_broadcast(double c);
template <>
inline V4 p_broadcast<V4>(double c) {
  return {_mm256_set1_pd(c)};
}

}  // namespace

#include "kernel_body.inl"

namespace symcon::detail {

void run_avx2(const PreparedProgram& pp, const double* xs, std::size_t lanes, bool want_jac,
              double* out_x, double* out_jac) {
  const int n = pp.nx;
  const int nn = n * n;
  const std::size_t main_lanes = lanes - lanes % 4;
  V4 xloc[kKernelMaxDim];
  V4 xout[kKernelMaxDim];
  V4 jout[kKernelMaxDim * kKernelMaxDim];
  for (std::size_t l = 0; l < main_lanes; l += 4) {
    for (int d = 0; d < n; ++d)
      xloc[d].r = _mm256_loadu_pd(xs + static_cast<std::size_t>(d) * lanes + l);
    propagate_pack<V4>(pp, xloc, want_jac, xout, jout);
    for (int d = 0; d < n; ++d)
      _mm256_storeu_pd(out_x + static_cast<std::size_t>(d) * lanes + l, xout[d].r);
    if (want_jac)
      for (int i = 0; i < nn; ++i)
        _mm256_storeu_pd(out_jac + static_cast<std::size_t>(i) * lanes + l, jout[i].r);
  }
  if (main_lanes == lanes) return;
  // tail lanes go through the scalar kernel; identical results by construction
  const std::size_t tail = lanes - main_lanes;
  double txs[kKernelMaxDim * 3], tox[kKernelMaxDim * 3], toj[kKernelMaxDim * kKernelMaxDim * 3];
  for (int d = 0; d < n; ++d)
    for (std::size_t t = 0; t < tail; ++t)
      txs[static_cast<std::size_t>(d) * tail + t] = xs[static_cast<std::size_t>(d) * lanes + main_lanes + t];
  run_scalar(pp, txs, tail, want_jac, tox, toj);
  for (int d = 0; d < n; ++d)
    for (std::size_t t = 0; t < tail; ++t)
      out_x[static_cast<std::size_t>(d) * lanes + main_lanes + t] = tox[static_cast<std::size_t>(d) * tail + t];
  if (want_jac)
    for (int i = 0; i < nn; ++i)
      for (std::size_t t = 0; t < tail; ++t)
        out_jac[static_cast<std::size_t>(i) * lanes + main_lanes + t] = toj[static_cast<std::size_t>(i) * tail + t];
}

}  // namespace symcon::detail
