#include <cstdint>

#include "symcon/kernels.hpp"

namespace {
template <class P>
inline P p_broadcast(double c);
template <>
inline double p_broadcast<double>(double c) {
  return c;
}
}  // namespace

#include "kernel_body.inl"

namespace symcon::detail {

void run_scalar(const PreparedProgram& pp, const double* xs, std::size_t lanes, bool want_jac,
                double* out_x, double* out_jac) {
  const int n = pp.nx;
  const int nn = n * n;
  double xloc[kKernelMaxDim];
  double xout[kKernelMaxDim];
  double jout[kKernelMaxDim * kKernelMaxDim];
  for (std::size_t l = 0; l < lanes; ++l) {
    for (int d = 0; d < n; ++d) xloc[d] = xs[static_cast<std::size_t>(d) * lanes + l];
    propagate_pack<double>(pp, xloc, want_jac, xout, jout);
    for (int d = 0; d < n; ++d) out_x[static_cast<std::size_t>(d) * lanes + l] = xout[d];
    if (want_jac)
      for (int i = 0; i < nn; ++i) out_jac[static_cast<std::size_t>(i) * lanes + l] = jout[i];
  }
}

}  // namespace symcon::detail
