/* Shared kernel body. Included by kernels_scalar.cpp (P = double) and
 * kernels_avx2.cpp (P = 4-wide pack). Operation order is identical across
 * instantiations; together with -ffp-contract=off this makes the backends
 * bit-for-bit equivalent. Everything here must stay local to the including
 * translation unit. */

namespace {

using symcon::detail::FoldedComponent;
using symcon::detail::kKernelMaxDim;
using symcon::detail::PreparedProgram;

template <class P>
inline P eval_component(const FoldedComponent& comp, const std::uint16_t* pool, const P* x) {
  P acc = p_broadcast<P>(0.0);
  for (const auto& t : comp.terms) {
    P v = p_broadcast<P>(t.coeff);
    for (std::uint32_t i = 0; i < t.count; ++i) v = v * x[pool[t.begin + i]];
    acc = acc + v;
  }
  return acc;
}

template <class P>
inline void eval_field(const PreparedProgram& pp, const std::uint16_t* pool, const P* x, P* out) {
  for (int i = 0; i < pp.nx; ++i) out[i] = eval_component<P>(pp.f[static_cast<std::size_t>(i)], pool, x);
}

template <class P>
inline void eval_jacobian(const PreparedProgram& pp, const std::uint16_t* pool, const P* x, P* out) {
  const int nn = pp.nx * pp.nx;
  for (int i = 0; i < nn; ++i) out[i] = eval_component<P>(pp.jac[static_cast<std::size_t>(i)], pool, x);
}

/* k_J = A(x) * J, row-major n x n */
template <class P>
inline void matmul(int n, const P* a, const P* j, P* out) {
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      P acc = p_broadcast<P>(0.0);
      for (int m = 0; m < n; ++m) acc = acc + a[r * n + m] * j[m * n + c];
      out[r * n + c] = acc;
    }
}

template <class P>
inline void propagate_pack(const PreparedProgram& pp, const P* x_in, bool want_jac, P* x_out,
                           P* jac_out) {
  const int n = pp.nx;
  const std::uint16_t* pool = pp.idx_pool->data();

  if (!pp.continuous) {
    eval_field<P>(pp, pool, x_in, x_out);
    if (want_jac) eval_jacobian<P>(pp, pool, x_in, jac_out);
    return;
  }

  const int nn = n * n;
  P x[kKernelMaxDim], xs[kKernelMaxDim];
  P k1[kKernelMaxDim], k2[kKernelMaxDim], k3[kKernelMaxDim], k4[kKernelMaxDim];
  P jmat[kKernelMaxDim * kKernelMaxDim], js[kKernelMaxDim * kKernelMaxDim];
  P a[kKernelMaxDim * kKernelMaxDim];
  P kj1[kKernelMaxDim * kKernelMaxDim], kj2[kKernelMaxDim * kKernelMaxDim];
  P kj3[kKernelMaxDim * kKernelMaxDim], kj4[kKernelMaxDim * kKernelMaxDim];

  for (int i = 0; i < n; ++i) x[i] = x_in[i];
  if (want_jac)
    for (int i = 0; i < nn; ++i) jmat[i] = p_broadcast<P>(i % (n + 1) == 0 ? 1.0 : 0.0);

  const double hsub = pp.dt / static_cast<double>(pp.substeps);
  const P half_h = p_broadcast<P>(0.5 * hsub);
  const P full_h = p_broadcast<P>(hsub);
  const P sixth_h = p_broadcast<P>(hsub / 6.0);
  const P two = p_broadcast<P>(2.0);

  for (int step = 0; step < pp.substeps; ++step) {
    // stage 1
    eval_field<P>(pp, pool, x, k1);
    if (want_jac) {
      eval_jacobian<P>(pp, pool, x, a);
      matmul<P>(n, a, jmat, kj1);
    }
    // stage 2
    for (int i = 0; i < n; ++i) xs[i] = x[i] + half_h * k1[i];
    eval_field<P>(pp, pool, xs, k2);
    if (want_jac) {
      for (int i = 0; i < nn; ++i) js[i] = jmat[i] + half_h * kj1[i];
      eval_jacobian<P>(pp, pool, xs, a);
      matmul<P>(n, a, js, kj2);
    }
    // stage 3
    for (int i = 0; i < n; ++i) xs[i] = x[i] + half_h * k2[i];
    eval_field<P>(pp, pool, xs, k3);
    if (want_jac) {
      for (int i = 0; i < nn; ++i) js[i] = jmat[i] + half_h * kj2[i];
      eval_jacobian<P>(pp, pool, xs, a);
      matmul<P>(n, a, js, kj3);
    }
    // stage 4
    for (int i = 0; i < n; ++i) xs[i] = x[i] + full_h * k3[i];
    eval_field<P>(pp, pool, xs, k4);
    if (want_jac) {
      for (int i = 0; i < nn; ++i) js[i] = jmat[i] + full_h * kj3[i];
      eval_jacobian<P>(pp, pool, xs, a);
      matmul<P>(n, a, js, kj4);
    }
    // combine
    for (int i = 0; i < n; ++i)
      x[i] = x[i] + sixth_h * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    if (want_jac)
      for (int i = 0; i < nn; ++i)
        jmat[i] = jmat[i] + sixth_h * (kj1[i] + two * kj2[i] + two * kj3[i] + kj4[i]);
  }

  for (int i = 0; i < n; ++i) x_out[i] = x[i];
  if (want_jac)
    for (int i = 0; i < nn; ++i) jac_out[i] = jmat[i];
}

}  // namespace
