#include <atomic>
#include <cmath>

#include "symcon/kernels.hpp"

namespace symcon {

namespace {

std::atomic<int> g_forced{-1};  // -1 auto, else KernelBackend value

bool cpu_has_avx2() {
#if defined(SYMCON_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

bool kernel_backend_available(KernelBackend b) {
  return b == KernelBackend::scalar || (b == KernelBackend::avx2 && cpu_has_avx2());
}

KernelBackend active_kernel_backend() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<KernelBackend>(forced);
  return cpu_has_avx2() ? KernelBackend::avx2 : KernelBackend::scalar;
}

void force_kernel_backend(std::optional<KernelBackend> b) {
  if (!b) {
    g_forced.store(-1, std::memory_order_relaxed);
    return;
  }
  if (!kernel_backend_available(*b))
    throw ConfigError("requested kernel backend is not available on this machine");
  g_forced.store(static_cast<int>(*b), std::memory_order_relaxed);
}

BatchPropagator::BatchPropagator(PolynomialField field, bool continuous, double time_step,
                                 int substeps)
    : field_(std::move(field)), continuous_(continuous), dt_(time_step), substeps_(substeps) {
  if (field_.state_dim() > detail::kKernelMaxDim)
    throw ConstructionError("batch propagator: state dimension exceeds kernel limit");
  if (continuous_ && (dt_ <= 0.0 || substeps_ <= 0))
    throw ConstructionError("batch propagator: time step and substeps must be positive");

  auto pool = std::make_shared<std::vector<std::uint16_t>>();
  auto compile = [&](const std::vector<PolyTerm>& terms) {
    std::vector<TermTemplate> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
      TermTemplate tt;
      tt.coeff = t.coeff;
      tt.u_pow = t.u_pow;
      tt.begin = static_cast<std::uint32_t>(pool->size());
      for (std::size_t d = 0; d < t.x_pow.size(); ++d)
        for (int p = 0; p < t.x_pow[d]; ++p) pool->push_back(static_cast<std::uint16_t>(d));
      tt.count = static_cast<std::uint32_t>(pool->size()) - tt.begin;
      out.push_back(std::move(tt));
    }
    return out;
  };

  const int n = field_.state_dim();
  f_templates_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f_templates_.push_back(compile(field_.components()[static_cast<std::size_t>(i)]));
  jac_templates_.reserve(static_cast<std::size_t>(n) * n);
  // differentiate via the field's exact term lists
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<PolyTerm> dterms;
      for (const auto& t : field_.components()[static_cast<std::size_t>(i)]) {
        const int p = t.x_pow[static_cast<std::size_t>(j)];
        if (p == 0) continue;
        PolyTerm d = t;
        d.coeff *= static_cast<double>(p);
        d.x_pow[static_cast<std::size_t>(j)] = p - 1;
        dterms.push_back(std::move(d));
      }
      jac_templates_.push_back(compile(dterms));
    }
  pool_ = std::move(pool);
}

std::shared_ptr<const BatchPropagator::Prepared> BatchPropagator::prepare(const Vec& u) const {
  if (u.size() != field_.input_dim())
    throw ConstructionError("batch propagator: input dimension mismatch");
  auto pp = std::make_shared<Prepared>();
  pp->nx = field_.state_dim();
  pp->continuous = continuous_;
  pp->dt = dt_;
  pp->substeps = substeps_;
  pp->idx_pool = pool_;
  auto fold = [&](const std::vector<TermTemplate>& templates) {
    detail::FoldedComponent comp;
    comp.terms.reserve(templates.size());
    for (const auto& tt : templates) {
      double c = tt.coeff;
      for (std::size_t k = 0; k < tt.u_pow.size(); ++k)
        for (int p = 0; p < tt.u_pow[k]; ++p) c *= u[static_cast<long>(k)];
      comp.terms.push_back({c, tt.begin, tt.count});
    }
    return comp;
  };
  pp->f.reserve(f_templates_.size());
  for (const auto& t : f_templates_) pp->f.push_back(fold(t));
  pp->jac.reserve(jac_templates_.size());
  for (const auto& t : jac_templates_) pp->jac.push_back(fold(t));
  return pp;
}

void BatchPropagator::run(const Prepared& p, const double* xs, std::size_t lanes,
                          bool want_jacobian, double* out_x, double* out_jac) const {
  if (lanes == 0) return;
#ifdef SYMCON_HAVE_AVX2
  if (active_kernel_backend() == KernelBackend::avx2) {
    detail::run_avx2(p, xs, lanes, want_jacobian, out_x, out_jac);
    return;
  }
#endif
  detail::run_scalar(p, xs, lanes, want_jacobian, out_x, out_jac);
}

Vec BatchPropagator::eval_point(const Vec& x, const Vec& u) const {
  const auto pp = prepare(u);
  const int n = field_.state_dim();
  Vec out(n);
  detail::run_scalar(*pp, x.data(), 1, false, out.data(), nullptr);
  if (!out.allFinite()) throw NumericsError("propagation produced non-finite state");
  return out;
}

std::pair<Vec, Mat> BatchPropagator::eval_point_with_jacobian(const Vec& x, const Vec& u) const {
  const auto pp = prepare(u);
  const int n = field_.state_dim();
  Vec out(n);
  Vec jflat(n * n);
  detail::run_scalar(*pp, x.data(), 1, true, out.data(), jflat.data());
  Mat j(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) j(i, k) = jflat[i * n + k];
  if (!out.allFinite() || !j.allFinite())
    throw NumericsError("propagation produced non-finite state or Jacobian");
  return {std::move(out), std::move(j)};
}

}  // namespace symcon
