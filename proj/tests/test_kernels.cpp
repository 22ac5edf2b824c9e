#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "symcon/kernels.hpp"
#include "symcon/system.hpp"
#include "symcon/util.hpp"

using namespace symcon;

namespace {

PolynomialField random_field(Rng& rng, int nx, int nu, int max_terms = 5, int max_deg = 3) {
  std::vector<std::vector<PolyTerm>> comps(static_cast<std::size_t>(nx));
  for (auto& comp : comps) {
    const int terms = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_terms)));
    for (int t = 0; t < terms; ++t) {
      PolyTerm term;
      term.coeff = rng.uniform(-1.0, 1.0);
      term.x_pow.assign(static_cast<std::size_t>(nx), 0);
      term.u_pow.assign(static_cast<std::size_t>(nu), 0);
      int budget = max_deg;
      for (int i = 0; i < nx && budget > 0; ++i) {
        const int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(budget + 1)));
        term.x_pow[static_cast<std::size_t>(i)] = p;
        budget -= p;
      }
      if (nu > 0 && budget > 0)
        term.u_pow[rng.below(static_cast<std::uint64_t>(nu))] =
            static_cast<int>(rng.below(static_cast<std::uint64_t>(budget + 1)));
      comp.push_back(std::move(term));
    }
  }
  return PolynomialField(nx, nu, std::move(comps));
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct BatchOut {
  std::vector<double> x, jac;
};

BatchOut run_backend(const BatchPropagator& bp, const Vec& u, const std::vector<double>& xs,
                     std::size_t lanes, KernelBackend backend) {
  force_kernel_backend(backend);
  const int n = bp.state_dim();
  BatchOut out;
  out.x.assign(static_cast<std::size_t>(n) * lanes, 0.0);
  out.jac.assign(static_cast<std::size_t>(n) * n * lanes, 0.0);
  const auto prepared = bp.prepare(u);
  bp.run(*prepared, xs.data(), lanes, true, out.x.data(), out.jac.data());
  force_kernel_backend(std::nullopt);
  return out;
}

}  // namespace

TEST_CASE("polynomial field evaluation and Jacobians") {
  // f(x,u) = (x0^2 + 2 u0, x0 x1 - 1)
  std::vector<std::vector<PolyTerm>> comps{
      {PolyTerm{1.0, {2, 0}, {0}}, PolyTerm{2.0, {0, 0}, {1}}},
      {PolyTerm{1.0, {1, 1}, {0}}, PolyTerm{-1.0, {0, 0}, {0}}},
  };
  const PolynomialField f(2, 1, comps);
  const Vec x = (Vec(2) << 3.0, -2.0).finished();
  const Vec u = Vec::Constant(1, 0.5);
  const Vec fx = f.eval(x, u);
  CHECK(fx[0] == doctest::Approx(10.0));
  CHECK(fx[1] == doctest::Approx(-7.0));
  const Mat jx = f.jacobian_x(x, u);
  CHECK(jx(0, 0) == doctest::Approx(6.0));
  CHECK(jx(0, 1) == doctest::Approx(0.0));
  CHECK(jx(1, 0) == doctest::Approx(-2.0));
  CHECK(jx(1, 1) == doctest::Approx(3.0));
  const Mat ju = f.jacobian_u(x, u);
  CHECK(ju(0, 0) == doctest::Approx(2.0));
  CHECK(ju(1, 0) == doctest::Approx(0.0));
  CHECK(!f.is_affine());
}

TEST_CASE("taylor remainder bound dominates sampled remainders") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 2 + static_cast<int>(rng.below(2));
    const int nu = 1 + static_cast<int>(rng.below(2));
    const PolynomialField f = random_field(rng, nx, nu);
    Vec absmax = Vec::Constant(nx, 3.0);
    Vec h(nx), u(nu);
    for (int i = 0; i < nx; ++i) h[i] = rng.uniform(0.0, 0.5);
    for (int i = 0; i < nu; ++i) u[i] = rng.uniform(-1.0, 1.0);
    const Vec bound = f.taylor_remainder_bound(absmax, h, u);
    const Hyperrectangle cbox(Vec::Zero(nx), absmax - h);
    const Hyperrectangle dbox(Vec::Zero(nx), h);
    for (int i = 0; i < 500; ++i) {
      const Vec c = cbox.sample(rng);
      const Vec d = dbox.sample(rng);
      const Vec rem = f.eval(c + d, u) - f.eval(c, u) - f.jacobian_x(c, u) * d;
      CHECK((rem.cwiseAbs().array() <= bound.array() + 1e-12).all());
    }
  }
}

TEST_CASE("affine fields have zero taylor remainder") {
  std::vector<std::vector<PolyTerm>> comps{
      {PolyTerm{1.0, {1, 0}, {0}}, PolyTerm{0.1, {0, 1}, {0}}},
      {PolyTerm{1.0, {0, 1}, {0}}, PolyTerm{0.1, {0, 0}, {1}}},
  };
  const PolynomialField f(2, 1, comps);
  CHECK(f.is_affine());
  const Vec bound =
      f.taylor_remainder_bound(Vec::Constant(2, 10.0), Vec::Constant(2, 1.0), Vec::Zero(1));
  CHECK(bound.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch kernel matches per-point evaluation (discrete)") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = 1 + static_cast<int>(rng.below(4));
    const int nu = 1 + static_cast<int>(rng.below(2));
    const PolynomialField f = random_field(rng, nx, nu);
    const BatchPropagator bp(f, false, 1.0, 1);
    Vec u(nu);
    for (int i = 0; i < nu; ++i) u[i] = rng.uniform(-1, 1);
    const std::size_t lanes = 13;
    std::vector<double> xs(static_cast<std::size_t>(nx) * lanes);
    for (auto& v : xs) v = rng.uniform(-2, 2);
    const BatchOut out = run_backend(bp, u, xs, lanes, KernelBackend::scalar);
    for (std::size_t l = 0; l < lanes; ++l) {
      Vec x(nx);
      for (int d = 0; d < nx; ++d) x[d] = xs[static_cast<std::size_t>(d) * lanes + l];
      const Vec fx = f.eval(x, u);
      const Mat jx = f.jacobian_x(x, u);
      for (int d = 0; d < nx; ++d)
        CHECK(out.x[static_cast<std::size_t>(d) * lanes + l] == doctest::Approx(fx[d]).epsilon(1e-12));
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j)
          CHECK(out.jac[(static_cast<std::size_t>(i) * nx + j) * lanes + l] ==
                doctest::Approx(jx(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("scalar and AVX2 kernels agree bit for bit") {
  if (!kernel_backend_available(KernelBackend::avx2)) {
    MESSAGE("AVX2 not available on this machine; skipping");
    return;
  }
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 1 + static_cast<int>(rng.below(4));
    const int nu = 1 + static_cast<int>(rng.below(2));
    const bool continuous = rng.below(2) == 1;
    const PolynomialField f = random_field(rng, nx, nu, 4, continuous ? 2 : 3);
    const BatchPropagator bp(f, continuous, 0.05, 3);
    Vec u(nu);
    for (int i = 0; i < nu; ++i) u[i] = rng.uniform(-1, 1);
    // odd lane count exercises the scalar tail path
    const std::size_t lanes = 4 * (1 + rng.below(8)) + rng.below(4);
    std::vector<double> xs(static_cast<std::size_t>(nx) * lanes);
    for (auto& v : xs) v = rng.uniform(-1.5, 1.5);
    const BatchOut scalar = run_backend(bp, u, xs, lanes, KernelBackend::scalar);
    const BatchOut avx2 = run_backend(bp, u, xs, lanes, KernelBackend::avx2);
    CHECK(bitwise_equal(scalar.x, avx2.x));
    CHECK(bitwise_equal(scalar.jac, avx2.jac));
  }
}

TEST_CASE("continuous kernel matches the generic variational integrator") {
  Rng rng(31);
  const PolynomialField f = random_field(rng, 3, 2, 4, 2);
  const double dt = 0.08;
  const int substeps = 4;
  const SampledSystem generic = sample_system(
      [&f](const Vec& x, const Vec& u) { return f.eval(x, u); },
      [&f](const Vec& x, const Vec& u) { return f.jacobian_x(x, u); }, dt, Vec::Zero(3),
      GrowthSpec::remainder([](const Vec&, const Vec&) { return Vec::Zero(3); }), nullptr,
      substeps);
  const SampledSystem fast = make_sampled_polynomial_system(
      f, dt, substeps, Vec::Zero(3),
      GrowthSpec::remainder([](const Vec&, const Vec&) { return Vec::Zero(3); }));
  for (int i = 0; i < 20; ++i) {
    Vec x(3), u(2);
    for (int k = 0; k < 3; ++k) x[k] = rng.uniform(-1, 1);
    for (int k = 0; k < 2; ++k) u[k] = rng.uniform(-1, 1);
    const auto [xa, ja] = generic.linearized_map(x, u);
    const auto [xb, jb] = fast.linearized_map(x, u);
    CHECK((xa - xb).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((ja - jb).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("kernel backend dispatch control") {
  CHECK(kernel_backend_available(KernelBackend::scalar));
  force_kernel_backend(KernelBackend::scalar);
  CHECK(active_kernel_backend() == KernelBackend::scalar);
  force_kernel_backend(std::nullopt);
}
