#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "symcon/geometry.hpp"
#include "symcon/util.hpp"

using namespace symcon;

namespace {

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

Mat random_spd(Rng& rng, int n, double cond_cap = 50.0) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();
  Vec lam(n);
  for (int i = 0; i < n; ++i) lam[i] = std::exp(rng.uniform(0.0, std::log(cond_cap)));
  return q * lam.asDiagonal() * q.transpose();
}

/* oracle: maximize the outer quadratic over the inner ellipsoid by projected
 * gradient ascent on the whitened sphere, multi-start */
double containment_oracle_max(const Ellipsoid& inner, const Ellipsoid& outer, Rng& rng,
                              int starts = 50) {
  const int n = inner.dim();
  Eigen::LLT<Mat> llt(inner.shape());
  const Mat linv_t = llt.matrixU().solve(Mat::Identity(n, n));
  double best = 0.0;
  for (int s = 0; s < starts; ++s) {
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    y.normalize();
    for (int it = 0; it < 400; ++it) {
      const Vec x = inner.center() + linv_t * y;
      const Vec grad = linv_t.transpose() * (2.0 * (outer.shape() * (x - outer.center())));
      Vec y_next = y + 0.05 * grad;
      y_next.normalize();
      y = y_next;
    }
    best = std::max(best, outer.quad(inner.center() + linv_t * y));
    // interior candidate: the center
    best = std::max(best, outer.quad(inner.center()));
  }
  return best;
}

}  // namespace

TEST_CASE("hyperrectangle membership and corners") {
  const Hyperrectangle h(vec2(1.0, -1.0), vec2(0.5, 2.0));
  CHECK(h.contains(vec2(1.5, 1.0)));
  CHECK(!h.contains(vec2(1.6, 0.0)));
  CHECK(h.corners().size() == 4);
  CHECK_THROWS_AS(Hyperrectangle(vec2(0, 0), vec2(-0.1, 1.0)), ConstructionError);
}

TEST_CASE("ellipsoid validation and membership") {
  CHECK_THROWS_AS(Ellipsoid(vec2(0, 0), (Mat(2, 2) << 1, 0.5, 0.2, 1).finished()),
                  ConstructionError);
  CHECK_THROWS_AS(Ellipsoid(vec2(0, 0), (Mat(2, 2) << 1, 0, 0, -1).finished()),
                  ConstructionError);
  const Ellipsoid e(vec2(1, 1), 4.0 * Mat::Identity(2, 2));  // radius 1/2
  CHECK(e.contains(vec2(1.0, 1.49)));
  CHECK(!e.contains(vec2(1.0, 1.51)));
  CHECK(e.max_radius() == doctest::Approx(0.5));
}

TEST_CASE("grid point_to_cell basics") {
  // origin 0, h = (0.5, 0.5): interior of origin cell
  const UniformGrid g(vec2(0, 0), vec2(0.5, 0.5), {{0, 3}, {0, 3}});
  auto k = g.point_to_cell(vec2(0.4, 0.4));
  REQUIRE(k.has_value());
  CHECK((*k)[0] == 0);
  CHECK((*k)[1] == 0);

  // shared face: lower-closed cells put x = 0.5 into cell 1
  k = g.point_to_cell(vec2(0.5, 0.0));
  REQUIRE(k.has_value());
  CHECK((*k)[0] == 1);
  CHECK((*k)[1] == 0);

  // outside
  CHECK(!g.point_to_cell(vec2(9.0, 0.0)).has_value());

  // top face of the covered region is closed
  k = g.point_to_cell(g.bounds().upper());
  REQUIRE(k.has_value());
  CHECK((*k)[0] == 3);
  CHECK((*k)[1] == 3);
}

TEST_CASE("grid cell center round trip and partition property") {
  Rng rng(42);
  const UniformGrid g =
      UniformGrid::tile(Hyperrectangle(vec2(0.3, -1.0), vec2(2.0, 1.5)), vec2(0.21, 0.17));
  for (std::size_t id = 0; id < g.size(); ++id) {
    const auto k = g.unflatten(id);
    const auto back = g.point_to_cell(g.cell_center(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
    CHECK(g.flat_index(k) == id);
  }
  // random points resolve to a cell whose center is within h componentwise
  for (int i = 0; i < 10000; ++i) {
    const Vec x = g.bounds().sample(rng);
    const auto k = g.point_to_cell(x);
    REQUIRE(k.has_value());
    const Vec c = g.cell_center(*k);
    CHECK(((x - c).cwiseAbs().array() <= g.cell_half().array() + 1e-12).all());
  }
}

TEST_CASE("ellipsoid affine image") {
  Rng rng(7);
  const Ellipsoid e(vec2(1, 2), (Mat(2, 2) << 2, 0.3, 0.3, 1).finished());

  SUBCASE("identity") {
    const Ellipsoid img = ellipsoid_affine_image(e, Mat::Identity(2, 2), Vec::Zero(2));
    CHECK((img.center() - e.center()).norm() == doctest::Approx(0.0));
    CHECK((img.shape() - e.shape()).norm() == doctest::Approx(0.0));
  }
  SUBCASE("isotropic scaling doubles the radius") {
    const Ellipsoid unit(vec2(0, 0), Mat::Identity(2, 2));
    const Ellipsoid img = ellipsoid_affine_image(unit, 2.0 * Mat::Identity(2, 2), Vec::Zero(2));
    CHECK((img.shape() - 0.25 * Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));
  }
  SUBCASE("boundary maps to boundary") {
    const Mat m = (Mat(2, 2) << 1.2, -0.4, 0.1, 0.9).finished();
    const Vec b = vec2(0.5, -2.0);
    const Ellipsoid img = ellipsoid_affine_image(e, m, b);
    Eigen::LLT<Mat> llt(e.shape());
    const Mat linv_t = llt.matrixU().solve(Mat::Identity(2, 2));
    for (int i = 0; i < 100; ++i) {
      Vec y(2);
      y << rng.normal(), rng.normal();
      y.normalize();
      const Vec x = e.center() + linv_t * y;  // on the boundary of e
      CHECK(img.quad(m * x + b) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("singular matrix rejected") {
    CHECK_THROWS_AS(ellipsoid_affine_image(e, Mat::Zero(2, 2), Vec::Zero(2)), NumericsError);
  }
}

TEST_CASE("ellipsoid containment: trivial cases") {
  const Ellipsoid e(vec2(0.5, -0.5), (Mat(2, 2) << 3, 0.4, 0.4, 2).finished());
  CHECK(ellipsoid_contains_ellipsoid(e, e, 1e-9));
  // concentric: inner radius 1 vs outer radius 1/2
  const Ellipsoid big(vec2(0, 0), Mat::Identity(2, 2));
  const Ellipsoid small(vec2(0, 0), 4.0 * Mat::Identity(2, 2));
  CHECK(!ellipsoid_contains_ellipsoid(big, small));
  CHECK(ellipsoid_contains_ellipsoid(small, big));
}

TEST_CASE("ellipsoid containment agrees with the maximization oracle") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; checked < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(3));
    Vec c1(n), c2(n);
    for (int i = 0; i < n; ++i) {
      c1[i] = rng.uniform(-1.0, 1.0);
      c2[i] = rng.uniform(-1.0, 1.0);
    }
    const Ellipsoid inner(c1, random_spd(rng, n));
    const Ellipsoid outer(c2, random_spd(rng, n));
    const double m = containment_oracle_max(inner, outer, rng, 50);
    if (std::abs(m - 1.0) < 1e-3) continue;  // decision-boundary pair, regenerate
    ++checked;
    CHECK(ellipsoid_contains_ellipsoid(inner, outer, 1e-9) == (m <= 1.0));
  }
}

TEST_CASE("ellipsoid inflation covers the Minkowski sum") {
  Rng rng(5);
  SUBCASE("zero margin unchanged") {
    const Ellipsoid e(vec2(1, 0), (Mat(2, 2) << 2, 0.1, 0.1, 1).finished());
    const Ellipsoid f = ellipsoid_inflate(e, Vec::Zero(2));
    CHECK((f.shape() - e.shape()).norm() == 0.0);
  }
  SUBCASE("unit ball +- e1") {
    const Ellipsoid e(vec2(0, 0), Mat::Identity(2, 2));
    const Ellipsoid f = ellipsoid_inflate(e, vec2(1.0, 0.0));
    for (int i = 0; i < 1000; ++i) {
      const Vec y = e.sample(rng);
      CHECK(f.contains(vec2(y[0] + 1.0, y[1]), 1e-12));
      CHECK(f.contains(vec2(y[0] - 1.0, y[1]), 1e-12));
    }
  }
  SUBCASE("soundness fuzzing") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(2));
      Vec c(n), margin(n);
      for (int i = 0; i < n; ++i) {
        c[i] = rng.uniform(-2.0, 2.0);
        margin[i] = rng.uniform(0.0, 0.5);
      }
      const Ellipsoid e(c, random_spd(rng, n));
      const Ellipsoid f = ellipsoid_inflate(e, margin);
      const Hyperrectangle mbox(Vec::Zero(n), margin);
      for (int i = 0; i < 200; ++i) {
        const Vec x = e.sample(rng) + mbox.sample(rng);
        CHECK(f.contains(x, 1e-9));
      }
    }
  }
}

TEST_CASE("disjointness tri-state") {
  const Region a = Hyperrectangle(vec2(0, 0), vec2(1, 1));
  const Region b = Hyperrectangle(vec2(3, 0), vec2(1, 1));
  CHECK(disjoint(a, b) == Disjointness::disjoint);
  CHECK(disjoint(a, a) == Disjointness::intersecting);

  // obstacle-vs-far-corner arithmetic: extremal radius sqrt(50) vs distance 28.1
  const Region obstacle = Ellipsoid(vec2(0, 0), 0.02 * Mat::Identity(2, 2));
  const Region corner = Hyperrectangle(vec2(20, 20), vec2(0.1, 0.1));
  CHECK(disjoint(obstacle, corner) == Disjointness::disjoint);

  const Region touching = Hyperrectangle(vec2(20, 20), vec2(16, 16));
  CHECK(disjoint(obstacle, touching) == Disjointness::intersecting);
}

TEST_CASE("disjoint never falsely separates intersecting pairs") {
  Rng rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2;
    Vec c1(n), c2(n);
    for (int i = 0; i < n; ++i) {
      c1[i] = rng.uniform(-3, 3);
      c2[i] = rng.uniform(-3, 3);
    }
    Region r1, r2;
    if (rng.below(2)) {
      r1 = Ellipsoid(c1, random_spd(rng, n, 10.0));
    } else {
      Vec h(n);
      for (int i = 0; i < n; ++i) h[i] = rng.uniform(0.1, 1.5);
      r1 = Hyperrectangle(c1, h);
    }
    if (rng.below(2)) {
      r2 = Ellipsoid(c2, random_spd(rng, n, 10.0));
    } else {
      Vec h(n);
      for (int i = 0; i < n; ++i) h[i] = rng.uniform(0.1, 1.5);
      r2 = Hyperrectangle(c2, h);
    }
    if (disjoint(r1, r2) != Disjointness::disjoint) continue;
    // certified disjoint: no sampled point of r1 may lie in r2
    for (int i = 0; i < 200; ++i) {
      CHECK(!region_contains_point(r2, region_sample(r1, rng)));
    }
  }
}

TEST_CASE("region containment") {
  const Region box = Hyperrectangle(vec2(0, 0), vec2(2, 2));
  const Region small_box = Hyperrectangle(vec2(0.5, 0.5), vec2(0.5, 0.5));
  const Region ball = Ellipsoid(vec2(0.5, 0.5), Mat::Identity(2, 2));
  CHECK(region_contains_region(box, small_box));
  CHECK(region_contains_region(box, ball));
  CHECK(!region_contains_region(small_box, box));
  CHECK(!region_contains_region(ball, box));
  CHECK(region_contains_region(Ellipsoid(vec2(0.5, 0.5), 0.1 * Mat::Identity(2, 2)), ball));
}

TEST_CASE("quadratic maximization over ellipsoids matches dense sampling") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(3));
    Vec c(n), b(n);
    for (int i = 0; i < n; ++i) {
      c[i] = rng.uniform(-2, 2);
      b[i] = rng.uniform(-1, 1);
    }
    Mat a = random_spd(rng, n, 8.0);
    if (trial % 5 == 0) b.setZero();        // exercise the hard case
    if (trial % 7 == 0) a = Mat::Zero(n, n);  // linear / constant objectives
    const Ellipsoid e(c, random_spd(rng, n, 8.0));
    const double claimed = max_quadratic_over_ellipsoid(a, b, 0.7, e);
    double sampled = -1e100;
    Eigen::LLT<Mat> llt(e.shape());
    const Mat linv_t = llt.matrixU().solve(Mat::Identity(n, n));
    for (int i = 0; i < 4000; ++i) {
      Vec y(n);
      for (int k = 0; k < n; ++k) y[k] = rng.normal();
      y.normalize();  // the max lives on the boundary
      const Vec x = e.center() + linv_t * y;
      sampled = std::max(sampled, x.dot(a * x) + 2.0 * b.dot(x) + 0.7);
    }
    CHECK(claimed >= sampled - 1e-9);
    CHECK(claimed <= sampled + std::abs(sampled) * 0.05 + 0.05);  // tight, not wildly above
  }
}
