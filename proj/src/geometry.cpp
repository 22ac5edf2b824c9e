#include "symcon/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "symcon/system.hpp"

namespace symcon {

namespace {

constexpr double kPsdThreshold = -1e-10;
constexpr double kSymTol = 1e-10;

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw ConstructionError(std::string(what) + ": non-finite entry");
}

}  // namespace

Hyperrectangle::Hyperrectangle(Vec center, Vec half)
    : center_(std::move(center)), half_(std::move(half)) {
  if (center_.size() != half_.size())
    throw ConstructionError("hyperrectangle: center/half dimension mismatch");
  require_finite(center_, "hyperrectangle center");
  require_finite(half_, "hyperrectangle half");
  if ((half_.array() < 0.0).any())
    throw ConstructionError("hyperrectangle: negative half-length");
}

Hyperrectangle Hyperrectangle::from_bounds(const Vec& lower, const Vec& upper) {
  return Hyperrectangle(0.5 * (lower + upper), 0.5 * (upper - lower));
}

bool Hyperrectangle::contains(const Vec& x, double tol) const {
  return ((x - center_).cwiseAbs().array() <= half_.array() + tol).all();
}

std::vector<Vec> Hyperrectangle::corners() const {
  const int n = dim();
  if (n > 24) throw ConstructionError("hyperrectangle: corner enumeration beyond 24 dims");
  std::vector<Vec> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Vec c = center_;
    for (int i = 0; i < n; ++i) c[i] += (mask >> i) & 1 ? half_[i] : -half_[i];
    out.push_back(std::move(c));
  }
  return out;
}

Vec Hyperrectangle::sample(Rng& rng) const {
  Vec x(dim());
  for (int i = 0; i < dim(); ++i)
    x[i] = center_[i] + half_[i] * (2.0 * rng.uniform() - 1.0);
  return x;
}

Ellipsoid::Ellipsoid(Vec center, Mat shape) : center_(std::move(center)), shape_(std::move(shape)) {
  if (shape_.rows() != shape_.cols() || shape_.rows() != center_.size())
    throw ConstructionError("ellipsoid: shape/center dimension mismatch");
  require_finite(center_, "ellipsoid center");
  if (!shape_.allFinite()) throw ConstructionError("ellipsoid shape: non-finite entry");
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > kSymTol)
    throw ConstructionError("ellipsoid: shape not symmetric within 1e-10");
  shape_ = 0.5 * (shape_ + shape_.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(shape_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ConstructionError("ellipsoid: shape not positive definite");
}

double Ellipsoid::quad(const Vec& x) const {
  const Vec d = x - center_;
  return d.dot(shape_ * d);
}

double Ellipsoid::max_radius() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(shape_, Eigen::EigenvaluesOnly);
  return 1.0 / std::sqrt(es.eigenvalues().minCoeff());
}

double Ellipsoid::min_radius() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(shape_, Eigen::EigenvaluesOnly);
  return 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
}

Hyperrectangle Ellipsoid::bounding_box() const {
  // support along axis i is sqrt((P^-1)_ii)
  const Mat inv = shape_.llt().solve(Mat::Identity(dim(), dim()));
  Vec h(dim());
  for (int i = 0; i < dim(); ++i) h[i] = std::sqrt(std::max(0.0, inv(i, i)));
  return Hyperrectangle(center_, h);
}

Vec Ellipsoid::sample(Rng& rng) const {
  const int n = dim();
  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = rng.normal();
  double norm = g.norm();
  if (norm == 0.0) norm = 1.0;
  const double r = std::pow(rng.uniform(), 1.0 / n);
  const Vec y = g * (r / norm);
  // x = c + L^-T y with P = L L^T gives (x-c)^T P (x-c) = |y|^2
  Eigen::LLT<Mat> llt(shape_);
  return center_ + llt.matrixU().solve(y);
}

bool region_contains_point(const Region& r, const Vec& x, double tol) {
  return std::visit([&](const auto& s) { return s.contains(x, tol); }, r);
}

Hyperrectangle region_bounding_box(const Region& r) {
  if (const auto* b = std::get_if<Hyperrectangle>(&r)) return *b;
  return std::get<Ellipsoid>(r).bounding_box();
}

Vec region_center(const Region& r) {
  return std::visit([](const auto& s) { return s.center(); }, r);
}

Vec region_sample(const Region& r, Rng& rng) {
  return std::visit([&](const auto& s) { return s.sample(rng); }, r);
}

UniformGrid::UniformGrid(Vec origin, Vec cell_half, std::vector<std::pair<long, long>> index_ranges)
    : origin_(std::move(origin)),
      cell_half_(std::move(cell_half)),
      ranges_(std::move(index_ranges)),
      bounds_(Vec::Zero(origin_.size()), Vec::Zero(origin_.size())) {
  const int n = dim();
  if (cell_half_.size() != n || static_cast<int>(ranges_.size()) != n)
    throw ConstructionError("grid: dimension mismatch");
  if ((cell_half_.array() <= 0.0).any()) throw ConstructionError("grid: cell half-length must be > 0");
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    if (ranges_[i].first > ranges_[i].second) throw ConstructionError("grid: empty index range");
    lo[i] = origin_[i] + 2.0 * cell_half_[i] * static_cast<double>(ranges_[i].first) - cell_half_[i];
    hi[i] = origin_[i] + 2.0 * cell_half_[i] * static_cast<double>(ranges_[i].second) + cell_half_[i];
  }
  bounds_ = Hyperrectangle::from_bounds(lo, hi);
  strides_.assign(n, 1);
  for (int i = n - 2; i >= 0; --i) {
    const std::size_t count = static_cast<std::size_t>(ranges_[i + 1].second - ranges_[i + 1].first + 1);
    strides_[i] = strides_[i + 1] * count;
  }
}

UniformGrid UniformGrid::tile(const Hyperrectangle& box, const Vec& cell_half) {
  const int n = box.dim();
  if (cell_half.size() != n) throw ConstructionError("grid: cell half-length dimension mismatch");
  std::vector<std::pair<long, long>> ranges(n);
  Vec origin(n);
  for (int i = 0; i < n; ++i) {
    const double span = 2.0 * box.half()[i];
    const long count = std::max<long>(1, static_cast<long>(std::ceil(span / (2.0 * cell_half[i]) - 1e-9)));
    ranges[i] = {0, count - 1};
    origin[i] = box.lower()[i] + cell_half[i];
  }
  return UniformGrid(std::move(origin), cell_half, std::move(ranges));
}

std::size_t UniformGrid::size() const {
  std::size_t total = 1;
  for (const auto& [lo, hi] : ranges_) total *= static_cast<std::size_t>(hi - lo + 1);
  return total;
}

std::optional<std::vector<long>> UniformGrid::point_to_cell(const Vec& x) const {
  const int n = dim();
  if (x.size() != n) return std::nullopt;
  std::vector<long> k(n);
  const Vec lo = bounds_.lower(), hi = bounds_.upper();
  for (int i = 0; i < n; ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return std::nullopt;
    const double rel = (x[i] - (origin_[i] - cell_half_[i])) / (2.0 * cell_half_[i]);
    long ki = static_cast<long>(std::floor(rel));
    // the top face of the covered region belongs to the last cell
    if (ki > ranges_[i].second) ki = ranges_[i].second;
    if (ki < ranges_[i].first) ki = ranges_[i].first;
    k[i] = ki;
  }
  return k;
}

Vec UniformGrid::cell_center(const std::vector<long>& k) const {
  Vec c(dim());
  for (int i = 0; i < dim(); ++i)
    c[i] = origin_[i] + 2.0 * cell_half_[i] * static_cast<double>(k[i]);
  return c;
}

Hyperrectangle UniformGrid::cell_box(const std::vector<long>& k) const {
  return Hyperrectangle(cell_center(k), cell_half_);
}

std::size_t UniformGrid::flat_index(const std::vector<long>& k) const {
  std::size_t id = 0;
  for (int i = 0; i < dim(); ++i) {
    if (k[i] < ranges_[i].first || k[i] > ranges_[i].second)
      throw ConstructionError("grid: multi-index out of range");
    id += strides_[i] * static_cast<std::size_t>(k[i] - ranges_[i].first);
  }
  return id;
}

std::vector<long> UniformGrid::unflatten(std::size_t id) const {
  std::vector<long> k(dim());
  for (int i = 0; i < dim(); ++i) {
    k[i] = ranges_[i].first + static_cast<long>(id / strides_[i]);
    id %= strides_[i];
  }
  return k;
}

Hyperrectangle hyperrectangle_image_overapprox(const Hyperrectangle& box, const Vec& u,
                                               const SampledSystem& sys) {
  auto [center_image, jac] = sys.linearized_map(box.center(), u);
  if (!jac.allFinite()) throw NumericsError("box image: non-finite Jacobian");
  Vec h = jac.cwiseAbs() * box.half();
  h += sys.error_bound_map(box.half(), u);
  if (sys.noise_bound.size() > 0) h += sys.noise_bound;
  return Hyperrectangle(std::move(center_image), std::move(h));
}

Ellipsoid ellipsoid_affine_image(const Ellipsoid& e, const Mat& m, const Vec& b) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin >= 1e12)
    throw NumericsError("ellipsoid affine image: matrix singular or ill-conditioned");
  // shape M^-T P M^-1, evaluated via two solves
  Eigen::PartialPivLU<Mat> lu(m);
  const Mat minv = lu.inverse();
  Mat p_new = minv.transpose() * e.shape() * minv;
  p_new = 0.5 * (p_new + p_new.transpose());
  return Ellipsoid(m * e.center() + b, std::move(p_new));
}

namespace {

double min_eig_block(const Mat& p1, const Vec& c1, const Mat& p2, const Vec& c2, double lambda) {
  const int n = static_cast<int>(c1.size());
  Mat m(n + 1, n + 1);
  m.topLeftCorner(n, n) = lambda * p1 - p2;
  const Vec v = -(lambda * (p1 * c1) - p2 * c2);
  m.topRightCorner(n, 1) = v;
  m.bottomLeftCorner(1, n) = v.transpose();
  m(n, n) = lambda * (c1.dot(p1 * c1) - 1.0) - c2.dot(p2 * c2) + 1.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  const double e = es.eigenvalues().minCoeff();
  if (!std::isfinite(e)) throw IndeterminateError("ellipsoid containment: non-finite eigenvalue");
  return e;
}

}  // namespace

bool ellipsoid_contains_ellipsoid(const Ellipsoid& inner, const Ellipsoid& outer, double tol) {
  if (inner.dim() != outer.dim())
    throw ConstructionError("ellipsoid containment: dimension mismatch");
  // absorb tol by deflating the outer shape
  const Mat p2 = outer.shape() / (1.0 + tol);
  const Mat& p1 = inner.shape();
  const Vec &c1 = inner.center(), &c2 = outer.center();

  // golden-section maximization of the concave map λ -> λ_min(M(λ)) on [0,1]
  const double gr = 0.6180339887498948482;
  double a = 0.0, b = 1.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = min_eig_block(p1, c1, p2, c2, x1);
  double f2 = min_eig_block(p1, c1, p2, c2, x2);
  double best = std::max({min_eig_block(p1, c1, p2, c2, a), min_eig_block(p1, c1, p2, c2, b), f1, f2});
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (best >= kPsdThreshold) return true;  // early feasible
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = min_eig_block(p1, c1, p2, c2, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = min_eig_block(p1, c1, p2, c2, x1);
    }
    best = std::max({best, f1, f2});
  }
  return best >= kPsdThreshold;
}

Ellipsoid ellipsoid_inflate(const Ellipsoid& e, const Vec& margin) {
  if (margin.size() != e.dim()) throw ConstructionError("ellipsoid inflate: margin dimension mismatch");
  if ((margin.array() < 0.0).any()) throw ConstructionError("ellipsoid inflate: negative margin");
  if (margin.maxCoeff() == 0.0) return e;
  double rho = 0.0;
  const Hyperrectangle box(Vec::Zero(e.dim()), margin);
  for (const Vec& d : box.corners()) rho = std::max(rho, std::sqrt(d.dot(e.shape() * d)));
  const double s = 1.0 + rho;
  return Ellipsoid(e.center(), e.shape() / (s * s));
}

namespace {

bool boxes_overlap(const Hyperrectangle& a, const Hyperrectangle& b) {
  return ((a.center() - b.center()).cwiseAbs().array() <= (a.half() + b.half()).array()).all();
}

double extremal_radius_max(const Region& r) {
  if (const auto* b = std::get_if<Hyperrectangle>(&r)) return b->half().norm();
  return std::get<Ellipsoid>(r).max_radius();
}

double extremal_radius_min(const Region& r) {
  if (const auto* b = std::get_if<Hyperrectangle>(&r)) return b->half().minCoeff();
  return std::get<Ellipsoid>(r).min_radius();
}

}  // namespace

Disjointness disjoint(const Region& a, const Region& b) {
  const auto* box_a = std::get_if<Hyperrectangle>(&a);
  const auto* box_b = std::get_if<Hyperrectangle>(&b);
  if (box_a && box_b)
    return boxes_overlap(*box_a, *box_b) ? Disjointness::intersecting : Disjointness::disjoint;

  if (region_contains_point(a, region_center(b)) || region_contains_point(b, region_center(a)))
    return Disjointness::intersecting;
  if (!boxes_overlap(region_bounding_box(a), region_bounding_box(b))) return Disjointness::disjoint;

  const double dist = (region_center(a) - region_center(b)).norm();
  if (dist > extremal_radius_max(a) + extremal_radius_max(b)) return Disjointness::disjoint;
  if (dist <= extremal_radius_min(a) + extremal_radius_min(b)) return Disjointness::intersecting;

  // ellipsoid vs box: the box point closest to the center certifies overlap
  const auto* ell = std::get_if<Ellipsoid>(&a);
  const auto* box = box_b;
  if (!ell) {
    ell = std::get_if<Ellipsoid>(&b);
    box = box_a;
  }
  if (ell && box) {
    const Vec clamped = ell->center().cwiseMax(box->lower()).cwiseMin(box->upper());
    if (ell->contains(clamped)) return Disjointness::intersecting;
  }
  return Disjointness::unknown;
}

double max_quadratic_over_ellipsoid(const Mat& a, const Vec& b, double c, const Ellipsoid& e) {
  const int n = e.dim();
  if (a.rows() != n || a.cols() != n || b.size() != n)
    throw ConstructionError("quadratic max: dimension mismatch");
  // whiten: x = center + L^-T y, |y| <= 1, P = L L^T
  Eigen::LLT<Mat> llt(e.shape());
  const Mat linv_t = llt.matrixU().solve(Mat::Identity(n, n));  // L^-T
  const Vec& x0 = e.center();
  Mat at = linv_t.transpose() * a * linv_t;
  at = 0.5 * (at + at.transpose());
  const Vec bt = linv_t.transpose() * (a * x0 + b);
  const double ct = x0.dot(a * x0) + 2.0 * b.dot(x0) + c;

  Eigen::SelfAdjointEigenSolver<Mat> es(at);
  const Vec lam = es.eigenvalues();
  const Vec beta = es.eigenvectors().transpose() * bt;
  const double lmax = lam.maxCoeff();

  auto value_at = [&](const Vec& y) { return y.dot(at * y) + 2.0 * bt.dot(y) + ct; };

  // secular function |y(nu)|^2 = sum beta_i^2/(nu-lam_i)^2, decreasing on (lmax, inf)
  auto norm2_at = [&](double nu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = nu - lam[i];
      s += (beta[i] * beta[i]) / (d * d);
    }
    return s;
  };

  double top_mass = 0.0;
  for (int i = 0; i < n; ++i)
    if (lam[i] > lmax - 1e-12 * std::max(1.0, std::abs(lmax))) top_mass += beta[i] * beta[i];

  if (top_mass > 0.0) {
    // bracket the root of |y(nu)| = 1 above lmax
    double lo = lmax + std::sqrt(top_mass) * 0.5;
    while (norm2_at(lo) < 1.0 && lo - lmax > 1e-300) lo = lmax + 0.5 * (lo - lmax);
    double hi = lmax + std::max(1.0, std::sqrt(static_cast<double>(n)) * beta.cwiseAbs().maxCoeff()) * 2.0;
    while (norm2_at(hi) > 1.0) hi = lmax + 2.0 * (hi - lmax);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm2_at(mid) >= 1.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = beta[i] / (nu - lam[i]);
    return value_at(es.eigenvectors() * y);
  }

  // hard case: b orthogonal to the top eigenspace
  Vec y = Vec::Zero(n);
  double used = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = lmax - lam[i];
    if (d > 1e-10 * std::max(1.0, std::abs(lmax))) {
      y[i] = beta[i] / d;
      used += y[i] * y[i];
    }
  }
  if (used > 1.0) {
    // interior root exists after all; fall back to bisection from lmax
    double lo = lmax, hi = lmax + 1.0;
    while (norm2_at(hi) > 1.0) hi = lmax + 2.0 * (hi - lmax);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm2_at(mid) >= 1.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    for (int i = 0; i < n; ++i) {
      const double d = nu - lam[i];
      y[i] = d > 0.0 ? beta[i] / d : 0.0;
    }
    return value_at(es.eigenvectors() * y);
  }
  // pad with the top eigenvector to reach the sphere
  for (int i = 0; i < n; ++i) {
    const double d = lmax - lam[i];
    if (d <= 1e-10 * std::max(1.0, std::abs(lmax))) {
      y[i] = std::sqrt(std::max(0.0, 1.0 - used));
      break;
    }
  }
  return value_at(es.eigenvectors() * y);
}

bool region_contains_region(const Region& outer, const Region& inner, double tol) {
  if (const auto* obox = std::get_if<Hyperrectangle>(&outer)) {
    const Hyperrectangle ibox = region_bounding_box(inner);  // exact for both kinds
    return ((ibox.center() - obox->center()).cwiseAbs().array() + ibox.half().array() <=
            obox->half().array() + tol)
        .all();
  }
  const auto& oell = std::get<Ellipsoid>(outer);
  if (const auto* ibox = std::get_if<Hyperrectangle>(&inner)) {
    for (const Vec& c : ibox->corners())
      if (!oell.contains(c, tol)) return false;
    return true;
  }
  try {
    return ellipsoid_contains_ellipsoid(std::get<Ellipsoid>(inner), oell, tol);
  } catch (const IndeterminateError&) {
    return false;
  }
}

}  // namespace symcon
