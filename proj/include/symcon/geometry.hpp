#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "symcon/util.hpp"

namespace symcon {

struct SampledSystem;  // system.hpp

/* Axis-aligned box |x_i - c_i| <= h_i. */
class Hyperrectangle {
public:
  Hyperrectangle(Vec center, Vec half);
  static Hyperrectangle from_bounds(const Vec& lower, const Vec& upper);

  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Vec& half() const { return half_; }
  Vec lower() const { return center_ - half_; }
  Vec upper() const { return center_ + half_; }

  bool contains(const Vec& x, double tol = 0.0) const;
  std::vector<Vec> corners() const;  // 2^dim points
  Vec sample(Rng& rng) const;        // uniform

private:
  Vec center_, half_;
};

/* (x-c)^T P (x-c) <= 1 with P symmetric positive definite. */
class Ellipsoid {
public:
  Ellipsoid(Vec center, Mat shape);

  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Mat& shape() const { return shape_; }

  double quad(const Vec& x) const;  // (x-c)^T P (x-c)
  bool contains(const Vec& x, double tol = 0.0) const { return quad(x) <= 1.0 + tol; }
  double max_radius() const;  // 1/sqrt(lambda_min(P))
  double min_radius() const;  // 1/sqrt(lambda_max(P))
  Hyperrectangle bounding_box() const;
  Vec sample(Rng& rng) const;  // uniform w.r.t. volume

private:
  Vec center_;
  Mat shape_;
};

using Region = std::variant<Hyperrectangle, Ellipsoid>;

bool region_contains_point(const Region& r, const Vec& x, double tol = 0.0);
Hyperrectangle region_bounding_box(const Region& r);
Vec region_center(const Region& r);
Vec region_sample(const Region& r, Rng& rng);

/* Uniform grid of half-open cells. Cell with multi-index k has center
 * origin + 2 h∘k and owns [center-h, center+h) per axis; the top face of the
 * covered region is closed so the grid partitions its bounds exactly. */
class UniformGrid {
public:
  UniformGrid(Vec origin, Vec cell_half, std::vector<std::pair<long, long>> index_ranges);
  // cells tiling `box` starting at its lower corner (overshoot allowed when
  // the side is not a multiple of the cell size)
  static UniformGrid tile(const Hyperrectangle& box, const Vec& cell_half);

  int dim() const { return static_cast<int>(origin_.size()); }
  const Vec& origin() const { return origin_; }
  const Vec& cell_half() const { return cell_half_; }
  const std::vector<std::pair<long, long>>& index_ranges() const { return ranges_; }
  const Hyperrectangle& bounds() const { return bounds_; }

  std::size_t size() const;  // number of cells
  std::optional<std::vector<long>> point_to_cell(const Vec& x) const;
  Vec cell_center(const std::vector<long>& k) const;
  Hyperrectangle cell_box(const std::vector<long>& k) const;
  std::size_t flat_index(const std::vector<long>& k) const;
  std::vector<long> unflatten(std::size_t id) const;

private:
  Vec origin_, cell_half_;
  std::vector<std::pair<long, long>> ranges_;
  Hyperrectangle bounds_;
  std::vector<std::size_t> strides_;
};

/* Sound one-step image of a box: center through the nominal map, half-lengths
 * through |J| h + error_bound(h,u) + noise. */
Hyperrectangle hyperrectangle_image_overapprox(const Hyperrectangle& box, const Vec& u,
                                               const SampledSystem& sys);

/* Exact image {Mx+b : x in E}; requires cond(M) < 1e12. */
Ellipsoid ellipsoid_affine_image(const Ellipsoid& e, const Mat& m, const Vec& b);

/* S-procedure containment test: inner ⊆ outer inflated by tol. The block
 * matrix M(λ) = λ Q_inner - Q_outer is affine in λ, so λ_min(M(λ)) is concave
 * and a golden-section search over λ ∈ [0,1] decides PSD feasibility.
 * Throws IndeterminateError on non-finite eigenvalues (callers treat as
 * "not contained"). */
bool ellipsoid_contains_ellipsoid(const Ellipsoid& inner, const Ellipsoid& outer,
                                  double tol = 1e-9);

/* Ellipsoid covering E ⊕ [-margin, margin]: shape P/(1+ρ)² with
 * ρ = max_{corners d} sqrt(d^T P d). */
Ellipsoid ellipsoid_inflate(const Ellipsoid& e, const Vec& margin);

enum class Disjointness { disjoint, intersecting, unknown };

/* Conservative separation test. Box-box is exact; the ellipsoid cases use
 * bounding-box separation and extremal-radius arguments and answer `unknown`
 * when inconclusive. Never reports `disjoint` for intersecting sets. */
Disjointness disjoint(const Region& a, const Region& b);

/* Exact containment for the combinations the solvers need: box-in-box and
 * ellipsoid-in-box by interval bounds, box-in-ellipsoid by corner checks,
 * ellipsoid-in-ellipsoid by the S-procedure. */
bool region_contains_region(const Region& outer, const Region& inner, double tol = 1e-9);

/* max of x^T A x + 2 b^T x + c over E, A PSD. Whitening the ellipsoid turns
 * this into maximization of a convex quadratic over the unit ball, attained
 * on the sphere; solved through the secular equation of the stationarity
 * system (A - nu I) y = -b, nu >= lambda_max, including the hard case. */
double max_quadratic_over_ellipsoid(const Mat& a, const Vec& b, double c, const Ellipsoid& e);

}  // namespace symcon
