#pragma once

#include <vector>

#include "symcon/geometry.hpp"
#include "symcon/util.hpp"

namespace symcon {

/* One monomial of a vector-field component: coeff * prod x_i^xp_i * prod u_k^up_k. */
struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> x_pow;
  std::vector<int> u_pow;
};

/* Vector field with polynomial components over (x, u). Partial derivatives
 * are differentiated term lists, so Jacobians are exact. */
class PolynomialField {
public:
  PolynomialField(int state_dim, int input_dim, std::vector<std::vector<PolyTerm>> components);

  int state_dim() const { return nx_; }
  int input_dim() const { return nu_; }
  const std::vector<std::vector<PolyTerm>>& components() const { return comps_; }

  Vec eval(const Vec& x, const Vec& u) const;
  Mat jacobian_x(const Vec& x, const Vec& u) const;
  Mat jacobian_u(const Vec& x, const Vec& u) const;

  // total degree in (x,u) at most one
  bool is_affine() const;
  // degree in x at most one and no mixed x*u terms (input Jacobian constant in x)
  bool is_affine_in_state() const;

  /* Componentwise bound on |f(c+d, u) - f(c, u) - J_x(c, u) d| valid for all
   * |d| <= h and all c with |c| <= state_absmax: the order >= 2 part of the
   * binomial expansion of each term, with |c| replaced by its bound and |d|
   * by h. Exact-degree interval arithmetic, zero for affine fields. */
  Vec taylor_remainder_bound(const Vec& state_absmax, const Vec& h, const Vec& u) const;

private:
  int nx_, nu_;
  std::vector<std::vector<PolyTerm>> comps_;
  std::vector<std::vector<std::vector<PolyTerm>>> dx_;  // dx_[i][j] = d comps_[i] / d x_j
  std::vector<std::vector<std::vector<PolyTerm>>> du_;
};

}  // namespace symcon
