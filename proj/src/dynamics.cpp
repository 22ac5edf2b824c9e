#include "symcon/dynamics.hpp"

#include <cmath>

namespace symcon {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double eval_terms(const std::vector<PolyTerm>& terms, const Vec& x, const Vec& u) {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (std::size_t i = 0; i < t.x_pow.size(); ++i)
      for (int p = 0; p < t.x_pow[i]; ++p) v *= x[static_cast<long>(i)];
    for (std::size_t k = 0; k < t.u_pow.size(); ++k)
      for (int p = 0; p < t.u_pow[k]; ++p) v *= u[static_cast<long>(k)];
    acc += v;
  }
  return acc;
}

std::vector<PolyTerm> differentiate(const std::vector<PolyTerm>& terms, int var, bool wrt_state) {
  std::vector<PolyTerm> out;
  for (const auto& t : terms) {
    const auto& pows = wrt_state ? t.x_pow : t.u_pow;
    const int p = pows[static_cast<std::size_t>(var)];
    if (p == 0) continue;
    PolyTerm d = t;
    d.coeff *= static_cast<double>(p);
    auto& dpows = wrt_state ? d.x_pow : d.u_pow;
    dpows[static_cast<std::size_t>(var)] = p - 1;
    out.push_back(std::move(d));
  }
  return out;
}

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

PolynomialField::PolynomialField(int state_dim, int input_dim,
                                 std::vector<std::vector<PolyTerm>> components)
    : nx_(state_dim), nu_(input_dim), comps_(std::move(components)) {
  if (nx_ <= 0 || nu_ < 0) throw ConstructionError("polynomial field: bad dimensions");
  if (static_cast<int>(comps_.size()) != nx_)
    throw ConstructionError("polynomial field: one component list per state dimension required");
  for (const auto& comp : comps_)
    for (const auto& t : comp) {
      if (static_cast<int>(t.x_pow.size()) != nx_ || static_cast<int>(t.u_pow.size()) != nu_)
        throw ConstructionError("polynomial field: term power vector dimension mismatch");
      for (int p : t.x_pow)
        if (p < 0) throw ConstructionError("polynomial field: negative power");
      for (int p : t.u_pow)
        if (p < 0) throw ConstructionError("polynomial field: negative power");
      if (!std::isfinite(t.coeff)) throw ConstructionError("polynomial field: non-finite coefficient");
    }
  dx_.resize(comps_.size());
  du_.resize(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    dx_[i].resize(static_cast<std::size_t>(nx_));
    for (int j = 0; j < nx_; ++j) dx_[i][static_cast<std::size_t>(j)] = differentiate(comps_[i], j, true);
    du_[i].resize(static_cast<std::size_t>(nu_));
    for (int k = 0; k < nu_; ++k) du_[i][static_cast<std::size_t>(k)] = differentiate(comps_[i], k, false);
  }
}

Vec PolynomialField::eval(const Vec& x, const Vec& u) const {
  Vec out(nx_);
  for (int i = 0; i < nx_; ++i) out[i] = eval_terms(comps_[static_cast<std::size_t>(i)], x, u);
  return out;
}

Mat PolynomialField::jacobian_x(const Vec& x, const Vec& u) const {
  Mat j(nx_, nx_);
  for (int i = 0; i < nx_; ++i)
    for (int k = 0; k < nx_; ++k)
      j(i, k) = eval_terms(dx_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], x, u);
  return j;
}

Mat PolynomialField::jacobian_u(const Vec& x, const Vec& u) const {
  Mat j(nx_, nu_);
  for (int i = 0; i < nx_; ++i)
    for (int k = 0; k < nu_; ++k)
      j(i, k) = eval_terms(du_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], x, u);
  return j;
}

bool PolynomialField::is_affine() const {
  for (const auto& comp : comps_)
    for (const auto& t : comp) {
      int deg = 0;
      for (int p : t.x_pow) deg += p;
      for (int p : t.u_pow) deg += p;
      if (deg > 1) return false;
    }
  return true;
}

bool PolynomialField::is_affine_in_state() const {
  for (const auto& comp : comps_)
    for (const auto& t : comp) {
      int xdeg = 0, udeg = 0;
      for (int p : t.x_pow) xdeg += p;
      for (int p : t.u_pow) udeg += p;
      if (xdeg > 1 || (xdeg == 1 && udeg > 0)) return false;
    }
  return true;
}

Vec PolynomialField::taylor_remainder_bound(const Vec& state_absmax, const Vec& h, const Vec& u) const {
  if (state_absmax.size() != nx_ || h.size() != nx_)
    throw ConstructionError("remainder bound: dimension mismatch");
  Vec bound = Vec::Zero(nx_);
  // enumerate k <= p (componentwise) with |k| >= 2 for each term via odometer
  for (int i = 0; i < nx_; ++i) {
    for (const auto& t : comps_[static_cast<std::size_t>(i)]) {
      double umono = 1.0;
      for (int k = 0; k < nu_; ++k) umono *= ipow(std::abs(u[k]), t.u_pow[static_cast<std::size_t>(k)]);
      std::vector<int> k(t.x_pow.size(), 0);
      while (true) {
        int total = 0;
        for (int kv : k) total += kv;
        if (total >= 2) {
          double contrib = std::abs(t.coeff) * umono;
          for (std::size_t d = 0; d < k.size(); ++d) {
            contrib *= static_cast<double>(binomial(t.x_pow[d], k[d]));
            contrib *= ipow(state_absmax[static_cast<long>(d)], t.x_pow[d] - k[d]);
            contrib *= ipow(h[static_cast<long>(d)], k[d]);
          }
          bound[i] += contrib;
        }
        // odometer increment
        std::size_t d = 0;
        while (d < k.size() && k[d] == t.x_pow[d]) {
          k[d] = 0;
          ++d;
        }
        if (d == k.size()) break;
        ++k[d];
      }
    }
  }
  return bound;
}

}  // namespace symcon
