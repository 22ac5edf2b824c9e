#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "symcon/dynamics.hpp"
#include "symcon/util.hpp"

namespace symcon {

/* Batched propagation of cell centers (and Jacobians) through a polynomial
 * map, either directly (discrete-time) or via RK4 with the co-integrated
 * variational equation (sampled continuous-time). The hot loop of the grid
 * abstraction. A scalar reference kernel and an AVX2 kernel share one
 * templated body; both are compiled with -ffp-contract=off and agree bit for
 * bit, so the backend never affects results. */

enum class KernelBackend { scalar, avx2 };

KernelBackend active_kernel_backend();
bool kernel_backend_available(KernelBackend b);
// nullopt restores CPUID-based auto selection; throws ConfigError if the
// requested backend is not available on this machine
void force_kernel_backend(std::optional<KernelBackend> b);

namespace detail {

constexpr int kKernelMaxDim = 8;

/* u-folded polynomial program: per component a term list whose coefficients
 * already absorbed the input monomials; x powers are index runs into a
 * shared pool (x0^2*x1 -> [0,0,1]). */
struct FoldedTerm {
  double coeff;
  std::uint32_t begin;
  std::uint32_t count;
};
struct FoldedComponent {
  std::vector<FoldedTerm> terms;
};
struct PreparedProgram {
  int nx = 0;
  bool continuous = false;
  double dt = 0.0;
  int substeps = 1;
  std::shared_ptr<const std::vector<std::uint16_t>> idx_pool;
  std::vector<FoldedComponent> f;    // nx components
  std::vector<FoldedComponent> jac;  // nx*nx components, row-major df_i/dx_j
};

void run_scalar(const PreparedProgram& pp, const double* xs, std::size_t lanes, bool want_jac,
                double* out_x, double* out_jac);
#ifdef SYMCON_HAVE_AVX2
void run_avx2(const PreparedProgram& pp, const double* xs, std::size_t lanes, bool want_jac,
              double* out_x, double* out_jac);
#endif

}  // namespace detail

class BatchPropagator {
public:
  // discrete map: substeps/time_step ignored; continuous: RK4 over time_step
  // composed over substeps
  BatchPropagator(PolynomialField field, bool continuous, double time_step, int substeps);

  int state_dim() const { return field_.state_dim(); }
  int input_dim() const { return field_.input_dim(); }
  bool continuous() const { return continuous_; }
  double time_step() const { return dt_; }
  int substeps() const { return substeps_; }
  const PolynomialField& field() const { return field_; }

  using Prepared = detail::PreparedProgram;
  std::shared_ptr<const Prepared> prepare(const Vec& u) const;

  /* xs/out_x are dim-major SoA (entry d*lanes+lane); out_jac entry
   * (i*nx+j)*lanes+lane = dF_i/dx_j. out_jac may be null when !want_jacobian. */
  void run(const Prepared& p, const double* xs, std::size_t lanes, bool want_jacobian,
           double* out_x, double* out_jac) const;

  Vec eval_point(const Vec& x, const Vec& u) const;
  std::pair<Vec, Mat> eval_point_with_jacobian(const Vec& x, const Vec& u) const;

private:
  struct TermTemplate {
    double coeff;
    std::vector<int> u_pow;
    std::uint32_t begin, count;  // x-index run in pool_
  };
  PolynomialField field_;
  bool continuous_;
  double dt_;
  int substeps_;
  std::shared_ptr<const std::vector<std::uint16_t>> pool_;
  std::vector<std::vector<TermTemplate>> f_templates_;    // per component
  std::vector<std::vector<TermTemplate>> jac_templates_;  // per jac entry
};

}  // namespace symcon
