#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "symcon/dynamics.hpp"
#include "symcon/geometry.hpp"
#include "symcon/kernels.hpp"
#include "symcon/util.hpp"

namespace symcon {

using VectorField = std::function<Vec(const Vec&, const Vec&)>;  // (x,u) -> dx/dt or x'
using MatrixField = std::function<Mat(const Vec&, const Vec&)>;

/* Realization of the cell-expansion error term in h' = |J| h + err(h,u) + W.
 *  - user:      err supplied directly as a function of (h,u)
 *  - remainder: a linearization-remainder bound supplied as a function
 *  - taylor:    remainder derived from polynomial term lists over a state box
 *  - sampled:   Monte-Carlo remainder estimate with a safety factor; a
 *               heuristic, flagged on the resulting system */
struct GrowthSpec {
  enum class Kind { user_growth_bound, jacobian_plus_remainder, taylor_remainder, sampled_remainder };
  Kind kind = Kind::sampled_remainder;
  std::function<Vec(const Vec&, const Vec&)> bound;  // user / remainder kinds
  std::optional<Hyperrectangle> state_box;           // taylor / sampled kinds
  std::optional<Hyperrectangle> input_box;           // sampled kind
  int validation_samples = 1000;
  std::uint64_t sample_seed = 1;
  double safety_factor = 2.0;

  static GrowthSpec user(std::function<Vec(const Vec&, const Vec&)> beta);
  static GrowthSpec remainder(std::function<Vec(const Vec&, const Vec&)> rem);
  static GrowthSpec taylor(Hyperrectangle state_box);
  static GrowthSpec sampled(Hyperrectangle state_box, Hyperrectangle input_box,
                            std::uint64_t seed = 1, int samples = 1000, double factor = 2.0);
};

/* Discrete-time system description used by the abstraction builders:
 * x(k+1) = nominal(x,u) + w, |w| <= noise_bound componentwise. */
struct SampledSystem {
  double time_step = 1.0;  // sampling period; 1 for natively discrete maps
  Vec noise_bound;
  std::function<Vec(const Vec&, const Vec&)> nominal_map;
  std::function<std::pair<Vec, Mat>(const Vec&, const Vec&)> linearized_map;  // (x', dx'/dx)
  std::function<Mat(const Vec&, const Vec&)> input_jacobian_map;              // dx'/du
  std::function<Vec(const Vec&, const Vec&)> error_bound_map;                 // (h,u) -> err
  bool error_bound_heuristic = false;
  std::shared_ptr<const BatchPropagator> batch;  // fast path when polynomial-backed
};

struct SuccessorBox {
  Vec nominal;
  Vec radius;  // componentwise, >= 0
};

/* Set-valued dynamics over bounded state/input sets. */
struct TransitionControlSystem {
  int state_dim;
  int input_dim;
  Hyperrectangle state_set;
  Hyperrectangle input_set;
  std::function<SuccessorBox(const Vec&, const Vec&)> successor_map;
  Vec disturbance_bound;

  bool input_available(const Vec& x, const Vec& u) const {
    (void)x;
    return input_set.contains(u, 1e-12);
  }
};

TransitionControlSystem make_transition_system(Hyperrectangle state_set, Hyperrectangle input_set,
                                               const SampledSystem& sys);

/* Affine feedback u = K (x - anchor) + offset. */
struct AffineLaw {
  Mat gain;
  Vec offset;
  Vec anchor;
  Vec apply(const Vec& x) const { return gain * (x - anchor) + offset; }
};

/* Set-valued state feedback. evaluate() returns candidates in the
 * controller's documented deterministic order (front = preferred); plain
 * set-valued controllers order lexicographically. */
class StaticController {
public:
  StaticController() = default;
  StaticController(std::function<std::vector<Vec>(const Vec&)> evaluate,
                   std::function<bool(const Vec&)> domain);

  std::vector<Vec> evaluate(const Vec& x) const;
  bool domain_predicate(const Vec& x) const;

  static StaticController constant(Vec u);

private:
  std::function<std::vector<Vec>(const Vec&)> eval_;
  std::function<bool(const Vec&)> domain_;
};

bool lex_less(const Vec& a, const Vec& b);
void sort_lexicographic(std::vector<Vec>& vs);

struct Trajectory {
  std::vector<Vec> states;  // length T+1
  std::vector<Vec> inputs;  // length T
  std::vector<double> costs;
  double total_cost() const;
};

enum class SimStatus { reached, domain_exit, timeout };

struct SimulationResult {
  Trajectory trajectory;
  SimStatus status = SimStatus::reached;
};

/* zero: nominal successor; random_: uniform draw in the disturbance box;
 * worst_sampled: per coordinate the corner pushing the state away from the
 * state-set center (the direction that stresses the guarantees). */
enum class DisturbancePolicy { zero, worst_sampled, random_ };
struct DisturbanceSpec {
  DisturbancePolicy policy = DisturbancePolicy::zero;
  std::uint64_t seed = 0;
};

using CostFn = std::function<double(const Vec&, const Vec&)>;
using StatePredicate = std::function<bool(const Vec&)>;

/* Classical 4th-order Runge-Kutta over dt composed of `substeps` equal
 * sub-intervals. Throws NumericsError naming the stage on blowup. */
Vec rk4_step(const VectorField& field, const Vec& x, const Vec& u, double dt, int substeps);

/* RK4-sample a continuous-time field; the state Jacobian co-integrates the
 * variational equation, the input Jacobian the input-sensitivity equation. */
SampledSystem sample_system(const VectorField& field, const MatrixField& jacobian_x,
                            double time_step, Vec noise_bound, const GrowthSpec& growth,
                            const MatrixField& jacobian_u = nullptr, int substeps = 5);

/* Polynomial-backed systems: exact Jacobians, kernel-batched propagation. */
SampledSystem make_discrete_polynomial_system(const PolynomialField& f, Vec noise_bound,
                                              const GrowthSpec& growth);
SampledSystem make_sampled_polynomial_system(const PolynomialField& f, double time_step,
                                             int substeps, Vec noise_bound,
                                             const GrowthSpec& growth);

SimulationResult closed_loop_trajectory(const TransitionControlSystem& system,
                                        const StaticController& controller, const CostFn& cost,
                                        const Vec& x0, const StatePredicate& stop,
                                        std::uint64_t max_steps,
                                        DisturbanceSpec disturbance = {});

/* Independent re-check of the trajectory invariants: consistent lengths,
 * every step inside the disturbance box around the nominal successor. */
bool validate_trajectory(const TransitionControlSystem& system, const Trajectory& t,
                         double tol = 1e-9);

/* Spot checks of the GrowthSpec invariants (err(0,u)=0, monotone in h) on
 * seeded samples; throws ConstructionError on violation. */
void validate_growth_bound(const SampledSystem& sys, const Hyperrectangle& state_box,
                           const Hyperrectangle& input_box, int samples, std::uint64_t seed);

}  // namespace symcon
