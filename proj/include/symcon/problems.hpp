#pragma once

#include <optional>
#include <string>

#include "symcon/dynamics.hpp"
#include "symcon/geometry.hpp"
#include "symcon/system.hpp"

namespace symcon {

/* t(x,u) = x^T Q x + u^T R u + offset with Q, R PSD. Structured so worst
 * cases over cells are computed exactly; any state cost is folded in. */
struct QuadraticCost {
  Mat state_weights;
  Mat input_weights;
  double offset = 0.0;
  double eval(const Vec& x, const Vec& u) const {
    return x.dot(state_weights * x) + u.dot(input_weights * u) + offset;
  }
};

struct ControlProblem {
  enum class Kind { reach_avoid, safety };

  std::string name;
  Kind kind = Kind::reach_avoid;
  TransitionControlSystem system;
  SampledSystem sampled;
  std::optional<Region> initial_set;
  std::optional<Region> target_set;          // reach-avoid
  std::vector<Region> obstacles;             // reach-avoid
  std::optional<Region> safe_set;            // safety
  std::function<double(const Vec&)> state_cost;  // nullable
  CostFn transition_cost;                    // includes any state cost
  QuadraticCost cost;                        // structured form of transition_cost
  std::optional<std::uint64_t> time;

  const Region& initial() const;
  const Region& target() const;
  const Region& safe() const;
};

/* Planar nonlinear reach-avoid benchmark: X = [-20,20]^2, U = [-10,10]^2,
 * obstacle E(0, 0.02 I), initial E((-10,-10), 10 I), target E((10,10), I),
 * discrete-time cubic dynamics, cost x^T x + u^T u + 1. */
ControlProblem builtin_nonlinear_example();

/* Sampled double integrator (dt = 0.1), |u| <= 1, X = [-2,2]^2, reach the box
 * [-0.2,0.2]^2 from anywhere, unit stage cost. */
ControlProblem builtin_double_integrator();

struct GridSolverConfig {
  Vec state_cell_half;
  Vec input_cell_half;
  bool stability_prior = false;
  std::uint64_t cells_cap = std::uint64_t{1} << 26;
};

struct LazySolverConfig {
  std::uint64_t max_iterations = 20000;
  std::uint64_t sample_seed = 1;
  double initial_shape_scale = 4.0;
  double shrink_factor = 0.8;
  double goal_bias = 0.15;
  int coverage_samples = 100;
  double min_cell_radius = 1e-3;
  int riccati_iterations = 500;
  double riccati_tol = 1e-12;
};

struct SolverConfig {
  enum class Which { grid, lazy_ellipsoid };
  Which which = Which::grid;
  GridSolverConfig grid;
  LazySolverConfig lazy;
};

/* declarative problem description, the parsed form of a problem file */
struct SetConfig {
  enum class Type { box, ellipsoid };
  Type type = Type::box;
  Vec center;
  Vec half;   // box
  Mat shape;  // ellipsoid
  Region to_region() const;
};

struct DynamicsConfig {
  enum class Type { builtin, polynomial };
  Type type = Type::builtin;
  std::string builtin_name;
  bool continuous = false;
  double time_step = 1.0;
  int substeps = 5;
  int state_dim = 0;
  int input_dim = 0;
  std::vector<std::vector<PolyTerm>> terms;
  Vec noise_bound;
};

struct GrowthConfig {
  enum class Type { automatic, terms };  // automatic: taylor for discrete polynomials,
                                         // sampled heuristic otherwise
  Type type = Type::automatic;
  std::vector<std::vector<PolyTerm>> beta_terms;  // beta(h,u), h in the state slots
};

struct CostConfig {
  Mat state_weights;
  Mat input_weights;
  double offset = 0.0;
  std::optional<Mat> extra_state_weights;  // optional state cost, folded in
  std::optional<double> extra_state_offset;
};

struct ProblemConfig {
  int schema_version = 1;
  std::string name;
  ControlProblem::Kind kind = ControlProblem::Kind::reach_avoid;
  DynamicsConfig dynamics;
  SetConfig state_bounds, input_bounds;
  std::optional<SetConfig> initial, target, safe;
  std::vector<SetConfig> obstacles;
  CostConfig cost;
  std::optional<std::uint64_t> time;
  GrowthConfig growth;
  SolverConfig solver;
};

struct LoadedProblem {
  ProblemConfig config;
  ControlProblem problem;
  SolverConfig solver;
};

/* Strict loader: schema_version checked, unknown keys rejected, every
 * diagnostic carries file/line/field. */
LoadedProblem load_problem(const std::string& path);
LoadedProblem load_problem_text(const std::string& text, const std::string& filename);
ControlProblem instantiate_problem(const ProblemConfig& config);
std::string serialize_problem_config(const ProblemConfig& config);

}  // namespace symcon
