#pragma once

#include <limits>
#include <memory>
#include <optional>

#include "symcon/problems.hpp"
#include "symcon/symbolic.hpp"

namespace symcon {

constexpr double kInfValue = std::numeric_limits<double>::infinity();

/* worst-case cost-to-go; +inf outside the winning set */
struct ValueFunction {
  std::vector<double> values;
  std::vector<StateId> target_ids;
  double at(StateId s) const { return s < values.size() ? values[s] : kInfValue; }
};

struct AbstractProblem {
  std::shared_ptr<const SymbolicModel> model;
  ControlProblem::Kind kind = ControlProblem::Kind::reach_avoid;
  std::vector<StateId> initial_ids;
  std::vector<StateId> goal_ids;  // targets (reach-avoid) or safe set (safety)
  std::function<double(StateId, InputId)> stage_cost;
  std::optional<std::uint64_t> horizon;
};

/* Abstract the concrete problem over a built model: targets/safe cells by
 * inner approximation, initial cells by outer approximation, stage costs as
 * the exact worst case of the quadratic cost over each cell (corner
 * enumeration for boxes, trust-region maximization for ellipsoids). */
AbstractProblem abstract_problem(const ControlProblem& concrete,
                                 std::shared_ptr<const SymbolicModel> model,
                                 const Quantizer& quantizer,
                                 const std::vector<std::uint8_t>* excluded = nullptr);

struct ReachResult {
  AbstractController controller;
  ValueFunction value;
  bool converged = true;           // false when a finite horizon truncated the iteration
  std::uint64_t not_yet_winning = 0;  // finite-horizon only
};

/* Worst-case Dijkstra on the nondeterministic graph: a (state,input) pair is
 * finalized when its worst successor is finalized; the controller keeps all
 * inputs optimal within 1e-9. With a finite horizon, depth-truncated value
 * iteration instead. */
ReachResult solve_reach_avoid(const AbstractProblem& problem);

struct SafetyResult {
  AbstractController controller;
  std::vector<StateId> invariant_set;  // ascending
  bool feasible = true;
};

/* maximal controlled-invariant subset of the safe cells via the decreasing
 * fixed point, worklist form */
SafetyResult solve_safety(const AbstractProblem& problem);

/* Concretize an abstract controller through the quantizer. Partitions map a
 * state to its cell's optimal input vectors in lexicographic order; covers
 * apply the interface through every matching in-domain cell, ordered by the
 * providing cell's value (cost bound), then cell id — the ordering that makes
 * the value function a valid concrete cost bound. */
StaticController concretize(const AbstractController& controller, const Quantizer& quantizer,
                            std::shared_ptr<const SymbolicModel> model,
                            std::optional<Interface> interface = std::nullopt,
                            std::shared_ptr<const std::vector<double>> cell_order = nullptr);

/* diagnostics used by the test batteries */
double bellman_residual(const AbstractProblem& problem, const ValueFunction& value);
double controller_value_gap(const AbstractProblem& problem, const AbstractController& controller,
                            const ValueFunction& value);

}  // namespace symcon
