#pragma once

#include <cstdint>
#include <optional>

#include "symcon/problems.hpp"
#include "symcon/symbolic.hpp"
#include "symcon/synthesis.hpp"
#include "symcon/system.hpp"

namespace symcon {

using LocalController = AffineLaw;

struct EllipsoidCell {
  Ellipsoid region;
  LocalController controller;
  std::optional<StateId> parent;  // none for the root (target) cell
  double cost_bound = 0.0;        // worst-case cumulative cost to the root
};

struct LazyTreeParams {
  std::uint64_t max_iterations = 20000;
  std::uint64_t sample_seed = 1;
  double initial_shape_scale = 4.0;  // max radius of the first candidate
  double shrink_factor = 0.8;        // in (0,1)
  QuadraticCost cost;                // stage cost and LQR design weights
  double goal_bias = 0.15;           // probability of sampling the initial set
  int coverage_samples = 100;        // seeded probe points of the initial set
  double min_cell_radius = 1e-3;     // reject candidates below this radius
  int riccati_iterations = 500;
  double riccati_tol = 1e-12;
  double containment_tol = 1e-9;
};

/* Discrete Riccati fixed point P = Q + A'PA - A'PB (R+B'PB)^-1 B'PA iterated
 * to `tol`; returns K = -(R+B'PB)^-1 B'PA and P. Throws on non-convergence
 * (stabilizability) and when the closed loop A+BK is not a contraction. */
std::pair<Mat, Mat> riccati_gain(const Mat& a, const Mat& b, const Mat& q, const Mat& r, int iters,
                                 double tol);

/* Certificate behind each tree edge: the closed-loop affine image of the
 * child region (linearized at the child anchor), inflated by the
 * linearization remainder over its enclosing box plus measurement noise, is
 * contained in the parent region. */
bool verify_cell_transition(const EllipsoidCell& child, const Ellipsoid& parent_region,
                            const SampledSystem& sys, double tol = 1e-9);

struct LazyAbstraction {
  SymbolicModel model;
  Quantizer quantizer;
  Interface interface;
  AbstractController controller;
  ValueFunction value;  // cost bounds per cell
  std::vector<EllipsoidCell> cells;
  double coverage = 0.0;  // fraction of initial-set probes covered
  bool covered = false;
  std::uint64_t iterations = 0;
  double build_seconds = 0.0;
};

/* Target-rooted lazy cover: grow ellipsoid cells with local affine
 * controllers from the target outward until seeded probe points of the
 * initial set are all covered (or the iteration cap is hit, yielding a
 * partial result with its coverage fraction). Every accepted cell is
 * certified by verify_cell_transition, lies inside the state bounds, keeps
 * its feedback admissible, and is provably disjoint from every obstacle. */
LazyAbstraction build_lazy_ellipsoid_abstraction(const ControlProblem& problem,
                                                 const SampledSystem& sys,
                                                 const LazyTreeParams& params);

LazyTreeParams lazy_params_from(const ControlProblem& problem, const LazySolverConfig& config);

}  // namespace symcon
