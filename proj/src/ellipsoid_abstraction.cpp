#include "symcon/ellipsoid_abstraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace symcon {

std::pair<Mat, Mat> riccati_gain(const Mat& a, const Mat& b, const Mat& q, const Mat& r, int iters,
                                 double tol) {
  const long n = a.rows();
  const long m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != m ||
      r.cols() != m)
    throw ConstructionError("riccati: dimension mismatch");

  Mat p = q;
  double residual = kInfValue;
  for (int it = 0; it < iters; ++it) {
    const Mat btp = b.transpose() * p;
    const Mat gram = r + btp * b;
    Eigen::LDLT<Mat> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw NumericsError("riccati: R + B'PB not positive definite");
    const Mat btpa = btp * a;
    Mat next = q + a.transpose() * p * a - btpa.transpose() * ldlt.solve(btpa);
    next = 0.5 * (next + next.transpose());
    residual = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (residual <= tol) break;
  }
  if (residual > tol)
    throw NumericsError("riccati: no fixed point after " + std::to_string(iters) +
                        " iterations (system not stabilizable?)");

  const Mat gram = r + b.transpose() * p * b;
  const Mat k = -Eigen::LDLT<Mat>(gram).solve(b.transpose() * p * a);
  const Mat closed = a + b * k;
  const double rho = closed.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < 1.0))
    throw NumericsError("riccati: closed-loop spectral radius " + std::to_string(rho) + " >= 1");
  return {k, p};
}

bool verify_cell_transition(const EllipsoidCell& child, const Ellipsoid& parent_region,
                            const SampledSystem& sys, double tol) {
  const LocalController& law = child.controller;
  auto [image_center, a] = sys.linearized_map(law.anchor, law.offset);
  if (!sys.input_jacobian_map)
    throw ConfigError("cell verification: system lacks an input Jacobian");
  const Mat b = sys.input_jacobian_map(law.anchor, law.offset);
  const Mat closed = a + b * law.gain;
  const Ellipsoid image =
      ellipsoid_affine_image(child.region, closed, image_center - closed * law.anchor);
  Vec margin = sys.error_bound_map(child.region.bounding_box().half(), law.offset);
  if (sys.noise_bound.size() > 0) margin += sys.noise_bound;
  const Ellipsoid inflated = ellipsoid_inflate(image, margin);
  try {
    return ellipsoid_contains_ellipsoid(inflated, parent_region, tol);
  } catch (const IndeterminateError&) {
    return false;
  }
}

namespace {

Ellipsoid region_as_ellipsoid(const Region& r) {
  if (const auto* e = std::get_if<Ellipsoid>(&r)) return *e;
  // inscribed ellipsoid of a box
  const auto& box = std::get<Hyperrectangle>(r);
  Mat p = Mat::Zero(box.dim(), box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    if (box.half()[i] <= 0.0)
      throw ConfigError("lazy abstraction: degenerate box cannot seed an ellipsoid cell");
    p(i, i) = 1.0 / (box.half()[i] * box.half()[i]);
  }
  return Ellipsoid(box.center(), p);
}

/* normalized shape: scaling so the max radius of E(c, P_hat) is exactly 1 */
Mat normalize_shape(const Mat& p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(p, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 0.0) throw NumericsError("lazy abstraction: non-PD candidate shape");
  return p / lmin;
}

/* worst stage cost over the cell under its affine feedback, exact */
double worst_stage_cost(const Ellipsoid& cell, const LocalController& law,
                        const QuadraticCost& cost) {
  const Vec shift = law.offset - law.gain * law.anchor;  // u = Kx + shift
  const Mat aq = cost.state_weights + law.gain.transpose() * cost.input_weights * law.gain;
  const Vec bq = law.gain.transpose() * (cost.input_weights * shift);
  const double cq = shift.dot(cost.input_weights * shift) + cost.offset;
  return max_quadratic_over_ellipsoid(0.5 * (aq + aq.transpose()), bq, cq, cell);
}

/* feedback range over the cell via support values: l_i +/- sqrt((K P^-1 K')_ii) */
bool feedback_admissible(const Ellipsoid& cell, const LocalController& law,
                         const Hyperrectangle& input_box) {
  const Mat pinv = cell.shape().llt().solve(Mat::Identity(cell.dim(), cell.dim()));
  const Mat spread = law.gain * pinv * law.gain.transpose();
  for (long i = 0; i < law.offset.size(); ++i) {
    const double extent = std::sqrt(std::max(0.0, spread(i, i)));
    const double lo = law.offset[i] - extent;
    const double hi = law.offset[i] + extent;
    if (lo < input_box.lower()[i] - 1e-12 || hi > input_box.upper()[i] + 1e-12) return false;
  }
  return true;
}

}  // namespace

LazyTreeParams lazy_params_from(const ControlProblem& problem, const LazySolverConfig& config) {
  LazyTreeParams p;
  p.max_iterations = config.max_iterations;
  p.sample_seed = config.sample_seed;
  p.initial_shape_scale = config.initial_shape_scale;
  p.shrink_factor = config.shrink_factor;
  p.goal_bias = config.goal_bias;
  p.coverage_samples = config.coverage_samples;
  p.min_cell_radius = config.min_cell_radius;
  p.riccati_iterations = config.riccati_iterations;
  p.riccati_tol = config.riccati_tol;
  p.cost = problem.cost;
  return p;
}

LazyAbstraction build_lazy_ellipsoid_abstraction(const ControlProblem& problem,
                                                 const SampledSystem& sys,
                                                 const LazyTreeParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  if (problem.kind != ControlProblem::Kind::reach_avoid)
    throw ConfigError("lazy abstraction: reach-avoid problems only");
  if (params.shrink_factor <= 0.0 || params.shrink_factor >= 1.0)
    throw ConfigError("lazy abstraction: shrink_factor must lie in (0,1)");
  const Hyperrectangle& state_box = problem.system.state_set;
  const Hyperrectangle& input_box = problem.system.input_set;
  const int nx = state_box.dim();

  // LQR design weights: the stage-cost weights, regularized to definiteness
  Mat design_q = params.cost.state_weights;
  Mat design_r = params.cost.input_weights;
  {
    Eigen::SelfAdjointEigenSolver<Mat> eq(design_q, Eigen::EigenvaluesOnly);
    if (eq.eigenvalues().minCoeff() < 1e-9) design_q += 1e-6 * Mat::Identity(nx, nx);
    Eigen::SelfAdjointEigenSolver<Mat> er(design_r, Eigen::EigenvaluesOnly);
    if (er.eigenvalues().minCoeff() < 1e-9)
      design_r += 1e-6 * Mat::Identity(input_box.dim(), input_box.dim());
  }

  LazyAbstraction out;
  out.cells.push_back(EllipsoidCell{
      region_as_ellipsoid(problem.target()),
      LocalController{Mat::Zero(input_box.dim(), nx), Vec::Zero(input_box.dim()), Vec::Zero(nx)},
      std::nullopt, 0.0});

  // seeded probe points of the initial set drive the termination test
  Rng probe_rng(params.sample_seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<Vec> probes;
  for (int i = 0; i < params.coverage_samples; ++i)
    probes.push_back(region_sample(problem.initial(), probe_rng));
  std::vector<std::uint8_t> probe_covered(probes.size(), 0);
  std::size_t covered_count = 0;
  auto mark_covered = [&](const Ellipsoid& cell) {
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (!probe_covered[i] && cell.contains(probes[i])) {
        probe_covered[i] = 1;
        ++covered_count;
      }
  };
  mark_covered(out.cells[0].region);

  Rng rng(params.sample_seed);
  std::uint64_t it = 0;
  for (; it < params.max_iterations && covered_count < probes.size(); ++it) {
    // sample, goal-biased toward the initial set
    const bool toward_goal = rng.uniform() < params.goal_bias;
    const Vec s = toward_goal ? region_sample(problem.initial(), rng) : state_box.sample(rng);
    bool in_obstacle = false;
    for (const Region& obs : problem.obstacles)
      if (region_contains_point(obs, s)) {
        in_obstacle = true;
        break;
      }
    if (in_obstacle) continue;

    // nearest node under the candidate parent's shape metric, lower id wins
    StateId parent = 0;
    double best = kInfValue;
    for (StateId i = 0; i < out.cells.size(); ++i) {
      const double d = out.cells[i].region.quad(s);
      if (d < best) {
        best = d;
        parent = i;
      }
    }
    const Ellipsoid& parent_region = out.cells[parent].region;

    // steer: offset solving nominal(s, l) ~= parent center, clamped into U
    Vec offset = input_box.center();
    for (int newton = 0; newton < 3; ++newton) {
      auto [img, a] = sys.linearized_map(s, offset);
      (void)a;
      const Mat b = sys.input_jacobian_map(s, offset);
      const Vec step =
          b.completeOrthogonalDecomposition().solve(parent_region.center() - img);
      offset += step;
      if (step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
    offset = offset.cwiseMax(input_box.lower()).cwiseMin(input_box.upper());
    if (parent_region.quad(sys.nominal_map(s, offset)) > 0.81) continue;  // cannot recenter

    // local affine design at the sample
    Mat gain, riccati_p;
    try {
      auto [img, a] = sys.linearized_map(s, offset);
      (void)img;
      const Mat b = sys.input_jacobian_map(s, offset);
      std::tie(gain, riccati_p) =
          riccati_gain(a, b, design_q, design_r, params.riccati_iterations, params.riccati_tol);
    } catch (const NumericsError&) {
      continue;  // not stabilizable here; try another sample
    }

    const Mat shape_unit = normalize_shape(riccati_p);
    const LocalController law{gain, offset, s};

    // shrink until every certificate holds
    bool accepted = false;
    for (double radius = params.initial_shape_scale; radius >= params.min_cell_radius;
         radius *= params.shrink_factor) {
      EllipsoidCell candidate{Ellipsoid(s, shape_unit / (radius * radius)), law, parent, 0.0};
      if (!region_contains_region(Region(state_box), Region(candidate.region))) continue;
      bool clear = true;
      for (const Region& obs : problem.obstacles)
        if (disjoint(Region(candidate.region), obs) != Disjointness::disjoint) {
          clear = false;
          break;
        }
      if (!clear) continue;
      if (!feedback_admissible(candidate.region, law, input_box)) continue;
      if (!verify_cell_transition(candidate, parent_region, sys, params.containment_tol)) continue;
      candidate.cost_bound = out.cells[parent].cost_bound +
                             worst_stage_cost(candidate.region, law, params.cost);
      mark_covered(candidate.region);
      out.cells.push_back(std::move(candidate));
      accepted = true;
      break;
    }
    (void)accepted;
  }
  out.iterations = it;
  out.coverage = probes.empty() ? 1.0
                                : static_cast<double>(covered_count) /
                                      static_cast<double>(probes.size());
  out.covered = covered_count == probes.size();

  // assemble the deterministic abstract system: one transition per non-root cell
  const auto num_cells = static_cast<std::uint32_t>(out.cells.size());
  std::vector<Region> cell_regions;
  std::vector<ModelInput> inputs;
  std::vector<Transition> transitions;
  cell_regions.reserve(num_cells);
  for (const auto& c : out.cells) cell_regions.emplace_back(c.region);
  for (StateId i = 1; i < num_cells; ++i) {
    inputs.emplace_back(out.cells[i].controller);
    transitions.push_back({i, i - 1, *out.cells[i].parent});
  }
  out.model = SymbolicModel::build(num_cells, num_cells > 0 ? num_cells - 1 : 0,
                                   std::move(cell_regions), std::move(inputs),
                                   std::move(transitions));
  out.quantizer = make_cover_quantizer(
      {out.model.cells().begin(), out.model.cells().end()});

  auto laws = std::make_shared<std::vector<LocalController>>();
  laws->reserve(num_cells > 0 ? num_cells - 1 : 0);
  for (StateId i = 1; i < num_cells; ++i) laws->push_back(out.cells[i].controller);
  out.interface = [laws](const Vec& x, StateId, InputId u2) -> std::vector<Vec> {
    if (u2 >= laws->size()) return {};
    return {(*laws)[u2].apply(x)};
  };

  out.controller.table.assign(num_cells, {});
  for (StateId i = 1; i < num_cells; ++i) out.controller.table[i] = {static_cast<InputId>(i - 1)};

  out.value.values.resize(num_cells);
  for (StateId i = 0; i < num_cells; ++i) out.value.values[i] = out.cells[i].cost_bound;
  out.value.target_ids = {0};

  out.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace symcon
