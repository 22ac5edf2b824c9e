#include "symcon/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace symcon {

GrowthSpec GrowthSpec::user(std::function<Vec(const Vec&, const Vec&)> beta) {
  GrowthSpec g;
  g.kind = Kind::user_growth_bound;
  g.bound = std::move(beta);
  return g;
}

GrowthSpec GrowthSpec::remainder(std::function<Vec(const Vec&, const Vec&)> rem) {
  GrowthSpec g;
  g.kind = Kind::jacobian_plus_remainder;
  g.bound = std::move(rem);
  return g;
}

GrowthSpec GrowthSpec::taylor(Hyperrectangle state_box) {
  GrowthSpec g;
  g.kind = Kind::taylor_remainder;
  g.state_box = std::move(state_box);
  return g;
}

GrowthSpec GrowthSpec::sampled(Hyperrectangle state_box, Hyperrectangle input_box,
                               std::uint64_t seed, int samples, double factor) {
  GrowthSpec g;
  g.kind = Kind::sampled_remainder;
  g.state_box = std::move(state_box);
  g.input_box = std::move(input_box);
  g.sample_seed = seed;
  g.validation_samples = samples;
  g.safety_factor = factor;
  return g;
}

TransitionControlSystem make_transition_system(Hyperrectangle state_set, Hyperrectangle input_set,
                                               const SampledSystem& sys) {
  const int nx = state_set.dim();
  const int nu = input_set.dim();
  Vec w = sys.noise_bound.size() > 0 ? sys.noise_bound : Vec::Zero(nx).eval();
  if ((w.array() < 0.0).any())
    throw ConstructionError("transition system: negative disturbance bound");
  auto nominal = sys.nominal_map;
  TransitionControlSystem t{
      .state_dim = nx,
      .input_dim = nu,
      .state_set = std::move(state_set),
      .input_set = std::move(input_set),
      .successor_map =
          [nominal, w](const Vec& x, const Vec& u) {
            return SuccessorBox{nominal(x, u), w};
          },
      .disturbance_bound = w,
  };
  return t;
}

StaticController::StaticController(std::function<std::vector<Vec>(const Vec&)> evaluate,
                                   std::function<bool(const Vec&)> domain)
    : eval_(std::move(evaluate)), domain_(std::move(domain)) {}

std::vector<Vec> StaticController::evaluate(const Vec& x) const {
  if (!eval_) throw ConstructionError("controller: evaluate unset");
  return eval_(x);
}

bool StaticController::domain_predicate(const Vec& x) const {
  if (!domain_) throw ConstructionError("controller: domain predicate unset");
  return domain_(x);
}

StaticController StaticController::constant(Vec u) {
  auto us = std::vector<Vec>{std::move(u)};
  return StaticController([us](const Vec&) { return us; }, [](const Vec&) { return true; });
}

bool lex_less(const Vec& a, const Vec& b) {
  const long n = std::min(a.size(), b.size());
  for (long i = 0; i < n; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

void sort_lexicographic(std::vector<Vec>& vs) { std::sort(vs.begin(), vs.end(), lex_less); }

double Trajectory::total_cost() const {
  double s = 0.0;
  for (double c : costs) s += c;
  return s;
}

namespace {

const char* stage_names[4] = {"k1", "k2", "k3", "k4"};

void check_stage(const Vec& k, int stage, int substep) {
  if (!k.allFinite())
    throw NumericsError(std::string("rk4: non-finite value at stage ") + stage_names[stage] +
                        ", substep " + std::to_string(substep));
}

}  // namespace

Vec rk4_step(const VectorField& field, const Vec& x, const Vec& u, double dt, int substeps) {
  if (dt <= 0.0) throw ConstructionError("rk4: dt must be positive");
  if (substeps <= 0) throw ConstructionError("rk4: substeps must be positive");
  const double h = dt / static_cast<double>(substeps);
  Vec y = x;
  for (int s = 0; s < substeps; ++s) {
    const Vec k1 = field(y, u);
    check_stage(k1, 0, s);
    const Vec k2 = field(y + 0.5 * h * k1, u);
    check_stage(k2, 1, s);
    const Vec k3 = field(y + 0.5 * h * k2, u);
    check_stage(k3, 2, s);
    const Vec k4 = field(y + h * k3, u);
    check_stage(k4, 3, s);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

namespace {

/* RK4 on the augmented system (x, J, S): dJ = A(x)J, dS = A(x)S + B(x,u). */
struct AugmentedResult {
  Vec x;
  Mat jac_x;
  Mat jac_u;
};

AugmentedResult rk4_variational(const VectorField& field, const MatrixField& jac_x,
                                const MatrixField& jac_u, const Vec& x0, const Vec& u, double dt,
                                int substeps, bool want_u) {
  const int n = static_cast<int>(x0.size());
  const int m = want_u ? static_cast<int>(u.size()) : 0;
  const double h = dt / static_cast<double>(substeps);
  Vec x = x0;
  Mat j = Mat::Identity(n, n);
  Mat s = want_u ? Mat::Zero(n, m) : Mat();
  for (int step = 0; step < substeps; ++step) {
    const Vec k1 = field(x, u);
    const Mat a1 = jac_x(x, u);
    const Mat kj1 = a1 * j;
    Mat ks1;
    if (want_u) ks1 = a1 * s + jac_u(x, u);

    const Vec x2 = x + 0.5 * h * k1;
    const Vec k2 = field(x2, u);
    const Mat a2 = jac_x(x2, u);
    const Mat kj2 = a2 * (j + 0.5 * h * kj1);
    Mat ks2;
    if (want_u) ks2 = a2 * (s + 0.5 * h * ks1) + jac_u(x2, u);

    const Vec x3 = x + 0.5 * h * k2;
    const Vec k3 = field(x3, u);
    const Mat a3 = jac_x(x3, u);
    const Mat kj3 = a3 * (j + 0.5 * h * kj2);
    Mat ks3;
    if (want_u) ks3 = a3 * (s + 0.5 * h * ks2) + jac_u(x3, u);

    const Vec x4 = x + h * k3;
    const Vec k4 = field(x4, u);
    const Mat a4 = jac_x(x4, u);
    const Mat kj4 = a4 * (j + h * kj3);
    Mat ks4;
    if (want_u) ks4 = a4 * (s + h * ks3) + jac_u(x4, u);

    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    j += (h / 6.0) * (kj1 + 2.0 * kj2 + 2.0 * kj3 + kj4);
    if (want_u) s += (h / 6.0) * (ks1 + 2.0 * ks2 + 2.0 * ks3 + ks4);
  }
  if (!x.allFinite() || !j.allFinite()) throw NumericsError("rk4 variational: non-finite result");
  return {std::move(x), std::move(j), std::move(s)};
}

std::function<Vec(const Vec&, const Vec&)> realize_error_bound(
    const GrowthSpec& growth, const SampledSystem& sys_view,
    const PolynomialField* poly, bool* heuristic_flag) {
  switch (growth.kind) {
    case GrowthSpec::Kind::user_growth_bound:
    case GrowthSpec::Kind::jacobian_plus_remainder:
      if (!growth.bound) throw ConfigError("growth spec: bound function required for this kind");
      return growth.bound;
    case GrowthSpec::Kind::taylor_remainder: {
      if (!poly)
        throw ConfigError("growth spec: taylor remainder requires polynomial dynamics");
      if (!growth.state_box) throw ConfigError("growth spec: taylor remainder requires a state box");
      const PolynomialField field = *poly;
      const Vec absmax =
          growth.state_box->center().cwiseAbs() + growth.state_box->half();
      return [field, absmax](const Vec& h, const Vec& u) {
        return field.taylor_remainder_bound(absmax, h, u);
      };
    }
    case GrowthSpec::Kind::sampled_remainder: {
      if (!growth.state_box || !growth.input_box)
        throw ConfigError("growth spec: sampled remainder requires state and input boxes");
      *heuristic_flag = true;
      const auto nominal = sys_view.nominal_map;
      const auto linearized = sys_view.linearized_map;
      const Hyperrectangle sbox = *growth.state_box;
      const int samples = growth.validation_samples;
      const std::uint64_t seed = growth.sample_seed;
      const double factor = growth.safety_factor;
      return [nominal, linearized, sbox, samples, seed, factor](const Vec& h, const Vec& u) {
        // deterministic per (h,u)
        std::uint64_t key = seed;
        for (long i = 0; i < h.size(); ++i) {
          std::uint64_t bits;
          std::memcpy(&bits, &h[i], sizeof(bits));
          key = fnv1a64({reinterpret_cast<const char*>(&bits), sizeof(bits)}, key);
        }
        for (long i = 0; i < u.size(); ++i) {
          std::uint64_t bits;
          std::memcpy(&bits, &u[i], sizeof(bits));
          key = fnv1a64({reinterpret_cast<const char*>(&bits), sizeof(bits)}, key);
        }
        Rng rng(key);
        Vec worst = Vec::Zero(h.size());
        for (int s = 0; s < samples; ++s) {
          const Vec c = sbox.sample(rng);
          Vec d(h.size());
          for (long i = 0; i < h.size(); ++i) d[i] = h[i] * (2.0 * rng.uniform() - 1.0);
          auto [fc, jc] = linearized(c, u);
          const Vec fx = nominal(c + d, u);
          worst = worst.cwiseMax((fx - fc - jc * d).cwiseAbs());
        }
        return (factor * worst).eval();
      };
    }
  }
  throw ConfigError("growth spec: unknown kind");
}

}  // namespace

SampledSystem sample_system(const VectorField& field, const MatrixField& jacobian_x,
                            double time_step, Vec noise_bound, const GrowthSpec& growth,
                            const MatrixField& jacobian_u, int substeps) {
  if (time_step <= 0.0) throw ConstructionError("sample_system: time step must be positive");
  if (!field) throw ConfigError("sample_system: field required");
  if (!jacobian_x) throw ConfigError("sample_system: state Jacobian required");
  SampledSystem sys;
  sys.time_step = time_step;
  sys.noise_bound = std::move(noise_bound);
  if ((sys.noise_bound.array() < 0.0).any())
    throw ConstructionError("sample_system: negative noise bound");
  sys.nominal_map = [field, time_step, substeps](const Vec& x, const Vec& u) {
    return rk4_step(field, x, u, time_step, substeps);
  };
  sys.linearized_map = [field, jacobian_x, time_step, substeps](const Vec& x, const Vec& u) {
    auto r = rk4_variational(field, jacobian_x, nullptr, x, u, time_step, substeps, false);
    return std::make_pair(std::move(r.x), std::move(r.jac_x));
  };
  if (jacobian_u) {
    sys.input_jacobian_map = [field, jacobian_x, jacobian_u, time_step, substeps](const Vec& x,
                                                                                  const Vec& u) {
      auto r = rk4_variational(field, jacobian_x, jacobian_u, x, u, time_step, substeps, true);
      return r.jac_u;
    };
  }
  if (growth.kind == GrowthSpec::Kind::taylor_remainder)
    throw ConfigError("sample_system: taylor remainder unavailable for sampled fields; "
                      "supply a growth bound or use the sampled heuristic");
  sys.error_bound_map = realize_error_bound(growth, sys, nullptr, &sys.error_bound_heuristic);
  return sys;
}

namespace {

SampledSystem polynomial_system_impl(const PolynomialField& f, bool continuous, double time_step,
                                     int substeps, Vec noise_bound, const GrowthSpec& growth) {
  SampledSystem sys;
  sys.time_step = time_step;
  sys.noise_bound = std::move(noise_bound);
  if ((sys.noise_bound.array() < 0.0).any())
    throw ConstructionError("polynomial system: negative noise bound");
  auto batch = std::make_shared<const BatchPropagator>(f, continuous, time_step, substeps);
  sys.batch = batch;
  sys.nominal_map = [batch](const Vec& x, const Vec& u) { return batch->eval_point(x, u); };
  sys.linearized_map = [batch](const Vec& x, const Vec& u) {
    return batch->eval_point_with_jacobian(x, u);
  };
  if (continuous) {
    const PolynomialField field = f;
    VectorField vf = [field](const Vec& x, const Vec& u) { return field.eval(x, u); };
    MatrixField jx = [field](const Vec& x, const Vec& u) { return field.jacobian_x(x, u); };
    MatrixField ju = [field](const Vec& x, const Vec& u) { return field.jacobian_u(x, u); };
    sys.input_jacobian_map = [vf, jx, ju, time_step, substeps](const Vec& x, const Vec& u) {
      auto r = rk4_variational(vf, jx, ju, x, u, time_step, substeps, true);
      return r.jac_u;
    };
    if (growth.kind == GrowthSpec::Kind::taylor_remainder)
      throw ConfigError("polynomial system: taylor remainder applies to the discrete map only");
    sys.error_bound_map = realize_error_bound(growth, sys, nullptr, &sys.error_bound_heuristic);
  } else {
    const PolynomialField field = f;
    sys.input_jacobian_map = [field](const Vec& x, const Vec& u) { return field.jacobian_u(x, u); };
    sys.error_bound_map = realize_error_bound(growth, sys, &field, &sys.error_bound_heuristic);
  }
  return sys;
}

}  // namespace

SampledSystem make_discrete_polynomial_system(const PolynomialField& f, Vec noise_bound,
                                              const GrowthSpec& growth) {
  return polynomial_system_impl(f, false, 1.0, 1, std::move(noise_bound), growth);
}

SampledSystem make_sampled_polynomial_system(const PolynomialField& f, double time_step,
                                             int substeps, Vec noise_bound,
                                             const GrowthSpec& growth) {
  if (time_step <= 0.0 || substeps <= 0)
    throw ConstructionError("polynomial system: time step and substeps must be positive");
  return polynomial_system_impl(f, true, time_step, substeps, std::move(noise_bound), growth);
}

SimulationResult closed_loop_trajectory(const TransitionControlSystem& system,
                                        const StaticController& controller, const CostFn& cost,
                                        const Vec& x0, const StatePredicate& stop,
                                        std::uint64_t max_steps, DisturbanceSpec disturbance) {
  SimulationResult result;
  Rng rng(disturbance.seed);
  Vec x = x0;
  result.trajectory.states.push_back(x);
  for (std::uint64_t k = 0;; ++k) {
    if (stop(x)) {
      result.status = SimStatus::reached;
      return result;
    }
    if (k >= max_steps) {
      result.status = SimStatus::timeout;
      return result;
    }
    if (!controller.domain_predicate(x)) {
      result.status = SimStatus::domain_exit;
      return result;
    }
    const auto candidates = controller.evaluate(x);
    if (candidates.empty()) {
      result.status = SimStatus::domain_exit;
      return result;
    }
    const Vec& u = candidates.front();
    const SuccessorBox succ = system.successor_map(x, u);
    Vec w = Vec::Zero(succ.nominal.size());
    switch (disturbance.policy) {
      case DisturbancePolicy::zero:
        break;
      case DisturbancePolicy::random_:
        for (long i = 0; i < w.size(); ++i)
          w[i] = succ.radius[i] * (2.0 * rng.uniform() - 1.0);
        break;
      case DisturbancePolicy::worst_sampled:
        // push each coordinate away from the state-set center
        for (long i = 0; i < w.size(); ++i)
          w[i] = succ.nominal[i] >= system.state_set.center()[i] ? succ.radius[i]
                                                                 : -succ.radius[i];
        break;
    }
    const Vec next = succ.nominal + w;
    result.trajectory.inputs.push_back(u);
    result.trajectory.costs.push_back(cost ? cost(x, u) : 0.0);
    result.trajectory.states.push_back(next);
    x = next;
  }
}

bool validate_trajectory(const TransitionControlSystem& system, const Trajectory& t, double tol) {
  if (t.states.size() != t.inputs.size() + 1) return false;
  if (t.costs.size() != t.inputs.size()) return false;
  for (std::size_t k = 0; k < t.inputs.size(); ++k) {
    if (!system.input_available(t.states[k], t.inputs[k])) return false;
    const SuccessorBox succ = system.successor_map(t.states[k], t.inputs[k]);
    const Vec gap = (t.states[k + 1] - succ.nominal).cwiseAbs();
    if ((gap.array() > succ.radius.array() + tol).any()) return false;
    if (t.costs[k] < 0.0) return false;
  }
  return true;
}

void validate_growth_bound(const SampledSystem& sys, const Hyperrectangle& state_box,
                           const Hyperrectangle& input_box, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int n = state_box.dim();
  const Vec zero = Vec::Zero(n);
  for (int s = 0; s < samples; ++s) {
    const Vec u = input_box.sample(rng);
    const Vec at_zero = sys.error_bound_map(zero, u);
    if (at_zero.cwiseAbs().maxCoeff() > 1e-12)
      throw ConstructionError("growth bound: err(0,u) != 0");
    Vec h1(n), h2(n);
    for (int i = 0; i < n; ++i) {
      const double a = rng.uniform() * state_box.half()[i];
      const double b = rng.uniform() * state_box.half()[i];
      h1[i] = std::min(a, b);
      h2[i] = std::max(a, b);
    }
    const Vec e1 = sys.error_bound_map(h1, u);
    const Vec e2 = sys.error_bound_map(h2, u);
    if (((e2 - e1).array() < -1e-12).any())
      throw ConstructionError("growth bound: not monotone in h on sampled pair");
  }
}

}  // namespace symcon
