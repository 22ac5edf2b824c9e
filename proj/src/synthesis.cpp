#include "symcon/synthesis.hpp"

#include <algorithm>
#include <queue>

namespace symcon {

namespace {

/* (state,input) pairs realized in the model, in forward order */
struct PairTable {
  struct Pair {
    StateId s;
    InputId u;
    std::uint32_t degree;
  };
  std::vector<Pair> pairs;
  std::vector<std::uint64_t> state_begin;  // per state, offsets into pairs

  explicit PairTable(const SymbolicModel& m) {
    state_begin.assign(m.num_states() + 1, 0);
    for (StateId s = 0; s < m.num_states(); ++s) {
      const auto span = m.outgoing(s);
      for (std::size_t i = 0; i < span.size();) {
        std::size_t j = i;
        while (j < span.size() && span[j].input == span[i].input) ++j;
        pairs.push_back({s, span[i].input, static_cast<std::uint32_t>(j - i)});
        i = j;
      }
      state_begin[s + 1] = pairs.size();
    }
  }

  // pair index of (s,u); pairs of a state are sorted by input
  std::size_t find(StateId s, InputId u) const {
    auto lo = pairs.begin() + static_cast<long>(state_begin[s]);
    auto hi = pairs.begin() + static_cast<long>(state_begin[s + 1]);
    auto it = std::lower_bound(lo, hi, u, [](const Pair& p, InputId v) { return p.u < v; });
    return static_cast<std::size_t>(it - pairs.begin());
  }
};

double worst_cost_over_region(const Region& region, const Vec& u, const QuadraticCost& cost);

}  // namespace

AbstractProblem abstract_problem(const ControlProblem& concrete,
                                 std::shared_ptr<const SymbolicModel> model,
                                 const Quantizer& quantizer,
                                 const std::vector<std::uint8_t>* excluded) {
  (void)quantizer;
  AbstractProblem ap;
  ap.model = model;
  ap.kind = concrete.kind;
  ap.horizon = concrete.time;
  const auto is_excluded = [&](StateId s) {
    return excluded && s < excluded->size() && (*excluded)[s] != 0;
  };

  const Region& initial = concrete.initial();
  const Region* goal = nullptr;
  if (concrete.kind == ControlProblem::Kind::reach_avoid)
    goal = &concrete.target();
  else
    goal = &concrete.safe();

  for (StateId s = 0; s < model->num_states(); ++s) {
    if (is_excluded(s)) continue;
    const Region& cell = model->cell(s);
    if (disjoint(cell, initial) != Disjointness::disjoint) ap.initial_ids.push_back(s);
    if (region_contains_region(*goal, cell)) ap.goal_ids.push_back(s);
  }
  if (ap.goal_ids.empty()) {
    const char* what = concrete.kind == ControlProblem::Kind::reach_avoid
                           ? "abstract problem: no cell lies inside the target set; refine the grid"
                           : "abstract problem: no cell lies inside the safe set; refine the grid";
    throw ConfigError(what);
  }

  const QuadraticCost cost = concrete.cost;
  auto model_ptr = model;
  ap.stage_cost = [model_ptr, cost](StateId s, InputId u) {
    const ModelInput& mi = model_ptr->input(u);
    const Vec* uvec = std::get_if<Vec>(&mi);
    if (!uvec) throw ConfigError("stage cost: abstract input is not a concrete vector");
    return worst_cost_over_region(model_ptr->cell(s), *uvec, cost);
  };
  return ap;
}

namespace {

double worst_cost_over_region(const Region& region, const Vec& u, const QuadraticCost& cost) {
  const double input_part = u.dot(cost.input_weights * u) + cost.offset;
  if (const auto* box = std::get_if<Hyperrectangle>(&region)) {
    // convex in x: the maximum sits on a corner
    double worst = 0.0;
    for (const Vec& c : box->corners())
      worst = std::max(worst, c.dot(cost.state_weights * c));
    return worst + input_part;
  }
  const auto& ell = std::get<Ellipsoid>(region);
  const Vec zero = Vec::Zero(ell.dim());
  return max_quadratic_over_ellipsoid(cost.state_weights, zero, 0.0, ell) + input_part;
}

ReachResult solve_reach_dijkstra(const AbstractProblem& problem) {
  const SymbolicModel& m = *problem.model;
  const std::uint32_t n = m.num_states();
  PairTable pt(m);

  std::vector<double> value(n, kInfValue);
  std::vector<std::uint8_t> finalized(n, 0);
  std::vector<std::uint8_t> is_target(n, 0);
  std::vector<std::uint32_t> remaining(pt.pairs.size());
  std::vector<double> worst_succ(pt.pairs.size(), 0.0);
  std::vector<double> stage(pt.pairs.size());
  for (std::size_t i = 0; i < pt.pairs.size(); ++i) {
    remaining[i] = pt.pairs[i].degree;
    stage[i] = problem.stage_cost(pt.pairs[i].s, pt.pairs[i].u);
    if (stage[i] < 0.0) throw ConfigError("reach-avoid: negative stage cost");
  }

  using Entry = std::pair<double, StateId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (StateId t : problem.goal_ids) {
    is_target[t] = 1;
    value[t] = 0.0;
    heap.push({0.0, t});
  }

  while (!heap.empty()) {
    const auto [v, x] = heap.top();
    heap.pop();
    if (finalized[x] || v > value[x]) continue;
    finalized[x] = 1;
    for (const Transition& e : m.incoming(x)) {
      const StateId y = e.src;
      if (finalized[y] || is_target[y]) continue;
      const std::size_t pid = pt.find(y, e.input);
      worst_succ[pid] = std::max(worst_succ[pid], v);
      if (--remaining[pid] == 0) {
        const double q = stage[pid] + worst_succ[pid];
        if (q < value[y]) {
          value[y] = q;
          heap.push({q, y});
        }
      }
    }
  }

  ReachResult result;
  result.value.values = std::move(value);
  result.value.target_ids = problem.goal_ids;
  result.controller.table.assign(n, {});
  for (std::size_t pid = 0; pid < pt.pairs.size(); ++pid) {
    const StateId s = pt.pairs[pid].s;
    if (is_target[s] || result.value.values[s] == kInfValue) continue;
    if (remaining[pid] != 0) continue;  // some successor never won
    const double q = stage[pid] + worst_succ[pid];
    if (q <= result.value.values[s] + 1e-9) result.controller.table[s].push_back(pt.pairs[pid].u);
  }
  return result;
}

ReachResult solve_reach_bounded(const AbstractProblem& problem, std::uint64_t horizon) {
  const SymbolicModel& m = *problem.model;
  const std::uint32_t n = m.num_states();
  PairTable pt(m);
  std::vector<double> stage(pt.pairs.size());
  for (std::size_t i = 0; i < pt.pairs.size(); ++i)
    stage[i] = problem.stage_cost(pt.pairs[i].s, pt.pairs[i].u);

  std::vector<std::uint8_t> is_target(n, 0);
  for (StateId t : problem.goal_ids) is_target[t] = 1;
  std::vector<double> value(n, kInfValue);
  for (StateId t : problem.goal_ids) value[t] = 0.0;

  bool converged = false;
  for (std::uint64_t sweep = 0; sweep < horizon && !converged; ++sweep) {
    converged = true;
    std::vector<double> next = value;
    for (std::size_t pid = 0; pid < pt.pairs.size(); ++pid) {
      const StateId s = pt.pairs[pid].s;
      if (is_target[s]) continue;
      double worst = 0.0;
      for (const Transition& e : m.successors(s, pt.pairs[pid].u))
        worst = std::max(worst, value[e.dst]);
      const double q = stage[pid] + worst;
      if (q < next[s]) next[s] = q;
    }
    if (next != value) converged = false;
    value = std::move(next);
  }

  ReachResult result;
  result.converged = converged;
  result.value.values = value;
  result.value.target_ids = problem.goal_ids;
  result.controller.table.assign(n, {});
  for (std::size_t pid = 0; pid < pt.pairs.size(); ++pid) {
    const StateId s = pt.pairs[pid].s;
    if (is_target[s] || value[s] == kInfValue) continue;
    double worst = 0.0;
    bool all_finite = true;
    for (const Transition& e : m.successors(s, pt.pairs[pid].u)) {
      if (value[e.dst] == kInfValue) {
        all_finite = false;
        break;
      }
      worst = std::max(worst, value[e.dst]);
    }
    if (all_finite && stage[pid] + worst <= value[s] + 1e-9)
      result.controller.table[s].push_back(pt.pairs[pid].u);
  }
  for (StateId s = 0; s < n; ++s)
    if (!is_target[s] && value[s] == kInfValue) ++result.not_yet_winning;
  return result;
}

}  // namespace

ReachResult solve_reach_avoid(const AbstractProblem& problem) {
  if (problem.kind != ControlProblem::Kind::reach_avoid)
    throw ConfigError("solve_reach_avoid: problem kind mismatch");
  if (problem.horizon) return solve_reach_bounded(problem, *problem.horizon);
  return solve_reach_dijkstra(problem);
}

SafetyResult solve_safety(const AbstractProblem& problem) {
  if (problem.kind != ControlProblem::Kind::safety)
    throw ConfigError("solve_safety: problem kind mismatch");
  const SymbolicModel& m = *problem.model;
  const std::uint32_t n = m.num_states();
  PairTable pt(m);

  std::vector<std::uint8_t> safe(n, 0);
  for (StateId s : problem.goal_ids) safe[s] = 1;

  std::vector<std::uint32_t> bad(pt.pairs.size(), 0);  // successors outside the candidate set
  std::vector<std::uint32_t> good_inputs(n, 0);
  std::vector<StateId> worklist;

  for (std::size_t pid = 0; pid < pt.pairs.size(); ++pid) {
    const StateId s = pt.pairs[pid].s;
    if (!safe[s]) continue;
    std::uint32_t outside = 0;
    for (const Transition& e : m.successors(s, pt.pairs[pid].u))
      if (!safe[e.dst]) ++outside;
    bad[pid] = outside;
    if (outside == 0) ++good_inputs[s];
  }
  for (StateId s = 0; s < n; ++s)
    if (safe[s] && good_inputs[s] == 0) worklist.push_back(s);

  while (!worklist.empty()) {
    const StateId x = worklist.back();
    worklist.pop_back();
    if (!safe[x]) continue;
    safe[x] = 0;
    for (const Transition& e : m.incoming(x)) {
      const StateId y = e.src;
      if (!safe[y]) continue;
      const std::size_t pid = pt.find(y, e.input);
      if (bad[pid]++ == 0)
        if (--good_inputs[y] == 0) worklist.push_back(y);
    }
  }

  SafetyResult result;
  result.controller.table.assign(n, {});
  for (std::size_t pid = 0; pid < pt.pairs.size(); ++pid) {
    const StateId s = pt.pairs[pid].s;
    if (safe[s] && bad[pid] == 0) result.controller.table[s].push_back(pt.pairs[pid].u);
  }
  for (StateId s = 0; s < n; ++s)
    if (safe[s]) result.invariant_set.push_back(s);
  result.feasible = !result.invariant_set.empty();
  return result;
}

StaticController concretize(const AbstractController& controller, const Quantizer& quantizer,
                            std::shared_ptr<const SymbolicModel> model,
                            std::optional<Interface> interface,
                            std::shared_ptr<const std::vector<double>> cell_order) {
  if (quantizer.kind == Quantizer::Kind::ellipsoid_cover && !interface)
    throw ConfigError("concretize: cover quantizers require an interface");
  auto ctrl = std::make_shared<const AbstractController>(controller);
  auto resolver = quantizer.resolver;

  auto domain = [ctrl, resolver](const Vec& x) {
    for (StateId id : resolver(x))
      if (ctrl->in_domain(id)) return true;
    return false;
  };

  if (!interface) {
    auto eval = [ctrl, resolver, model](const Vec& x) {
      std::vector<Vec> out;
      for (StateId id : resolver(x)) {
        if (!ctrl->in_domain(id)) continue;
        for (InputId u : ctrl->table[id]) {
          const Vec* v = std::get_if<Vec>(&model->input(u));
          if (!v) throw ConfigError("concretize: abstract input is not a concrete vector");
          out.push_back(*v);
        }
      }
      sort_lexicographic(out);
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    };
    return StaticController(eval, domain);
  }

  Interface iface = *interface;
  auto eval = [ctrl, resolver, iface, cell_order](const Vec& x) {
    std::vector<StateId> ids = resolver(x);
    std::erase_if(ids, [&](StateId id) { return !ctrl->in_domain(id); });
    std::sort(ids.begin(), ids.end(), [&](StateId a, StateId b) {
      const double va = cell_order && a < cell_order->size() ? (*cell_order)[a] : 0.0;
      const double vb = cell_order && b < cell_order->size() ? (*cell_order)[b] : 0.0;
      if (va != vb) return va < vb;
      return a < b;
    });
    std::vector<Vec> out;
    for (StateId id : ids)
      for (InputId u : ctrl->table[id])
        for (Vec& v : iface(x, id, u)) out.push_back(std::move(v));
    return out;
  };
  return StaticController(eval, domain);
}

double bellman_residual(const AbstractProblem& problem, const ValueFunction& value) {
  const SymbolicModel& m = *problem.model;
  PairTable pt(m);
  std::vector<std::uint8_t> is_target(m.num_states(), 0);
  for (StateId t : value.target_ids) is_target[t] = 1;
  double residual = 0.0;
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (value.at(s) == kInfValue) continue;
    if (is_target[s]) {
      residual = std::max(residual, std::abs(value.at(s)));
      continue;
    }
    double best = kInfValue;
    for (std::size_t pid = pt.state_begin[s]; pid < pt.state_begin[s + 1]; ++pid) {
      double worst = 0.0;
      bool finite = true;
      for (const Transition& e : m.successors(s, pt.pairs[pid].u)) {
        if (value.at(e.dst) == kInfValue) {
          finite = false;
          break;
        }
        worst = std::max(worst, value.at(e.dst));
      }
      if (finite) best = std::min(best, problem.stage_cost(s, pt.pairs[pid].u) + worst);
    }
    if (best == kInfValue) return kInfValue;  // finite value with no finite backup
    residual = std::max(residual, std::abs(best - value.at(s)));
  }
  return residual;
}

double controller_value_gap(const AbstractProblem& problem, const AbstractController& controller,
                            const ValueFunction& value) {
  const SymbolicModel& m = *problem.model;
  std::vector<std::uint8_t> is_target(m.num_states(), 0);
  for (StateId t : value.target_ids) is_target[t] = 1;
  double gap = 0.0;
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (is_target[s] || !controller.in_domain(s)) continue;
    for (InputId u : controller.table[s]) {
      double worst = 0.0;
      for (const Transition& e : m.successors(s, u)) worst = std::max(worst, value.at(e.dst));
      gap = std::max(gap, std::abs(problem.stage_cost(s, u) + worst - value.at(s)));
    }
  }
  return gap;
}

}  // namespace symcon
