#include "symcon/symbolic.hpp"

#include <algorithm>
#include <cmath>

namespace symcon {

namespace {

bool fwd_less(const Transition& a, const Transition& b) {
  if (a.src != b.src) return a.src < b.src;
  if (a.input != b.input) return a.input < b.input;
  return a.dst < b.dst;
}

bool bwd_less(const Transition& a, const Transition& b) {
  if (a.dst != b.dst) return a.dst < b.dst;
  if (a.input != b.input) return a.input < b.input;
  return a.src < b.src;
}

std::vector<std::uint64_t> offsets_by(const std::vector<Transition>& ts, std::uint32_t n,
                                      StateId Transition::*key) {
  std::vector<std::uint64_t> off(n + 1, 0);
  for (const auto& t : ts) ++off[t.*key + 1];
  for (std::uint32_t i = 0; i < n; ++i) off[i + 1] += off[i];
  return off;
}

}  // namespace

SymbolicModel SymbolicModel::build(std::uint32_t num_states, std::uint32_t num_inputs,
                                   std::vector<Region> cells, std::vector<ModelInput> inputs,
                                   std::vector<Transition> transitions) {
  if (cells.size() != num_states)
    throw ConstructionError("symbolic model: one cell per state required");
  if (inputs.size() != num_inputs)
    throw ConstructionError("symbolic model: one descriptor per input required");
  for (const auto& t : transitions) {
    if (t.src >= num_states || t.dst >= num_states || t.input >= num_inputs)
      throw ConstructionError("symbolic model: transition (" + std::to_string(t.src) + "," +
                              std::to_string(t.input) + "," + std::to_string(t.dst) +
                              ") references an out-of-range id");
  }
  SymbolicModel m;
  m.num_states_ = num_states;
  m.num_inputs_ = num_inputs;
  m.cells_ = std::move(cells);
  m.inputs_ = std::move(inputs);
  std::sort(transitions.begin(), transitions.end(), fwd_less);
  transitions.erase(std::unique(transitions.begin(), transitions.end()), transitions.end());
  m.bwd_ = transitions;
  m.fwd_ = std::move(transitions);
  std::sort(m.bwd_.begin(), m.bwd_.end(), bwd_less);
  m.fwd_off_ = offsets_by(m.fwd_, num_states, &Transition::src);
  m.bwd_off_ = offsets_by(m.bwd_, num_states, &Transition::dst);
  return m;
}

std::span<const Transition> SymbolicModel::outgoing(StateId s) const {
  if (s >= num_states_) throw ConstructionError("symbolic model: state id out of range");
  return {fwd_.data() + fwd_off_[s], fwd_.data() + fwd_off_[s + 1]};
}

std::span<const Transition> SymbolicModel::successors(StateId s, InputId u) const {
  const auto span = outgoing(s);
  const auto lo = std::lower_bound(span.begin(), span.end(), u,
                                   [](const Transition& t, InputId v) { return t.input < v; });
  const auto hi = std::upper_bound(span.begin(), span.end(), u,
                                   [](InputId v, const Transition& t) { return v < t.input; });
  return {lo, hi};
}

std::span<const Transition> SymbolicModel::incoming(StateId s) const {
  if (s >= num_states_) throw ConstructionError("symbolic model: state id out of range");
  return {bwd_.data() + bwd_off_[s], bwd_.data() + bwd_off_[s + 1]};
}

std::vector<InputId> SymbolicModel::available_inputs(StateId s) const {
  std::vector<InputId> out;
  for (const auto& t : outgoing(s))
    if (out.empty() || out.back() != t.input) out.push_back(t.input);
  return out;
}

bool SymbolicModel::has_transition(StateId s, InputId u, StateId d) const {
  const auto span = successors(s, u);
  return std::binary_search(span.begin(), span.end(), Transition{s, u, d}, fwd_less);
}

SymbolicModel SymbolicModel::with_transitions_added(std::vector<Transition> batch) const {
  batch.insert(batch.end(), fwd_.begin(), fwd_.end());
  return build(num_states_, num_inputs_, cells_, inputs_, std::move(batch));
}

std::uint64_t AbstractController::domain_size() const {
  std::uint64_t n = 0;
  for (const auto& row : table)
    if (!row.empty()) ++n;
  return n;
}

Quantizer make_grid_quantizer(const UniformGrid& grid) {
  Quantizer q;
  q.kind = Quantizer::Kind::grid_partition;
  q.resolver = [grid](const Vec& x) -> std::vector<StateId> {
    const auto k = grid.point_to_cell(x);
    if (!k) return {};
    return {static_cast<StateId>(grid.flat_index(*k))};
  };
  return q;
}

Quantizer make_cover_quantizer(std::vector<Region> cells) {
  Quantizer q;
  q.kind = Quantizer::Kind::ellipsoid_cover;
  auto shared_cells = std::make_shared<const std::vector<Region>>(std::move(cells));
  q.resolver = [shared_cells](const Vec& x) {
    std::vector<StateId> ids;
    for (std::size_t i = 0; i < shared_cells->size(); ++i)
      if (region_contains_point((*shared_cells)[i], x)) ids.push_back(static_cast<StateId>(i));
    return ids;
  };
  return q;
}

namespace {

void record(RelationReport& report, RelationViolation v) {
  ++report.violation_count;
  if (report.witnesses.size() < 64) report.witnesses.push_back(std::move(v));
}

/* concrete successor samples: nominal, the disturbance-box corners, and two
 * random draws (when the disturbance is non-trivial) */
std::vector<Vec> successor_samples(const SuccessorBox& succ, Rng& rng) {
  std::vector<Vec> out{succ.nominal};
  if (succ.radius.size() == 0 || succ.radius.maxCoeff() <= 0.0) return out;
  const Hyperrectangle wbox(Vec::Zero(succ.radius.size()), succ.radius);
  for (const Vec& c : wbox.corners()) out.push_back(succ.nominal + c);
  for (int i = 0; i < 2; ++i) out.push_back(succ.nominal + wbox.sample(rng));
  return out;
}

std::vector<StateId> active_states(const SymbolicModel& model) {
  std::vector<StateId> out;
  for (StateId s = 0; s < model.num_states(); ++s)
    if (!model.outgoing(s).empty()) out.push_back(s);
  return out;
}

}  // namespace

RelationReport check_frr(const TransitionControlSystem& concrete, const SymbolicModel& model,
                         const Quantizer& quantizer, std::uint64_t samples, std::uint64_t seed) {
  if (quantizer.kind != Quantizer::Kind::grid_partition)
    throw ConfigError("check_frr: a strict partition quantizer is required");
  RelationReport report;
  report.samples_requested = samples;
  if (samples == 0) {
    report.vacuous = true;
    return report;
  }
  const auto active = active_states(model);
  if (active.empty()) {
    report.vacuous = true;
    return report;
  }
  Rng rng(seed);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const StateId s = active[i % active.size()];
    const Region& cell = model.cell(s);
    const bool first_visit = i < active.size();
    const Vec x1 = first_visit ? region_center(cell) : region_sample(cell, rng);
    ++report.samples_run;
    for (const InputId u : model.available_inputs(s)) {
      const Vec* uvec = std::get_if<Vec>(&model.input(u));
      if (!uvec) throw ConfigError("check_frr: abstract inputs must be concrete vectors");
      // condition (i): the abstract input is available at x1
      if (!concrete.input_available(x1, *uvec)) {
        record(report, {s, u, x1, Vec(), "input not available at concrete state"});
        continue;
      }
      const SuccessorBox succ = concrete.successor_map(x1, *uvec);
      for (const Vec& x1p : successor_samples(succ, rng)) {
        ++report.checks;
        const auto ids = quantizer.resolver(x1p);
        if (ids.empty()) {
          record(report, {s, u, x1, x1p, "successor escapes the covered region"});
          continue;
        }
        for (const StateId x2p : ids)
          if (!model.has_transition(s, u, x2p))
            record(report, {s, u, x1, x1p,
                            "successor cell " + std::to_string(x2p) + " not declared"});
      }
    }
  }
  return report;
}

RelationReport check_mcr(const TransitionControlSystem& concrete, const SymbolicModel& model,
                         const Quantizer& quantizer, const Interface& interface,
                         std::uint64_t samples, std::uint64_t seed) {
  if (!interface) throw ConfigError("check_mcr: interface required");
  RelationReport report;
  report.samples_requested = samples;
  if (samples == 0) {
    report.vacuous = true;
    return report;
  }
  const auto active = active_states(model);
  if (active.empty()) {
    report.vacuous = true;
    return report;
  }
  const bool cover = quantizer.kind == Quantizer::Kind::ellipsoid_cover;
  Rng rng(seed);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const StateId s = active[i % active.size()];
    const Region& cell = model.cell(s);
    const bool first_visit = i < active.size();
    const Vec x1 = first_visit ? region_center(cell) : region_sample(cell, rng);
    ++report.samples_run;
    for (const InputId u2 : model.available_inputs(s)) {
      const auto u1s = interface(x1, s, u2);
      if (u1s.empty()) {
        ++report.interface_violation_count;
        record(report, {s, u2, x1, Vec(), "interface returned no concrete input"});
        continue;
      }
      const auto succ_span = model.successors(s, u2);
      for (const Vec& u1 : u1s) {
        if (!concrete.input_available(x1, u1)) {
          ++report.interface_violation_count;
          record(report, {s, u2, x1, Vec(), "interface input outside the admissible set"});
          continue;
        }
        const SuccessorBox succ = concrete.successor_map(x1, u1);
        for (const Vec& x1p : successor_samples(succ, rng)) {
          ++report.checks;
          const auto ids = quantizer.resolver(x1p);
          if (cover) {
            // tracking: some declared successor's region contains x1p
            bool tracked = false;
            for (const auto& t : succ_span)
              if (std::binary_search(ids.begin(), ids.end(), t.dst)) {
                tracked = true;
                break;
              }
            if (!tracked)
              record(report, {s, u2, x1, x1p, "successor not inside any declared successor cell"});
          } else {
            if (ids.empty()) {
              record(report, {s, u2, x1, x1p, "successor escapes the covered region"});
              continue;
            }
            for (const StateId x2p : ids) {
              const bool declared =
                  std::any_of(succ_span.begin(), succ_span.end(),
                              [&](const Transition& t) { return t.dst == x2p; });
              if (!declared)
                record(report, {s, u2, x1, x1p,
                                "successor cell " + std::to_string(x2p) + " not declared"});
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace symcon
