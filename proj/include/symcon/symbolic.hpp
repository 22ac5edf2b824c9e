#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "symcon/geometry.hpp"
#include "symcon/system.hpp"

namespace symcon {

using StateId = std::uint32_t;
using InputId = std::uint32_t;

struct Transition {
  StateId src;
  InputId input;
  StateId dst;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/* abstract input: a concrete input vector (grid abstractions) or a local
 * affine law (ellipsoid abstractions) */
using ModelInput = std::variant<Vec, AffineLaw>;

/* Finite transition system with indexed cells and inputs. Transitions are
 * stored twice in sorted flat form: forward (src, input, dst) and backward
 * (dst, input, src), each with per-state offset tables, so successor and
 * predecessor scans are contiguous. The stored form is independent of
 * insertion order. */
class SymbolicModel {
public:
  static SymbolicModel build(std::uint32_t num_states, std::uint32_t num_inputs,
                             std::vector<Region> cells, std::vector<ModelInput> inputs,
                             std::vector<Transition> transitions);

  std::uint32_t num_states() const { return num_states_; }
  std::uint32_t num_inputs() const { return num_inputs_; }
  std::uint64_t num_transitions() const { return fwd_.size(); }

  const Region& cell(StateId s) const { return cells_.at(s); }
  const ModelInput& input(InputId u) const { return inputs_.at(u); }
  const std::vector<Region>& cells() const { return cells_; }
  const std::vector<ModelInput>& inputs() const { return inputs_; }

  std::span<const Transition> transitions() const { return fwd_; }
  std::span<const Transition> outgoing(StateId s) const;
  std::span<const Transition> successors(StateId s, InputId u) const;
  // backward entries are stored as (dst, input, src) in the src field order:
  // entry.src is the predecessor, entry.dst == s
  std::span<const Transition> incoming(StateId s) const;
  std::vector<InputId> available_inputs(StateId s) const;
  std::uint64_t out_degree(StateId s, InputId u) const { return successors(s, u).size(); }
  bool has_transition(StateId s, InputId u, StateId d) const;

  SymbolicModel with_transitions_added(std::vector<Transition> batch) const;

private:
  SymbolicModel() = default;
  std::uint32_t num_states_ = 0, num_inputs_ = 0;
  std::vector<Transition> fwd_, bwd_;
  std::vector<std::uint64_t> fwd_off_, bwd_off_;  // per-state offsets, size num_states+1
  std::vector<Region> cells_;
  std::vector<ModelInput> inputs_;
};

/* Relation R between concrete states and abstract cells. */
struct Quantizer {
  enum class Kind { grid_partition, ellipsoid_cover };
  Kind kind = Kind::grid_partition;
  // R(x): matching cell ids, ascending; empty outside the covered region
  std::function<std::vector<StateId>(const Vec&)> resolver;
};

Quantizer make_grid_quantizer(const UniformGrid& grid);
Quantizer make_cover_quantizer(std::vector<Region> cells);

/* abstract controller: per-state nonempty input set on its domain */
struct AbstractController {
  std::vector<std::vector<InputId>> table;  // indexed by state; empty = outside domain
  bool in_domain(StateId s) const { return s < table.size() && !table[s].empty(); }
  std::uint64_t domain_size() const;
};

using Interface = std::function<std::vector<Vec>(const Vec&, StateId, InputId)>;

struct RelationViolation {
  StateId abstract_state = 0;
  InputId input = 0;
  Vec concrete_state;
  Vec concrete_successor;
  std::string reason;
};

struct RelationReport {
  std::uint64_t samples_requested = 0;
  std::uint64_t samples_run = 0;
  std::uint64_t checks = 0;
  bool vacuous = false;
  std::uint64_t violation_count = 0;
  std::uint64_t interface_violation_count = 0;
  std::vector<RelationViolation> witnesses;  // capped at 64
  bool clean() const { return violation_count == 0 && interface_violation_count == 0; }
};

/* Monte-Carlo certifier of the feedback-refinement conditions: samples are
 * stratified over cells (round-robin; the first visit of a cell uses its
 * exact center so nominal-image transitions are always exercised). For every
 * sampled x1 and every abstract input available at its cell, checks input
 * availability and that the cell of every sampled concrete successor is a
 * declared abstract successor. Requires a partition quantizer and vector
 * inputs. */
RelationReport check_frr(const TransitionControlSystem& concrete, const SymbolicModel& model,
                         const Quantizer& quantizer, std::uint64_t samples, std::uint64_t seed);

/* Monte-Carlo certifier of the concretization relation through an interface.
 * Partition quantizers use the subset condition (every cell of a concrete
 * successor is a declared successor); cover quantizers use the tracking
 * condition (some declared successor's region contains the concrete
 * successor), which is what concretization correctness requires when cells
 * overlap. */
RelationReport check_mcr(const TransitionControlSystem& concrete, const SymbolicModel& model,
                         const Quantizer& quantizer, const Interface& interface,
                         std::uint64_t samples, std::uint64_t seed);

}  // namespace symcon
