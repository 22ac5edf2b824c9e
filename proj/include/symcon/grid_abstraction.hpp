#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "symcon/symbolic.hpp"
#include "symcon/system.hpp"

namespace symcon {

struct GridAbstractionParams {
  UniformGrid state_grid;
  UniformGrid input_grid;
  std::vector<Region> obstacles;
  /* incremental-stability prior: images stay local, so the builder may emit
   * transitions in one buffered pass (one dynamics evaluation per pair)
   * instead of the memory-lean count-then-fill two-pass build */
  bool stability_prior = false;
  int threads = 1;
  std::uint64_t cells_cap = std::uint64_t{1} << 26;
  std::function<void(std::uint64_t, std::uint64_t)> progress;  // (cells done, total)
};

struct AbstractionStats {
  std::uint64_t cells = 0;
  std::uint64_t inputs = 0;
  std::uint64_t transitions = 0;
  std::uint64_t excluded_cells = 0;
  double build_seconds = 0.0;
  bool growth_heuristic = false;
  bool empty_warning = false;  // no available input anywhere
};

struct GridAbstraction {
  SymbolicModel model;
  Quantizer quantizer;
  std::vector<std::uint8_t> excluded;  // 1 = obstacle cell, removed from the domain
  AbstractionStats stats;
};

struct SizeEstimate {
  std::uint64_t cells = 0;
  std::uint64_t cell_input_pairs = 0;
  bool saturated = false;
};

SizeEstimate estimate_size(const GridAbstractionParams& params);

/* Uniform-grid abstraction satisfying a feedback refinement relation by
 * construction: for every non-obstacle cell and input-grid point, the cell
 * image under h' = |J| h + err(h,u) + W (plus a cell_half*1e-10 rounding
 * guard) either stays inside the covered region and away from obstacle
 * cells — contributing transitions to every intersecting cell — or the
 * input is removed from the cell's availability. */
GridAbstraction build_grid_abstraction(const SampledSystem& sys,
                                       const GridAbstractionParams& params);

}  // namespace symcon
