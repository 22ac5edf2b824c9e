#include "symcon/grid_abstraction.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace symcon {

namespace {

constexpr std::size_t kChunk = 256;

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, bool* sat) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    *sat = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

struct BuildContext {
  const SampledSystem* sys;
  const UniformGrid* grid;
  std::vector<Vec> input_vectors;
  std::vector<std::shared_ptr<const BatchPropagator::Prepared>> prepared;  // per input
  std::vector<Vec> expansion;  // err(h,u) + noise + rounding guard, per input
  const std::vector<std::uint8_t>* excluded;
  int nx = 0;
  std::size_t num_cells = 0;
};

/* successor index interval of an image box; false when the box leaves the
 * covered region or touches an excluded cell */
bool enumerate_successors(const BuildContext& ctx, const Vec& center, const Vec& half,
                          std::vector<long>& lo, std::vector<long>& hi) {
  const UniformGrid& g = *ctx.grid;
  const Vec glo = g.bounds().lower(), ghi = g.bounds().upper();
  for (int d = 0; d < ctx.nx; ++d) {
    const double left = center[d] - half[d];
    const double right = center[d] + half[d];
    if (left < glo[d] || right > ghi[d]) return false;
    const double width = 2.0 * g.cell_half()[d];
    long a = static_cast<long>(std::floor((left - glo[d]) / width));
    long b = static_cast<long>(std::floor((right - glo[d]) / width));
    const auto& range = g.index_ranges()[d];
    a = std::max(a + range.first, range.first);
    b = std::min(b + range.first, range.second);
    if (a > b) return false;
    lo[d] = a;
    hi[d] = b;
  }
  return true;
}

template <class Emit>
bool visit_pair(const BuildContext& ctx, std::size_t cell, std::size_t input, const Vec& center_img,
                const Mat& jac, Emit&& emit) {
  if (!center_img.allFinite() || !jac.allFinite())
    throw NumericsError("grid abstraction: non-finite image at cell " + std::to_string(cell));
  const Vec half = jac.cwiseAbs() * ctx.grid->cell_half() + ctx.expansion[input];
  std::vector<long> lo(ctx.nx), hi(ctx.nx), k(ctx.nx);
  if (!enumerate_successors(ctx, center_img, half, lo, hi)) return false;
  // reject inputs whose image touches an obstacle cell, then emit
  k = lo;
  while (true) {
    const std::size_t dst = ctx.grid->flat_index(k);
    if ((*ctx.excluded)[dst]) return false;
    int d = ctx.nx - 1;
    while (d >= 0 && k[d] == hi[d]) {
      k[d] = lo[d];
      --d;
    }
    if (d < 0) break;
    ++k[d];
  }
  k = lo;
  while (true) {
    emit(static_cast<StateId>(cell), static_cast<InputId>(input),
         static_cast<StateId>(ctx.grid->flat_index(k)));
    int d = ctx.nx - 1;
    while (d >= 0 && k[d] == hi[d]) {
      k[d] = lo[d];
      --d;
    }
    if (d < 0) break;
    ++k[d];
  }
  return true;
}

/* propagate one chunk of cell centers for one input; uses the batch kernel
 * when the system carries one, the per-point linearized map otherwise */
void propagate_chunk(const BuildContext& ctx, std::size_t first, std::size_t count,
                     std::size_t input, std::vector<double>& xs, std::vector<double>& ox,
                     std::vector<double>& oj, std::vector<std::uint8_t>& skip) {
  const int n = ctx.nx;
  skip.assign(count, 0);
  for (std::size_t l = 0; l < count; ++l)
    if ((*ctx.excluded)[first + l]) skip[l] = 1;
  if (ctx.sys->batch) {
    xs.resize(static_cast<std::size_t>(n) * count);
    ox.resize(static_cast<std::size_t>(n) * count);
    oj.resize(static_cast<std::size_t>(n) * n * count);
    for (std::size_t l = 0; l < count; ++l) {
      const Vec c = ctx.grid->cell_center(ctx.grid->unflatten(first + l));
      for (int d = 0; d < n; ++d) xs[static_cast<std::size_t>(d) * count + l] = c[d];
    }
    ctx.sys->batch->run(*ctx.prepared[input], xs.data(), count, true, ox.data(), oj.data());
  } else {
    ox.resize(static_cast<std::size_t>(n) * count);
    oj.resize(static_cast<std::size_t>(n) * n * count);
    for (std::size_t l = 0; l < count; ++l) {
      if (skip[l]) continue;
      const Vec c = ctx.grid->cell_center(ctx.grid->unflatten(first + l));
      auto [img, jac] = ctx.sys->linearized_map(c, ctx.input_vectors[input]);
      for (int d = 0; d < n; ++d) ox[static_cast<std::size_t>(d) * count + l] = img[d];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          oj[(static_cast<std::size_t>(i) * n + j) * count + l] = jac(i, j);
    }
  }
}

void extract_lane(const BuildContext& ctx, const std::vector<double>& ox,
                  const std::vector<double>& oj, std::size_t count, std::size_t lane, Vec& center,
                  Mat& jac) {
  const int n = ctx.nx;
  for (int d = 0; d < n; ++d) center[d] = ox[static_cast<std::size_t>(d) * count + lane];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jac(i, j) = oj[(static_cast<std::size_t>(i) * n + j) * count + lane];
}

}  // namespace

SizeEstimate estimate_size(const GridAbstractionParams& params) {
  SizeEstimate e;
  bool sat = false;
  e.cells = 1;
  for (const auto& [lo, hi] : params.state_grid.index_ranges())
    e.cells = sat_mul(e.cells, static_cast<std::uint64_t>(hi - lo + 1), &sat);
  std::uint64_t inputs = 1;
  for (const auto& [lo, hi] : params.input_grid.index_ranges())
    inputs = sat_mul(inputs, static_cast<std::uint64_t>(hi - lo + 1), &sat);
  e.cell_input_pairs = sat_mul(e.cells, inputs, &sat);
  e.saturated = sat;
  return e;
}

GridAbstraction build_grid_abstraction(const SampledSystem& sys,
                                       const GridAbstractionParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = estimate_size(params);
  if (est.saturated || est.cells > params.cells_cap)
    throw ConfigError("grid abstraction refused: estimated " + std::to_string(est.cells) +
                      " cells exceeds cap " + std::to_string(params.cells_cap));

  const UniformGrid& grid = params.state_grid;
  const int nx = grid.dim();
  const std::size_t num_cells = grid.size();
  const std::size_t num_inputs = params.input_grid.size();

  // obstacle outer approximation: exclude every cell not certainly disjoint
  std::vector<std::uint8_t> excluded(num_cells, 0);
  std::uint64_t excluded_count = 0;
  if (!params.obstacles.empty()) {
    for (std::size_t c = 0; c < num_cells; ++c) {
      const Region cell_region = grid.cell_box(grid.unflatten(c));
      for (const Region& obs : params.obstacles) {
        if (disjoint(cell_region, obs) != Disjointness::disjoint) {
          excluded[c] = 1;
          ++excluded_count;
          break;
        }
      }
    }
  }

  BuildContext ctx;
  ctx.sys = &sys;
  ctx.grid = &grid;
  ctx.excluded = &excluded;
  ctx.nx = nx;
  ctx.num_cells = num_cells;
  ctx.input_vectors.reserve(num_inputs);
  for (std::size_t j = 0; j < num_inputs; ++j)
    ctx.input_vectors.push_back(params.input_grid.cell_center(params.input_grid.unflatten(j)));
  const Vec guard = grid.cell_half() * 1e-10;  // absorbs rounding at cell faces
  for (std::size_t j = 0; j < num_inputs; ++j) {
    Vec e = sys.error_bound_map(grid.cell_half(), ctx.input_vectors[j]);
    if ((e.array() < 0.0).any())
      throw ConstructionError("grid abstraction: negative error bound");
    if (sys.noise_bound.size() > 0) e += sys.noise_bound;
    ctx.expansion.push_back(e + guard);
    if (sys.batch) ctx.prepared.push_back(sys.batch->prepare(ctx.input_vectors[j]));
  }

  const std::size_t num_chunks = (num_cells + kChunk - 1) / kChunk;
  const int threads = std::max(1, params.threads);
  std::atomic<std::size_t> next_chunk{0};
  std::atomic<std::uint64_t> cells_done{0};
  std::mutex progress_mutex;
  auto report_progress = [&]() {
    if (!params.progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    params.progress(cells_done.load(), num_cells);
  };

  std::vector<std::vector<Transition>> chunk_triples(num_chunks);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));

  if (params.stability_prior) {
    // one pass: buffer triples per chunk
    auto worker = [&](int tid) {
      try {
        std::vector<double> xs, ox, oj;
        std::vector<std::uint8_t> skip;
        Vec center(nx);
        Mat jac(nx, nx);
        for (std::size_t ch; (ch = next_chunk.fetch_add(1)) < num_chunks;) {
          const std::size_t first = ch * kChunk;
          const std::size_t count = std::min(kChunk, num_cells - first);
          auto& out = chunk_triples[ch];
          for (std::size_t j = 0; j < num_inputs; ++j) {
            propagate_chunk(ctx, first, count, j, xs, ox, oj, skip);
            for (std::size_t l = 0; l < count; ++l) {
              if (skip[l]) continue;
              extract_lane(ctx, ox, oj, count, l, center, jac);
              visit_pair(ctx, first + l, j, center, jac,
                         [&](StateId s, InputId u, StateId d) { out.push_back({s, u, d}); });
            }
          }
          cells_done.fetch_add(count);
          report_progress();
        }
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
  } else {
    // two passes: count successors per pair, then fill exact-size buffers
    std::vector<std::uint64_t> counts(num_chunks + 1, 0);
    auto count_worker = [&](int tid) {
      try {
        std::vector<double> xs, ox, oj;
        std::vector<std::uint8_t> skip;
        Vec center(nx);
        Mat jac(nx, nx);
        for (std::size_t ch; (ch = next_chunk.fetch_add(1)) < num_chunks;) {
          const std::size_t first = ch * kChunk;
          const std::size_t count = std::min(kChunk, num_cells - first);
          std::uint64_t total = 0;
          for (std::size_t j = 0; j < num_inputs; ++j) {
            propagate_chunk(ctx, first, count, j, xs, ox, oj, skip);
            for (std::size_t l = 0; l < count; ++l) {
              if (skip[l]) continue;
              extract_lane(ctx, ox, oj, count, l, center, jac);
              visit_pair(ctx, first + l, j, center, jac,
                         [&](StateId, InputId, StateId) { ++total; });
            }
          }
          counts[ch + 1] = total;
        }
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(count_worker, t);
    count_worker(0);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    next_chunk.store(0);
    auto fill_worker = [&](int tid) {
      try {
        std::vector<double> xs, ox, oj;
        std::vector<std::uint8_t> skip;
        Vec center(nx);
        Mat jac(nx, nx);
        for (std::size_t ch; (ch = next_chunk.fetch_add(1)) < num_chunks;) {
          const std::size_t first = ch * kChunk;
          const std::size_t count = std::min(kChunk, num_cells - first);
          auto& out = chunk_triples[ch];
          out.reserve(counts[ch + 1]);
          for (std::size_t j = 0; j < num_inputs; ++j) {
            propagate_chunk(ctx, first, count, j, xs, ox, oj, skip);
            for (std::size_t l = 0; l < count; ++l) {
              if (skip[l]) continue;
              extract_lane(ctx, ox, oj, count, l, center, jac);
              visit_pair(ctx, first + l, j, center, jac,
                         [&](StateId s, InputId u, StateId d) { out.push_back({s, u, d}); });
            }
          }
          cells_done.fetch_add(count);
          report_progress();
        }
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    };
    pool.clear();
    for (int t = 1; t < threads; ++t) pool.emplace_back(fill_worker, t);
    fill_worker(0);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t total = 0;
  for (const auto& v : chunk_triples) total += v.size();
  std::vector<Transition> triples;
  triples.reserve(total);
  for (auto& v : chunk_triples) {
    triples.insert(triples.end(), v.begin(), v.end());
    v.clear();
    v.shrink_to_fit();
  }

  std::vector<Region> cells;
  cells.reserve(num_cells);
  for (std::size_t c = 0; c < num_cells; ++c) cells.emplace_back(grid.cell_box(grid.unflatten(c)));
  std::vector<ModelInput> inputs;
  inputs.reserve(num_inputs);
  for (auto& v : ctx.input_vectors) inputs.emplace_back(v);

  GridAbstraction out{
      .model = SymbolicModel::build(static_cast<std::uint32_t>(num_cells),
                                    static_cast<std::uint32_t>(num_inputs), std::move(cells),
                                    std::move(inputs), std::move(triples)),
      .quantizer = make_grid_quantizer(grid),
      .excluded = std::move(excluded),
      .stats = {},
  };
  out.stats.cells = num_cells;
  out.stats.inputs = num_inputs;
  out.stats.transitions = out.model.num_transitions();
  out.stats.excluded_cells = excluded_count;
  out.stats.growth_heuristic = sys.error_bound_heuristic;
  out.stats.empty_warning = out.model.num_transitions() == 0;
  out.stats.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace symcon
