#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "symcon/ellipsoid_abstraction.hpp"
#include "symcon/grid_abstraction.hpp"
#include "symcon/io.hpp"
#include "symcon/kernels.hpp"
#include "symcon/problems.hpp"
#include "symcon/synthesis.hpp"

namespace fs = std::filesystem;
using namespace symcon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitViolations = 3;

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path default_out_dir(const std::string& problem_name, const std::string& solver) {
  const char* root = std::getenv("SYMCON_OUT");
  return fs::path(root ? root : "runs") / (problem_name + "-" + solver);
}

void apply_kernel_flag(const std::string& kernel) {
  if (kernel == "auto" || kernel.empty()) {
    force_kernel_backend(std::nullopt);
  } else if (kernel == "scalar") {
    force_kernel_backend(KernelBackend::scalar);
  } else if (kernel == "avx2") {
    force_kernel_backend(KernelBackend::avx2);
  } else {
    throw ConfigError("unknown kernel backend '" + kernel + "'");
  }
}

struct SolveTimings {
  double abstraction = 0.0;
  double synthesis = 0.0;
  double total = 0.0;
};

/* abstraction + synthesis per the standard pipeline; shared by solve and bench */
SolveArtifacts run_solve(const LoadedProblem& lp, const SolverConfig& solver, int threads,
                         std::uint64_t seed, std::uint64_t cells_cap_override, bool quiet,
                         SolveTimings& timings) {
  const ControlProblem& problem = lp.problem;
  SolveArtifacts artifacts;
  const auto t_total = std::chrono::steady_clock::now();

  if (solver.which == SolverConfig::Which::grid) {
    GridAbstractionParams params{
        .state_grid = UniformGrid::tile(problem.system.state_set, solver.grid.state_cell_half),
        .input_grid = UniformGrid::tile(problem.system.input_set, solver.grid.input_cell_half),
        .obstacles = problem.obstacles,
        .stability_prior = solver.grid.stability_prior,
        .threads = threads,
        .cells_cap = cells_cap_override ? cells_cap_override : solver.grid.cells_cap,
        .progress = {},
    };
    if (!quiet) {
      params.progress = [](std::uint64_t done, std::uint64_t total) {
        if (total >= 10 && done % (total / 10) < 256)
          std::cerr << "[abstraction] " << done << "/" << total << " cells\n";
      };
    }
    GridAbstraction abs = build_grid_abstraction(problem.sampled, params);
    timings.abstraction = abs.stats.build_seconds;
    if (abs.stats.empty_warning)
      std::cerr << "warning: empty abstraction (no input available at any cell)\n";
    if (abs.stats.growth_heuristic)
      std::cerr << "note: sampled growth bound in use (heuristic, 2x safety factor)\n";

    auto model = std::make_shared<const SymbolicModel>(std::move(abs.model));
    const auto t_syn = std::chrono::steady_clock::now();
    AbstractProblem ap = abstract_problem(problem, model, abs.quantizer, &abs.excluded);
    std::uint64_t winning_initial = 0;
    if (problem.kind == ControlProblem::Kind::reach_avoid) {
      ReachResult r = solve_reach_avoid(ap);
      for (StateId s : ap.initial_ids)
        if (r.value.at(s) != kInfValue) ++winning_initial;
      artifacts.controller = std::move(r.controller);
      artifacts.value = std::move(r.value);
    } else {
      SafetyResult r = solve_safety(ap);
      artifacts.value.values.assign(model->num_states(), kInfValue);
      for (StateId s : r.invariant_set) artifacts.value.values[s] = 0.0;
      artifacts.value.target_ids = r.invariant_set;
      for (StateId s : ap.initial_ids)
        if (r.controller.in_domain(s)) ++winning_initial;
      if (!r.feasible) std::cerr << "warning: empty controlled-invariant set\n";
      artifacts.controller = std::move(r.controller);
    }
    timings.synthesis = now_minus(t_syn);

    artifacts.model = *model;
    artifacts.quantizer = abs.quantizer;
    artifacts.grid = params.state_grid;
    artifacts.input_grid = params.input_grid;
    artifacts.is_cover = false;
    artifacts.manifest.coverage_fraction =
        ap.initial_ids.empty()
            ? 1.0
            : static_cast<double>(winning_initial) / static_cast<double>(ap.initial_ids.size());
    artifacts.manifest.cells = abs.stats.cells;
    artifacts.manifest.params["state_cells"] = std::to_string(abs.stats.cells);
    artifacts.manifest.params["inputs"] = std::to_string(abs.stats.inputs);
    artifacts.manifest.params["stability_prior"] = solver.grid.stability_prior ? "true" : "false";
    artifacts.manifest.params["threads"] = std::to_string(threads);
    artifacts.manifest.params["kernel"] =
        active_kernel_backend() == KernelBackend::avx2 ? "avx2" : "scalar";
  } else {
    LazyTreeParams params = lazy_params_from(problem, solver.lazy);
    if (seed) params.sample_seed = seed;
    LazyAbstraction lazy = build_lazy_ellipsoid_abstraction(problem, problem.sampled, params);
    timings.abstraction = lazy.build_seconds;

    const auto t_syn = std::chrono::steady_clock::now();
    auto model = std::make_shared<const SymbolicModel>(std::move(lazy.model));
    // synthesis over the tree: stage costs are the certified per-cell bounds
    std::vector<double> stage(model->num_inputs(), 0.0);
    for (StateId i = 1; i < lazy.cells.size(); ++i)
      stage[i - 1] = lazy.cells[i].cost_bound - lazy.cells[*lazy.cells[i].parent].cost_bound;
    AbstractProblem ap;
    ap.model = model;
    ap.kind = ControlProblem::Kind::reach_avoid;
    ap.goal_ids = {0};
    ap.stage_cost = [stage](StateId, InputId u) { return stage.at(u); };
    ReachResult r = solve_reach_avoid(ap);
    timings.synthesis = now_minus(t_syn);

    artifacts.model = *model;
    artifacts.quantizer = lazy.quantizer;
    artifacts.controller = std::move(r.controller);
    artifacts.value = std::move(r.value);
    artifacts.tree = std::move(lazy.cells);
    artifacts.is_cover = true;
    artifacts.manifest.coverage_fraction = lazy.coverage;
    artifacts.manifest.cells = artifacts.model.num_states();
    artifacts.manifest.params["iterations"] = std::to_string(lazy.iterations);
    artifacts.manifest.params["max_iterations"] = std::to_string(params.max_iterations);
    artifacts.manifest.params["shrink_factor"] = format_double(params.shrink_factor);
    artifacts.manifest.params["initial_shape_scale"] = format_double(params.initial_shape_scale);
    artifacts.manifest.params["goal_bias"] = format_double(params.goal_bias);
    artifacts.manifest.seed = params.sample_seed;
  }

  timings.total = now_minus(t_total);
  artifacts.manifest.abstraction_seconds = timings.abstraction;
  artifacts.manifest.synthesis_seconds = timings.synthesis;
  artifacts.manifest.total_seconds = timings.total;
  artifacts.manifest.transition_count = artifacts.model.num_transitions();
  artifacts.manifest.domain_size = artifacts.controller.domain_size();
  artifacts.manifest.partial = artifacts.manifest.coverage_fraction < 1.0;
  return artifacts;
}

StaticController controller_from_artifacts(const SolveArtifacts& a,
                                           std::shared_ptr<const SymbolicModel> model) {
  if (!a.is_cover) return concretize(a.controller, a.quantizer, model);
  auto laws = std::make_shared<std::vector<AffineLaw>>();
  for (InputId u = 0; u < model->num_inputs(); ++u) {
    const auto* law = std::get_if<AffineLaw>(&model->input(u));
    if (!law) throw ConfigError("artifacts: cover input " + std::to_string(u) + " is not affine");
    laws->push_back(*law);
  }
  Interface iface = [laws](const Vec& x, StateId, InputId u2) -> std::vector<Vec> {
    if (u2 >= laws->size()) return {};
    return {(*laws)[u2].apply(x)};
  };
  auto order = std::make_shared<const std::vector<double>>(a.value.values);
  return concretize(a.controller, a.quantizer, model, iface, order);
}

int cmd_solve(const std::string& problem_path, std::string solver_flag, std::string out_flag,
              std::uint64_t seed, int threads, std::uint64_t cells_cap, const std::string& kernel,
              bool quiet) {
  apply_kernel_flag(kernel);
  const std::string content = read_text_file(problem_path);
  LoadedProblem lp = load_problem_text(content, problem_path);

  SolverConfig solver = lp.solver;
  if (!solver_flag.empty()) {
    if (solver_flag == "grid")
      solver.which = SolverConfig::Which::grid;
    else if (solver_flag == "lazy-ellipsoid")
      solver.which = SolverConfig::Which::lazy_ellipsoid;
    else
      throw ConfigError("unknown solver '" + solver_flag + "'");
  }
  if (solver.which == SolverConfig::Which::grid && solver.grid.state_cell_half.size() == 0)
    throw ConfigError("problem file lacks a [solver.grid] section required by --solver grid");
  const std::string solver_name =
      solver.which == SolverConfig::Which::grid ? "grid" : "lazy-ellipsoid";

  SolveTimings timings;
  SolveArtifacts artifacts = run_solve(lp, solver, threads, seed, cells_cap, quiet, timings);
  artifacts.manifest.problem_file = problem_path;
  artifacts.manifest.problem_hash = hash_bytes(content);
  artifacts.manifest.solver = solver_name;
  if (seed) artifacts.manifest.seed = seed;

  const fs::path out =
      out_flag.empty() ? default_out_dir(lp.problem.name, solver_name) : fs::path(out_flag);
  save_artifacts(out, artifacts, content);

  std::cout << "solved '" << lp.problem.name << "' with " << solver_name << ": "
            << artifacts.manifest.cells << " cells, " << artifacts.manifest.transition_count
            << " transitions, domain " << artifacts.manifest.domain_size << ", coverage "
            << artifacts.manifest.coverage_fraction << "\n";
  std::cout << "abstraction " << timings.abstraction << " s, synthesis " << timings.synthesis
            << " s, total " << timings.total << " s\n";
  std::cout << "artifacts in " << out.string() << "\n";
  return artifacts.manifest.partial ? kExitPartial : kExitOk;
}

int cmd_simulate(const std::string& out_dir, const std::string& x0_flag, bool sample_initial,
                 int samples, std::uint64_t seed, std::uint64_t steps,
                 const std::string& policy_flag) {
  std::string warnings;
  SolveArtifacts a = load_artifacts(out_dir, true, &warnings);
  if (!warnings.empty()) std::cerr << warnings;
  LoadedProblem lp = load_problem_text(read_text_file(fs::path(out_dir) / "problem.toml"),
                                       (fs::path(out_dir) / "problem.toml").string());
  const ControlProblem& problem = lp.problem;

  auto model = std::make_shared<const SymbolicModel>(a.model);
  StaticController controller = controller_from_artifacts(a, model);

  DisturbanceSpec disturbance;
  disturbance.seed = seed;
  if (policy_flag == "zero")
    disturbance.policy = DisturbancePolicy::zero;
  else if (policy_flag == "worst")
    disturbance.policy = DisturbancePolicy::worst_sampled;
  else if (policy_flag == "random")
    disturbance.policy = DisturbancePolicy::random_;
  else
    throw ConfigError("unknown disturbance policy '" + policy_flag + "'");

  StatePredicate stop;
  if (problem.kind == ControlProblem::Kind::reach_avoid) {
    const Region target = problem.target();
    stop = [target](const Vec& x) { return region_contains_point(target, x); };
  } else {
    stop = [](const Vec&) { return false; };
  }

  std::vector<Vec> starts;
  if (!x0_flag.empty()) {
    std::vector<double> vals;
    std::stringstream ss(x0_flag);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != problem.system.state_dim)
      throw ConfigError("--x0 dimension mismatch");
    starts.push_back(Eigen::Map<const Vec>(vals.data(), static_cast<long>(vals.size())));
  } else if (sample_initial) {
    Rng rng(seed);
    for (int i = 0; i < samples; ++i) starts.push_back(region_sample(problem.initial(), rng));
  } else {
    throw ConfigError("simulate: provide --x0 or --sample-initial");
  }

  std::vector<Trajectory> trajectories;
  bool all_ok = true;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Vec& x0 = starts[i];
    if (!stop(x0) && !controller.domain_predicate(x0)) {
      // nearest in-domain cell as a hint
      double best = kInfValue;
      Vec hint;
      for (StateId s = 0; s < model->num_states(); ++s) {
        if (!a.controller.in_domain(s)) continue;
        const Vec c = region_center(model->cell(s));
        const double d = (c - x0).norm();
        if (d < best) {
          best = d;
          hint = c;
        }
      }
      std::cerr << "x0 outside the controller domain";
      if (hint.size() > 0) {
        std::cerr << "; nearest domain cell center at (";
        for (long k = 0; k < hint.size(); ++k) std::cerr << (k ? ", " : "") << hint[k];
        std::cerr << ")";
      }
      std::cerr << "\n";
      return kExitPartial;
    }
    SimulationResult sim = closed_loop_trajectory(problem.system, controller,
                                                  problem.transition_cost, x0, stop, steps,
                                                  disturbance);
    const char* status = sim.status == SimStatus::reached
                             ? "reached"
                             : sim.status == SimStatus::timeout ? "timeout" : "domain-exit";
    std::cout << "trajectory " << i << ": " << status << " after "
              << sim.trajectory.inputs.size() << " steps, cost "
              << sim.trajectory.total_cost() << "\n";
    if (problem.kind == ControlProblem::Kind::reach_avoid && sim.status != SimStatus::reached)
      all_ok = false;
    if (problem.kind == ControlProblem::Kind::safety) {
      for (const Vec& x : sim.trajectory.states)
        if (!region_contains_point(problem.safe(), x, 1e-9)) all_ok = false;
    }
    trajectories.push_back(std::move(sim.trajectory));
  }

  save_plot_layers(out_dir, a, problem, trajectories);
  save_svg_figure(fs::path(out_dir) / "figure.svg", a, problem, trajectories);
  if (!all_ok) {
    std::cerr << "warning: some trajectories did not meet the specification\n";
    return kExitError;
  }
  return kExitOk;
}

int cmd_check(const std::string& out_dir, std::uint64_t samples, std::uint64_t seed) {
  std::string warnings;
  SolveArtifacts a = load_artifacts(out_dir, true, &warnings);
  if (!warnings.empty()) std::cerr << warnings;  // corruption still reaches the checker
  LoadedProblem lp = load_problem_text(read_text_file(fs::path(out_dir) / "problem.toml"),
                                       (fs::path(out_dir) / "problem.toml").string());

  RelationReport report;
  std::string kind;
  if (a.is_cover) {
    kind = "mcr";
    auto model = std::make_shared<const SymbolicModel>(a.model);
    auto laws = std::make_shared<std::vector<AffineLaw>>();
    for (InputId u = 0; u < model->num_inputs(); ++u)
      laws->push_back(std::get<AffineLaw>(model->input(u)));
    Interface iface = [laws](const Vec& x, StateId, InputId u2) -> std::vector<Vec> {
      if (u2 >= laws->size()) return {};
      return {(*laws)[u2].apply(x)};
    };
    report = check_mcr(lp.problem.system, a.model, a.quantizer, iface, samples, seed);
  } else {
    kind = "frr";
    report = check_frr(lp.problem.system, a.model, a.quantizer, samples, seed);
  }
  save_relation_report(fs::path(out_dir) / "report.json", report, kind);
  std::cout << "check " << kind << ": " << report.samples_run << " samples, " << report.checks
            << " successor checks, " << report.violation_count << " violations, "
            << report.interface_violation_count << " interface violations"
            << (report.vacuous ? " (vacuous: 0 samples)" : "") << "\n";
  return report.clean() ? kExitOk : kExitViolations;
}

int cmd_bench(const std::string& list_path, int reps, const std::string& out_flag, int threads) {
  std::istringstream list(read_text_file(list_path));
  const fs::path base = fs::path(list_path).parent_path();
  struct Row {
    std::string name, solver;
    double abstraction, synthesis, total;
    bool failed = false;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(list, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    const fs::path problem_path = base / line;

    LoadedProblem lp;
    try {
      lp = load_problem(problem_path.string());
    } catch (const std::exception& e) {
      std::cerr << "bench: failed to load " << line << ": " << e.what() << "\n";
      rows.push_back({line, "load-error", 0, 0, 0, true});
      continue;
    }

    std::vector<std::pair<std::string, SolverConfig>> variants;
    if (lp.solver.which == SolverConfig::Which::grid) {
      SolverConfig off = lp.solver;
      off.grid.stability_prior = false;
      SolverConfig on = lp.solver;
      on.grid.stability_prior = true;
      variants.emplace_back("grid", off);
      variants.emplace_back("grid-prior", on);
    } else {
      variants.emplace_back("lazy-ellipsoid", lp.solver);
    }

    for (const auto& [vname, vcfg] : variants) {
      std::vector<double> abs_s, syn_s, tot_s;
      bool failed = false;
      for (int rep = 0; rep < reps && !failed; ++rep) {
        try {
          SolveTimings t;
          run_solve(lp, vcfg, threads, 0, 0, true, t);
          abs_s.push_back(t.abstraction);
          syn_s.push_back(t.synthesis);
          tot_s.push_back(t.total);
        } catch (const std::exception& e) {
          std::cerr << "bench: " << lp.problem.name << "/" << vname << " failed: " << e.what()
                    << "\n";
          failed = true;
        }
      }
      auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v.empty() ? std::numeric_limits<double>::quiet_NaN() : v[v.size() / 2];
      };
      rows.push_back(
          {lp.problem.name, vname, median(abs_s), median(syn_s), median(tot_s), failed});
    }
  }

  std::string csv = "name,solver,abstraction_s,synthesis_s,total_s\n";
  std::ostringstream txt;
  txt << std::left;
  txt.width(24);
  txt << "name";
  txt.width(16);
  txt << "solver";
  txt.width(16);
  txt << "abstraction_s";
  txt.width(16);
  txt << "synthesis_s";
  txt.width(16);
  txt << "total_s";
  txt << "\n";
  for (const auto& r : rows) {
    csv += r.name + "," + r.solver + "," + format_double(r.abstraction) + "," +
           format_double(r.synthesis) + "," + format_double(r.total) + "\n";
    txt << std::left;
    txt.width(24);
    txt << r.name;
    txt.width(16);
    txt << r.solver;
    txt.width(16);
    txt << r.abstraction;
    txt.width(16);
    txt << r.synthesis;
    txt.width(16);
    txt << r.total;
    txt << (r.failed ? "  [failed]" : "") << "\n";
  }
  const fs::path out = out_flag.empty() ? fs::path(".") : fs::path(out_flag);
  fs::create_directories(out);
  write_text_file(out / "bench.csv", csv);
  write_text_file(out / "bench.txt", txt.str());
  std::cout << txt.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symcon: abstraction-based controller synthesis"};
  app.require_subcommand(1);

  std::string problem_path, solver_flag, out_dir, kernel = "auto", x0_flag, policy = "zero";
  std::string list_path;
  std::uint64_t seed = 0, steps = 1000, samples = 10000, cells_cap = 0;
  int threads = 1, reps = 3, sim_samples = 1;
  bool sample_initial = false, quiet = false;

  auto* solve = app.add_subcommand("solve", "abstract, synthesize, write artifacts");
  solve->add_option("problem", problem_path, "problem file (.toml)")->required();
  solve->add_option("--solver", solver_flag, "grid | lazy-ellipsoid (overrides the problem file)");
  solve->add_option("--out", out_dir, "output directory (default $SYMCON_OUT/<name>-<solver>)");
  solve->add_option("--seed", seed, "seed recorded in the manifest; overrides solver seeds");
  solve->add_option("--threads", threads, "worker cap for the grid abstraction");
  solve->add_option("--cells-cap", cells_cap, "refuse grids larger than this many cells");
  solve->add_option("--kernel", kernel, "auto | scalar | avx2");
  solve->add_flag("--quiet", quiet, "suppress progress output");

  auto* simulate = app.add_subcommand("simulate", "closed-loop simulation from solved artifacts");
  simulate->add_option("--out", out_dir, "artifact directory")->required();
  simulate->add_option("--x0", x0_flag, "initial state, comma separated");
  simulate->add_flag("--sample-initial", sample_initial, "sample x0 from the initial set");
  simulate->add_option("--samples", sim_samples, "number of sampled trajectories");
  simulate->add_option("--seed", seed, "sampling / disturbance seed");
  simulate->add_option("--steps", steps, "step cap");
  simulate->add_option("--policy", policy, "zero | worst | random");

  auto* check = app.add_subcommand("check", "sampled refinement/concretization check");
  check->add_option("--out", out_dir, "artifact directory")->required();
  check->add_option("--samples", samples, "sample budget");
  check->add_option("--seed", seed, "sampling seed");

  auto* bench = app.add_subcommand("bench", "timing table over a problem list");
  bench->add_option("list", list_path, "file with one problem path per line")->required();
  bench->add_option("--reps", reps, "repetitions per row (median reported)");
  bench->add_option("--out", out_dir, "directory for bench.csv/bench.txt");
  bench->add_option("--threads", threads, "worker cap for the grid abstraction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(problem_path, solver_flag, out_dir, seed, threads, cells_cap, kernel,
                       quiet);
    if (simulate->parsed())
      return cmd_simulate(out_dir, x0_flag, sample_initial, sim_samples, seed, steps, policy);
    if (check->parsed()) return cmd_check(out_dir, samples, seed);
    if (bench->parsed()) return cmd_bench(list_path, reps, out_dir, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
