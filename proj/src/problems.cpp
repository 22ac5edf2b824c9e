#include "symcon/problems.hpp"

#include <cmath>
#include <sstream>

#include "symcon/config.hpp"

namespace symcon {

const Region& ControlProblem::initial() const {
  if (!initial_set) throw ConfigError("problem '" + name + "': initial set missing");
  return *initial_set;
}
const Region& ControlProblem::target() const {
  if (!target_set) throw ConfigError("problem '" + name + "': target set missing");
  return *target_set;
}
const Region& ControlProblem::safe() const {
  if (!safe_set) throw ConfigError("problem '" + name + "': safe set missing");
  return *safe_set;
}

Region SetConfig::to_region() const {
  if (type == Type::box) return Hyperrectangle(center, half);
  return Ellipsoid(center, shape);
}

namespace {

PolyTerm term(double coeff, std::vector<int> x_pow, std::vector<int> u_pow) {
  return PolyTerm{coeff, std::move(x_pow), std::move(u_pow)};
}

void validate_problem_sets(const ControlProblem& p) {
  const Region bounds = p.system.state_set;
  auto check = [&](const std::optional<Region>& r, const char* what) {
    if (!r) return;
    if (!region_contains_region(bounds, *r, 1e-9))
      throw ConfigError("problem '" + p.name + "': " + what + " not within the state bounds");
  };
  check(p.initial_set, "initial set");
  check(p.target_set, "target set");
  check(p.safe_set, "safe set");
  for (const Region& o : p.obstacles)
    if (!region_contains_region(bounds, o, 1e-9))
      throw ConfigError("problem '" + p.name + "': obstacle not within the state bounds");
}

void require_psd(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + ": not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigError(std::string(what) + ": not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ConfigError(std::string(what) + ": not positive semidefinite");
}

CostFn make_cost_fn(const QuadraticCost& cost) {
  return [cost](const Vec& x, const Vec& u) { return cost.eval(x, u); };
}

}  // namespace

ControlProblem builtin_nonlinear_example() {
  constexpr double mu = 5e-5;
  const std::vector<std::vector<PolyTerm>> comps{
      {term(1.1, {1, 0}, {0, 0}), term(-0.2, {0, 1}, {0, 0}), term(-mu, {0, 3}, {0, 0}),
       term(1.0, {0, 0}, {1, 0})},
      {term(1.1, {0, 1}, {0, 0}), term(0.2, {1, 0}, {0, 0}), term(mu, {3, 0}, {0, 0}),
       term(1.0, {0, 0}, {0, 1})},
  };
  const PolynomialField field(2, 2, comps);
  const Hyperrectangle state_box(Vec::Zero(2), Vec::Constant(2, 20.0));
  const Hyperrectangle input_box(Vec::Zero(2), Vec::Constant(2, 10.0));

  ControlProblem p;
  p.name = "nonlinear";
  p.kind = ControlProblem::Kind::reach_avoid;
  p.sampled = make_discrete_polynomial_system(field, Vec::Zero(2), GrowthSpec::taylor(state_box));
  p.system = make_transition_system(state_box, input_box, p.sampled);
  p.initial_set = Ellipsoid((Vec(2) << -10.0, -10.0).finished(), 10.0 * Mat::Identity(2, 2));
  p.target_set = Ellipsoid((Vec(2) << 10.0, 10.0).finished(), Mat::Identity(2, 2));
  p.obstacles.emplace_back(Ellipsoid(Vec::Zero(2), 0.02 * Mat::Identity(2, 2)));
  p.cost = QuadraticCost{Mat::Identity(2, 2), Mat::Identity(2, 2), 1.0};
  p.transition_cost = make_cost_fn(p.cost);
  validate_problem_sets(p);
  return p;
}

ControlProblem builtin_double_integrator() {
  constexpr double dt = 0.1;
  const std::vector<std::vector<PolyTerm>> comps{
      {term(1.0, {1, 0}, {0}), term(dt, {0, 1}, {0}), term(0.5 * dt * dt, {0, 0}, {1})},
      {term(1.0, {0, 1}, {0}), term(dt, {0, 0}, {1})},
  };
  const PolynomialField field(2, 1, comps);
  const Hyperrectangle state_box(Vec::Zero(2), Vec::Constant(2, 2.0));
  const Hyperrectangle input_box(Vec::Zero(1), Vec::Constant(1, 1.0));

  ControlProblem p;
  p.name = "double_integrator";
  p.kind = ControlProblem::Kind::reach_avoid;
  p.sampled = make_discrete_polynomial_system(field, Vec::Zero(2), GrowthSpec::taylor(state_box));
  p.sampled.time_step = dt;
  p.system = make_transition_system(state_box, input_box, p.sampled);
  p.initial_set = Region(state_box);
  p.target_set = Hyperrectangle(Vec::Zero(2), Vec::Constant(2, 0.2));
  p.cost = QuadraticCost{Mat::Zero(2, 2), Mat::Zero(1, 1), 1.0};
  p.transition_cost = make_cost_fn(p.cost);
  validate_problem_sets(p);
  return p;
}

namespace {

using minitoml::TableReader;
using minitoml::Value;

SetConfig parse_set(const Value& v, const std::string& path, const std::string& file, int dim) {
  TableReader r(v, path, file);
  SetConfig s;
  const std::string type = r.has("type") ? r.get_string("type") : "box";
  if (type == "box") {
    s.type = SetConfig::Type::box;
    s.center = r.get_vec("center");
    s.half = r.get_vec("half");
    if ((s.half.array() < 0.0).any())
      throw ConfigError(r.where("half") + ": negative half-length");
    if (s.center.size() != dim || s.half.size() != dim)
      throw ConfigError(r.where("center") + ": expected dimension " + std::to_string(dim));
  } else if (type == "ellipsoid") {
    s.type = SetConfig::Type::ellipsoid;
    s.center = r.get_vec("center");
    s.shape = r.get_mat("shape");
    if (s.center.size() != dim || s.shape.rows() != dim || s.shape.cols() != dim)
      throw ConfigError(r.where("center") + ": expected dimension " + std::to_string(dim));
  } else {
    throw ConfigError(r.where("type") + ": unknown set type '" + type + "'");
  }
  r.done();
  return s;
}

std::vector<std::vector<PolyTerm>> parse_terms(const Value& arr, const std::string& path,
                                               const std::string& file, int nx, int nu,
                                               const char* u_key) {
  std::vector<std::vector<PolyTerm>> comps(static_cast<std::size_t>(nx));
  for (std::size_t i = 0; i < arr.array().size(); ++i) {
    TableReader tr(arr.array()[i], path + "[" + std::to_string(i) + "]", file);
    const auto out = tr.get_int("output");
    if (out < 1 || out > nx)
      throw ConfigError(tr.where("output") + ": component index out of range 1.." +
                        std::to_string(nx));
    PolyTerm t;
    t.coeff = tr.get_double("coeff");
    auto xs = tr.get_int_list("x");
    auto us = tr.get_int_list(u_key);
    if (static_cast<int>(xs.size()) != nx)
      throw ConfigError(tr.where("x") + ": expected " + std::to_string(nx) + " powers");
    if (static_cast<int>(us.size()) != nu)
      throw ConfigError(tr.where(u_key) + ": expected " + std::to_string(nu) + " powers");
    for (int p : xs)
      if (p < 0) throw ConfigError(tr.where("x") + ": negative power");
    for (int p : us)
      if (p < 0) throw ConfigError(tr.where(u_key) + ": negative power");
    t.x_pow = std::move(xs);
    t.u_pow = std::move(us);
    tr.done();
    comps[static_cast<std::size_t>(out - 1)].push_back(std::move(t));
  }
  return comps;
}

ProblemConfig parse_config(const Value& root, const std::string& file) {
  TableReader r(root, "", file);
  ProblemConfig cfg;
  cfg.schema_version = static_cast<int>(r.get_int("schema_version"));
  if (cfg.schema_version != 1)
    throw ConfigError(file + ": unsupported schema_version " +
                      std::to_string(cfg.schema_version));

  {
    TableReader pr(r.get("problem"), "problem", file);
    cfg.name = pr.get_string("name");
    const std::string kind = pr.get_string("kind");
    if (kind == "reach_avoid")
      cfg.kind = ControlProblem::Kind::reach_avoid;
    else if (kind == "safety")
      cfg.kind = ControlProblem::Kind::safety;
    else
      throw ConfigError(pr.where("kind") + ": unknown kind '" + kind + "'");
    if (pr.has("time")) {
      const auto t = pr.get_int("time");
      if (t < 0) throw ConfigError(pr.where("time") + ": must be nonnegative");
      cfg.time = static_cast<std::uint64_t>(t);
    }
    pr.done();
  }

  {
    TableReader dr(r.get("dynamics"), "dynamics", file);
    const std::string type = dr.get_string("type");
    if (type == "builtin") {
      cfg.dynamics.type = DynamicsConfig::Type::builtin;
      cfg.dynamics.builtin_name = dr.get_string("builtin");
      dr.done();
    } else if (type == "polynomial") {
      cfg.dynamics.type = DynamicsConfig::Type::polynomial;
      const std::string domain = dr.get_string("time_domain");
      if (domain == "discrete") {
        cfg.dynamics.continuous = false;
      } else if (domain == "continuous") {
        cfg.dynamics.continuous = true;
        cfg.dynamics.time_step = dr.get_double("time_step");
        if (cfg.dynamics.time_step <= 0.0)
          throw ConfigError(dr.where("time_step") + ": must be positive");
        cfg.dynamics.substeps = static_cast<int>(dr.get_int("substeps", 5));
        if (cfg.dynamics.substeps <= 0)
          throw ConfigError(dr.where("substeps") + ": must be positive");
      } else {
        throw ConfigError(dr.where("time_domain") + ": expected 'discrete' or 'continuous'");
      }
      cfg.dynamics.state_dim = static_cast<int>(dr.get_int("state_dim"));
      cfg.dynamics.input_dim = static_cast<int>(dr.get_int("input_dim"));
      if (cfg.dynamics.state_dim <= 0 || cfg.dynamics.input_dim < 0)
        throw ConfigError(dr.where("state_dim") + ": bad dimensions");
      cfg.dynamics.noise_bound = dr.get_vec("noise_bound");
      if (cfg.dynamics.noise_bound.size() != cfg.dynamics.state_dim)
        throw ConfigError(dr.where("noise_bound") + ": expected state dimension");
      if ((cfg.dynamics.noise_bound.array() < 0.0).any())
        throw ConfigError(dr.where("noise_bound") + ": negative entry");
      cfg.dynamics.terms = parse_terms(dr.get("terms"), "dynamics.terms", file,
                                       cfg.dynamics.state_dim, cfg.dynamics.input_dim, "u");
      dr.done();
    } else {
      throw ConfigError(dr.where("type") + ": unknown dynamics type '" + type + "'");
    }
  }

  if (cfg.dynamics.type == DynamicsConfig::Type::polynomial) {
    const int nx = cfg.dynamics.state_dim;
    const int nu = cfg.dynamics.input_dim;
    TableReader sr(r.get("sets"), "sets", file);
    cfg.state_bounds = parse_set(sr.get("state_bounds"), "sets.state_bounds", file, nx);
    cfg.input_bounds = parse_set(sr.get("input_bounds"), "sets.input_bounds", file, nu);
    if (cfg.state_bounds.type != SetConfig::Type::box ||
        cfg.input_bounds.type != SetConfig::Type::box)
      throw ConfigError(file + ": sets.state_bounds and sets.input_bounds must be boxes");
    cfg.initial = parse_set(sr.get("initial"), "sets.initial", file, nx);
    if (cfg.kind == ControlProblem::Kind::reach_avoid) {
      cfg.target = parse_set(sr.get("target"), "sets.target", file, nx);
      if (const Value* obs = sr.get_optional("obstacles"))
        for (std::size_t i = 0; i < obs->array().size(); ++i)
          cfg.obstacles.push_back(parse_set(obs->array()[i],
                                            "sets.obstacles[" + std::to_string(i) + "]", file, nx));
    } else {
      cfg.safe = parse_set(sr.get("safe"), "sets.safe", file, nx);
    }
    sr.done();

    TableReader cr(r.get("cost"), "cost", file);
    cfg.cost.state_weights = cr.get_mat("state_weights");
    cfg.cost.input_weights = cr.get_mat("input_weights");
    cfg.cost.offset = cr.get_double("offset", 0.0);
    if (cfg.cost.offset < 0.0) throw ConfigError(cr.where("offset") + ": must be nonnegative");
    if (cr.has("state_cost_weights")) cfg.cost.extra_state_weights = cr.get_mat("state_cost_weights");
    if (cr.has("state_cost_offset")) {
      cfg.cost.extra_state_offset = cr.get_double("state_cost_offset");
      if (*cfg.cost.extra_state_offset < 0.0)
        throw ConfigError(cr.where("state_cost_offset") + ": must be nonnegative");
    }
    cr.done();

    if (const Value* gv = r.get_optional("growth")) {
      TableReader gr(*gv, "growth", file);
      const std::string type = gr.get_string("type");
      if (type == "automatic") {
        cfg.growth.type = GrowthConfig::Type::automatic;
      } else if (type == "terms") {
        cfg.growth.type = GrowthConfig::Type::terms;
        cfg.growth.beta_terms =
            parse_terms(gr.get("beta"), "growth.beta", file, nx, nu, "u");
      } else {
        throw ConfigError(gr.where("type") + ": unknown growth type '" + type + "'");
      }
      gr.done();
    }
  }

  {
    TableReader sv(r.get("solver"), "solver", file);
    const std::string type = sv.get_string("type");
    if (type == "grid") {
      cfg.solver.which = SolverConfig::Which::grid;
    } else if (type == "lazy-ellipsoid") {
      cfg.solver.which = SolverConfig::Which::lazy_ellipsoid;
    } else {
      throw ConfigError(sv.where("type") + ": unknown solver '" + type + "'");
    }
    if (const Value* gv = sv.get_optional("grid")) {
      TableReader gr(*gv, "solver.grid", file);
      cfg.solver.grid.state_cell_half = gr.get_vec("state_cell_half");
      cfg.solver.grid.input_cell_half = gr.get_vec("input_cell_half");
      if ((cfg.solver.grid.state_cell_half.array() <= 0.0).any() ||
          (cfg.solver.grid.input_cell_half.array() <= 0.0).any())
        throw ConfigError(gr.where("state_cell_half") + ": cell half-lengths must be positive");
      cfg.solver.grid.stability_prior = gr.get_bool("stability_prior", false);
      cfg.solver.grid.cells_cap = static_cast<std::uint64_t>(
          gr.get_int("cells_cap", static_cast<std::int64_t>(cfg.solver.grid.cells_cap)));
      gr.done();
    } else if (cfg.solver.which == SolverConfig::Which::grid) {
      throw ConfigError(file + ": solver.grid section required for the grid solver");
    }
    if (const Value* lv = sv.get_optional("lazy")) {
      TableReader lr(*lv, "solver.lazy", file);
      auto& lz = cfg.solver.lazy;
      lz.max_iterations = static_cast<std::uint64_t>(lr.get_int("max_iterations", 20000));
      lz.sample_seed = static_cast<std::uint64_t>(lr.get_int("seed", 1));
      lz.initial_shape_scale = lr.get_double("initial_shape_scale", 4.0);
      lz.shrink_factor = lr.get_double("shrink_factor", 0.8);
      lz.goal_bias = lr.get_double("goal_bias", 0.15);
      lz.coverage_samples = static_cast<int>(lr.get_int("coverage_samples", 100));
      lz.min_cell_radius = lr.get_double("min_cell_radius", 1e-3);
      lz.riccati_iterations = static_cast<int>(lr.get_int("riccati_iterations", 500));
      lz.riccati_tol = lr.get_double("riccati_tol", 1e-12);
      if (lz.shrink_factor <= 0.0 || lz.shrink_factor >= 1.0)
        throw ConfigError(lr.where("shrink_factor") + ": must lie in (0,1)");
      if (lz.goal_bias < 0.0 || lz.goal_bias > 1.0)
        throw ConfigError(lr.where("goal_bias") + ": must lie in [0,1]");
      lr.done();
    }
    sv.done();
  }

  r.done();
  return cfg;
}

}  // namespace

ControlProblem instantiate_problem(const ProblemConfig& cfg) {
  if (cfg.dynamics.type == DynamicsConfig::Type::builtin) {
    ControlProblem p;
    if (cfg.dynamics.builtin_name == "nonlinear_example")
      p = builtin_nonlinear_example();
    else if (cfg.dynamics.builtin_name == "double_integrator")
      p = builtin_double_integrator();
    else
      throw ConfigError("unknown builtin dynamics '" + cfg.dynamics.builtin_name + "'");
    p.name = cfg.name;
    p.time = cfg.time;
    return p;
  }

  const PolynomialField field(cfg.dynamics.state_dim, cfg.dynamics.input_dim, cfg.dynamics.terms);
  const Hyperrectangle state_box(cfg.state_bounds.center, cfg.state_bounds.half);
  const Hyperrectangle input_box(cfg.input_bounds.center, cfg.input_bounds.half);

  GrowthSpec growth = GrowthSpec::taylor(state_box);
  if (cfg.growth.type == GrowthConfig::Type::terms) {
    const PolynomialField beta(cfg.dynamics.state_dim, cfg.dynamics.input_dim,
                               cfg.growth.beta_terms);
    growth = GrowthSpec::user([beta](const Vec& h, const Vec& u) { return beta.eval(h, u); });
  } else if (cfg.dynamics.continuous) {
    growth = GrowthSpec::sampled(state_box, input_box);
  }

  ControlProblem p;
  p.name = cfg.name;
  p.kind = cfg.kind;
  p.time = cfg.time;
  p.sampled = cfg.dynamics.continuous
                  ? make_sampled_polynomial_system(field, cfg.dynamics.time_step,
                                                   cfg.dynamics.substeps, cfg.dynamics.noise_bound,
                                                   growth)
                  : make_discrete_polynomial_system(field, cfg.dynamics.noise_bound, growth);
  p.system = make_transition_system(state_box, input_box, p.sampled);
  p.initial_set = cfg.initial ? std::optional<Region>(cfg.initial->to_region()) : std::nullopt;
  if (cfg.target) p.target_set = cfg.target->to_region();
  if (cfg.safe) p.safe_set = cfg.safe->to_region();
  for (const auto& o : cfg.obstacles) p.obstacles.push_back(o.to_region());

  QuadraticCost cost{cfg.cost.state_weights, cfg.cost.input_weights, cfg.cost.offset};
  if (cfg.cost.extra_state_weights) cost.state_weights += *cfg.cost.extra_state_weights;
  if (cfg.cost.extra_state_offset) cost.offset += *cfg.cost.extra_state_offset;
  require_psd(cost.state_weights, "cost.state_weights");
  require_psd(cost.input_weights, "cost.input_weights");
  if (cost.state_weights.rows() != cfg.dynamics.state_dim ||
      cost.input_weights.rows() != cfg.dynamics.input_dim)
    throw ConfigError("cost weight dimensions do not match the dynamics");
  p.cost = cost;
  p.transition_cost = make_cost_fn(cost);
  if (cfg.cost.extra_state_weights) {
    const Mat qs = *cfg.cost.extra_state_weights;
    const double off = cfg.cost.extra_state_offset.value_or(0.0);
    p.state_cost = [qs, off](const Vec& x) { return x.dot(qs * x) + off; };
  }
  validate_problem_sets(p);
  validate_growth_bound(p.sampled, state_box, input_box, 32, 7);
  return p;
}

LoadedProblem load_problem(const std::string& path) {
  const Value root = minitoml::parse_file(path);
  ProblemConfig cfg = parse_config(root, path);
  LoadedProblem lp{cfg, instantiate_problem(cfg), cfg.solver};
  return lp;
}

LoadedProblem load_problem_text(const std::string& text, const std::string& filename) {
  const Value root = minitoml::parse(text, filename);
  ProblemConfig cfg = parse_config(root, filename);
  LoadedProblem lp{cfg, instantiate_problem(cfg), cfg.solver};
  return lp;
}

namespace {

void write_terms(std::ostringstream& out, const std::string& section,
                 const std::vector<std::vector<PolyTerm>>& comps, const char* u_key) {
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (const auto& t : comps[i]) {
      out << "\n[[" << section << "]]\n";
      out << "output = " << (i + 1) << "\n";
      out << "coeff = " << format_double(t.coeff) << "\n";
      out << "x = [";
      for (std::size_t k = 0; k < t.x_pow.size(); ++k)
        out << (k ? ", " : "") << t.x_pow[k];
      out << "]\n" << u_key << " = [";
      for (std::size_t k = 0; k < t.u_pow.size(); ++k)
        out << (k ? ", " : "") << t.u_pow[k];
      out << "]\n";
    }
  }
}

void write_vec(std::ostringstream& out, const Vec& v) {
  out << "[";
  for (long i = 0; i < v.size(); ++i) out << (i ? ", " : "") << format_double(v[i]);
  out << "]";
}

void write_mat(std::ostringstream& out, const Mat& m) {
  out << "[";
  for (long r = 0; r < m.rows(); ++r) {
    out << (r ? ", [" : "[");
    for (long c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << format_double(m(r, c));
    out << "]";
  }
  out << "]";
}

void write_set(std::ostringstream& out, const std::string& key, const SetConfig& s) {
  out << key << " = { type = \"" << (s.type == SetConfig::Type::box ? "box" : "ellipsoid")
      << "\", center = ";
  write_vec(out, s.center);
  if (s.type == SetConfig::Type::box) {
    out << ", half = ";
    write_vec(out, s.half);
  } else {
    out << ", shape = ";
    write_mat(out, s.shape);
  }
  out << " }\n";
}

}  // namespace

std::string serialize_problem_config(const ProblemConfig& cfg) {
  std::ostringstream out;
  out << "schema_version = " << cfg.schema_version << "\n";
  out << "\n[problem]\n";
  out << "name = \"" << cfg.name << "\"\n";
  out << "kind = \"" << (cfg.kind == ControlProblem::Kind::reach_avoid ? "reach_avoid" : "safety")
      << "\"\n";
  if (cfg.time) out << "time = " << *cfg.time << "\n";

  out << "\n[dynamics]\n";
  if (cfg.dynamics.type == DynamicsConfig::Type::builtin) {
    out << "type = \"builtin\"\n";
    out << "builtin = \"" << cfg.dynamics.builtin_name << "\"\n";
  } else {
    out << "type = \"polynomial\"\n";
    out << "time_domain = \"" << (cfg.dynamics.continuous ? "continuous" : "discrete") << "\"\n";
    if (cfg.dynamics.continuous) {
      out << "time_step = " << format_double(cfg.dynamics.time_step) << "\n";
      out << "substeps = " << cfg.dynamics.substeps << "\n";
    }
    out << "state_dim = " << cfg.dynamics.state_dim << "\n";
    out << "input_dim = " << cfg.dynamics.input_dim << "\n";
    out << "noise_bound = ";
    write_vec(out, cfg.dynamics.noise_bound);
    out << "\n";
    write_terms(out, "dynamics.terms", cfg.dynamics.terms, "u");

    out << "\n[sets]\n";
    write_set(out, "state_bounds", cfg.state_bounds);
    write_set(out, "input_bounds", cfg.input_bounds);
    if (cfg.initial) write_set(out, "initial", *cfg.initial);
    if (cfg.target) write_set(out, "target", *cfg.target);
    if (cfg.safe) write_set(out, "safe", *cfg.safe);
    if (!cfg.obstacles.empty()) {
      out << "obstacles = [";
      for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        const auto& s = cfg.obstacles[i];
        out << (i ? ", {" : "{") << " type = \""
            << (s.type == SetConfig::Type::box ? "box" : "ellipsoid") << "\", center = ";
        write_vec(out, s.center);
        if (s.type == SetConfig::Type::box) {
          out << ", half = ";
          write_vec(out, s.half);
        } else {
          out << ", shape = ";
          write_mat(out, s.shape);
        }
        out << " }";
      }
      out << "]\n";
    }

    out << "\n[cost]\n";
    out << "state_weights = ";
    write_mat(out, cfg.cost.state_weights);
    out << "\ninput_weights = ";
    write_mat(out, cfg.cost.input_weights);
    out << "\noffset = " << format_double(cfg.cost.offset) << "\n";
    if (cfg.cost.extra_state_weights) {
      out << "state_cost_weights = ";
      write_mat(out, *cfg.cost.extra_state_weights);
      out << "\n";
    }
    if (cfg.cost.extra_state_offset)
      out << "state_cost_offset = " << format_double(*cfg.cost.extra_state_offset) << "\n";

    out << "\n[growth]\n";
    if (cfg.growth.type == GrowthConfig::Type::automatic) {
      out << "type = \"automatic\"\n";
    } else {
      out << "type = \"terms\"\n";
      write_terms(out, "growth.beta", cfg.growth.beta_terms, "u");
    }
  }

  out << "\n[solver]\n";
  out << "type = \""
      << (cfg.solver.which == SolverConfig::Which::grid ? "grid" : "lazy-ellipsoid") << "\"\n";
  if (cfg.solver.grid.state_cell_half.size() > 0) {
    out << "\n[solver.grid]\n";
    out << "state_cell_half = ";
    write_vec(out, cfg.solver.grid.state_cell_half);
    out << "\ninput_cell_half = ";
    write_vec(out, cfg.solver.grid.input_cell_half);
    out << "\nstability_prior = " << (cfg.solver.grid.stability_prior ? "true" : "false") << "\n";
    out << "cells_cap = " << cfg.solver.grid.cells_cap << "\n";
  }
  {
    const auto& lz = cfg.solver.lazy;
    out << "\n[solver.lazy]\n";
    out << "max_iterations = " << lz.max_iterations << "\n";
    out << "seed = " << lz.sample_seed << "\n";
    out << "initial_shape_scale = " << format_double(lz.initial_shape_scale) << "\n";
    out << "shrink_factor = " << format_double(lz.shrink_factor) << "\n";
    out << "goal_bias = " << format_double(lz.goal_bias) << "\n";
    out << "coverage_samples = " << lz.coverage_samples << "\n";
    out << "min_cell_radius = " << format_double(lz.min_cell_radius) << "\n";
    out << "riccati_iterations = " << lz.riccati_iterations << "\n";
    out << "riccati_tol = " << format_double(lz.riccati_tol) << "\n";
  }
  return out.str();
}

}  // namespace symcon
