#include "symcon/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace symcon {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string hash_bytes(std::string_view data) { return hex64(fnv1a64(data)); }

std::string hash_file(const fs::path& p) { return hash_bytes(read_text_file(p)); }

void write_text_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
}

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void append_vec(std::string& out, const Vec& v) {
  for (long i = 0; i < v.size(); ++i) {
    out += ',';
    out += format_double(v[i]);
  }
}

void append_mat(std::string& out, const Mat& m) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) {
      out += ',';
      out += format_double(m(r, c));
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return kInfValue;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": malformed number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": malformed integer '" + s + "'");
  return v;
}

std::string cells_csv(const SymbolicModel& model) {
  std::string out = "id,kind,data\n";
  for (StateId s = 0; s < model.num_states(); ++s) {
    out += std::to_string(s);
    if (const auto* box = std::get_if<Hyperrectangle>(&model.cell(s))) {
      out += ",box";
      append_vec(out, box->center());
      append_vec(out, box->half());
    } else {
      const auto& e = std::get<Ellipsoid>(model.cell(s));
      out += ",ellipsoid";
      append_vec(out, e.center());
      append_mat(out, e.shape());
    }
    out += '\n';
  }
  return out;
}

std::string inputs_csv(const SymbolicModel& model) {
  std::string out = "id,kind,data\n";
  for (InputId u = 0; u < model.num_inputs(); ++u) {
    out += std::to_string(u);
    if (const auto* v = std::get_if<Vec>(&model.input(u))) {
      out += ",vector";
      append_vec(out, *v);
    } else {
      const auto& law = std::get<AffineLaw>(model.input(u));
      out += ",affine";
      append_mat(out, law.gain);
      append_vec(out, law.offset);
      append_vec(out, law.anchor);
    }
    out += '\n';
  }
  return out;
}

std::string transitions_csv(const SymbolicModel& model) {
  std::string out = "src,input,dst\n";
  for (const Transition& t : model.transitions()) {
    out += std::to_string(t.src);
    out += ',';
    out += std::to_string(t.input);
    out += ',';
    out += std::to_string(t.dst);
    out += '\n';
  }
  return out;
}

std::string controller_csv(const AbstractController& c, const std::string& model_hash) {
  std::string out = "# model_hash=" + model_hash + "\nstate,inputs\n";
  for (StateId s = 0; s < c.table.size(); ++s) {
    if (c.table[s].empty()) continue;
    out += std::to_string(s);
    out += ',';
    for (std::size_t i = 0; i < c.table[s].size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(c.table[s][i]);
    }
    out += '\n';
  }
  return out;
}

std::string value_csv(const ValueFunction& v) {
  std::string out = "state,value\n";
  for (StateId s = 0; s < v.values.size(); ++s) {
    out += std::to_string(s);
    out += ',';
    out += v.values[s] == kInfValue ? "inf" : format_double(v.values[s]);
    out += '\n';
  }
  return out;
}

std::string tree_csv(const std::vector<EllipsoidCell>& cells) {
  std::string out = "id,parent,cost_bound,center,shape,gain,offset\n";
  for (StateId i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out += std::to_string(i);
    out += ',';
    out += c.parent ? std::to_string(*c.parent) : std::string("-");
    out += ',';
    out += format_double(c.cost_bound);
    append_vec(out, c.region.center());
    append_mat(out, c.region.shape());
    append_mat(out, c.controller.gain);
    append_vec(out, c.controller.offset);
    out += '\n';
  }
  return out;
}

ordered_json grid_json(const UniformGrid& g) {
  ordered_json j;
  j["origin"] = std::vector<double>(g.origin().data(), g.origin().data() + g.origin().size());
  j["cell_half"] =
      std::vector<double>(g.cell_half().data(), g.cell_half().data() + g.cell_half().size());
  ordered_json ranges = ordered_json::array();
  for (const auto& [lo, hi] : g.index_ranges()) ranges.push_back({lo, hi});
  j["index_ranges"] = ranges;
  return j;
}

UniformGrid grid_from_json(const ordered_json& j) {
  const auto origin_v = j.at("origin").get<std::vector<double>>();
  const auto half_v = j.at("cell_half").get<std::vector<double>>();
  Vec origin = Eigen::Map<const Vec>(origin_v.data(), static_cast<long>(origin_v.size()));
  Vec half = Eigen::Map<const Vec>(half_v.data(), static_cast<long>(half_v.size()));
  std::vector<std::pair<long, long>> ranges;
  for (const auto& r : j.at("index_ranges")) ranges.emplace_back(r.at(0), r.at(1));
  return UniformGrid(origin, half, ranges);
}

}  // namespace

void save_relation_report(const fs::path& path, const RelationReport& report,
                          const std::string& kind) {
  ordered_json j;
  j["kind"] = kind;
  j["samples_requested"] = report.samples_requested;
  j["samples_run"] = report.samples_run;
  j["checks"] = report.checks;
  j["vacuous"] = report.vacuous;
  j["violations"] = report.violation_count;
  j["interface_violations"] = report.interface_violation_count;
  ordered_json ws = ordered_json::array();
  for (const auto& w : report.witnesses) {
    ordered_json e;
    e["abstract_state"] = w.abstract_state;
    e["input"] = w.input;
    e["state"] = std::vector<double>(w.concrete_state.data(),
                                     w.concrete_state.data() + w.concrete_state.size());
    e["successor"] = std::vector<double>(
        w.concrete_successor.data(), w.concrete_successor.data() + w.concrete_successor.size());
    e["reason"] = w.reason;
    ws.push_back(e);
  }
  j["witnesses"] = ws;
  write_text_file(path, j.dump(2) + "\n");
}

void save_trajectory_csv(const fs::path& path, const Trajectory& t) {
  std::string out = "step,state,input,cost\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    out += std::to_string(k);
    append_vec(out, t.states[k]);
    if (k < t.inputs.size()) {
      append_vec(out, t.inputs[k]);
      out += ',';
      out += format_double(t.costs[k]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void save_artifacts(const fs::path& dir, const SolveArtifacts& artifacts,
                    const std::string& problem_file_content) {
  fs::create_directories(dir);
  const auto& a = artifacts;

  ordered_json header;
  header["schema_version"] = 1;
  header["kind"] = a.is_cover ? "cover" : "grid";
  header["num_states"] = a.model.num_states();
  header["num_inputs"] = a.model.num_inputs();
  header["num_transitions"] = a.model.num_transitions();
  if (a.grid) header["state_grid"] = grid_json(*a.grid);
  if (a.input_grid) header["input_grid"] = grid_json(*a.input_grid);

  std::map<std::string, std::string> files;
  files["problem.toml"] = problem_file_content;
  files["model.json"] = header.dump(2) + "\n";
  files["cells.csv"] = cells_csv(a.model);
  files["inputs.csv"] = inputs_csv(a.model);
  files["transitions.csv"] = transitions_csv(a.model);
  files["controller.csv"] = controller_csv(a.controller, hash_bytes(transitions_csv(a.model)));
  files["value_function.csv"] = value_csv(a.value);
  if (a.is_cover) files["tree.csv"] = tree_csv(a.tree);

  RunManifest manifest = a.manifest;
  manifest.artifact_hashes.clear();
  for (const auto& [name, content] : files) manifest.artifact_hashes[name] = hash_bytes(content);

  ordered_json mj;
  mj["schema_version"] = 1;
  mj["problem_file"] = manifest.problem_file;
  mj["problem_hash"] = manifest.problem_hash;
  mj["solver"] = manifest.solver;
  mj["seed"] = manifest.seed;
  ordered_json params;
  for (const auto& [k, v] : manifest.params) params[k] = v;
  mj["params"] = params;
  ordered_json result;
  result["coverage_fraction"] = manifest.coverage_fraction;
  result["cells"] = manifest.cells;
  result["transitions"] = manifest.transition_count;
  result["domain_size"] = manifest.domain_size;
  result["violations_found"] = manifest.violations_found;
  result["partial"] = manifest.partial;
  mj["result"] = result;
  ordered_json hashes;
  for (const auto& [k, v] : manifest.artifact_hashes) hashes[k] = v;
  mj["artifact_hashes"] = hashes;
  files["manifest.json"] = mj.dump(2) + "\n";

  // measured wall clock lives apart from the deterministic artifacts
  std::string timings = "phase,seconds\n";
  timings += "abstraction," + format_double(manifest.abstraction_seconds) + "\n";
  timings += "synthesis," + format_double(manifest.synthesis_seconds) + "\n";
  timings += "total," + format_double(manifest.total_seconds) + "\n";
  files["timings.csv"] = timings;

  for (const auto& [name, content] : files) write_text_file(dir / name, content);
}

SolveArtifacts load_artifacts(const fs::path& dir, bool verify_hashes,
                              std::string* hash_warnings) {
  const auto mj = ordered_json::parse(read_text_file(dir / "manifest.json"));
  RunManifest manifest;
  manifest.problem_file = mj.at("problem_file").get<std::string>();
  manifest.problem_hash = mj.at("problem_hash").get<std::string>();
  manifest.solver = mj.at("solver").get<std::string>();
  manifest.seed = mj.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : mj.at("params").items()) manifest.params[k] = v.get<std::string>();
  const auto& result = mj.at("result");
  manifest.coverage_fraction = result.at("coverage_fraction").get<double>();
  manifest.cells = result.at("cells").get<std::uint64_t>();
  manifest.transition_count = result.at("transitions").get<std::uint64_t>();
  manifest.domain_size = result.at("domain_size").get<std::uint64_t>();
  manifest.violations_found = result.at("violations_found").get<std::uint64_t>();
  manifest.partial = result.at("partial").get<bool>();
  for (const auto& [k, v] : mj.at("artifact_hashes").items())
    manifest.artifact_hashes[k] = v.get<std::string>();

  if (verify_hashes) {
    for (const auto& [name, expected] : manifest.artifact_hashes) {
      const std::string actual = hash_file(dir / name);
      if (actual != expected) {
        const std::string msg = "artifact '" + name + "' hash mismatch (recorded " + expected +
                                ", actual " + actual + ")";
        if (hash_warnings)
          *hash_warnings += msg + "\n";
        else
          throw ConfigError(msg);
      }
    }
  }

  const auto header = ordered_json::parse(read_text_file(dir / "model.json"));
  const auto num_states = header.at("num_states").get<std::uint32_t>();
  const auto num_inputs = header.at("num_inputs").get<std::uint32_t>();

  std::vector<Region> cells;
  cells.reserve(num_states);
  {
    const auto text = read_text_file(dir / "cells.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      const std::string& kind = f.at(1);
      if (kind == "box") {
        const long dim = static_cast<long>((f.size() - 2) / 2);
        Vec c(dim), h(dim);
        for (long i = 0; i < dim; ++i) {
          c[i] = parse_double(f.at(2 + static_cast<std::size_t>(i)), "cells.csv");
          h[i] = parse_double(f.at(2 + static_cast<std::size_t>(dim + i)), "cells.csv");
        }
        cells.emplace_back(Hyperrectangle(c, h));
      } else if (kind == "ellipsoid") {
        // dim + dim^2 numbers
        const std::size_t total = f.size() - 2;
        long dim = 1;
        while (static_cast<std::size_t>(dim + dim * dim) < total) ++dim;
        if (static_cast<std::size_t>(dim + dim * dim) != total)
          throw ConfigError("cells.csv: malformed ellipsoid row");
        Vec c(dim);
        Mat p(dim, dim);
        std::size_t pos = 2;
        for (long i = 0; i < dim; ++i) c[i] = parse_double(f.at(pos++), "cells.csv");
        for (long r = 0; r < dim; ++r)
          for (long cc = 0; cc < dim; ++cc) p(r, cc) = parse_double(f.at(pos++), "cells.csv");
        cells.emplace_back(Ellipsoid(c, p));
      } else {
        throw ConfigError("cells.csv: unknown cell kind '" + kind + "'");
      }
    }
  }
  if (cells.size() != num_states) throw ConfigError("cells.csv: row count mismatch");

  std::vector<ModelInput> inputs;
  inputs.reserve(num_inputs);
  {
    const auto text = read_text_file(dir / "inputs.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      const std::string& kind = f.at(1);
      if (kind == "vector") {
        Vec v(static_cast<long>(f.size() - 2));
        for (long i = 0; i < v.size(); ++i)
          v[i] = parse_double(f.at(2 + static_cast<std::size_t>(i)), "inputs.csv");
        inputs.emplace_back(v);
      } else if (kind == "affine") {
        // gain (m x n), offset (m), anchor (n): total = m n + m + n
        const std::size_t total = f.size() - 2;
        // recover (m, n): try n from cells dimension
        const long n = static_cast<long>(std::visit(
            [](const auto& s) { return s.dim(); }, cells.front()));
        const long m = static_cast<long>((total - static_cast<std::size_t>(n)) /
                                         static_cast<std::size_t>(n + 1));
        if (static_cast<std::size_t>(m * n + m + n) != total)
          throw ConfigError("inputs.csv: malformed affine row");
        Mat gain(m, n);
        Vec offset(m), anchor(n);
        std::size_t pos = 2;
        for (long r = 0; r < m; ++r)
          for (long c = 0; c < n; ++c) gain(r, c) = parse_double(f.at(pos++), "inputs.csv");
        for (long i = 0; i < m; ++i) offset[i] = parse_double(f.at(pos++), "inputs.csv");
        for (long i = 0; i < n; ++i) anchor[i] = parse_double(f.at(pos++), "inputs.csv");
        inputs.emplace_back(AffineLaw{gain, offset, anchor});
      } else {
        throw ConfigError("inputs.csv: unknown input kind '" + kind + "'");
      }
    }
  }
  if (inputs.size() != num_inputs) throw ConfigError("inputs.csv: row count mismatch");

  std::vector<Transition> transitions;
  {
    const auto text = read_text_file(dir / "transitions.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      transitions.push_back({static_cast<StateId>(parse_u64(f.at(0), "transitions.csv")),
                             static_cast<InputId>(parse_u64(f.at(1), "transitions.csv")),
                             static_cast<StateId>(parse_u64(f.at(2), "transitions.csv"))});
    }
  }

  SolveArtifacts a;
  a.is_cover = header.at("kind").get<std::string>() == "cover";
  a.model = SymbolicModel::build(num_states, num_inputs, std::move(cells), std::move(inputs),
                                 std::move(transitions));
  if (header.contains("state_grid")) {
    a.grid = grid_from_json(header.at("state_grid"));
    a.quantizer = make_grid_quantizer(*a.grid);
  } else {
    a.quantizer = make_cover_quantizer({a.model.cells().begin(), a.model.cells().end()});
  }
  if (header.contains("input_grid")) a.input_grid = grid_from_json(header.at("input_grid"));

  a.controller.table.assign(num_states, {});
  {
    const auto text = read_text_file(dir / "controller.csv");
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("state,", 0) == 0) continue;
      const auto f = split(line, ',');
      const auto s = static_cast<StateId>(parse_u64(f.at(0), "controller.csv"));
      if (s >= num_states) throw ConfigError("controller.csv: state id out of range");
      for (const auto& tok : split(f.at(1), ' '))
        if (!tok.empty())
          a.controller.table[s].push_back(static_cast<InputId>(parse_u64(tok, "controller.csv")));
    }
  }

  {
    const auto text = read_text_file(dir / "value_function.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    a.value.values.assign(num_states, kInfValue);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      const auto s = static_cast<StateId>(parse_u64(f.at(0), "value_function.csv"));
      if (s >= num_states) throw ConfigError("value_function.csv: state id out of range");
      a.value.values[s] = parse_double(f.at(1), "value_function.csv");
    }
  }

  if (a.is_cover && fs::exists(dir / "tree.csv")) {
    const auto text = read_text_file(dir / "tree.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      const StateId id = static_cast<StateId>(parse_u64(f.at(0), "tree.csv"));
      if (id != a.tree.size()) throw ConfigError("tree.csv: ids must be dense and ascending");
      EllipsoidCell cell{std::get<Ellipsoid>(a.model.cell(id)),
                         LocalController{Mat(), Vec(), Vec()}, std::nullopt,
                         parse_double(f.at(2), "tree.csv")};
      if (f.at(1) != "-") cell.parent = static_cast<StateId>(parse_u64(f.at(1), "tree.csv"));
      if (id > 0) {
        const auto* law = std::get_if<AffineLaw>(&a.model.input(id - 1));
        if (!law) throw ConfigError("tree.csv: input " + std::to_string(id - 1) + " is not affine");
        cell.controller = *law;
      }
      a.tree.push_back(std::move(cell));
    }
  }

  a.manifest = std::move(manifest);
  return a;
}

namespace {

struct Viewport {
  double xmin, xmax, ymin, ymax;
  double width = 840.0, height = 840.0, pad = 20.0;
  double sx(double x) const {
    return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad);
  }
  double sy(double y) const {
    return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad);
  }
};

std::string value_color(double v, double vmax) {
  if (v == kInfValue || vmax <= 0.0) return "#dddddd";
  const double t = std::clamp(v / vmax, 0.0, 1.0);
  const int r = static_cast<int>(40 + 180 * t);
  const int g = static_cast<int>(90 + 120 * (1.0 - t));
  const int b = 235;
  std::ostringstream ss;
  ss << "rgb(" << r << "," << g << "," << b << ")";
  return ss.str();
}

void svg_region(std::ostringstream& svg, const Viewport& vp, const Region& r,
                const std::string& fill, const std::string& stroke, double opacity) {
  if (const auto* box = std::get_if<Hyperrectangle>(&r)) {
    const double x = vp.sx(box->lower()[0]);
    const double y = vp.sy(box->upper()[1]);
    const double w = vp.sx(box->upper()[0]) - x;
    const double h = vp.sy(box->lower()[1]) - y;
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"0.4\" opacity=\""
        << opacity << "\"/>\n";
    return;
  }
  const auto& e = std::get<Ellipsoid>(r);
  Eigen::SelfAdjointEigenSolver<Mat> es(e.shape());
  const Vec lam = es.eigenvalues();
  const Mat v = es.eigenvectors();
  const double rx = 1.0 / std::sqrt(lam[0]);
  const double ry = 1.0 / std::sqrt(lam[1]);
  const double angle = std::atan2(v(1, 0), v(0, 0)) * 180.0 / M_PI;
  const double scale = (vp.width - 2 * vp.pad) / (vp.xmax - vp.xmin);
  svg << "<ellipse cx=\"" << vp.sx(e.center()[0]) << "\" cy=\"" << vp.sy(e.center()[1])
      << "\" rx=\"" << rx * scale << "\" ry=\"" << ry * scale << "\" transform=\"rotate("
      << -angle << " " << vp.sx(e.center()[0]) << " " << vp.sy(e.center()[1]) << ")\" fill=\""
      << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"0.4\" opacity=\"" << opacity
      << "\"/>\n";
}

}  // namespace

void save_plot_layers(const fs::path& dir, const SolveArtifacts& artifacts,
                      const ControlProblem& problem, const std::vector<Trajectory>& trajectories) {
  // cells layer with values
  std::string cells = "id,value,kind,data\n";
  for (StateId s = 0; s < artifacts.model.num_states(); ++s) {
    const double v = artifacts.value.at(s);
    cells += std::to_string(s);
    cells += ',';
    cells += v == kInfValue ? "inf" : format_double(v);
    if (const auto* box = std::get_if<Hyperrectangle>(&artifacts.model.cell(s))) {
      cells += ",box";
      append_vec(cells, box->center());
      append_vec(cells, box->half());
    } else {
      const auto& e = std::get<Ellipsoid>(artifacts.model.cell(s));
      cells += ",ellipsoid";
      append_vec(cells, e.center());
      append_mat(cells, e.shape());
    }
    cells += '\n';
  }
  write_text_file(dir / "layer_cells.csv", cells);

  std::string sets = "role,kind,data\n";
  auto add_set = [&](const char* role, const Region& r) {
    sets += role;
    if (const auto* box = std::get_if<Hyperrectangle>(&r)) {
      sets += ",box";
      append_vec(sets, box->center());
      append_vec(sets, box->half());
    } else {
      const auto& e = std::get<Ellipsoid>(r);
      sets += ",ellipsoid";
      append_vec(sets, e.center());
      append_mat(sets, e.shape());
    }
    sets += '\n';
  };
  add_set("state_bounds", Region(problem.system.state_set));
  if (problem.initial_set) add_set("initial", *problem.initial_set);
  if (problem.target_set) add_set("target", *problem.target_set);
  if (problem.safe_set) add_set("safe", *problem.safe_set);
  for (const auto& o : problem.obstacles) add_set("obstacle", o);
  write_text_file(dir / "layer_sets.csv", sets);

  for (std::size_t i = 0; i < trajectories.size(); ++i)
    save_trajectory_csv(dir / ("trajectory_" + std::to_string(i) + ".csv"), trajectories[i]);
}

void save_svg_figure(const fs::path& path, const SolveArtifacts& artifacts,
                     const ControlProblem& problem, const std::vector<Trajectory>& trajectories) {
  if (problem.system.state_dim != 2) return;  // rendered figures are planar only
  const auto& box = problem.system.state_set;
  Viewport vp{box.lower()[0], box.upper()[0], box.lower()[1], box.upper()[1]};

  double vmax = 0.0;
  for (double v : artifacts.value.values)
    if (v != kInfValue) vmax = std::max(vmax, v);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << vp.width
      << "\" height=\"" << vp.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (StateId s = 0; s < artifacts.model.num_states(); ++s) {
    const double v = artifacts.value.at(s);
    if (v == kInfValue) continue;
    svg_region(svg, vp, artifacts.model.cell(s), value_color(v, vmax), "none", 0.8);
  }
  for (const auto& o : problem.obstacles) svg_region(svg, vp, o, "black", "black", 0.9);
  if (problem.target_set) svg_region(svg, vp, *problem.target_set, "red", "darkred", 0.6);
  if (problem.safe_set) svg_region(svg, vp, *problem.safe_set, "none", "darkred", 0.9);
  if (problem.initial_set) svg_region(svg, vp, *problem.initial_set, "green", "darkgreen", 0.6);
  for (const auto& t : trajectories) {
    svg << "<polyline fill=\"none\" stroke=\"blue\" stroke-width=\"1.2\" points=\"";
    for (const auto& x : t.states) svg << vp.sx(x[0]) << "," << vp.sy(x[1]) << " ";
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace symcon
