#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "symcon/ellipsoid_abstraction.hpp"
#include "symcon/grid_abstraction.hpp"
#include "symcon/problems.hpp"
#include "symcon/symbolic.hpp"
#include "symcon/synthesis.hpp"

namespace symcon {

/* Artifact layout under a run directory (formats in docs/artifact_formats.md):
 *   problem.toml      byte copy of the problem file
 *   manifest.json     deterministic run record (hashes, params, seeds, summary)
 *   timings.csv       measured wall-clock seconds (excluded from byte-identity)
 *   model.json        header: dims, counts, quantizer kind (+ grid geometry)
 *   cells.csv         id,kind,center...,half|shape...
 *   inputs.csv        id,kind,vector | gain,offset,anchor
 *   transitions.csv   src,input,dst (sorted)
 *   controller.csv    state,input list (model hash in header row)
 *   value_function.csv state,value
 *   tree.csv          lazy solver: id,parent,cost_bound,center,shape,gain,offset
 */

struct RunManifest {
  std::string problem_file;
  std::string problem_hash;
  std::string solver;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  double abstraction_seconds = 0.0;
  double synthesis_seconds = 0.0;
  double total_seconds = 0.0;
  double coverage_fraction = 0.0;
  std::uint64_t transition_count = 0;
  std::uint64_t cells = 0;
  std::uint64_t domain_size = 0;
  std::uint64_t violations_found = 0;
  bool partial = false;
  std::map<std::string, std::string> artifact_hashes;
};

struct SolveArtifacts {
  SymbolicModel model;
  Quantizer quantizer;
  AbstractController controller;
  ValueFunction value;
  std::vector<EllipsoidCell> tree;  // lazy solver only
  bool is_cover = false;
  std::optional<UniformGrid> grid;        // grid solver
  std::optional<UniformGrid> input_grid;  // grid solver
  RunManifest manifest;
};

std::string hash_file(const std::filesystem::path& p);
std::string hash_bytes(std::string_view data);

void write_text_file(const std::filesystem::path& p, const std::string& content);
std::string read_text_file(const std::filesystem::path& p);

void save_artifacts(const std::filesystem::path& dir, const SolveArtifacts& artifacts,
                    const std::string& problem_file_content);
SolveArtifacts load_artifacts(const std::filesystem::path& dir, bool verify_hashes = true,
                              std::string* hash_warnings = nullptr);

void save_relation_report(const std::filesystem::path& path, const RelationReport& report,
                          const std::string& kind);

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& t);

/* Fig-5-style layers: cells colored by value, problem sets, trajectories. */
void save_plot_layers(const std::filesystem::path& dir, const SolveArtifacts& artifacts,
                      const ControlProblem& problem, const std::vector<Trajectory>& trajectories);
void save_svg_figure(const std::filesystem::path& path, const SolveArtifacts& artifacts,
                     const ControlProblem& problem, const std::vector<Trajectory>& trajectories);

}  // namespace symcon
