#pragma once

// Run directories: manifest.json, config.ini, series.csv and
// snapshot_<k>.csv, written and read back.

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "facetflow/config.hpp"
#include "facetflow/diagnostics.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/grid.hpp"
#include "facetflow/solver.hpp"

namespace facetflow {

inline constexpr const char* artifact_version = "1.0.0";

/// Maps file contents to a hex digest (the CLI supplies SHA-256).
using HashFn = std::function<std::string(const std::string&)>;

inline std::string series_csv(const RunResult& run) {
  std::ostringstream os;
  os << "t,energy,sup_u,sup_V,newton_iters\n";
  for (const auto& s : run.series) {
    os << detail::fmt17(s.t) << ',' << detail::fmt17(s.energy) << ',' << detail::fmt17(s.sup_u) << ','
       << detail::fmt17(s.sup_V) << ',' << s.newton_iters << '\n';
  }
  return os.str();
}

inline std::string snapshot_csv(const ScalarField& u) {
  static const char* axes[3] = {"x", "y", "z"};
  const Grid& g = u.grid;
  std::ostringstream os;
  for (int a = 0; a < g.dim(); ++a) {
    os << axes[a] << ',';
  }
  os << "u\n";
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const auto x = g.coords(i);
    for (int a = 0; a < g.dim(); ++a) {
      os << detail::fmt17(x[a]) << ',';
    }
    os << detail::fmt17(u.values[i]) << '\n';
  }
  return os.str();
}

/// Reads a snapshot written by snapshot_csv on the same grid.
inline ScalarField read_snapshot_csv(const std::filesystem::path& path, const Grid& g, double t) {
  std::ifstream in(path);
  if (!in) {
    throw IncompatibleDataError("cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  if (detail::split(line, ',').size() != static_cast<std::size_t>(g.dim() + 1)) {
    throw IncompatibleDataError(path.string() + ": header does not match the grid dimension");
  }
  ScalarField u(g, t);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto tok = detail::split(line, ',');
    if (i >= g.nodes() || tok.size() != static_cast<std::size_t>(g.dim() + 1)) {
      throw IncompatibleDataError(path.string() + ": malformed row " + std::to_string(i + 2));
    }
    const auto x = g.coords(i);
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(detail::parse_double(path.string(), tok[a]) - x[a]) > 1e-9 * std::max(1.0, g.extent(a))) {
        throw IncompatibleDataError(path.string() + ": row " + std::to_string(i + 2) + " is not on the grid");
      }
    }
    u.values[i++] = detail::parse_double(path.string(), tok[g.dim()]);
  }
  if (i != g.nodes()) {
    throw IncompatibleDataError(path.string() + ": expected " + std::to_string(g.nodes()) + " rows");
  }
  return u;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IncompatibleDataError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace detail

/// Writes runs/<name>/ and returns the manifest.
inline nlohmann::json write_run(const std::filesystem::path& dir, const RunResult& run, const ExperimentConfig& cfg,
                                const HashFn& hash, const std::string& outcome = "converged") {
  std::filesystem::create_directories(dir);
  const std::string cfg_text = emit_config(cfg);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.ini", cfg_text);
  files.emplace_back("series.csv", series_csv(run));
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    files.emplace_back("snapshot_" + std::to_string(k) + ".csv", snapshot_csv(run.snapshots[k]));
  }
  nlohmann::json m;
  m["name"] = run.name;
  m["config_hash"] = hash(cfg_text);
  m["versions"] = {{"facetflow", artifact_version},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  nlohmann::json inv = nlohmann::json::array();
  for (const auto& [name, text] : files) {
    detail::write_text(dir / name, text);
    inv.push_back({{"file", name}, {"bytes", text.size()}});
  }
  m["files"] = inv;
  m["wall_seconds"] = run.wall_seconds;
  m["outcome"] = outcome;
  m["eps"] = run.eps();
  std::vector<double> times;
  for (const auto& s : run.snapshots) {
    times.push_back(s.t);
  }
  m["snapshot_times"] = times;
  m["bc_sup"] = run.bc_sup;
  m["bc_min"] = run.bc_min;
  m["bc_max"] = run.bc_max;
  m["static_bc"] = run.static_bc;
  detail::write_text(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

/// Reloads a run directory, rebuilding the mollified density from the stored
/// config. With a hash function the stored config hash is verified.
inline RunResult load_run(const std::filesystem::path& dir, const HashFn& hash = {}) {
  if (!std::filesystem::is_directory(dir)) {
    throw IncompatibleDataError("run directory not found: " + dir.string());
  }
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(detail::read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IncompatibleDataError("manifest.json: " + std::string(e.what()));
  }
  const std::string cfg_text = detail::read_text(dir / "config.ini");
  if (hash && hash(cfg_text) != m.at("config_hash").get<std::string>()) {
    throw IncompatibleDataError("config hash does not match the manifest");
  }
  const ExperimentConfig cfg = parse_config_text(cfg_text, dir);
  RunResult run;
  run.name = m.at("name").get<std::string>();
  run.config = make_solver_config(cfg);
  run.model = make_model(cfg);
  run.grid = make_grid(cfg);
  run.density = std::make_shared<const MollifiedDensity>(run.model, cfg.mollifier.eps, make_quad(cfg));
  run.bc_sup = m.at("bc_sup").get<double>();
  run.bc_min = m.at("bc_min").get<double>();
  run.bc_max = m.at("bc_max").get<double>();
  run.static_bc = m.at("static_bc").get<bool>();
  run.wall_seconds = m.at("wall_seconds").get<double>();
  const auto times = m.at("snapshot_times").get<std::vector<double>>();
  for (std::size_t k = 0; k < times.size(); ++k) {
    run.snapshots.push_back(read_snapshot_csv(dir / ("snapshot_" + std::to_string(k) + ".csv"), run.grid, times[k]));
    run.gradients.push_back(gradient_field(run.snapshots.back()));
  }
  std::istringstream ss(detail::read_text(dir / "series.csv"));
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    const auto tok = detail::split(line, ',');
    if (tok.size() != 5) {
      continue;
    }
    StepRecord r;
    r.t = detail::parse_double("series.csv", tok[0]);
    r.energy = detail::parse_double("series.csv", tok[1]);
    r.sup_u = detail::parse_double("series.csv", tok[2]);
    r.sup_V = detail::parse_double("series.csv", tok[3]);
    r.newton_iters = static_cast<int>(detail::parse_int("series.csv", tok[4]));
    run.series.push_back(r);
  }
  return run;
}

} // namespace facetflow
