#pragma once

// INI experiment configuration: parsing with located validation errors,
// canonical emission, and conversion to library objects.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "facetflow/boundary.hpp"
#include "facetflow/diagnostics.hpp"
#include "facetflow/energy.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/grid.hpp"
#include "facetflow/mollifier.hpp"
#include "facetflow/regularity.hpp"
#include "facetflow/solver.hpp"

namespace facetflow {

struct ExperimentConfig {
  struct Model {
    int n = 0; // 0: same as grid.dim
    double p = 1.5;
    std::optional<double> lambda;
    std::optional<double> Lambda;
    std::optional<double> K;
    std::string density = "euclidean"; // euclidean | anisotropic
    std::vector<double> anisotropy;    // row-major n x n
    std::string regime = "any";        // any | subcritical | supercritical
    bool operator==(const Model&) const = default;
  } model;
  struct Mollifier {
    double eps = 0.1;
    double quad_tol = 1e-12;
    int max_level = 12; // tanh-sinh refinement levels (node count ~ 2^level)
    double r_max = 0.0;
    double expected_grad = 1.0;
    int spacing_divisor = 16;
    bool operator==(const Mollifier&) const = default;
  } mollifier;
  struct GridSection {
    int dim = 1;
    std::vector<int> cells{32};
    std::vector<double> extent{1.0};
    bool operator==(const GridSection&) const = default;
  } grid;
  struct Time {
    double t_end = 0.1;
    double dt = 0.01;
    int snapshot_every = 1;
    bool operator==(const Time&) const = default;
  } time;
  struct Solver {
    double newton_tol = 1e-10;
    int newton_max_iter = 40;
    double damping = 0.5;
    int max_damping_steps = 20;
    bool picard_fallback = true;
    int picard_max_iter = 2000;
    std::string linear = "automatic"; // automatic | direct | iterative
    bool operator==(const Solver&) const = default;
  } solver;
  struct Boundary {
    std::string kind = "constant"; // constant | affine | bump | poiseuille | tabulated
    double value = 0.0;
    std::vector<double> slope;
    double amplitude = 1.0;
    std::string file;
    bool operator==(const Boundary&) const = default;
  } boundary;
  struct Experiment {
    std::string name = "run";
    std::string output_dir = "runs";
    std::vector<double> eps_list;
    double delta = 0.1;
    double s = 4.0;
    double q = 2.0;
    std::vector<double> cylinder_center; // empty: domain centre
    std::optional<double> cylinder_t0;   // empty: t_end
    double cylinder_R = 0.25;
    double tau_fraction = 0.1;
    std::uint64_t seed = 1;
    int samples = 10000;
    double sample_radius = 3.0;
    double alpha = 2.0;
    double M = 4.0;
    double r = 2.0;
    bool operator==(const Experiment&) const = default;
  } experiment;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) {
    return {};
  }
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    out.push_back(trim(cur));
  }
  return out;
}

inline double parse_double(const std::string& loc, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(loc, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(v)) {
    throw ConfigError(loc, "value must be finite");
  }
  return v;
}

inline long long parse_int(const std::string& loc, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(loc, "expected an integer, got '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& loc, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    return true;
  }
  if (t == "false" || t == "0" || t == "no" || t == "off") {
    return false;
  }
  throw ConfigError(loc, "expected a boolean, got '" + text + "'");
}

/// Reads keys from a property tree, remembering which ones were consumed so
/// unknown keys can be reported.
class IniReader {
public:
  explicit IniReader(const boost::property_tree::ptree& pt) : pt_(pt) {}

  std::optional<std::string> raw(const std::string& sec, const std::string& key) {
    used_.insert(sec + "." + key);
    const auto s = pt_.get_child_optional(sec);
    if (!s) {
      return std::nullopt;
    }
    const auto v = s->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
    if (!v) {
      return std::nullopt;
    }
    return trim(*v);
  }

  void num(const std::string& sec, const std::string& key, double& out) {
    if (auto v = raw(sec, key)) {
      out = parse_double(sec + "." + key, *v);
    }
  }
  void num(const std::string& sec, const std::string& key, std::optional<double>& out) {
    if (auto v = raw(sec, key)) {
      out = parse_double(sec + "." + key, *v);
    }
  }
  void integer(const std::string& sec, const std::string& key, int& out) {
    if (auto v = raw(sec, key)) {
      const long long x = parse_int(sec + "." + key, *v);
      if (x < -1000000000LL || x > 1000000000LL) {
        throw ConfigError(sec + "." + key, "integer out of range");
      }
      out = static_cast<int>(x);
    }
  }
  void seed(const std::string& sec, const std::string& key, std::uint64_t& out) {
    if (auto v = raw(sec, key)) {
      const long long x = parse_int(sec + "." + key, *v);
      if (x < 0) {
        throw ConfigError(sec + "." + key, "seed must be nonnegative");
      }
      out = static_cast<std::uint64_t>(x);
    }
  }
  void flag(const std::string& sec, const std::string& key, bool& out) {
    if (auto v = raw(sec, key)) {
      out = parse_bool(sec + "." + key, *v);
    }
  }
  void text(const std::string& sec, const std::string& key, std::string& out) {
    if (auto v = raw(sec, key)) {
      out = *v;
    }
  }
  void list(const std::string& sec, const std::string& key, std::vector<double>& out) {
    if (auto v = raw(sec, key)) {
      out.clear();
      if (v->empty()) {
        return;
      }
      for (const auto& tok : split(*v, ',')) {
        out.push_back(parse_double(sec + "." + key, tok));
      }
    }
  }
  void int_list(const std::string& sec, const std::string& key, std::vector<int>& out) {
    if (auto v = raw(sec, key)) {
      out.clear();
      for (const auto& tok : split(*v, ',')) {
        const long long x = parse_int(sec + "." + key, tok);
        if (x < 0 || x > 100000000LL) {
          throw ConfigError(sec + "." + key, "cell count out of range");
        }
        out.push_back(static_cast<int>(x));
      }
    }
  }

  void reject_unknown() const {
    for (const auto& [sec, child] : pt_) {
      if (child.empty() && !child.data().empty()) {
        throw ConfigError(sec, "key outside of any section");
      }
      for (const auto& [key, unused] : child) {
        (void)unused;
        if (!used_.count(sec + "." + key)) {
          throw ConfigError(sec + "." + key, "unknown key");
        }
      }
    }
  }

private:
  const boost::property_tree::ptree& pt_;
  std::set<std::string> used_;
};

template <class T>
inline std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) {
      out += ", ";
    }
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt17(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

} // namespace detail

/// Checks every constraint of the downstream types; throws ConfigError
/// located by "section.key".
inline void validate_config(ExperimentConfig& c) {
  using E = ConfigError;
  auto& g = c.grid;
  if (g.dim < 1 || g.dim > 3) {
    throw E("grid.dim", "must be 1, 2 or 3");
  }
  if (g.cells.size() == 1) {
    g.cells.assign(static_cast<std::size_t>(g.dim), g.cells.front());
  }
  if (g.extent.size() == 1) {
    g.extent.assign(static_cast<std::size_t>(g.dim), g.extent.front());
  }
  if (g.cells.size() != static_cast<std::size_t>(g.dim)) {
    throw E("grid.cells", "needs one entry or one per axis");
  }
  if (g.extent.size() != static_cast<std::size_t>(g.dim)) {
    throw E("grid.extent", "needs one entry or one per axis");
  }
  double nodes = 1.0;
  for (int a = 0; a < g.dim; ++a) {
    if (g.cells[a] < 2) {
      throw E("grid.cells", "each axis needs at least 2 cells");
    }
    if (!(g.extent[a] > 0.0)) {
      throw E("grid.extent", "must be positive");
    }
    nodes *= g.cells[a] + 1.0;
  }
  if (nodes > static_cast<double>(Grid::default_node_cap)) {
    throw E("grid.cells", "grid exceeds the node cap");
  }

  auto& m = c.model;
  if (m.n == 0) {
    m.n = g.dim;
  }
  if (m.n != g.dim) {
    throw E("model.n", "must match grid.dim");
  }
  if (!(m.p > 1.0)) {
    throw E("model.p", "p must exceed 1");
  }
  if (m.lambda && !(*m.lambda > 0.0)) {
    throw E("model.lambda", "must be positive");
  }
  if (m.K && !(*m.K > 0.0)) {
    throw E("model.K", "must be positive");
  }
  if (m.Lambda && !(*m.Lambda >= m.lambda.value_or(0.5 * std::min(m.p - 1.0, 1.0)))) {
    throw E("model.Lambda", "must be at least lambda");
  }
  if (m.density != "euclidean" && m.density != "anisotropic") {
    throw E("model.density", "must be 'euclidean' or 'anisotropic'");
  }
  if (m.density == "anisotropic") {
    if (m.anisotropy.size() != static_cast<std::size_t>(m.n * m.n)) {
      throw E("model.anisotropy", "needs n*n row-major entries");
    }
    Eigen::MatrixXd A(m.n, m.n);
    for (int i = 0; i < m.n; ++i) {
      for (int j = 0; j < m.n; ++j) {
        A(i, j) = m.anisotropy[static_cast<std::size_t>(i * m.n + j)];
      }
    }
    if ((A - A.transpose()).norm() > 1e-12 * std::max(1.0, A.norm())) {
      throw E("model.anisotropy", "matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      throw E("model.anisotropy", "matrix must be positive definite");
    }
  } else if (!m.anisotropy.empty()) {
    throw E("model.anisotropy", "only allowed with density = anisotropic");
  }
  const double threshold = 2.0 * m.n / (m.n + 2.0);
  const bool sub = m.n >= 3 && m.p <= threshold;
  if (m.regime == "subcritical" && !sub) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "p = %g is not subcritical: needs n >= 3 and p <= 2n/(n+2) = %g", m.p, threshold);
    throw E("model.p", buf);
  }
  if (m.regime == "supercritical" && sub) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "p = %g is subcritical since p <= 2n/(n+2) = %g", m.p, threshold);
    throw E("model.p", buf);
  }
  if (m.regime != "any" && m.regime != "subcritical" && m.regime != "supercritical") {
    throw E("model.regime", "must be 'any', 'subcritical' or 'supercritical'");
  }

  const auto& q = c.mollifier;
  if (!(q.eps > 0.0 && q.eps < 1.0)) {
    throw E("mollifier.eps", "must lie in (0, 1)");
  }
  if (!(q.quad_tol > 0.0 && q.quad_tol <= 1e-3)) {
    throw E("mollifier.quad_tol", "must lie in (0, 1e-3]");
  }
  if (q.max_level < 3 || q.max_level > 20) {
    throw E("mollifier.max_level", "must lie in [3, 20]");
  }
  if (!(q.r_max >= 0.0)) {
    throw E("mollifier.r_max", "must be nonnegative (0 selects the default)");
  }
  if (!(q.expected_grad > 0.0)) {
    throw E("mollifier.expected_grad", "must be positive");
  }
  if (q.spacing_divisor < 2) {
    throw E("mollifier.spacing_divisor", "must be at least 2");
  }

  const auto& t = c.time;
  if (!(t.dt > 0.0)) {
    throw E("time.dt", "must be positive");
  }
  if (!(t.t_end > 0.0)) {
    throw E("time.t_end", "must be positive");
  }
  if (t.snapshot_every < 1) {
    throw E("time.snapshot_every", "must be at least 1");
  }

  const auto& s = c.solver;
  if (!(s.newton_tol > 0.0)) {
    throw E("solver.newton_tol", "must be positive");
  }
  if (s.newton_max_iter < 1) {
    throw E("solver.newton_max_iter", "must be at least 1");
  }
  if (!(s.damping > 0.0 && s.damping < 1.0)) {
    throw E("solver.damping", "must lie in (0, 1)");
  }
  if (s.max_damping_steps < 0) {
    throw E("solver.max_damping_steps", "must be nonnegative");
  }
  if (s.picard_max_iter < 1) {
    throw E("solver.picard_max_iter", "must be at least 1");
  }
  if (s.linear != "automatic" && s.linear != "direct" && s.linear != "iterative") {
    throw E("solver.linear", "must be 'automatic', 'direct' or 'iterative'");
  }

  auto& b = c.boundary;
  if (b.kind != "constant" && b.kind != "affine" && b.kind != "bump" && b.kind != "poiseuille" &&
      b.kind != "tabulated") {
    throw E("boundary.kind", "must be constant, affine, bump, poiseuille or tabulated");
  }
  if (b.kind == "affine" && b.slope.size() != static_cast<std::size_t>(g.dim)) {
    throw E("boundary.slope", "needs one entry per axis");
  }
  if (b.kind != "affine" && !b.slope.empty()) {
    throw E("boundary.slope", "only allowed with kind = affine");
  }
  if (b.kind == "tabulated") {
    if (b.file.empty()) {
      throw E("boundary.file", "required with kind = tabulated");
    }
    if (!std::filesystem::exists(b.file)) {
      throw E("boundary.file", "file not found: " + b.file);
    }
  }

  auto& x = c.experiment;
  if (x.name.empty() || x.name.find_first_of("/\\") != std::string::npos) {
    throw E("experiment.name", "must be a nonempty plain name");
  }
  for (std::size_t i = 0; i < x.eps_list.size(); ++i) {
    if (!(x.eps_list[i] > 0.0 && x.eps_list[i] < 1.0)) {
      throw E("experiment.eps_list", "entries must lie in (0, 1)");
    }
    if (i > 0 && !(x.eps_list[i] < x.eps_list[i - 1])) {
      throw E("experiment.eps_list", "must be strictly decreasing");
    }
  }
  if (!(x.delta > 0.0)) {
    throw E("experiment.delta", "must be positive");
  }
  if (!(x.s > 0.0)) {
    throw E("experiment.s", "must be positive");
  }
  if (!(x.q > 0.0)) {
    throw E("experiment.q", "must be positive");
  }
  if (!x.cylinder_center.empty() && x.cylinder_center.size() != static_cast<std::size_t>(g.dim)) {
    throw E("experiment.cylinder_center", "needs one entry per axis");
  }
  if (!(x.cylinder_R > 0.0)) {
    throw E("experiment.cylinder_R", "must be positive");
  }
  if (x.cylinder_t0 && !(*x.cylinder_t0 > 0.0 && *x.cylinder_t0 <= t.t_end)) {
    throw E("experiment.cylinder_t0", "must lie in (0, t_end]");
  }
  if (!(x.tau_fraction >= 0.0 && x.tau_fraction < 1.0)) {
    throw E("experiment.tau_fraction", "must lie in [0, 1)");
  }
  if (x.samples < 1) {
    throw E("experiment.samples", "must be at least 1");
  }
  if (!(x.sample_radius > 0.0)) {
    throw E("experiment.sample_radius", "must be positive");
  }
  if (!(x.alpha >= 0.0)) {
    throw E("experiment.alpha", "must be nonnegative");
  }
  if (!(x.M > 1.0)) {
    throw E("experiment.M", "must exceed 1");
  }
  if (!(x.r > 1.0)) {
    throw E("experiment.r", "must exceed 1");
  }
}

/// Parses INI text; relative boundary.file paths resolve against base_dir.
inline ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
  boost::property_tree::ptree pt;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  detail::IniReader r(pt);
  ExperimentConfig c;
  r.integer("model", "n", c.model.n);
  r.num("model", "p", c.model.p);
  r.num("model", "lambda", c.model.lambda);
  r.num("model", "Lambda", c.model.Lambda);
  r.num("model", "K", c.model.K);
  r.text("model", "density", c.model.density);
  r.list("model", "anisotropy", c.model.anisotropy);
  r.text("model", "regime", c.model.regime);

  r.num("mollifier", "eps", c.mollifier.eps);
  r.num("mollifier", "quad_tol", c.mollifier.quad_tol);
  r.integer("mollifier", "max_level", c.mollifier.max_level);
  r.num("mollifier", "r_max", c.mollifier.r_max);
  r.num("mollifier", "expected_grad", c.mollifier.expected_grad);
  r.integer("mollifier", "spacing_divisor", c.mollifier.spacing_divisor);

  r.integer("grid", "dim", c.grid.dim);
  r.int_list("grid", "cells", c.grid.cells);
  r.list("grid", "extent", c.grid.extent);

  r.num("time", "t_end", c.time.t_end);
  r.num("time", "dt", c.time.dt);
  r.integer("time", "snapshot_every", c.time.snapshot_every);

  r.num("solver", "newton_tol", c.solver.newton_tol);
  r.integer("solver", "newton_max_iter", c.solver.newton_max_iter);
  r.num("solver", "damping", c.solver.damping);
  r.integer("solver", "max_damping_steps", c.solver.max_damping_steps);
  r.flag("solver", "picard_fallback", c.solver.picard_fallback);
  r.integer("solver", "picard_max_iter", c.solver.picard_max_iter);
  r.text("solver", "linear", c.solver.linear);

  r.text("boundary", "kind", c.boundary.kind);
  r.num("boundary", "value", c.boundary.value);
  r.list("boundary", "slope", c.boundary.slope);
  r.num("boundary", "amplitude", c.boundary.amplitude);
  r.text("boundary", "file", c.boundary.file);
  if (!c.boundary.file.empty()) {
    std::filesystem::path f(c.boundary.file);
    if (f.is_relative() && !base_dir.empty()) {
      f = base_dir / f;
    }
    c.boundary.file = f.lexically_normal().string();
  }

  r.text("experiment", "name", c.experiment.name);
  r.text("experiment", "output_dir", c.experiment.output_dir);
  r.list("experiment", "eps_list", c.experiment.eps_list);
  r.num("experiment", "delta", c.experiment.delta);
  r.num("experiment", "s", c.experiment.s);
  r.num("experiment", "q", c.experiment.q);
  r.list("experiment", "cylinder_center", c.experiment.cylinder_center);
  r.num("experiment", "cylinder_t0", c.experiment.cylinder_t0);
  r.num("experiment", "cylinder_R", c.experiment.cylinder_R);
  r.num("experiment", "tau_fraction", c.experiment.tau_fraction);
  r.seed("experiment", "seed", c.experiment.seed);
  r.integer("experiment", "samples", c.experiment.samples);
  r.num("experiment", "sample_radius", c.experiment.sample_radius);
  r.num("experiment", "alpha", c.experiment.alpha);
  r.num("experiment", "M", c.experiment.M);
  r.num("experiment", "r", c.experiment.r);

  r.reject_unknown();
  validate_config(c);
  return c;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string(), "cannot open config file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  }
}

/// Canonical INI text; parse_config_text(emit_config(c)) == c for validated c.
inline std::string emit_config(const ExperimentConfig& c) {
  using detail::fmt17;
  using detail::join;
  std::ostringstream os;
  os << "[model]\n";
  os << "n = " << c.model.n << "\n";
  os << "p = " << fmt17(c.model.p) << "\n";
  if (c.model.lambda) {
    os << "lambda = " << fmt17(*c.model.lambda) << "\n";
  }
  if (c.model.Lambda) {
    os << "Lambda = " << fmt17(*c.model.Lambda) << "\n";
  }
  if (c.model.K) {
    os << "K = " << fmt17(*c.model.K) << "\n";
  }
  os << "density = " << c.model.density << "\n";
  if (!c.model.anisotropy.empty()) {
    os << "anisotropy = " << join(c.model.anisotropy) << "\n";
  }
  os << "regime = " << c.model.regime << "\n\n";

  os << "[mollifier]\n";
  os << "eps = " << fmt17(c.mollifier.eps) << "\n";
  os << "quad_tol = " << fmt17(c.mollifier.quad_tol) << "\n";
  os << "max_level = " << c.mollifier.max_level << "\n";
  os << "r_max = " << fmt17(c.mollifier.r_max) << "\n";
  os << "expected_grad = " << fmt17(c.mollifier.expected_grad) << "\n";
  os << "spacing_divisor = " << c.mollifier.spacing_divisor << "\n\n";

  os << "[grid]\n";
  os << "dim = " << c.grid.dim << "\n";
  os << "cells = " << join(c.grid.cells) << "\n";
  os << "extent = " << join(c.grid.extent) << "\n\n";

  os << "[time]\n";
  os << "t_end = " << fmt17(c.time.t_end) << "\n";
  os << "dt = " << fmt17(c.time.dt) << "\n";
  os << "snapshot_every = " << c.time.snapshot_every << "\n\n";

  os << "[solver]\n";
  os << "newton_tol = " << fmt17(c.solver.newton_tol) << "\n";
  os << "newton_max_iter = " << c.solver.newton_max_iter << "\n";
  os << "damping = " << fmt17(c.solver.damping) << "\n";
  os << "max_damping_steps = " << c.solver.max_damping_steps << "\n";
  os << "picard_fallback = " << (c.solver.picard_fallback ? "true" : "false") << "\n";
  os << "picard_max_iter = " << c.solver.picard_max_iter << "\n";
  os << "linear = " << c.solver.linear << "\n\n";

  os << "[boundary]\n";
  os << "kind = " << c.boundary.kind << "\n";
  os << "value = " << fmt17(c.boundary.value) << "\n";
  if (!c.boundary.slope.empty()) {
    os << "slope = " << join(c.boundary.slope) << "\n";
  }
  os << "amplitude = " << fmt17(c.boundary.amplitude) << "\n";
  if (!c.boundary.file.empty()) {
    os << "file = " << c.boundary.file << "\n";
  }
  os << "\n";

  const auto& x = c.experiment;
  os << "[experiment]\n";
  os << "name = " << x.name << "\n";
  os << "output_dir = " << x.output_dir << "\n";
  if (!x.eps_list.empty()) {
    os << "eps_list = " << join(x.eps_list) << "\n";
  }
  os << "delta = " << fmt17(x.delta) << "\n";
  os << "s = " << fmt17(x.s) << "\n";
  os << "q = " << fmt17(x.q) << "\n";
  if (!x.cylinder_center.empty()) {
    os << "cylinder_center = " << join(x.cylinder_center) << "\n";
  }
  if (x.cylinder_t0) {
    os << "cylinder_t0 = " << fmt17(*x.cylinder_t0) << "\n";
  }
  os << "cylinder_R = " << fmt17(x.cylinder_R) << "\n";
  os << "tau_fraction = " << fmt17(x.tau_fraction) << "\n";
  os << "seed = " << x.seed << "\n";
  os << "samples = " << x.samples << "\n";
  os << "sample_radius = " << fmt17(x.sample_radius) << "\n";
  os << "alpha = " << fmt17(x.alpha) << "\n";
  os << "M = " << fmt17(x.M) << "\n";
  os << "r = " << fmt17(x.r) << "\n";
  return os.str();
}

// ---- conversion to library objects -------------------------------------

inline EnergyModel make_model(const ExperimentConfig& c) {
  EnergyModel m;
  if (c.model.density == "anisotropic") {
    Eigen::MatrixXd A(c.model.n, c.model.n);
    for (int i = 0; i < c.model.n; ++i) {
      for (int j = 0; j < c.model.n; ++j) {
        A(i, j) = c.model.anisotropy[static_cast<std::size_t>(i * c.model.n + j)];
      }
    }
    m = EnergyModel::anisotropic(A, c.model.p);
  } else {
    m = EnergyModel::euclidean(c.model.n, c.model.p);
  }
  if (c.model.lambda) {
    m.lambda = *c.model.lambda;
  }
  if (c.model.Lambda) {
    m.Lambda = *c.model.Lambda;
  }
  if (c.model.K) {
    m.K = *c.model.K;
  }
  m.validate();
  return m;
}

inline QuadSpec make_quad(const ExperimentConfig& c) {
  QuadSpec q;
  q.tol = c.mollifier.quad_tol;
  q.max_level = c.mollifier.max_level;
  q.r_max = c.mollifier.r_max;
  q.expected_grad = c.mollifier.expected_grad;
  q.spacing_divisor = c.mollifier.spacing_divisor;
  return q;
}

inline Grid make_grid(const ExperimentConfig& c) {
  std::array<int, 3> cells{2, 2, 2};
  std::array<double, 3> ext{1.0, 1.0, 1.0};
  for (int a = 0; a < c.grid.dim; ++a) {
    cells[a] = c.grid.cells[a];
    ext[a] = c.grid.extent[a];
  }
  return Grid(c.grid.dim, cells, ext);
}

inline SolverConfig make_solver_config(const ExperimentConfig& c) {
  SolverConfig s;
  s.dt = c.time.dt;
  s.t_end = c.time.t_end;
  s.snapshot_every = c.time.snapshot_every;
  s.newton_tol = c.solver.newton_tol;
  s.newton_max_iter = c.solver.newton_max_iter;
  s.damping = c.solver.damping;
  s.max_damping_steps = c.solver.max_damping_steps;
  s.picard_fallback = c.solver.picard_fallback;
  s.picard_max_iter = c.solver.picard_max_iter;
  s.linear = c.solver.linear == "direct"      ? LinearSolverKind::direct
             : c.solver.linear == "iterative" ? LinearSolverKind::iterative
                                              : LinearSolverKind::automatic;
  return s;
}

/// Tabulated data file: header naming the coordinates then `initial,lateral`,
/// one row per grid node in any order.
inline BoundaryData read_tabulated_boundary(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("boundary.file", "cannot open " + path);
  }
  std::string line;
  std::getline(in, line);
  const auto header = detail::split(line, ',');
  if (header.size() != static_cast<std::size_t>(g.dim() + 2)) {
    throw ConfigError("boundary.file", "expected " + std::to_string(g.dim() + 2) + " columns");
  }
  std::vector<double> ini(g.nodes(), 0.0);
  std::vector<double> lat(g.nodes(), 0.0);
  std::vector<char> seen(g.nodes(), 0);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) {
      continue;
    }
    const std::string loc = "boundary.file:" + std::to_string(row);
    const auto tok = detail::split(line, ',');
    if (tok.size() != header.size()) {
      throw ConfigError(loc, "wrong column count");
    }
    int m[3] = {0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
      const double x = detail::parse_double(loc, tok[a]);
      const double k = x / g.h(a);
      m[a] = static_cast<int>(std::lround(k));
      if (std::abs(k - m[a]) > 1e-6 || m[a] < 0 || m[a] > g.cells(a)) {
        throw ConfigError(loc, "coordinate is not a grid node");
      }
    }
    const std::size_t idx = g.index(m[0], m[1], m[2]);
    ini[idx] = detail::parse_double(loc, tok[g.dim()]);
    lat[idx] = detail::parse_double(loc, tok[g.dim() + 1]);
    seen[idx] = 1;
  }
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    if (!seen[i]) {
      throw ConfigError("boundary.file", "missing node " + std::to_string(i));
    }
  }
  return BoundaryData::tabulated(g, std::move(ini), std::move(lat));
}

inline BoundaryData make_boundary(const ExperimentConfig& c, const Grid& g) {
  const auto& b = c.boundary;
  const double base = b.value;
  const double amp = b.amplitude;
  const int dim = g.dim();
  Point ext{g.extent(0), g.extent(1), g.extent(2)};
  if (b.kind == "constant") {
    return BoundaryData::constant(base);
  }
  if (b.kind == "affine") {
    Point s{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      s[a] = b.slope[a];
    }
    return BoundaryData::affine(base, s);
  }
  if (b.kind == "bump") {
    return BoundaryData::function([base](const Point&, double) { return base; },
                                  [base, amp, dim, ext](const Point& x) {
                                    double v = amp;
                                    for (int a = 0; a < dim; ++a) {
                                      v *= std::sin(std::numbers::pi * x[a] / ext[a]);
                                    }
                                    return base + v;
                                  },
                                  true);
  }
  if (b.kind == "poiseuille") {
    return BoundaryData::function([base](const Point&, double) { return base; },
                                  [base, amp, dim, ext](const Point& x) {
                                    double v = amp;
                                    for (int a = 0; a < dim; ++a) {
                                      v *= 4.0 * x[a] * (ext[a] - x[a]) / (ext[a] * ext[a]);
                                    }
                                    return base + v;
                                  },
                                  true);
  }
  return read_tabulated_boundary(b.file, g);
}

inline ParabolicCylinder make_cylinder(const ExperimentConfig& c) {
  ParabolicCylinder Q;
  for (int a = 0; a < c.grid.dim; ++a) {
    Q.center[a] = c.experiment.cylinder_center.empty() ? 0.5 * c.grid.extent[a] : c.experiment.cylinder_center[a];
  }
  Q.t0 = c.experiment.cylinder_t0.value_or(c.time.t_end);
  Q.R = c.experiment.cylinder_R;
  return Q;
}

} // namespace facetflow
