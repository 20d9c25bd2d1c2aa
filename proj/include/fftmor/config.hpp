/**
 * @file config.hpp
 * @brief JSON run configuration.
 *
 * Example:
 * @code{.json}
 * {
 *   "name": "circle",
 *   "grid": [128, 128],
 *   "geometry": {"kind": "circle", "center": [0.5, 0.5], "radius": 0.25},
 *   "materials": [
 *     {"model": "elastic", "lambda": 1, "mu": 1},
 *     {"model": "elastic", "lambda": 2, "mu": 2}
 *   ],
 *   "macro_strain": [[0.01, 0.0], [0.0, -0.01]],
 *   "patterns": ["radial", "adapted"],
 *   "R": [1.54, 3.06, 6.02],
 *   "tol": 1e-8, "max_iter": 10000, "load_steps": 1,
 *   "output": "out/circle", "seed": 42
 * }
 * @endcode
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fftmor/geometry.hpp"
#include "fftmor/materials.hpp"
#include "fftmor/sampling.hpp"
#include "fftmor/solver.hpp"

namespace fftmor {

/// Invalid configuration; field() names the offending entry (e.g. "materials[1].mu").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_{std::move(field)} {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::string name = "run";
  int dim = 2;
  std::array<int, 3> grid{64, 64, 1};
  std::string geometry_kind = "circle";
  GeometrySpec geometry = Circle{};
  /// Optional phase-map file (.spmr or .csv) used instead of a generated geometry.
  std::optional<std::filesystem::path> phase_map;
  std::vector<Material> materials;
  /// Full 3×3 macroscopic strain; only the leading dim×dim block is used.
  std::array<std::array<double, 3>, 3> macro_strain{};
  std::vector<PatternKind> patterns{PatternKind::radial, PatternKind::adapted};
  std::vector<double> R{1.54};
  SolveSettings solver;
  RadialOptions radial;
  bool compatibility = true;
  bool write_fields = true;
  std::filesystem::path output = "out";
  std::uint64_t seed = 42;

  template <int Dim>
  Grid<Dim> make_grid() const {
    typename Grid<Dim>::Index d{};
    for (int j = 0; j < Dim; ++j) d[j] = grid[j];
    return Grid<Dim>(d);
  }

  template <int Dim>
  MacroTensor<Dim> macro() const {
    MacroTensor<Dim> e;
    for (int a = 0; a < Dim; ++a)
      for (int b = a; b < Dim; ++b) e(a, b) = macro_strain[a][b];
    return e;
  }

  std::string material_label() const {
    for (const auto& m : materials)
      if (is_plastic(m)) return "elastoplastic";
    return "elastic";
  }
};

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "missing");
  return j.at(key);
}

inline std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

inline long long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(field, "expected an integer");
  return j.get<long long>();
}

inline double opt_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(where, key)) : fallback;
}

inline Point point(const json& j, const std::string& field, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ConfigError(field, "expected an array of " + std::to_string(dim) + " numbers");
  Point p{0.5, 0.5, 0.5};
  for (int a = 0; a < dim; ++a) p[a] = number(j[a], field + "[" + std::to_string(a) + "]");
  return p;
}

inline Point opt_point(const json& obj, const std::string& key, const std::string& where, int dim, Point fallback) {
  return obj.contains(key) ? point(obj.at(key), join(where, key), dim) : fallback;
}

inline void check_unit_point(const Point& p, int dim, const std::string& field) {
  for (int a = 0; a < dim; ++a)
    if (p[a] < 0.0 || p[a] > 1.0) throw ConfigError(field, "coordinates must lie in [0, 1]");
}

inline GeometrySpec parse_geometry(const json& g, int dim, std::uint64_t seed, std::string& kind_out) {
  const std::string w = "geometry";
  if (!g.is_object()) throw ConfigError(w, "expected an object");
  const auto& kind_j = require(g, "kind", w);
  if (!kind_j.is_string()) throw ConfigError(w + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  kind_out = kind;
  const Point mid{0.5, 0.5, 0.5};
  auto center = [&] {
    const Point c = opt_point(g, "center", w, dim, mid);
    check_unit_point(c, dim, w + ".center");
    return c;
  };
  // radius taken directly or from a target inclusion volume fraction
  auto radius_or_fraction = [&](double fallback) {
    if (g.contains("radius") && g.contains("volume_fraction"))
      throw ConfigError(w + ".radius", "give either radius or volume_fraction, not both");
    if (g.contains("volume_fraction")) {
      const double f = number(g.at("volume_fraction"), w + ".volume_fraction");
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError(w + ".volume_fraction", "must lie in [0, 1]");
      return dim == 2 ? std::sqrt(f / std::numbers::pi) : std::cbrt(3.0 * f / (4.0 * std::numbers::pi));
    }
    return opt_number(g, "radius", w, fallback);
  };
  if (kind == "circle" || kind == "sphere") {
    if (kind == "sphere" && dim != 3) throw ConfigError(w + ".kind", "sphere needs a 3D grid");
    if (kind == "circle" && dim != 2) throw ConfigError(w + ".kind", "circle needs a 2D grid; use sphere in 3D");
    Circle c{center(), radius_or_fraction(0.25)};
    if (!(c.radius >= 0.0 && c.radius <= 0.5)) throw ConfigError(w + ".radius", "must lie in [0, 0.5]");
    return c;
  }
  if (kind == "annulus") {
    Annulus a{center(), opt_number(g, "inner", w, 0.15), opt_number(g, "outer", w, 0.3)};
    if (!(a.inner >= 0.0)) throw ConfigError(w + ".inner", "must be >= 0");
    if (!(a.outer > a.inner && a.outer <= 0.5)) throw ConfigError(w + ".outer", "must lie in (inner, 0.5]");
    return a;
  }
  if (kind == "ellipse") {
    Ellipse e{center(), opt_point(g, "semi_axes", w, dim, Point{0.35, 0.15, 0.15}), opt_number(g, "angle", w, 0.0)};
    for (int a = 0; a < dim; ++a)
      if (!(e.semi_axes[a] > 0.0 && e.semi_axes[a] <= 0.5))
        throw ConfigError(w + ".semi_axes[" + std::to_string(a) + "]", "must lie in (0, 0.5]");
    return e;
  }
  if (kind == "square") {
    Square s{center(), opt_number(g, "side", w, 0.4)};
    if (!(s.side >= 0.0 && s.side <= 1.0)) throw ConfigError(w + ".side", "must lie in [0, 1]");
    return s;
  }
  if (kind == "multi_circle") {
    MultiCircle m;
    if (g.contains("count")) {
      const auto c = integer(g.at("count"), w + ".count");
      if (c < 1 || c > 10000) throw ConfigError(w + ".count", "must lie in [1, 10000]");
      m.count = static_cast<int>(c);
    }
    m.radius = radius_or_fraction(m.radius);
    if (g.contains("volume_fraction")) m.radius /= std::pow(static_cast<double>(m.count), 1.0 / dim);
    if (!(m.radius > 0.0 && m.radius <= 0.5)) throw ConfigError(w + ".radius", "must lie in (0, 0.5]");
    m.spread = opt_number(g, "spread", w, 0.0);
    if (!(m.spread >= 0.0 && m.spread < 1.0)) throw ConfigError(w + ".spread", "must lie in [0, 1)");
    m.min_gap = opt_number(g, "min_gap", w, m.min_gap);
    if (!(m.min_gap >= 0.0)) throw ConfigError(w + ".min_gap", "must be >= 0");
    if (g.contains("max_retries")) {
      const auto r = integer(g.at("max_retries"), w + ".max_retries");
      if (r < 1) throw ConfigError(w + ".max_retries", "must be >= 1");
      m.max_retries = static_cast<int>(std::min<long long>(r, 1'000'000'000));
    }
    m.seed = seed;
    return m;
  }
  throw ConfigError(w + ".kind", "unknown geometry '" + kind + "'");
}

inline Material parse_material(const json& m, const std::string& w, int dim) {
  if (!m.is_object()) throw ConfigError(w, "expected an object");
  std::string model = "elastic";
  if (m.contains("model")) {
    if (!m.at("model").is_string()) throw ConfigError(w + ".model", "expected a string");
    model = m.at("model").get<std::string>();
  }
  ElasticParams e{number(require(m, "lambda", w), w + ".lambda"), number(require(m, "mu", w), w + ".mu")};
  if (!(e.mu > 0.0)) throw ConfigError(w + ".mu", "must be positive");
  try {
    e.validate(dim);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(w + ".lambda", ex.what());
  }
  if (model == "elastic") return e;
  if (model == "elastoplastic" || model == "elasto_plastic" || model == "j2") {
    PlasticParams p{e, number(require(m, "sigma_y0", w), w + ".sigma_y0"),
                    opt_number(m, "hardening", w, 0.0)};
    if (!(p.sigma_y0 > 0.0)) throw ConfigError(w + ".sigma_y0", "must be positive");
    if (!(p.hardening_h >= 0.0)) throw ConfigError(w + ".hardening", "must be >= 0");
    return p;
  }
  throw ConfigError(w + ".model", "unknown model '" + model + "'");
}

}  // namespace detail

/// Parses and validates a configuration document. Relative output and
/// phase-map paths are resolved against @p base_dir.
inline RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::number;
  if (!j.is_object()) throw ConfigError("(root)", "expected a JSON object");
  RunConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("name", "expected a string");
    c.name = j["name"].get<std::string>();
    if (c.name.empty()) throw ConfigError("name", "must not be empty");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }

  const auto& g = detail::require(j, "grid", "");
  if (!g.is_array() || (g.size() != 2 && g.size() != 3)) throw ConfigError("grid", "expected 2 or 3 extents");
  c.dim = static_cast<int>(g.size());
  for (int a = 0; a < c.dim; ++a) {
    const auto v = detail::integer(g[a], "grid[" + std::to_string(a) + "]");
    if (v < 2 || v > 4096) throw ConfigError("grid[" + std::to_string(a) + "]", "must lie in [2, 4096]");
    c.grid[a] = static_cast<int>(v);
  }

  if (j.contains("phase_map")) {
    if (!j["phase_map"].is_string()) throw ConfigError("phase_map", "expected a path string");
    std::filesystem::path p = j["phase_map"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.phase_map = p;
    c.geometry_kind = "imported";
  } else {
    c.geometry = detail::parse_geometry(detail::require(j, "geometry", ""), c.dim, c.seed, c.geometry_kind);
  }

  const auto& mats = detail::require(j, "materials", "");
  if (!mats.is_array() || mats.size() != 2) throw ConfigError("materials", "expected two entries (matrix, inclusion)");
  for (std::size_t i = 0; i < mats.size(); ++i)
    c.materials.push_back(detail::parse_material(mats[i], "materials[" + std::to_string(i) + "]", c.dim));

  const auto& e = detail::require(j, "macro_strain", "");
  if (!e.is_array() || static_cast<int>(e.size()) != c.dim)
    throw ConfigError("macro_strain", "expected a " + std::to_string(c.dim) + "x" + std::to_string(c.dim) + " array");
  for (int a = 0; a < c.dim; ++a) {
    const std::string row = "macro_strain[" + std::to_string(a) + "]";
    if (!e[a].is_array() || static_cast<int>(e[a].size()) != c.dim) throw ConfigError(row, "wrong row length");
    for (int b = 0; b < c.dim; ++b) c.macro_strain[a][b] = number(e[a][b], row + "[" + std::to_string(b) + "]");
  }
  for (int a = 0; a < c.dim; ++a)
    for (int b = a + 1; b < c.dim; ++b)
      if (c.macro_strain[a][b] != c.macro_strain[b][a])
        throw ConfigError("macro_strain[" + std::to_string(a) + "][" + std::to_string(b) + "]", "must be symmetric");
  double norm = 0.0;
  for (const auto& row : c.macro_strain)
    for (double v : row) norm += v * v;
  if (!(norm > 0.0)) throw ConfigError("macro_strain", "must not be zero");

  if (j.contains("pattern") && j.contains("patterns")) throw ConfigError("patterns", "give pattern or patterns, not both");
  if (j.contains("pattern") || j.contains("patterns")) {
    const std::string key = j.contains("pattern") ? "pattern" : "patterns";
    nlohmann::json list = j[key].is_array() ? j[key] : nlohmann::json::array({j[key]});
    if (list.empty()) throw ConfigError(key, "must not be empty");
    c.patterns.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string f = key + "[" + std::to_string(i) + "]";
      if (!list[i].is_string()) throw ConfigError(f, "expected a string");
      const auto s = list[i].get<std::string>();
      if (s == "full") {
        c.patterns.push_back(PatternKind::full);
      } else if (s == "radial" || s == "fixed") {
        c.patterns.push_back(PatternKind::radial);
      } else if (s == "adapted") {
        c.patterns.push_back(PatternKind::adapted);
      } else {
        throw ConfigError(f, "unknown pattern '" + s + "'");
      }
    }
  }

  if (j.contains("R")) {
    const auto& r = j["R"];
    nlohmann::json list = r.is_array() ? r : nlohmann::json::array({r});
    if (list.empty()) throw ConfigError("R", "must not be empty");
    c.R.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string f = "R[" + std::to_string(i) + "]";
      const double v = number(list[i], f);
      if (!(v > 0.0 && v <= 100.0)) throw ConfigError(f, "must lie in (0, 100]");
      c.R.push_back(v);
    }
  }

  if (j.contains("tol")) {
    c.solver.tol_eps = number(j["tol"], "tol");
    if (!(c.solver.tol_eps > 0.0 && c.solver.tol_eps < 1.0)) throw ConfigError("tol", "must lie in (0, 1)");
  }
  if (j.contains("max_iter")) {
    const auto v = detail::integer(j["max_iter"], "max_iter");
    if (v < 1 || v > 100'000'000) throw ConfigError("max_iter", "must lie in [1, 1e8]");
    c.solver.max_iter = static_cast<int>(v);
  }
  if (j.contains("load_steps")) {
    const auto v = detail::integer(j["load_steps"], "load_steps");
    if (v < 1 || v > 1'000'000) throw ConfigError("load_steps", "must lie in [1, 1e6]");
    c.solver.load_steps = static_cast<int>(v);
  }
  if (j.contains("symbol")) {
    const auto s = j["symbol"].is_string() ? j["symbol"].get<std::string>() : std::string{};
    if (s == "rotated") {
      c.solver.symbol = FrequencySymbol::rotated;
    } else if (s == "continuous") {
      c.solver.symbol = FrequencySymbol::continuous;
    } else {
      throw ConfigError("symbol", "expected 'rotated' or 'continuous'");
    }
  }
  if (j.contains("radial")) {
    const auto& r = j["radial"];
    if (!r.is_object()) throw ConfigError("radial", "expected an object");
    if (r.contains("disk_radius")) {
      c.radial.disk_radius = number(r["disk_radius"], "radial.disk_radius");
      if (!(c.radial.disk_radius >= 0.0)) throw ConfigError("radial.disk_radius", "must be >= 0");
    }
  }
  for (const char* key : {"compatibility", "write_fields"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_boolean()) throw ConfigError(key, "expected true or false");
    (std::string(key) == "compatibility" ? c.compatibility : c.write_fields) = j[key].get<bool>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string() || j["output"].get<std::string>().empty())
      throw ConfigError("output", "expected a non-empty path string");
    c.output = j["output"].get<std::string>();
  }
  if (c.output.is_relative() && !base_dir.empty()) c.output = base_dir / c.output;
  return c;
}

/// Reads @p path as JSON; syntax errors are reported as ConfigError("(json)").
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("(json)", e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace fftmor
