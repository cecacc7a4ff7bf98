#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hallfmo/errors.hpp"
#include "hallfmo/fem.hpp"
#include "hallfmo/material.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/optimizer.hpp"

namespace hallfmo {

enum class RunMode { forward, temp_min, switching };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::forward: return "forward";
    case RunMode::temp_min: return "temp-min";
    case RunMode::switching: return "switching";
  }
  return "?";
}

inline RunMode parse_run_mode(const std::string& s) {
  if (s == "forward") return RunMode::forward;
  if (s == "temp-min") return RunMode::temp_min;
  if (s == "switching") return RunMode::switching;
  throw config_error("config: unknown mode \"" + s +
                     "\" (expected forward | temp-min | switching)");
}

struct MeshSpec {
  int nx = 32, ny = 32;
  double width = 1.0, height = 1.0;
};

struct BoundaryConfig {
  Side side = Side::bottom;
  double from = 0.0, to = 1.0;
  BoundaryKind kind = BoundaryKind::dirichlet;
};

/// Uniform design values used by forward mode.
struct DesignValues {
  double xi = -1.0, eta = -1.0, s = 0.0, a = 0.0;
};

struct RunConfig {
  RunMode mode = RunMode::forward;
  MeshSpec mesh;
  std::optional<RegionSpec> heat_source, protect, protect_alt;
  std::vector<BoundaryConfig> boundaries;
  MaterialParams material;
  double source_q = 1e5;
  OptimizerConfig optimizer;
  double solver_tolerance = 1e-10;
  DesignValues design;
  std::string output_dir = "output";

  void validate() const;
};

namespace detail {

using nlohmann::json;

inline const json& member(const json& j, const char* key, const char* ctx) {
  const auto it = j.find(key);
  if (it == j.end())
    throw config_error(std::string("config: missing key \"") + ctx + "\"");
  return *it;
}

inline double number(const json& j, const char* ctx) {
  if (!j.is_number())
    throw config_error(std::string("config: \"") + ctx + "\" must be a number");
  return j.get<double>();
}

inline double number_or(const json& parent, const char* key, double fallback,
                        const char* ctx) {
  const auto it = parent.find(key);
  return it == parent.end() ? fallback : number(*it, ctx);
}

inline int integer(const json& j, const char* ctx) {
  if (!j.is_number_integer())
    throw config_error(std::string("config: \"") + ctx +
                       "\" must be an integer");
  return j.get<int>();
}

inline std::string text(const json& j, const char* ctx) {
  if (!j.is_string())
    throw config_error(std::string("config: \"") + ctx + "\" must be a string");
  return j.get<std::string>();
}

inline RegionSpec rect(const json& j, Region tag, const char* ctx) {
  if (!j.is_array() || j.size() != 4)
    throw config_error(std::string("config: region \"") + ctx +
                       "\" must be an array [xmin, ymin, xmax, ymax]");
  RegionSpec r;
  r.xmin = number(j[0], ctx);
  r.ymin = number(j[1], ctx);
  r.xmax = number(j[2], ctx);
  r.ymax = number(j[3], ctx);
  r.tag = tag;
  if (!(r.xmin < r.xmax) || !(r.ymin < r.ymax))
    throw config_error(std::string("config: region \"") + ctx +
                       "\" must satisfy xmin < xmax and ymin < ymax");
  return r;
}

inline Side parse_side(const std::string& s) {
  if (s == "bottom") return Side::bottom;
  if (s == "right") return Side::right;
  if (s == "top") return Side::top;
  if (s == "left") return Side::left;
  throw config_error("config: unknown boundary side \"" + s +
                     "\" (expected bottom | right | top | left)");
}

inline BoundaryKind parse_kind(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  throw config_error("config: unknown boundary kind \"" + s +
                     "\" (expected dirichlet | neumann)");
}

inline bool rects_overlap(const RegionSpec& a, const RegionSpec& b) {
  return a.xmin < b.xmax && b.xmin < a.xmax && a.ymin < b.ymax &&
         b.ymin < a.ymax;
}

}  // namespace detail

inline void RunConfig::validate() const {
  if (mesh.nx < 1 || mesh.ny < 1)
    throw config_error("config: mesh.nx and mesh.ny must be positive");
  if (!(mesh.width > 0.0) || !(mesh.height > 0.0))
    throw config_error("config: mesh.width and mesh.height must be positive");
  material.validate();
  optimizer.validate();
  if (!(solver_tolerance > 0.0))
    throw config_error("config: solver.tolerance must be positive");
  if (!(source_q >= 0.0) || !std::isfinite(source_q))
    throw config_error("config: source.q must be finite and nonnegative");

  if (!heat_source)
    throw config_error("config: missing region \"heat_source\"");
  if (mode != RunMode::forward && !protect)
    throw config_error(std::string("config: mode \"") + to_string(mode) +
                       "\" requires region \"protect\"");
  if (mode == RunMode::switching) {
    if (!protect_alt)
      throw config_error(
          "config: mode \"switching\" requires region \"protect_alt\"");
    if (detail::rects_overlap(*protect, *protect_alt))
      throw config_error(
          "config: regions \"protect\" and \"protect_alt\" overlap");
  }

  const bool any_dirichlet = std::any_of(
      boundaries.begin(), boundaries.end(),
      [](const BoundaryConfig& b) { return b.kind == BoundaryKind::dirichlet; });
  if (!any_dirichlet)
    throw config_error("config: at least one dirichlet boundary is required");

  for (const BoundaryConfig& b : boundaries) {
    if (!(b.from < b.to))
      throw config_error("config: boundary segment must satisfy from < to");
  }
}

inline RunConfig parse_config(const detail::json& j) {
  using detail::json;
  RunConfig cfg;
  cfg.mode = parse_run_mode(detail::text(detail::member(j, "mode", "mode"), "mode"));

  if (const auto it = j.find("mesh"); it != j.end()) {
    cfg.mesh.nx = detail::integer(detail::member(*it, "nx", "mesh.nx"), "mesh.nx");
    cfg.mesh.ny = detail::integer(detail::member(*it, "ny", "mesh.ny"), "mesh.ny");
    cfg.mesh.width = detail::number_or(*it, "width", 1.0, "mesh.width");
    cfg.mesh.height = detail::number_or(*it, "height", 1.0, "mesh.height");
  }

  if (const auto it = j.find("regions"); it != j.end()) {
    if (const auto r = it->find("heat_source"); r != it->end())
      cfg.heat_source = detail::rect(*r, Region::heat_source, "heat_source");
    if (const auto r = it->find("protect"); r != it->end())
      cfg.protect = detail::rect(*r, Region::protect, "protect");
    if (const auto r = it->find("protect_alt"); r != it->end())
      cfg.protect_alt = detail::rect(*r, Region::protect_alt, "protect_alt");
  }

  if (const auto it = j.find("boundaries"); it != j.end()) {
    if (!it->is_array())
      throw config_error("config: \"boundaries\" must be an array");
    for (const json& b : *it) {
      BoundaryConfig bc;
      bc.side = detail::parse_side(
          detail::text(detail::member(b, "side", "boundaries.side"), "boundaries.side"));
      bc.from = detail::number_or(b, "from", 0.0, "boundaries.from");
      const double len = (bc.side == Side::bottom || bc.side == Side::top)
                             ? cfg.mesh.width
                             : cfg.mesh.height;
      bc.to = detail::number_or(b, "to", len, "boundaries.to");
      bc.kind = detail::parse_kind(
          detail::text(detail::member(b, "kind", "boundaries.kind"), "boundaries.kind"));
      cfg.boundaries.push_back(bc);
    }
  } else {
    cfg.boundaries.push_back(
        {Side::bottom, 0.0, cfg.mesh.width, BoundaryKind::dirichlet});
  }

  if (const auto it = j.find("material"); it != j.end()) {
    cfg.material.k = detail::number_or(*it, "k", cfg.material.k, "material.k");
    cfg.material.c = detail::number_or(*it, "c", cfg.material.c, "material.c");
    cfg.material.b = detail::number_or(*it, "b", cfg.material.b, "material.b");
    cfg.material.eps =
        detail::number_or(*it, "eps", cfg.material.eps, "material.eps");
    cfg.material.eps_prime = detail::number_or(
        *it, "eps_prime", cfg.material.eps_prime, "material.eps_prime");
  }

  if (const auto it = j.find("source"); it != j.end())
    cfg.source_q = detail::number_or(*it, "q", cfg.source_q, "source.q");

  // Smoothing radius defaults to twice the element edge length.
  cfg.optimizer.radius =
      2.0 * std::max(cfg.mesh.width / cfg.mesh.nx, cfg.mesh.height / cfg.mesh.ny);
  if (const auto it = j.find("optimizer"); it != j.end()) {
    auto& o = cfg.optimizer;
    o.beta1 = detail::number_or(*it, "beta1", o.beta1, "optimizer.beta1");
    o.beta2 = detail::number_or(*it, "beta2", o.beta2, "optimizer.beta2");
    o.eps_adam = detail::number_or(*it, "eps_adam", o.eps_adam, "optimizer.eps_adam");
    o.dt = detail::number_or(*it, "dt", o.dt, "optimizer.dt");
    o.radius = detail::number_or(*it, "radius", o.radius, "optimizer.radius");
    if (const auto m = it->find("max_iters"); m != it->end())
      o.max_iters = detail::integer(*m, "optimizer.max_iters");
    o.tolerance =
        detail::number_or(*it, "tolerance", o.tolerance, "optimizer.tolerance");
  }

  if (const auto it = j.find("solver"); it != j.end())
    cfg.solver_tolerance = detail::number_or(*it, "tolerance", cfg.solver_tolerance,
                                             "solver.tolerance");

  if (const auto it = j.find("design"); it != j.end()) {
    auto& d = cfg.design;
    d.xi = detail::number_or(*it, "xi", d.xi, "design.xi");
    d.eta = detail::number_or(*it, "eta", d.eta, "design.eta");
    d.s = detail::number_or(*it, "s", d.s, "design.s");
    d.a = detail::number_or(*it, "a", d.a, "design.a");
  }

  if (const auto it = j.find("output"); it != j.end())
    cfg.output_dir = detail::text(*it, "output");

  cfg.validate();
  return cfg;
}

/// Parses and validates a JSON config file. Syntax errors surface with
/// nlohmann's line/column diagnostics; semantic errors name the offending key.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open \"" + path + "\"");
  detail::json j;
  try {
    j = detail::json::parse(in);
  } catch (const detail::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config: top level must be an object");
  return parse_config(j);
}

/// Builds the structured mesh with all configured region and boundary tags.
inline Mesh build_mesh(const RunConfig& cfg) {
  Mesh m = build_structured_mesh(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.width,
                                 cfg.mesh.height);
  if (cfg.heat_source) m = tag_region(std::move(m), *cfg.heat_source);
  if (cfg.protect) m = tag_region(std::move(m), *cfg.protect);
  if (cfg.protect_alt) m = tag_region(std::move(m), *cfg.protect_alt);
  for (const BoundaryConfig& b : cfg.boundaries)
    m = tag_boundary(std::move(m), {b.side, b.from, b.to}, b.kind);
  return m;
}

inline SourceField build_source(const RunConfig& cfg, const Mesh& mesh) {
  return SourceField::from_region(mesh, Region::heat_source, cfg.source_q);
}

inline DesignFields uniform_design(const RunConfig& cfg, const Mesh& mesh) {
  return DesignFields::uniform(mesh.n_nodes(), cfg.design.xi, cfg.design.eta,
                               cfg.design.s, cfg.design.a);
}

}  // namespace hallfmo
