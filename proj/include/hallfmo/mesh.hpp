#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hallfmo/errors.hpp"

namespace hallfmo {

enum class Region : std::uint8_t { bulk, heat_source, protect, protect_alt };
enum class BoundaryKind : std::uint8_t { neumann, dirichlet };
enum class Side : std::uint8_t { bottom, right, top, left };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::bulk: return "bulk";
    case Region::heat_source: return "heat_source";
    case Region::protect: return "protect";
    case Region::protect_alt: return "protect_alt";
  }
  return "?";
}

/// Axis-aligned rectangle selecting elements (by centroid) for re-tagging.
struct RegionSpec {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  Region tag = Region::bulk;
};

/// One element edge lying on the domain boundary. Node pair is ordered
/// counterclockwise along the outer boundary.
struct BoundaryEdge {
  int element = -1;
  std::array<int, 2> nodes{};
  Side side = Side::bottom;
  BoundaryKind kind = BoundaryKind::neumann;
};

/// Boundary interval on one side of the rectangular domain. The coordinate
/// runs along x for bottom/top and along y for left/right.
struct EdgeSpec {
  Side side = Side::bottom;
  double from = 0.0;
  double to = 0.0;
};

/// Structured quadrilateral mesh of a width x height rectangle.
/// Nodes are numbered row-major bottom-to-top, elements likewise; element
/// node order is counterclockwise starting at the lower-left corner.
struct Mesh {
  int nx = 0, ny = 0;
  double width = 0.0, height = 0.0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> elements;
  std::vector<Region> region;          // per element
  std::vector<BoundaryEdge> boundary;  // covers the domain boundary exactly once

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  double hx() const { return width / nx; }
  double hy() const { return height / ny; }

  Eigen::Vector2d centroid(int e) const {
    const auto& c = elements[e];
    return 0.25 * (nodes[c[0]] + nodes[c[1]] + nodes[c[2]] + nodes[c[3]]);
  }

  /// Nodes carrying a homogeneous Dirichlet value (endpoints of Gamma_D edges).
  std::vector<int> dirichlet_nodes() const {
    std::vector<char> mark(nodes.size(), 0);
    for (const auto& be : boundary) {
      if (be.kind == BoundaryKind::dirichlet) {
        mark[be.nodes[0]] = 1;
        mark[be.nodes[1]] = 1;
      }
    }
    std::vector<int> out;
    for (int i = 0; i < n_nodes(); ++i)
      if (mark[i]) out.push_back(i);
    return out;
  }

  bool has_dirichlet() const {
    for (const auto& be : boundary)
      if (be.kind == BoundaryKind::dirichlet) return true;
    return false;
  }

  std::vector<int> elements_in(Region tag) const {
    std::vector<int> out;
    for (int e = 0; e < n_elements(); ++e)
      if (region[e] == tag) out.push_back(e);
    return out;
  }
};

inline Mesh build_structured_mesh(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1)
    throw config_error("mesh: element counts must be >= 1 (got nx=" +
                       std::to_string(nx) + ", ny=" + std::to_string(ny) + ")");
  if (!(width > 0.0) || !(height > 0.0))
    throw config_error("mesh: domain dimensions must be positive");

  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.width = width;
  m.height = height;

  m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.emplace_back(width * i / nx, height * j / ny);

  const auto node = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.elements.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.elements.push_back(
          {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
  m.region.assign(m.elements.size(), Region::bulk);

  // Boundary edges follow the element-local counterclockwise orientation,
  // so the outer boundary is traversed counterclockwise as a whole.
  for (int i = 0; i < nx; ++i) {
    const int e = i;  // bottom row
    m.boundary.push_back({e, {node(i, 0), node(i + 1, 0)}, Side::bottom,
                          BoundaryKind::neumann});
  }
  for (int j = 0; j < ny; ++j) {
    const int e = j * nx + (nx - 1);
    m.boundary.push_back({e, {node(nx, j), node(nx, j + 1)}, Side::right,
                          BoundaryKind::neumann});
  }
  for (int i = nx - 1; i >= 0; --i) {
    const int e = (ny - 1) * nx + i;
    m.boundary.push_back({e, {node(i + 1, ny), node(i, ny)}, Side::top,
                          BoundaryKind::neumann});
  }
  for (int j = ny - 1; j >= 0; --j) {
    const int e = j * nx;
    m.boundary.push_back(
        {e, {node(0, j + 1), node(0, j)}, Side::left, BoundaryKind::neumann});
  }
  return m;
}

/// Re-tags every element whose centroid lies inside the rectangle.
/// Throws if the rectangle is invalid or captures no element.
inline Mesh tag_region(Mesh mesh, const RegionSpec& spec) {
  if (!(spec.xmin < spec.xmax) || !(spec.ymin < spec.ymax))
    throw config_error("region: rectangle must satisfy xmin < xmax and ymin < ymax");
  if (spec.xmin < -1e-12 || spec.ymin < -1e-12 ||
      spec.xmax > mesh.width + 1e-12 || spec.ymax > mesh.height + 1e-12)
    throw config_error("region: rectangle lies outside the domain");

  int count = 0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Vector2d c = mesh.centroid(e);
    if (c.x() > spec.xmin && c.x() < spec.xmax && c.y() > spec.ymin &&
        c.y() < spec.ymax) {
      mesh.region[e] = spec.tag;
      ++count;
    }
  }
  if (count == 0)
    throw config_error(std::string("region '") + to_string(spec.tag) +
                       "': rectangle contains no element centroid");
  return mesh;
}

/// Re-tags boundary edges whose endpoints both fall in [from, to] along the
/// given side. Returns the mesh; the number of matched edges may be zero
/// (well-posedness is checked when a system is built).
inline Mesh tag_boundary(Mesh mesh, const EdgeSpec& spec, BoundaryKind kind) {
  const double len = (spec.side == Side::bottom || spec.side == Side::top)
                         ? mesh.width
                         : mesh.height;
  if (!(spec.from < spec.to) || spec.from < -1e-12 || spec.to > len + 1e-12)
    throw config_error("boundary: interval must lie within the chosen side");

  const double tol = 1e-12 * len;
  for (auto& be : mesh.boundary) {
    if (be.side != spec.side) continue;
    const bool along_x = (spec.side == Side::bottom || spec.side == Side::top);
    const double c0 = along_x ? mesh.nodes[be.nodes[0]].x() : mesh.nodes[be.nodes[0]].y();
    const double c1 = along_x ? mesh.nodes[be.nodes[1]].x() : mesh.nodes[be.nodes[1]].y();
    if (std::min(c0, c1) >= spec.from - tol && std::max(c0, c1) <= spec.to + tol)
      be.kind = kind;
  }
  return mesh;
}

}  // namespace hallfmo
