#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hallfmo/errors.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/optimizer.hpp"
#include "hallfmo/types.hpp"

namespace hallfmo {

namespace detail {

/// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("io: cannot write \"" + path + "\"");
  return out;
}

}  // namespace detail

/// Nodal field as CSV: header `x,y,value`, one row per node in node-index
/// order, 17 significant digits (bit-exact on re-read).
inline void write_field_csv(const std::string& path, const Mesh& mesh,
                            const ScalarField& field) {
  if (field.size() != mesh.n_nodes())
    throw std::invalid_argument("field not sized to the mesh");
  std::ofstream out = detail::open_output(path);
  out << "x,y,value\n";
  for (int n = 0; n < mesh.n_nodes(); ++n)
    out << detail::format_double(mesh.nodes[n].x()) << ','
        << detail::format_double(mesh.nodes[n].y()) << ','
        << detail::format_double(field[n]) << '\n';
  if (!out) throw io_error("io: write failed for \"" + path + "\"");
}

/// Reads the value column of a CSV written by write_field_csv.
inline ScalarField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("io: cannot read \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0)
    throw io_error("io: \"" + path + "\" is not a nodal field CSV");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto last_comma = line.rfind(',');
    if (last_comma == std::string::npos)
      throw io_error("io: malformed row in \"" + path + "\"");
    values.push_back(std::strtod(line.c_str() + last_comma + 1, nullptr));
  }
  ScalarField f(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    f[static_cast<Eigen::Index>(i)] = values[i];
  return f;
}

using NamedNodeFields = std::vector<std::pair<std::string, ScalarField>>;
using NamedCellFields = std::vector<std::pair<std::string, Eigen::VectorXd>>;

/// Legacy-ASCII VTK unstructured grid: the mesh, every nodal field as point
/// data, every per-element field as cell data.
inline void write_vtk(const std::string& path, const Mesh& mesh,
                      const NamedNodeFields& point_fields,
                      const NamedCellFields& cell_fields) {
  for (const auto& [name, f] : point_fields)
    if (f.size() != mesh.n_nodes())
      throw std::invalid_argument("point field '" + name +
                                  "' not sized to the mesh");
  for (const auto& [name, f] : cell_fields)
    if (f.size() != mesh.n_elements())
      throw std::invalid_argument("cell field '" + name +
                                  "' not sized to the mesh");

  std::ofstream out = detail::open_output(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "hallfmo fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (int n = 0; n < mesh.n_nodes(); ++n)
    out << detail::format_double(mesh.nodes[n].x()) << ' '
        << detail::format_double(mesh.nodes[n].y()) << " 0\n";

  out << "CELLS " << mesh.n_elements() << ' ' << 5 * mesh.n_elements() << '\n';
  for (const auto& conn : mesh.elements)
    out << "4 " << conn[0] << ' ' << conn[1] << ' ' << conn[2] << ' '
        << conn[3] << '\n';

  out << "CELL_TYPES " << mesh.n_elements() << '\n';
  for (int e = 0; e < mesh.n_elements(); ++e) out << "9\n";  // VTK_QUAD

  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.n_nodes() << '\n';
    for (const auto& [name, f] : point_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < f.size(); ++i)
        out << detail::format_double(f[i]) << '\n';
    }
  }
  if (!cell_fields.empty()) {
    out << "CELL_DATA " << mesh.n_elements() << '\n';
    for (const auto& [name, f] : cell_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < f.size(); ++i)
        out << detail::format_double(f[i]) << '\n';
    }
  }
  if (!out) throw io_error("io: write failed for \"" + path + "\"");
}

/// Per-iteration optimization log: iteration, objective, signed terms,
/// applied design change, and the relative objective change.
inline void write_history_csv(const std::string& path,
                              const std::vector<IterationRecord>& records) {
  std::ofstream out = detail::open_output(path);
  out << "iteration,J";
  if (!records.empty())
    for (const auto& term : records.front().objective.terms)
      out << ',' << term.label;
  out << ",max_design_change,relative_change\n";
  for (const auto& rec : records) {
    out << rec.iteration << ',' << detail::format_double(rec.objective.value);
    for (const auto& term : rec.objective.terms)
      out << ',' << detail::format_double(term.value);
    out << ',' << detail::format_double(rec.max_change) << ',';
    if (std::isfinite(rec.convergence_ratio))
      out << detail::format_double(rec.convergence_ratio);
    out << '\n';
  }
  if (!out) throw io_error("io: write failed for \"" + path + "\"");
}

}  // namespace hallfmo
