#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "hallfmo/config.hpp"
#include "hallfmo/fem.hpp"
#include "hallfmo/io.hpp"
#include "hallfmo/material.hpp"
#include "hallfmo/objectives.hpp"
#include "hallfmo/optimizer.hpp"

namespace hallfmo {

namespace detail {

/// Angle of the major principal axis of the symmetric tensor part; the
/// antisymmetric (Hall) addend cancels and the isotropic shift drops out of
/// the difference, so this is the orientation of k_aniso.
inline double orientation_angle(const Tensor2& k) {
  const double off = 0.5 * (k(0, 1) + k(1, 0));
  return 0.5 * std::atan2(2.0 * off, k(0, 0) - k(1, 1));
}

inline NamedCellFields standard_cell_fields(const Mesh& mesh,
                                            const TensorField& tensor,
                                            const FluxField& flux) {
  const int ne = mesh.n_elements();
  Eigen::VectorXd fx(ne), fy(ne), k11(ne), k12(ne), k21(ne), k22(ne),
      region(ne), angle(ne);
  for (int e = 0; e < ne; ++e) {
    const MappedBasis basis = map_basis(mesh, e, 0.0, 0.0);
    const Tensor2 k = tensor({e, basis.x.x(), basis.x.y(), basis.shape});
    fx[e] = flux.q[e].x();
    fy[e] = flux.q[e].y();
    k11[e] = k(0, 0);
    k12[e] = k(0, 1);
    k21[e] = k(1, 0);
    k22[e] = k(1, 1);
    region[e] = static_cast<double>(mesh.region[e]);
    angle[e] = orientation_angle(k);
  }
  return {{"flux_x", fx},   {"flux_y", fy}, {"k11", k11},
          {"k12", k12},     {"k21", k21},   {"k22", k22},
          {"region", region}, {"orientation_angle", angle}};
}

}  // namespace detail

/// Executes one configured run and writes its artifacts into the output
/// directory. Returns the process exit code: 0 on success, 4 when an
/// optimization stops at max_iters without meeting the tolerance.
inline int run(const RunConfig& cfg, bool quiet = false) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec)
    throw io_error("io: cannot create output directory \"" + cfg.output_dir +
                   "\": " + ec.message());
  const auto artifact = [&cfg](const char* name) {
    return (fs::path(cfg.output_dir) / name).string();
  };

  const Mesh mesh = build_mesh(cfg);
  const SourceField source = build_source(cfg, mesh);

  if (cfg.mode == RunMode::forward) {
    const DesignFields design = uniform_design(cfg, mesh);
    const TensorField tensor =
        design_tensor_field(mesh, design, cfg.material, HallField::primary);
    const LinearSystem sys =
        apply_dirichlet(assemble_stiffness(mesh, tensor),
                        assemble_load(mesh, source), mesh);
    const ScalarField temperature = solve_linear(sys, cfg.solver_tolerance);
    const FluxField flux = recover_flux(mesh, tensor, temperature);

    write_field_csv(artifact("T.csv"), mesh, temperature);
    write_vtk(artifact("fields.vtk"), mesh, {{"T", temperature}},
              detail::standard_cell_fields(mesh, tensor, flux));
    if (!quiet)
      std::cout << "forward: " << mesh.n_nodes() << " nodes, max T = "
                << temperature.maxCoeff() << "\n";
    return 0;
  }

  const bool switching = cfg.mode == RunMode::switching;
  const IterationCallback progress =
      quiet ? IterationCallback{} : [](const IterationRecord& rec) {
        std::cout << "iter " << rec.iteration << "  J = "
                  << rec.objective.value;
        if (std::isfinite(rec.convergence_ratio))
          std::cout << "  |dJ|/|J| = " << rec.convergence_ratio;
        std::cout << '\n';
      };
  const OptimizeResult result = optimize(
      switching ? ProblemKind::switching : ProblemKind::temp_min, mesh,
      cfg.material, source, cfg.optimizer, cfg.solver_tolerance, progress);

  write_history_csv(artifact("history.csv"), result.records);
  write_field_csv(artifact("T.csv"), mesh, result.temperature);
  write_field_csv(artifact("xi.csv"), mesh, result.design.xi);
  write_field_csv(artifact("eta.csv"), mesh, result.design.eta);
  write_field_csv(artifact("s.csv"), mesh, result.design.s);
  write_field_csv(artifact("a.csv"), mesh, result.design.a);

  NamedNodeFields points = {{"T", result.temperature},
                            {"xi", result.design.xi},
                            {"eta", result.design.eta},
                            {"s", result.design.s},
                            {"a", result.design.a}};
  const TensorField tensor =
      design_tensor_field(mesh, result.design, cfg.material, HallField::primary);
  const FluxField flux = recover_flux(mesh, tensor, result.temperature);
  NamedCellFields cells = detail::standard_cell_fields(mesh, tensor, flux);

  if (switching) {
    write_field_csv(artifact("T_prime.csv"), mesh, result.temperature_alt);
    write_field_csv(artifact("a_prime.csv"), mesh, result.design.a_prime);
    points.push_back({"T_prime", result.temperature_alt});
    points.push_back({"a_prime", result.design.a_prime});
    const TensorField tensor_alt = design_tensor_field(
        mesh, result.design, cfg.material, HallField::alternate);
    const FluxField flux_alt =
        recover_flux(mesh, tensor_alt, result.temperature_alt);
    const int ne = mesh.n_elements();
    Eigen::VectorXd fx(ne), fy(ne);
    for (int e = 0; e < ne; ++e) {
      fx[e] = flux_alt.q[e].x();
      fy[e] = flux_alt.q[e].y();
    }
    cells.push_back({"flux_prime_x", fx});
    cells.push_back({"flux_prime_y", fy});
  }
  write_vtk(artifact("fields.vtk"), mesh, points, cells);

  const bool ok = result.status == OptimizeStatus::converged;
  if (!quiet)
    std::cout << (ok ? "converged" : "stopped at max_iters") << " after "
              << result.iterations << " iterations, J = "
              << result.objective_history.back().value << "\n";
  return ok ? 0 : 4;
}

}  // namespace hallfmo
