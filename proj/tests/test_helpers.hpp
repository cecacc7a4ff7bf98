#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>
#include <vector>

#include "hallfmo/fem.hpp"
#include "hallfmo/material.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/objectives.hpp"

namespace hallfmo::testing {

struct ProblemSetup {
  Mesh mesh;
  MaterialParams params;
  SourceField source;
};

/// Unit-square test problem: heat source in a centered block, protected
/// region below it, homogeneous Dirichlet along the full bottom side. The
/// generous source rectangle keeps the region nonempty on coarse meshes.
inline ProblemSetup temp_min_problem(int n, MaterialParams params = {}) {
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  m = tag_region(std::move(m), {0.4, 0.4, 0.6, 0.6, Region::heat_source});
  m = tag_region(std::move(m), {0.35, 0.1, 0.65, 0.3, Region::protect});
  m = tag_boundary(std::move(m), {Side::bottom, 0.0, 1.0},
                   BoundaryKind::dirichlet);
  SourceField q = SourceField::from_region(m, Region::heat_source, 1e5);
  return {std::move(m), params, std::move(q)};
}

/// Two protected regions placed symmetrically left/right below the source.
inline ProblemSetup switching_problem(int n, MaterialParams params = {}) {
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  m = tag_region(std::move(m), {0.4, 0.4, 0.6, 0.6, Region::heat_source});
  m = tag_region(std::move(m), {0.1, 0.1, 0.35, 0.35, Region::protect});
  m = tag_region(std::move(m), {0.65, 0.1, 0.9, 0.35, Region::protect_alt});
  m = tag_boundary(std::move(m), {Side::bottom, 0.0, 1.0},
                   BoundaryKind::dirichlet);
  SourceField q = SourceField::from_region(m, Region::heat_source, 1e5);
  return {std::move(m), params, std::move(q)};
}

inline DesignFields random_design(int n_nodes, std::mt19937& rng,
                                  bool with_alternate,
                                  double amplitude = 0.9) {
  std::uniform_real_distribution<double> box(-amplitude, amplitude);
  DesignFields d = DesignFields::zeros(n_nodes, with_alternate);
  for (int i = 0; i < n_nodes; ++i) {
    d.xi[i] = box(rng);
    d.eta[i] = box(rng);
    d.s[i] = box(rng);
    d.a[i] = box(rng);
    if (with_alternate) d.a_prime[i] = box(rng);
  }
  return d;
}

inline ScalarField solve_state(const ProblemSetup& p,
                               const DesignFields& design, HallField which) {
  const TensorField tensor =
      design_tensor_field(p.mesh, design, p.params, which);
  const LinearSystem sys =
      apply_dirichlet(assemble_stiffness(p.mesh, tensor),
                      assemble_load(p.mesh, p.source), p.mesh);
  return solve_linear(sys, 1e-12);
}

/// Objective value as a plain function of the design, for finite-difference
/// oracles.
inline double objective_of(const ProblemSetup& p, const DesignFields& design,
                           ObjectiveKind kind) {
  const ScalarField t = solve_state(p, design, HallField::primary);
  if (kind == ObjectiveKind::temp_min)
    return temp_min_objective(t, p.mesh).value;
  const ScalarField t_alt = solve_state(p, design, HallField::alternate);
  return switching_objective(t, t_alt, p.mesh).value;
}

/// Random node draw for finite-difference spot checks. Central differencing
/// of J at step 1e-6 carries rounding noise of order eps*|J|/1e-6 ~ 1e-9, so
/// a 1e-4 relative comparison is only meaningful where the derivative sits
/// well above that floor. Sampling from the strongest `pool` entries keeps
/// every checked node in that regime without biasing toward any single node.
inline std::vector<int> fd_sample_nodes(const ScalarField& g,
                                        std::mt19937& rng, int count = 20,
                                        int pool = 30) {
  std::vector<int> idx(g.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::abs(g[a]) > std::abs(g[b]); });
  idx.resize(std::min<std::size_t>(pool, idx.size()));
  std::vector<int> nodes;
  std::sample(idx.begin(), idx.end(), std::back_inserter(nodes), count, rng);
  return nodes;
}

}  // namespace hallfmo::testing
