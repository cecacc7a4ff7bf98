#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hallfmo/element.hpp"
#include "hallfmo/errors.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/types.hpp"

namespace hallfmo {

/// Elementwise-constant volumetric heat source.
struct SourceField {
  Eigen::VectorXd q;  // one value per element

  static SourceField from_region(const Mesh& mesh, Region tag,
                                 double magnitude) {
    SourceField s;
    s.q = Eigen::VectorXd::Zero(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e)
      if (mesh.region[e] == tag) s.q[e] = magnitude;
    return s;
  }
};

/// Per-element heat flux q = -k grad(T) at the element center.
struct FluxField {
  std::vector<Eigen::Vector2d> q;
};

/// Reduced system over free (non-Dirichlet) nodes.
struct LinearSystem {
  SpMat matrix;
  Eigen::VectorXd rhs;
  std::vector<int> free_nodes;  // free index -> mesh node
  std::vector<int> node_index;  // mesh node -> free index, -1 if constrained

  int n_nodes() const { return static_cast<int>(node_index.size()); }

  /// Expands a free-node vector to a full nodal field (zeros on Gamma_D).
  ScalarField expand(const Eigen::VectorXd& x) const {
    ScalarField full = ScalarField::Zero(n_nodes());
    for (std::size_t i = 0; i < free_nodes.size(); ++i)
      full[free_nodes[i]] = x[static_cast<Eigen::Index>(i)];
    return full;
  }

  /// Restricts a full nodal vector to the free nodes.
  Eigen::VectorXd reduce(const ScalarField& full) const {
    Eigen::VectorXd x(free_nodes.size());
    for (std::size_t i = 0; i < free_nodes.size(); ++i)
      x[static_cast<Eigen::Index>(i)] = full[free_nodes[i]];
    return x;
  }
};

namespace detail {

inline void check_admissible(const Tensor2& k, int element) {
  const double tr = k(0, 0) + k(1, 1);
  const double off = 0.5 * (k(0, 1) + k(1, 0));
  const double det_sym = k(0, 0) * k(1, 1) - off * off;
  if (!(tr > 0.0) || !(det_sym > 0.0))
    throw numerical_error(
        "assembly: conductivity tensor has nonpositive symmetric part in "
        "element " +
        std::to_string(element));
}

}  // namespace detail

/// Stiffness matrix K_ij = sum_e int grad(phi_i) . (k grad(phi_j)) dOmega
/// over all mesh nodes, 2x2 Gauss quadrature. Nonsymmetric tensors yield a
/// nonsymmetric matrix. By default the symmetric part of the tensor must be
/// positive definite at every quadrature point; pass require_admissible =
/// false to assemble a bare tensor part (e.g. the antisymmetric addend of
/// the splitting identity), which has no definiteness of its own.
inline SpMat assemble_stiffness(const Mesh& mesh, const TensorField& tensor,
                                bool require_admissible = true) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_elements()) * 16);

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
      const Tensor2 k = tensor({e, basis.x.x(), basis.x.y(), basis.shape});
      if (require_admissible) detail::check_admissible(k, e);
      const double w = qp.weight * basis.jacobian;
      for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d kg_i = k.transpose() * basis.grad[i];
        for (int j = 0; j < 4; ++j)
          ke(i, j) += w * kg_i.dot(basis.grad[j]);
      }
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        trip.emplace_back(conn[i], conn[j], ke(i, j));
  }

  SpMat k(mesh.n_nodes(), mesh.n_nodes());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

/// Load vector f_i = sum_e int phi_i Q dOmega with elementwise-constant Q.
inline Eigen::VectorXd assemble_load(const Mesh& mesh,
                                     const SourceField& source) {
  if (source.q.size() != mesh.n_elements())
    throw std::invalid_argument("source field not sized to the mesh");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (source.q[e] == 0.0) continue;
    const auto& conn = mesh.elements[e];
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
      const double w = qp.weight * basis.jacobian * source.q[e];
      for (int i = 0; i < 4; ++i) f[conn[i]] += w * basis.shape[i];
    }
  }
  return f;
}

/// Consistent mass matrix M_ij = int phi_i phi_j dOmega (no constraints).
inline SpMat assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_elements()) * 16);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
      const double w = qp.weight * basis.jacobian;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          trip.emplace_back(conn[i], conn[j], w * basis.shape[i] * basis.shape[j]);
    }
  }
  SpMat m(mesh.n_nodes(), mesh.n_nodes());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Helmholtz-type operator M + dt R^2 K_lap of the design-update equation.
/// Design fields carry natural boundary conditions, so no rows are
/// eliminated; the matrix is symmetric positive definite for dt, R > 0.
inline SpMat assemble_update_system(const Mesh& mesh, double dt, double radius) {
  if (!(dt > 0.0)) throw config_error("update system: dt must be positive");
  if (radius < 0.0) throw config_error("update system: R must be nonnegative");
  SpMat m = assemble_mass(mesh);
  if (radius == 0.0) return m;
  const SpMat k_lap =
      assemble_stiffness(mesh, constant_tensor(Tensor2::Identity()));
  return m + (dt * radius * radius) * k_lap;
}

/// Eliminates homogeneous-Dirichlet rows/columns, keeping the free-node block.
inline LinearSystem apply_dirichlet(const SpMat& matrix,
                                    const Eigen::VectorXd& rhs,
                                    const Mesh& mesh) {
  if (!mesh.has_dirichlet())
    throw config_error(
        "solve: no Dirichlet boundary; temperature is determined only up to "
        "a constant");

  LinearSystem sys;
  sys.node_index.assign(mesh.n_nodes(), -1);
  for (int n : mesh.dirichlet_nodes()) sys.node_index[n] = -2;  // constrained
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (sys.node_index[n] == -1) {
      sys.node_index[n] = static_cast<int>(sys.free_nodes.size());
      sys.free_nodes.push_back(n);
    }
  }
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (sys.node_index[n] == -2) sys.node_index[n] = -1;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(matrix.nonZeros());
  for (int col = 0; col < matrix.outerSize(); ++col) {
    const int jc = sys.node_index[col];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(matrix, col); it; ++it) {
      const int ir = sys.node_index[it.row()];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  const int n_free = static_cast<int>(sys.free_nodes.size());
  sys.matrix.resize(n_free, n_free);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = sys.reduce(rhs);
  return sys;
}

/// Sparse LU factorization with residual verification; handles nonsymmetric
/// matrices and exposes the transpose solve needed by the adjoint problem.
class DirectSolver {
 public:
  explicit DirectSolver(SpMat matrix) : matrix_(std::move(matrix)) {
    matrix_.makeCompressed();
    lu_.compute(matrix_);
    if (lu_.info() != Eigen::Success)
      throw numerical_error("direct solver: factorization failed (matrix "
                            "singular or structurally deficient)");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs,
                        double tol = 1e-10) const {
    Eigen::VectorXd x = lu_.solve(rhs);
    verify(matrix_ * x, rhs, tol);
    return x;
  }

  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs,
                                  double tol = 1e-10) const {
    Eigen::VectorXd x = lu_.transpose().solve(rhs);
    verify(matrix_.transpose() * x, rhs, tol);
    return x;
  }

 private:
  static void verify(const Eigen::VectorXd& ax, const Eigen::VectorXd& rhs,
                     double tol) {
    const double scale = rhs.norm();
    const double res = (ax - rhs).norm();
    const double rel = scale > 0.0 ? res / scale : res;
    if (!(rel <= tol))
      throw numerical_error("direct solver: relative residual " +
                            std::to_string(rel) + " exceeds tolerance " +
                            std::to_string(tol));
  }

  SpMat matrix_;
  // SparseLU::transpose() is a non-const accessor in Eigen even though it
  // only wraps the factorization in a view.
  mutable Eigen::SparseLU<SpMat> lu_;
};

/// Solves the reduced system and expands to a full nodal field.
inline ScalarField solve_linear(const LinearSystem& sys, double tol = 1e-10) {
  const DirectSolver solver(sys.matrix);
  return sys.expand(solver.solve(sys.rhs, tol));
}

/// Element-center flux q = -k(center) grad(T)(center).
inline FluxField recover_flux(const Mesh& mesh, const TensorField& tensor,
                              const ScalarField& temperature) {
  if (temperature.size() != mesh.n_nodes())
    throw std::invalid_argument("temperature field not sized to the mesh");
  FluxField flux;
  flux.q.reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    const MappedBasis basis = map_basis(mesh, e, 0.0, 0.0);
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int i = 0; i < 4; ++i) grad += temperature[conn[i]] * basis.grad[i];
    const Tensor2 k = tensor({e, basis.x.x(), basis.x.y(), basis.shape});
    flux.q.push_back(-k * grad);
  }
  return flux;
}

}  // namespace hallfmo
