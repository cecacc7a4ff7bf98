#pragma once

#include <stdexcept>

#include "hallfmo/element.hpp"
#include "hallfmo/fem.hpp"
#include "hallfmo/material.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/types.hpp"

namespace hallfmo {

/// Nodal gradient of the objective with respect to each design field; same
/// layout as DesignFields (a_prime sized 0 unless two Hall states exist).
struct GradientFields {
  ScalarField xi, eta, s, a, a_prime;

  static GradientFields zeros(int n_nodes, bool with_alternate) {
    GradientFields g;
    g.xi = ScalarField::Zero(n_nodes);
    g.eta = ScalarField::Zero(n_nodes);
    g.s = ScalarField::Zero(n_nodes);
    g.a = ScalarField::Zero(n_nodes);
    g.a_prime = with_alternate ? ScalarField::Zero(n_nodes) : ScalarField();
    return g;
  }
};

/// Solves the adjoint system K^T lambda = rhs (same homogeneous Dirichlet
/// constraints as the forward problem) and expands lambda to all nodes.
inline ScalarField solve_adjoint(const Mesh& mesh, const TensorField& tensor,
                                 const Eigen::VectorXd& rhs,
                                 double tol = 1e-10) {
  const SpMat k = assemble_stiffness(mesh, tensor);
  const SpMat kt = k.transpose();
  const LinearSystem sys = apply_dirichlet(kt, rhs, mesh);
  return solve_linear(sys, tol);
}

/// Quadrature-point kernel of the design gradient: the contribution of one
/// point to dJ/dphi_n, with lambda solving K^T lambda = dJ/dT.
inline double gradient_kernel(const Tensor2& tensor_derivative,
                              const Eigen::Vector2d& grad_temperature,
                              const Eigen::Vector2d& grad_adjoint,
                              double weight, double shape) {
  return -weight * shape *
         grad_adjoint.dot(tensor_derivative * grad_temperature);
}

namespace detail {

// Accumulates one state's contribution. The Hall gradient lands in g.a for
// the primary state and in g.a_prime for the alternate state.
inline void accumulate_state_gradient(GradientFields& g, const Mesh& mesh,
                                      const ScalarField& temperature,
                                      const ScalarField& adjoint,
                                      const DesignFields& design,
                                      const MaterialParams& params,
                                      HallField which) {
  const ScalarField& hall =
      (which == HallField::alternate) ? design.a_prime : design.a;
  ScalarField& g_hall = (which == HallField::alternate) ? g.a_prime : g.a;
  if (temperature.size() != mesh.n_nodes() || adjoint.size() != mesh.n_nodes())
    throw std::invalid_argument("state fields not sized to the mesh");
  if (design.xi.size() != mesh.n_nodes() || hall.size() != mesh.n_nodes())
    throw std::invalid_argument("design fields not sized to the mesh");

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
      double xi = 0, eta = 0, s = 0;
      Eigen::Vector2d grad_t = Eigen::Vector2d::Zero();
      Eigen::Vector2d grad_l = Eigen::Vector2d::Zero();
      for (int i = 0; i < 4; ++i) {
        xi += basis.shape[i] * design.xi[conn[i]];
        eta += basis.shape[i] * design.eta[conn[i]];
        s += basis.shape[i] * design.s[conn[i]];
        grad_t += temperature[conn[i]] * basis.grad[i];
        grad_l += adjoint[conn[i]] * basis.grad[i];
      }
      const TensorDerivatives d =
          tensor_derivatives(clamp_unit(xi), clamp_unit(eta), clamp_unit(s),
                             0.0, params);
      const double w = qp.weight * basis.jacobian;
      for (int i = 0; i < 4; ++i) {
        const int n = conn[i];
        g.xi[n] += gradient_kernel(d.d_xi, grad_t, grad_l, w, basis.shape[i]);
        g.eta[n] += gradient_kernel(d.d_eta, grad_t, grad_l, w, basis.shape[i]);
        g.s[n] += gradient_kernel(d.d_s, grad_t, grad_l, w, basis.shape[i]);
        g_hall[n] += gradient_kernel(d.d_a, grad_t, grad_l, w, basis.shape[i]);
      }
    }
  }
}

}  // namespace detail

/// Gradient of a single-state objective (dJ/dphi_n per nodal design value).
inline GradientFields pointwise_gradient(const Mesh& mesh,
                                         const ScalarField& temperature,
                                         const ScalarField& adjoint,
                                         const DesignFields& design,
                                         const MaterialParams& params) {
  GradientFields g = GradientFields::zeros(mesh.n_nodes(), false);
  detail::accumulate_state_gradient(g, mesh, temperature, adjoint, design,
                                    params, HallField::primary);
  return g;
}

/// Gradient of the two-state switching objective: xi, eta, s collect both
/// states, a comes from state 1 only and a_prime from state 2 only.
inline GradientFields switching_gradient(const Mesh& mesh,
                                         const ScalarField& temperature,
                                         const ScalarField& temperature_alt,
                                         const ScalarField& adjoint,
                                         const ScalarField& adjoint_alt,
                                         const DesignFields& design,
                                         const MaterialParams& params) {
  GradientFields g = GradientFields::zeros(mesh.n_nodes(), true);
  detail::accumulate_state_gradient(g, mesh, temperature, adjoint, design,
                                    params, HallField::primary);
  detail::accumulate_state_gradient(g, mesh, temperature_alt, adjoint_alt,
                                    design, params, HallField::alternate);
  return g;
}

}  // namespace hallfmo
