#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "hallfmo/mesh.hpp"

namespace hallfmo {

struct QuadPoint {
  double xi, eta, weight;
};

// 2x2 Gauss rule on [-1,1]^2; exact for the bilinear mass matrix and for
// the stiffness integrand on rectangles.
inline constexpr double kGaussAbscissa = 0.57735026918962576450914878050196;
inline constexpr std::array<QuadPoint, 4> gauss_2x2() {
  constexpr double g = kGaussAbscissa;
  return {{{-g, -g, 1.0}, {g, -g, 1.0}, {g, g, 1.0}, {-g, g, 1.0}}};
}

// Bilinear basis in counterclockwise local node order:
// (-1,-1), (1,-1), (1,1), (-1,1).
inline std::array<double, 4> shape_values(double xi, double eta) {
  return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
          0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
}

inline std::array<Eigen::Vector2d, 4> shape_gradients_ref(double xi,
                                                          double eta) {
  return {Eigen::Vector2d(-0.25 * (1 - eta), -0.25 * (1 - xi)),
          Eigen::Vector2d(0.25 * (1 - eta), -0.25 * (1 + xi)),
          Eigen::Vector2d(0.25 * (1 + eta), 0.25 * (1 + xi)),
          Eigen::Vector2d(-0.25 * (1 + eta), 0.25 * (1 - xi))};
}

/// Basis data of one element evaluated at one reference point: shape values,
/// physical gradients, Jacobian determinant, physical coordinates.
struct MappedBasis {
  std::array<double, 4> shape{};
  std::array<Eigen::Vector2d, 4> grad{};
  double jacobian = 0.0;
  Eigen::Vector2d x{0.0, 0.0};
};

inline MappedBasis map_basis(const Mesh& mesh, int element, double xi,
                             double eta) {
  const auto& conn = mesh.elements[element];
  const auto n = shape_values(xi, eta);
  const auto dref = shape_gradients_ref(xi, eta);

  Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  for (int i = 0; i < 4; ++i) {
    jac += mesh.nodes[conn[i]] * dref[i].transpose();
    x += n[i] * mesh.nodes[conn[i]];
  }

  MappedBasis out;
  out.shape = n;
  out.jacobian = jac.determinant();
  out.x = x;
  const Eigen::Matrix2d jinv_t = jac.inverse().transpose();
  for (int i = 0; i < 4; ++i) out.grad[i] = jinv_t * dref[i];
  return out;
}

}  // namespace hallfmo
