#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>
#include <Eigen/Sparse>

namespace hallfmo {

/// Nodal scalar field: one value per mesh node.
using ScalarField = Eigen::VectorXd;

/// 2x2 conductivity tensor (possibly nonsymmetric).
using Tensor2 = Eigen::Matrix2d;

using SpMat = Eigen::SparseMatrix<double>;

/// Point at which a spatially varying tensor is evaluated during assembly:
/// owning element, physical coordinates, and the bilinear interpolation
/// weights of the element's four nodes (counterclockwise order).
struct EvalPoint {
  int element = 0;
  double x = 0.0;
  double y = 0.0;
  std::array<double, 4> shape{};
};

/// Spatially varying conductivity tensor.
using TensorField = std::function<Tensor2(const EvalPoint&)>;

inline TensorField constant_tensor(const Tensor2& k) {
  return [k](const EvalPoint&) { return k; };
}

}  // namespace hallfmo
