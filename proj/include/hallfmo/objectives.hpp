#pragma once

#include <string>
#include <vector>

#include "hallfmo/element.hpp"
#include "hallfmo/errors.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/types.hpp"

namespace hallfmo {

enum class ObjectiveKind { temp_min, switching };

/// Objective value with its signed per-term breakdown; value equals the sum
/// of the term values.
struct ObjectiveValue {
  double value = 0.0;
  struct Term {
    std::string label;
    double value = 0.0;  // sign included
  };
  std::vector<Term> terms;
};

/// Integral of the bilinear interpolant of T over the tagged elements.
inline double region_integral(const ScalarField& temperature, const Mesh& mesh,
                              Region tag) {
  if (temperature.size() != mesh.n_nodes())
    throw std::invalid_argument("field not sized to the mesh");
  bool found = false;
  double integral = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.region[e] != tag) continue;
    found = true;
    const auto& conn = mesh.elements[e];
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
      double t = 0.0;
      for (int i = 0; i < 4; ++i) t += basis.shape[i] * temperature[conn[i]];
      integral += qp.weight * basis.jacobian * t;
    }
  }
  if (!found)
    throw config_error(std::string("objective: region '") + to_string(tag) +
                       "' is empty");
  return integral;
}

inline double region_area(const Mesh& mesh, Region tag) {
  return region_integral(ScalarField::Ones(mesh.n_nodes()), mesh, tag);
}

/// J = int_{protect} T dOmega.
inline ObjectiveValue temp_min_objective(const ScalarField& temperature,
                                         const Mesh& mesh) {
  ObjectiveValue j;
  const double v = region_integral(temperature, mesh, Region::protect);
  j.terms.push_back({"I_p(T)", v});
  j.value = v;
  return j;
}

/// J = I_p(T) - I_p'(T) + I_p'(T') - I_p(T'): heat avoids the protected
/// region in state 1 and is drawn into it in state 2.
inline ObjectiveValue switching_objective(const ScalarField& temperature,
                                          const ScalarField& temperature_alt,
                                          const Mesh& mesh) {
  ObjectiveValue j;
  const double ip_t = region_integral(temperature, mesh, Region::protect);
  const double ipa_t = region_integral(temperature, mesh, Region::protect_alt);
  const double ipa_u = region_integral(temperature_alt, mesh, Region::protect_alt);
  const double ip_u = region_integral(temperature_alt, mesh, Region::protect);
  j.terms.push_back({"I_p(T)", ip_t});
  j.terms.push_back({"-I_p'(T)", -ipa_t});
  j.terms.push_back({"I_p'(T')", ipa_u});
  j.terms.push_back({"-I_p(T')", -ip_u});
  j.value = ip_t - ipa_t + ipa_u - ip_u;
  return j;
}

/// Derivative of the objective with respect to the nodal temperature values
/// of one state: dJ/dT_i as an assembled load vector.
inline Eigen::VectorXd adjoint_rhs(ObjectiveKind kind, int state,
                                   const Mesh& mesh) {
  const auto region_load = [&mesh](Region tag) {
    bool found = false;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.n_nodes());
    for (int e = 0; e < mesh.n_elements(); ++e) {
      if (mesh.region[e] != tag) continue;
      found = true;
      const auto& conn = mesh.elements[e];
      for (const auto& qp : gauss_2x2()) {
        const MappedBasis basis = map_basis(mesh, e, qp.xi, qp.eta);
        for (int i = 0; i < 4; ++i)
          g[conn[i]] += qp.weight * basis.jacobian * basis.shape[i];
      }
    }
    if (!found)
      throw config_error(std::string("objective: region '") + to_string(tag) +
                         "' is empty");
    return g;
  };

  if (kind == ObjectiveKind::temp_min) {
    if (state != 0)
      throw std::invalid_argument("temp_min objective has a single state");
    return region_load(Region::protect);
  }
  const Eigen::VectorXd gp = region_load(Region::protect);
  const Eigen::VectorXd gpa = region_load(Region::protect_alt);
  if (state == 0) return gp - gpa;
  if (state == 1) return gpa - gp;
  throw std::invalid_argument("switching objective has states 0 and 1");
}

}  // namespace hallfmo
