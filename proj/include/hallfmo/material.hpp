#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hallfmo/errors.hpp"
#include "hallfmo/mesh.hpp"
#include "hallfmo/types.hpp"

namespace hallfmo {

/// Constants of the conductivity-tensor parameterization.
///   k         isotropic conductivity of the Hall-active material
///   c         upper bound on the trace of the anisotropic part
///   b         bound on the Hall product |R^TH B_z|
///   eps       trace floor: tr(k_aniso) >= c*eps
///   eps_prime determinant floor: det(k_aniso) >= k11*k22*eps_prime
struct MaterialParams {
  double k = 10.0;
  double c = 20.0;
  double b = 0.3;
  double eps = 1e-4;
  double eps_prime = 1e-4;

  void validate() const {
    if (!(k > 0.0)) throw config_error("material: k must be positive");
    if (!(c > 0.0)) throw config_error("material: c must be positive");
    if (b < 0.0) throw config_error("material: b must be nonnegative");
    if (!(eps > 0.0 && eps <= 1.0))
      throw config_error("material: eps must lie in (0, 1]");
    if (!(eps_prime > 0.0 && eps_prime <= 1.0))
      throw config_error("material: eps_prime must lie in (0, 1]");
  }
};

/// Nodal design fields, each valued in [-1, 1]. The alternate Hall field
/// a_prime is sized 0 unless the two-state switching problem is solved.
struct DesignFields {
  ScalarField xi, eta, s, a, a_prime;

  static DesignFields zeros(int n_nodes, bool with_alternate) {
    DesignFields d;
    d.xi = ScalarField::Zero(n_nodes);
    d.eta = ScalarField::Zero(n_nodes);
    d.s = ScalarField::Zero(n_nodes);
    d.a = ScalarField::Zero(n_nodes);
    d.a_prime = with_alternate ? ScalarField::Zero(n_nodes) : ScalarField();
    return d;
  }

  static DesignFields uniform(int n_nodes, double xi, double eta, double s,
                              double a) {
    DesignFields d;
    d.xi = ScalarField::Constant(n_nodes, xi);
    d.eta = ScalarField::Constant(n_nodes, eta);
    d.s = ScalarField::Constant(n_nodes, s);
    d.a = ScalarField::Constant(n_nodes, a);
    return d;
  }

  bool has_alternate() const { return a_prime.size() > 0; }
};

namespace detail {

inline void check_unit_interval(double v, const char* name) {
  // Allow interpolation roundoff at the box edge.
  if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12))
    throw std::domain_error(std::string("design value ") + name +
                            " outside [-1, 1]: " + std::to_string(v));
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace detail

struct DiagComponents {
  double k11 = 0.0, k22 = 0.0;
  double dk11_dxi = 0.0, dk22_dxi = 0.0;
  double dk11_deta = 0.0, dk22_deta = 0.0;
};

/// Bilinear map from (xi, eta) in [-1,1]^2 onto the diagonal components of
/// the anisotropic part. The image is the quadrilateral with vertices
///   v1 = (c e/2, c e/2)   v2 = (c - c e/2, c e/2)
///   v3 = (c e/2, c - c e/2)   v4 = (c/2, c/2)
/// which keeps c*eps <= k11 + k22 <= c and k11, k22 >= c*eps/2.
inline DiagComponents diag_from_xi_eta(double xi, double eta,
                                       const MaterialParams& p) {
  detail::check_unit_interval(xi, "xi");
  detail::check_unit_interval(eta, "eta");
  xi = detail::clamp_unit(xi);
  eta = detail::clamp_unit(eta);

  const double lo = p.c * p.eps / 2.0;
  const double vx[4] = {lo, p.c - lo, lo, p.c / 2.0};
  const double vy[4] = {lo, lo, p.c - lo, p.c / 2.0};

  const double n[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                       0.25 * (1 - xi) * (1 + eta), 0.25 * (1 + xi) * (1 + eta)};
  const double dn_dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta),
                            -0.25 * (1 + eta), 0.25 * (1 + eta)};
  const double dn_deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi),
                             0.25 * (1 - xi), 0.25 * (1 + xi)};

  DiagComponents d;
  for (int i = 0; i < 4; ++i) {
    d.k11 += n[i] * vx[i];
    d.k22 += n[i] * vy[i];
    d.dk11_dxi += dn_dxi[i] * vx[i];
    d.dk22_dxi += dn_dxi[i] * vy[i];
    d.dk11_deta += dn_deta[i] * vx[i];
    d.dk22_deta += dn_deta[i] * vy[i];
  }
  return d;
}

/// Off-diagonal component k12 = s * sqrt((1 - eps') k11 k22); the scaling
/// keeps det(k_aniso) = k11 k22 (1 - s^2 (1 - eps')) strictly positive.
inline double offdiag_from_s(double s, double k11, double k22,
                             const MaterialParams& p) {
  detail::check_unit_interval(s, "s");
  s = detail::clamp_unit(s);
  const double arg = (1.0 - p.eps_prime) * k11 * k22;
  return arg > 0.0 ? s * std::sqrt(arg) : 0.0;
}

/// Hall contribution w = a*b*k to the antisymmetric part; |w| <= b*k.
inline double hall_term(double a, const MaterialParams& p) {
  detail::check_unit_interval(a, "a");
  return detail::clamp_unit(a) * p.b * p.k;
}

/// Effective conductivity tensor
///   [ k + k11      k12 - a b k ]
///   [ k12 + a b k  k + k22     ]
inline Tensor2 effective_tensor(double xi, double eta, double s, double a,
                                const MaterialParams& p) {
  const DiagComponents d = diag_from_xi_eta(xi, eta, p);
  const double k12 = offdiag_from_s(s, d.k11, d.k22, p);
  const double w = hall_term(a, p);
  Tensor2 t;
  t << p.k + d.k11, k12 - w, k12 + w, p.k + d.k22;
  return t;
}

struct TensorDerivatives {
  Tensor2 d_xi, d_eta, d_s, d_a;
};

/// Analytic partial derivatives of the effective tensor with respect to the
/// four design values at one evaluation point.
inline TensorDerivatives tensor_derivatives(double xi, double eta, double s,
                                            double /*a*/,
                                            const MaterialParams& p) {
  const DiagComponents d = diag_from_xi_eta(xi, eta, p);
  s = detail::clamp_unit(s);

  const double arg = (1.0 - p.eps_prime) * d.k11 * d.k22;
  const double g = arg > 0.0 ? std::sqrt(arg) : 0.0;
  // d k12 / d xi = s (1-eps') (k11' k22 + k11 k22') / (2 g); zero when the
  // radicand vanishes (eps' = 1 makes k12 identically zero).
  double dk12_dxi = 0.0, dk12_deta = 0.0;
  if (g > 0.0) {
    const double f = s * (1.0 - p.eps_prime) / (2.0 * g);
    dk12_dxi = f * (d.dk11_dxi * d.k22 + d.k11 * d.dk22_dxi);
    dk12_deta = f * (d.dk11_deta * d.k22 + d.k11 * d.dk22_deta);
  }

  TensorDerivatives out;
  out.d_xi << d.dk11_dxi, dk12_dxi, dk12_dxi, d.dk22_dxi;
  out.d_eta << d.dk11_deta, dk12_deta, dk12_deta, d.dk22_deta;
  out.d_s << 0.0, g, g, 0.0;
  const double bk = p.b * p.k;
  out.d_a << 0.0, -bk, bk, 0.0;
  return out;
}

/// Which Hall design field feeds the antisymmetric part.
enum class HallField { primary, alternate };

/// Effective tensor field induced by nodal design fields: each field is
/// interpolated bilinearly to the evaluation point, then mapped pointwise.
inline TensorField design_tensor_field(const Mesh& mesh,
                                       const DesignFields& design,
                                       const MaterialParams& params,
                                       HallField which = HallField::primary) {
  const ScalarField& hall =
      (which == HallField::alternate) ? design.a_prime : design.a;
  if (hall.size() != mesh.n_nodes() || design.xi.size() != mesh.n_nodes())
    throw std::invalid_argument("design fields not sized to the mesh");

  return [&mesh, &design, &hall, params](const EvalPoint& q) {
    const auto& conn = mesh.elements[q.element];
    double xi = 0, eta = 0, s = 0, a = 0;
    for (int i = 0; i < 4; ++i) {
      xi += q.shape[i] * design.xi[conn[i]];
      eta += q.shape[i] * design.eta[conn[i]];
      s += q.shape[i] * design.s[conn[i]];
      a += q.shape[i] * hall[conn[i]];
    }
    return effective_tensor(detail::clamp_unit(xi), detail::clamp_unit(eta),
                            detail::clamp_unit(s), detail::clamp_unit(a),
                            params);
  };
}

}  // namespace hallfmo
