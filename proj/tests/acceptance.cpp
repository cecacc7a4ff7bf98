// Acceptance suite: one test case per shipped guarantee, each printing a
// single [PASS]/[FAIL] line. Failures use REQUIRE so the report line is
// accurate even when a check aborts the case early.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "hallfmo/material.hpp"
#include "hallfmo/objectives.hpp"
#include "hallfmo/optimizer.hpp"
#include "hallfmo/sensitivity.hpp"
#include "test_helpers.hpp"

using namespace hallfmo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

class CriterionReport {
 public:
  explicit CriterionReport(std::string label)
      : label_(std::move(label)),
        exceptions_(std::uncaught_exceptions()),
        start_(std::chrono::steady_clock::now()) {}
  ~CriterionReport() {
    const bool failed = std::uncaught_exceptions() > exceptions_;
    std::printf("[%s] %s (%.2f s)\n", failed ? "FAIL" : "PASS", label_.c_str(),
                seconds());
    std::fflush(stdout);
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::string label_;
  int exceptions_;
  std::chrono::steady_clock::time_point start_;
};

// The default unit-square experiment geometry: centered source block,
// protected region between the source and the cold bottom boundary.
Mesh default_temp_min_mesh(int n = 32) {
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  m = tag_region(std::move(m), {0.45, 0.45, 0.55, 0.55, Region::heat_source});
  m = tag_region(std::move(m), {0.4, 0.15, 0.6, 0.35, Region::protect});
  m = tag_boundary(std::move(m), {Side::bottom, 0.0, 1.0},
                   BoundaryKind::dirichlet);
  return m;
}

// Switching geometry: two protected regions mirror-symmetric about x = 1/2.
Mesh default_switching_mesh(int n = 32) {
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  m = tag_region(std::move(m), {0.45, 0.45, 0.55, 0.55, Region::heat_source});
  m = tag_region(std::move(m), {0.15, 0.15, 0.35, 0.35, Region::protect});
  m = tag_region(std::move(m), {0.65, 0.15, 0.85, 0.35, Region::protect_alt});
  m = tag_boundary(std::move(m), {Side::bottom, 0.0, 1.0},
                   BoundaryKind::dirichlet);
  return m;
}

MaterialParams case_params(double eps, double b) {
  MaterialParams p;
  p.eps = eps;
  p.eps_prime = eps;
  p.b = b;
  return p;
}

OptimizerConfig acceptance_optimizer(const Mesh& mesh, int max_iters) {
  OptimizerConfig cfg;
  cfg.radius = 2.0 * std::max(mesh.hx(), mesh.hy());
  cfg.max_iters = max_iters;
  return cfg;
}

double final_objective(const Mesh& mesh, const MaterialParams& params,
                       int max_iters) {
  const SourceField source =
      SourceField::from_region(mesh, Region::heat_source, 1e5);
  const OptimizeResult r =
      optimize(ProblemKind::temp_min, mesh, params, source,
               acceptance_optimizer(mesh, max_iters));
  return r.objective_history.back().value;
}

double manufactured_rate_error(int n, double hall_w) {
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  for (Side s : {Side::bottom, Side::right, Side::top, Side::left})
    m = tag_boundary(std::move(m), {s, 0.0, 1.0}, BoundaryKind::dirichlet);

  Tensor2 k;
  k << 1.0, -hall_w, hall_w, 1.0;
  const SpMat stiffness = assemble_stiffness(m, constant_tensor(k));

  Eigen::VectorXd f = Eigen::VectorXd::Zero(m.n_nodes());
  constexpr double pi = 3.14159265358979323846;
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto& conn = m.elements[e];
    for (const auto& qp : gauss_2x2()) {
      const MappedBasis basis = map_basis(m, e, qp.xi, qp.eta);
      const double q =
          2 * pi * pi * std::sin(pi * basis.x.x()) * std::sin(pi * basis.x.y());
      for (int i = 0; i < 4; ++i)
        f[conn[i]] += qp.weight * basis.jacobian * q * basis.shape[i];
    }
  }

  const ScalarField t = solve_linear(apply_dirichlet(stiffness, f, m), 1e-11);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m.n_nodes(); ++i) {
    const double exact =
        std::sin(pi * m.nodes[i].x()) * std::sin(pi * m.nodes[i].y());
    num += (t[i] - exact) * (t[i] - exact);
    den += exact * exact;
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("criterion 1: parameterization admissibility sweep") {
  CriterionReport report("criterion 1: parameterization admissibility sweep");
  const MaterialParams params;  // k = 10, c = 20, b = 0.3, eps = eps' = 1e-4
  const double lo = params.c * params.eps;
  const double hi = params.c;

  long violations = 0;
  std::string first;
  const auto flag = [&](double xi, double eta, double s, double a,
                        const char* what) {
    if (violations++ == 0)
      first = std::string(what) + " at (" + std::to_string(xi) + ", " +
              std::to_string(eta) + ", " + std::to_string(s) + ", " +
              std::to_string(a) + ")";
  };

  for (int ix = 0; ix <= 20; ++ix)
    for (int ie = 0; ie <= 20; ++ie)
      for (int is = 0; is <= 20; ++is)
        for (int ia = 0; ia <= 20; ++ia) {
          const double xi = -1.0 + 0.1 * ix;
          const double eta = -1.0 + 0.1 * ie;
          const double s = -1.0 + 0.1 * is;
          const double a = -1.0 + 0.1 * ia;

          const DiagComponents d = diag_from_xi_eta(xi, eta, params);
          const double k12 = offdiag_from_s(s, d.k11, d.k22, params);
          const double tr = d.k11 + d.k22;
          if (!(tr >= lo - 1e-12 && tr <= hi + 1e-12))
            flag(xi, eta, s, a, "anisotropic trace out of range");
          if (!(d.k11 * d.k22 - k12 * k12 > 0.0))
            flag(xi, eta, s, a, "anisotropic determinant not positive");

          const Tensor2 k = effective_tensor(xi, eta, s, a, params);
          const double off = 0.5 * (k(0, 1) + k(1, 0));
          if (!(k(0, 0) > 0.0 && k(0, 0) * k(1, 1) - off * off > 0.0))
            flag(xi, eta, s, a, "symmetric part not positive definite");

          const double w = 0.5 * (k(1, 0) - k(0, 1));
          if (std::abs(w - hall_term(a, params)) > 1e-14)
            flag(xi, eta, s, a, "antisymmetric part differs from a*b*k");
        }

  INFO(first);
  REQUIRE(violations == 0);
  REQUIRE(report.seconds() < 5.0);
}

TEST_CASE("criterion 2: forward solver convergence rates") {
  CriterionReport report("criterion 2: forward solver convergence rates");
  for (double w : {0.0, 3.0}) {
    const double e8 = manufactured_rate_error(8, w);
    const double e16 = manufactured_rate_error(16, w);
    const double e32 = manufactured_rate_error(32, w);
    const double rate1 = std::log2(e8 / e16);
    const double rate2 = std::log2(e16 / e32);
    INFO("w = " << w << ": errors " << e8 << ", " << e16 << ", " << e32);
    REQUIRE(rate1 >= 1.8);
    REQUIRE(rate1 <= 2.2);
    REQUIRE(rate2 >= 1.8);
    REQUIRE(rate2 <= 2.2);
  }
  REQUIRE(report.seconds() < 10.0);
}

TEST_CASE("criterion 3: Hall mirror symmetry") {
  CriterionReport report("criterion 3: Hall mirror symmetry");
  const int n = 16;
  Mesh m = build_structured_mesh(n, n, 1.0, 1.0);
  m = tag_region(std::move(m), {0.45, 0.45, 0.55, 0.55, Region::heat_source});
  m = tag_boundary(std::move(m), {Side::bottom, 0.0, 1.0},
                   BoundaryKind::dirichlet);
  const SourceField source =
      SourceField::from_region(m, Region::heat_source, 1e5);
  const Eigen::VectorXd load = assemble_load(m, source);
  const MaterialParams params;

  const auto solve_with_a = [&](double a) {
    const DesignFields d = DesignFields::uniform(m.n_nodes(), 1.0, 1.0, 0.0, a);
    const TensorField tensor =
        design_tensor_field(m, d, params, HallField::primary);
    const ScalarField t =
        solve_linear(apply_dirichlet(assemble_stiffness(m, tensor), load, m),
                     1e-12);
    return std::make_pair(t, recover_flux(m, tensor, t));
  };
  const auto [t_plus, flux_plus] = solve_with_a(1.0);
  const auto [t_minus, flux_minus] = solve_with_a(-1.0);

  const auto node = [n](int i, int j) { return j * (n + 1) + i; };
  const double t_scale = t_plus.cwiseAbs().maxCoeff();
  double worst_t = 0.0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      worst_t = std::max(worst_t, std::abs(t_plus[node(i, j)] -
                                           t_minus[node(n - i, j)]));
  INFO("max nodal mirror defect " << worst_t / t_scale);
  REQUIRE(worst_t <= 1e-8 * t_scale);

  double flux_scale = 0.0;
  for (const auto& q : flux_plus.q) flux_scale = std::max(flux_scale, q.norm());
  const auto element = [n](int i, int j) { return j * n + i; };
  double worst_q = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d qp = flux_plus.q[element(i, j)];
      const Eigen::Vector2d qm = flux_minus.q[element(n - 1 - i, j)];
      worst_q = std::max(worst_q, std::abs(qp.x() + qm.x()));
      worst_q = std::max(worst_q, std::abs(qp.y() - qm.y()));
    }
  INFO("max flux mirror defect " << worst_q / flux_scale);
  REQUIRE(worst_q <= 1e-8 * flux_scale);
  REQUIRE(report.seconds() < 5.0);
}

TEST_CASE("criterion 4: antisymmetric assembly identity") {
  CriterionReport report("criterion 4: antisymmetric assembly identity");
  const Mesh mesh = build_structured_mesh(6, 6, 1.0, 1.0);
  const MaterialParams params;
  std::mt19937 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    const DesignFields design =
        testing::random_design(mesh.n_nodes(), rng, false);
    const TensorField full =
        design_tensor_field(mesh, design, params, HallField::primary);
    const TensorField asym = [&full](const EvalPoint& p) {
      const Tensor2 k = full(p);
      return Tensor2(0.5 * (k - k.transpose()));
    };
    const SpMat ka = assemble_stiffness(mesh, asym, false);
    const double scale = ka.norm();
    REQUIRE(scale > 0.0);

    const SpMat defect = SpMat(ka.transpose()) + ka;
    REQUIRE(defect.norm() <= 1e-12 * scale);

    Eigen::VectorXd x(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) x[i] = gauss(rng);
    REQUIRE(std::abs(x.dot(ka * x)) <= 1e-12 * x.squaredNorm() * scale);
  }
  REQUIRE(report.seconds() < 5.0);
}

TEST_CASE("criterion 5: adjoint gradient against finite differences") {
  CriterionReport report("criterion 5: adjoint gradient against finite differences");
  struct FieldRef {
    const char* name;
    ScalarField DesignFields::* design;
    ScalarField GradientFields::* grad;
  };
  std::mt19937 rng(5150);

  const auto check_problem = [&rng](const testing::ProblemSetup& p,
                                    ObjectiveKind kind, bool with_alternate) {
    const DesignFields design =
        testing::random_design(p.mesh.n_nodes(), rng, with_alternate);

    // adjoint gradient
    GradientFields g;
    {
      const TensorField tensor0 =
          design_tensor_field(p.mesh, design, p.params, HallField::primary);
      const ScalarField t0 =
          testing::solve_state(p, design, HallField::primary);
      const ScalarField l0 =
          solve_adjoint(p.mesh, tensor0, adjoint_rhs(kind, 0, p.mesh), 1e-12);
      if (kind == ObjectiveKind::temp_min) {
        g = pointwise_gradient(p.mesh, t0, l0, design, p.params);
      } else {
        const TensorField tensor1 =
            design_tensor_field(p.mesh, design, p.params, HallField::alternate);
        const ScalarField t1 =
            testing::solve_state(p, design, HallField::alternate);
        const ScalarField l1 = solve_adjoint(p.mesh, tensor1,
                                             adjoint_rhs(kind, 1, p.mesh), 1e-12);
        g = switching_gradient(p.mesh, t0, t1, l0, l1, design, p.params);
      }
    }

    std::vector<FieldRef> fields = {
        {"xi", &DesignFields::xi, &GradientFields::xi},
        {"eta", &DesignFields::eta, &GradientFields::eta},
        {"s", &DesignFields::s, &GradientFields::s},
        {"a", &DesignFields::a, &GradientFields::a}};
    if (with_alternate)
      fields.push_back({"a_prime", &DesignFields::a_prime,
                        &GradientFields::a_prime});

    const double delta = 1e-6;
    for (const FieldRef& f : fields) {
      const double atol =
          1e-12 * std::max(1.0, (g.*f.grad).cwiseAbs().maxCoeff());
      for (int node : testing::fd_sample_nodes(g.*f.grad, rng)) {
        DesignFields perturbed = design;
        (perturbed.*f.design)[node] += delta;
        const double plus = testing::objective_of(p, perturbed, kind);
        (perturbed.*f.design)[node] -= 2.0 * delta;
        const double minus = testing::objective_of(p, perturbed, kind);
        const double fd = (plus - minus) / (2.0 * delta);
        const double adjoint = (g.*f.grad)[node];
        const double scale = std::max({std::abs(adjoint), std::abs(fd), atol});
        INFO("field " << f.name << " node " << node << ": adjoint " << adjoint
                      << " vs fd " << fd);
        REQUIRE(std::abs(adjoint - fd) / scale <= 1e-4);
      }
    }
  };

  check_problem(testing::temp_min_problem(8), ObjectiveKind::temp_min, false);
  check_problem(testing::switching_problem(8), ObjectiveKind::switching, true);
  REQUIRE(report.seconds() < 30.0);
}

TEST_CASE("criterion 6: case ordering on the default geometry") {
  CriterionReport report("criterion 6: case ordering on the default geometry");
  const Mesh mesh = default_temp_min_mesh();
  const int iters = 600;

  const double j_isotropic = final_objective(mesh, case_params(1.0, 0.0), iters);
  const double j_anisotropic =
      final_objective(mesh, case_params(1e-4, 0.0), iters);
  const double j_asymmetric =
      final_objective(mesh, case_params(1.0, 0.3), iters);
  const double j_combined = final_objective(mesh, case_params(1e-4, 0.3), iters);

  INFO("J: isotropic " << j_isotropic << ", anisotropic " << j_anisotropic
                       << ", asymmetric " << j_asymmetric << ", combined "
                       << j_combined);
  REQUIRE(j_combined < j_anisotropic);
  REQUIRE(j_anisotropic < j_asymmetric);
  REQUIRE(j_asymmetric < j_isotropic);
  REQUIRE(report.seconds() < 600.0);
}

TEST_CASE("criterion 7: heat-path switching") {
  CriterionReport report("criterion 7: heat-path switching");
  const Mesh mesh = default_switching_mesh();
  const SourceField source =
      SourceField::from_region(mesh, Region::heat_source, 1e5);
  const MaterialParams params;

  const OptimizeResult r =
      optimize(ProblemKind::switching, mesh, params, source,
               acceptance_optimizer(mesh, 600));

  const double ip_t = region_integral(r.temperature, mesh, Region::protect);
  const double ipa_t =
      region_integral(r.temperature, mesh, Region::protect_alt);
  const double ip_u =
      region_integral(r.temperature_alt, mesh, Region::protect);
  const double ipa_u =
      region_integral(r.temperature_alt, mesh, Region::protect_alt);

  INFO("state 1: I_p " << ip_t << " vs I_p' " << ipa_t << "; state 2: I_p "
                       << ip_u << " vs I_p' " << ipa_u);
  REQUIRE(ip_t < ipa_t);    // mode 1 shields the protected region
  REQUIRE(ipa_u < ip_u);    // mode 2 shields the alternate region
  REQUIRE(r.design.a.mean() * r.design.a_prime.mean() < 0.0);
  REQUIRE(report.seconds() < 600.0);
}

TEST_CASE("criterion 8: degenerate case stops immediately") {
  CriterionReport report("criterion 8: degenerate case stops immediately");
  const Mesh mesh = default_temp_min_mesh();
  const MaterialParams params = case_params(1.0, 0.0);
  const SourceField source =
      SourceField::from_region(mesh, Region::heat_source, 1e5);

  // the gradient of every design field vanishes at the initial design
  const DesignFields design = DesignFields::zeros(mesh.n_nodes(), false);
  const TensorField tensor =
      design_tensor_field(mesh, design, params, HallField::primary);
  const LinearSystem sys = apply_dirichlet(assemble_stiffness(mesh, tensor),
                                           assemble_load(mesh, source), mesh);
  const ScalarField t = solve_linear(sys, 1e-12);
  const ScalarField lambda = solve_adjoint(
      mesh, tensor, adjoint_rhs(ObjectiveKind::temp_min, 0, mesh), 1e-12);
  const GradientFields g = pointwise_gradient(mesh, t, lambda, design, params);
  REQUIRE(g.xi.cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(g.eta.cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(g.s.cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(g.a.cwiseAbs().maxCoeff() <= 1e-12);

  const OptimizeResult r = optimize(ProblemKind::temp_min, mesh, params,
                                    source, acceptance_optimizer(mesh, 50));
  REQUIRE(r.status == OptimizeStatus::converged);
  REQUIRE(r.iterations <= 2);
  for (const auto& j : r.objective_history)
    REQUIRE(j.value == r.objective_history.front().value);
  REQUIRE(report.seconds() < 60.0);
}

TEST_CASE("criterion 9: optimizer unit contracts") {
  CriterionReport report("criterion 9: optimizer unit contracts");
  const OptimizerConfig cfg;

  // moment update for a single gradient sample G = 2
  AdamState st = AdamState::zeros(1, false);
  GradientFields g = GradientFields::zeros(1, false);
  g.xi[0] = g.eta[0] = g.s[0] = g.a[0] = 2.0;
  update_moments(st, g, cfg);
  REQUIRE_THAT(st.xi.v[0], WithinRel(0.2, 1e-6));
  REQUIRE_THAT(st.xi.s_m[0], WithinRel(0.004, 1e-6));

  // preconditioned sensitivity, against the quoted figure and the exact value
  const double lp = design_sensitivity(st, cfg).xi[0];
  REQUIRE_THAT(lp, WithinRel(3.16226, 1e-5));
  REQUIRE_THAT(lp, WithinRel(3.1622737073287133, 1e-12));

  // constant-sensitivity reaction-diffusion step with dt = 0.01
  const Mesh mesh = build_structured_mesh(4, 4, 1.0, 1.0);
  const ScalarField phi = rd_step(mesh, ScalarField::Zero(mesh.n_nodes()),
                                  ScalarField::Ones(mesh.n_nodes()), cfg);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    REQUIRE_THAT(phi[i], WithinRel(-0.01, 1e-6));

  // stopping-rule boundary examples
  std::vector<ObjectiveValue> at_tol{{1.0e-5, {}}, {1.000001e-5, {}}};
  REQUIRE(converged(at_tol, 1e-6));
  std::vector<ObjectiveValue> above_tol{{1.0e-5, {}}, {1.1e-5, {}}};
  REQUIRE_FALSE(converged(above_tol, 1e-6));
  REQUIRE(report.seconds() < 5.0);
}
