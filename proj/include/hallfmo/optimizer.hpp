#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hallfmo/fem.hpp"
#include "hallfmo/material.hpp"
#include "hallfmo/objectives.hpp"
#include "hallfmo/sensitivity.hpp"

namespace hallfmo {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double dt = 1e-2;
  double radius = 0.0;  // diffusion radius; 0 disables smoothing
  int max_iters = 1000;
  double tolerance = 1e-6;

  void validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw config_error("optimizer: beta1, beta2 must lie in [0, 1)");
    if (!(eps_adam > 0.0)) throw config_error("optimizer: eps_adam must be positive");
    if (!(dt > 0.0)) throw config_error("optimizer: dt must be positive");
    if (radius < 0.0) throw config_error("optimizer: R must be nonnegative");
    if (max_iters < 1) throw config_error("optimizer: max_iters must be >= 1");
    if (!(tolerance > 0.0)) throw config_error("optimizer: tolerance must be positive");
  }
};

/// First and second gradient moments per design field. The second moment is
/// named s_m throughout to keep it apart from the off-diagonal design field s.
struct AdamState {
  struct Moments {
    ScalarField v, s_m;
  };
  Moments xi, eta, s, a, a_prime;
  int iteration = 0;

  static AdamState zeros(int n_nodes, bool with_alternate) {
    AdamState st;
    const auto zero_pair = [n_nodes] {
      return Moments{ScalarField::Zero(n_nodes), ScalarField::Zero(n_nodes)};
    };
    st.xi = zero_pair();
    st.eta = zero_pair();
    st.s = zero_pair();
    st.a = zero_pair();
    if (with_alternate) st.a_prime = zero_pair();
    return st;
  }

  bool has_alternate() const { return a_prime.v.size() > 0; }
};

namespace detail {

inline void update_field_moments(AdamState::Moments& m, const ScalarField& g,
                                 const OptimizerConfig& cfg) {
  if (m.v.size() != g.size())
    throw std::invalid_argument("moment/gradient layouts do not match");
  m.v = cfg.beta1 * m.v + (1.0 - cfg.beta1) * g;
  m.s_m = cfg.beta2 * m.s_m + (1.0 - cfg.beta2) * g.cwiseProduct(g);
}

}  // namespace detail

/// v <- b1 v + (1-b1) G and s_m <- b2 s_m + (1-b2) G^2, nodewise, without
/// bias correction.
inline void update_moments(AdamState& state, const GradientFields& g,
                           const OptimizerConfig& cfg) {
  detail::update_field_moments(state.xi, g.xi, cfg);
  detail::update_field_moments(state.eta, g.eta, cfg);
  detail::update_field_moments(state.s, g.s, cfg);
  detail::update_field_moments(state.a, g.a, cfg);
  if (state.has_alternate()) detail::update_field_moments(state.a_prime, g.a_prime, cfg);
  ++state.iteration;
}

inline ScalarField moment_ratio(const AdamState::Moments& m, double eps_adam) {
  return m.v.array() / (m.s_m.array() + eps_adam).sqrt();
}

/// Preconditioned sensitivity L' = v / sqrt(s_m + eps), per field.
inline GradientFields design_sensitivity(const AdamState& state,
                                         const OptimizerConfig& cfg) {
  GradientFields l;
  l.xi = moment_ratio(state.xi, cfg.eps_adam);
  l.eta = moment_ratio(state.eta, cfg.eps_adam);
  l.s = moment_ratio(state.s, cfg.eps_adam);
  l.a = moment_ratio(state.a, cfg.eps_adam);
  if (state.has_alternate()) l.a_prime = moment_ratio(state.a_prime, cfg.eps_adam);
  return l;
}

/// One implicit reaction-diffusion step for a single design field:
///   (M + dt R^2 K) phi_new = M (phi_old - dt L')
/// followed by a nodewise clamp to [-1, 1]. A field with identically zero
/// sensitivity is left untouched.
class DesignUpdater {
 public:
  DesignUpdater(const Mesh& mesh, const OptimizerConfig& cfg)
      : mass_(assemble_mass(mesh)),
        solver_(std::make_unique<DirectSolver>(
            assemble_update_system(mesh, cfg.dt, cfg.radius))),
        dt_(cfg.dt) {}

  ScalarField step(const ScalarField& phi_old,
                   const ScalarField& sensitivity) const {
    if (phi_old.size() != sensitivity.size())
      throw std::invalid_argument("field/sensitivity layouts do not match");
    if (sensitivity.isZero(0.0)) return phi_old;
    const Eigen::VectorXd rhs = mass_ * (phi_old - dt_ * sensitivity);
    ScalarField phi = solver_->solve(rhs, 1e-12);
    return phi.cwiseMax(-1.0).cwiseMin(1.0);
  }

 private:
  SpMat mass_;
  std::unique_ptr<DirectSolver> solver_;
  double dt_;
};

inline ScalarField rd_step(const Mesh& mesh, const ScalarField& phi_old,
                           const ScalarField& sensitivity,
                           const OptimizerConfig& cfg) {
  return DesignUpdater(mesh, cfg).step(phi_old, sensitivity);
}

/// Relative-change stopping rule |J(t) - J(t-1)| / |J(t-1)| <= tol on the
/// last two history entries. A zero previous value counts as converged only
/// if the current value is zero too.
inline bool converged(const std::vector<ObjectiveValue>& history,
                      double tolerance) {
  if (history.size() < 2) return false;
  const double prev = history[history.size() - 2].value;
  const double curr = history.back().value;
  if (prev == 0.0) return curr == 0.0;
  return std::abs(curr - prev) / std::abs(prev) <= tolerance;
}

enum class ProblemKind { temp_min, switching };
enum class OptimizeStatus { converged, max_iterations };

struct IterationRecord {
  int iteration = 0;
  ObjectiveValue objective;
  double max_change = 0.0;  // max nodal design change applied this iteration
  double convergence_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct OptimizeResult {
  DesignFields design;
  std::vector<ObjectiveValue> objective_history;
  std::vector<IterationRecord> records;
  OptimizeStatus status = OptimizeStatus::max_iterations;
  int iterations = 0;
  ScalarField temperature;      // final state 1
  ScalarField temperature_alt;  // final state 2 (switching only)
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Runs the full optimization loop: map design to tensors, forward solve(s),
/// objective, adjoint solve(s), moment update, reaction-diffusion step,
/// until the stopping rule fires or max_iters is reached.
inline OptimizeResult optimize(ProblemKind kind, const Mesh& mesh,
                               const MaterialParams& params,
                               const SourceField& source,
                               const OptimizerConfig& cfg,
                               double solver_tol = 1e-10,
                               const IterationCallback& callback = {}) {
  params.validate();
  cfg.validate();
  const bool switching = (kind == ProblemKind::switching);
  const ObjectiveKind obj_kind =
      switching ? ObjectiveKind::switching : ObjectiveKind::temp_min;

  OptimizeResult result;
  result.design = DesignFields::zeros(mesh.n_nodes(), switching);
  AdamState adam = AdamState::zeros(mesh.n_nodes(), switching);
  const DesignUpdater updater(mesh, cfg);
  const Eigen::VectorXd load = assemble_load(mesh, source);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const TensorField tensor =
        design_tensor_field(mesh, result.design, params, HallField::primary);
    const SpMat stiffness = assemble_stiffness(mesh, tensor);
    const LinearSystem sys = apply_dirichlet(stiffness, load, mesh);
    const DirectSolver solver(sys.matrix);
    result.temperature = sys.expand(solver.solve(sys.rhs, solver_tol));

    TensorField tensor_alt;
    std::unique_ptr<DirectSolver> solver_alt;
    std::unique_ptr<LinearSystem> sys_alt;
    if (switching) {
      tensor_alt =
          design_tensor_field(mesh, result.design, params, HallField::alternate);
      sys_alt = std::make_unique<LinearSystem>(
          apply_dirichlet(assemble_stiffness(mesh, tensor_alt), load, mesh));
      solver_alt = std::make_unique<DirectSolver>(sys_alt->matrix);
      result.temperature_alt =
          sys_alt->expand(solver_alt->solve(sys_alt->rhs, solver_tol));
    }

    ObjectiveValue j =
        switching
            ? switching_objective(result.temperature, result.temperature_alt, mesh)
            : temp_min_objective(result.temperature, mesh);

    IterationRecord rec;
    rec.iteration = it;
    rec.objective = j;
    if (!result.objective_history.empty()) {
      const double prev = result.objective_history.back().value;
      rec.convergence_ratio =
          prev == 0.0 ? (j.value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                      : std::abs(j.value - prev) / std::abs(prev);
    }
    result.objective_history.push_back(j);
    result.iterations = it;

    const bool stop = converged(result.objective_history, cfg.tolerance);
    if (!stop && it < cfg.max_iters) {
      // Adjoint states share the forward factorizations through the
      // transpose solve.
      const ScalarField lambda = sys.expand(
          solver.solve_transpose(sys.reduce(adjoint_rhs(obj_kind, 0, mesh)),
                                 solver_tol));
      GradientFields grad;
      if (switching) {
        const ScalarField lambda_alt = sys_alt->expand(solver_alt->solve_transpose(
            sys_alt->reduce(adjoint_rhs(obj_kind, 1, mesh)), solver_tol));
        grad = switching_gradient(mesh, result.temperature,
                                  result.temperature_alt, lambda, lambda_alt,
                                  result.design, params);
      } else {
        grad = pointwise_gradient(mesh, result.temperature, lambda,
                                  result.design, params);
      }

      update_moments(adam, grad, cfg);
      const GradientFields lp = design_sensitivity(adam, cfg);

      const auto apply = [&](ScalarField& phi, const ScalarField& sens) {
        const ScalarField next = updater.step(phi, sens);
        rec.max_change =
            std::max(rec.max_change, (next - phi).cwiseAbs().maxCoeff());
        phi = next;
      };
      apply(result.design.xi, lp.xi);
      apply(result.design.eta, lp.eta);
      apply(result.design.s, lp.s);
      apply(result.design.a, lp.a);
      if (switching) apply(result.design.a_prime, lp.a_prime);
    }

    result.records.push_back(rec);
    if (callback) callback(rec);
    if (stop) {
      result.status = OptimizeStatus::converged;
      return result;
    }
  }
  result.status = OptimizeStatus::max_iterations;
  return result;
}

}  // namespace hallfmo
