#pragma once

// Real-time gain-modulation controller: Continuation/GMRES applied to the
// KKT residual of the impedance-modulation OCP.
//
// The continuation variable X stacks the measured plant state and the
// exogenous input, X = [x (8); w (7)]; the residual depends on time only
// through X, so X' is the difference quotient of consecutive samples.

#include <cmath>

#include <Eigen/Core>

#include "hsc/continuation.hpp"
#include "hsc/newton.hpp"
#include "hsc/ocp.hpp"
#include "hsc/plant.hpp"

namespace hsc::cgmres {

inline constexpr int kStackedSize = 8 + ExogenousInput::kSize;

inline Eigen::VectorXd stack(const PlantState& x, const ExogenousInput& w) {
  Eigen::VectorXd X(kStackedSize);
  X << x.x, w.to_vector();
  return X;
}

/// F(X, U, t) for the OCP with w held over the horizon.
struct OcpResidual {
  MechanicalParams plant;
  OcpSettings ocp;

  Eigen::VectorXd operator()(const Eigen::VectorXd& X, const Eigen::VectorXd& U, double /*t*/) const {
    PlantState x0;
    x0.x = X.head<8>();
    const ExogenousInput w = ExogenousInput::from_vector(X.tail<ExogenousInput::kSize>());
    const std::vector<ExogenousInput> w_seq = hold(w, ocp);
    return kkt_residual(DecisionVector(U), x0, w_seq, ocp, plant);
  }
};

struct SolverState {
  DecisionVector U;
  Eigen::VectorXd U_dot_prev;
  PlantState x_prev;
  ExogenousInput w_prev;
  double t = 0.0;
  double last_residual = 0.0;
  int gmres_iterations = 0;
  double u_dot_norm = 0.0;
  int init_iterations = 0;
};

/// Analytic seed followed by damped Newton until ||F||_inf <= delta.
inline SolverState initialize(const PlantState& x0, const ExogenousInput& w0, double t0,
                              const SolverSettings& settings, const OcpSettings& ocp,
                              const MechanicalParams& plant) {
  settings.validate();
  ocp.validate();
  const OcpResidual F{plant, ocp};
  const Eigen::VectorXd X0 = stack(x0, w0);
  const DecisionVector seed = seed_decision(x0, hold(w0, ocp), ocp, plant);

  NewtonOptions opt;
  opt.tol = settings.delta;
  opt.max_iter = settings.init_max_iter;
  const NewtonResult nr =
      damped_newton([&](const Eigen::VectorXd& U) { return F(X0, U, t0); }, seed.values(), opt);
  if (!nr.converged) {
    throw InitializationFailed("initialisation: ||F||_inf = " + std::to_string(nr.residual_inf) +
                                   " above delta after " + std::to_string(nr.iterations) + " Newton steps",
                               t0);
  }

  SolverState st;
  st.U = DecisionVector(nr.x);
  st.U_dot_prev = Eigen::VectorXd::Zero(nr.x.size());
  st.x_prev = x0;
  st.w_prev = w0;
  st.t = t0;
  st.last_residual = nr.residual_inf;
  st.init_iterations = nr.iterations;
  return st;
}

struct StepResult {
  ControlInput u;
  SolverState state;
};

/// One sampling instant of the controller. The returned control is the first
/// block of the updated decision vector.
inline StepResult step(SolverState state, const PlantState& x_meas, const ExogenousInput& w_now,
                       const SolverSettings& settings, const OcpSettings& ocp, const MechanicalParams& plant) {
  const OcpResidual F{plant, ocp};
  ContinuationState cs;
  cs.U = std::move(state.U.values());
  cs.U_dot = std::move(state.U_dot_prev);
  cs.X_prev = stack(state.x_prev, state.w_prev);
  cs.t = state.t;

  continuation_update(F, cs, stack(x_meas, w_now), settings);

  if (!std::isfinite(cs.last_residual) || cs.last_residual > settings.divergence_bound) {
    throw SolverDiverged("continuation diverged: ||F||_inf = " + std::to_string(cs.last_residual), state.t);
  }

  state.U = DecisionVector(std::move(cs.U));
  state.u_dot_norm = cs.U_dot.norm();
  state.U_dot_prev = std::move(cs.U_dot);
  state.x_prev = x_meas;
  state.w_prev = w_now;
  state.t = cs.t;
  state.last_residual = cs.last_residual;
  state.gmres_iterations = cs.gmres_iterations;
  return {extract_control(state.U), std::move(state)};
}

}  // namespace hsc::cgmres
