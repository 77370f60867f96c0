#pragma once

// Continuation/GMRES on a generic residual map F(X, U, t).
//
// Instead of solving F = 0 at every sample, U is integrated along
//   F_U U' = -zeta F - F_X X' - F_t,
// so that F decays like exp(-zeta t) toward the stationarity manifold. The
// Jacobian products are forward differences and the linear system is solved
// once per sample by FDGMRES, warm-started at the previous U'.

#include <cmath>

#include <Eigen/Core>

#include "hsc/errors.hpp"
#include "hsc/gmres.hpp"

namespace hsc::cgmres {

struct SolverSettings {
  double zeta = 100.0;  // A_s = -zeta I
  double h_fd = 1e-6;
  int i_max = 12;
  double gmres_tol = 1e-6;
  double delta = 0.05;  // initialisation target on ||F||_inf
  double dt = 0.01;
  int init_max_iter = 100;
  double divergence_bound = 1e3;

  void validate() const {
    if (!(zeta > 0)) throw ValidationError("solver: zeta must be > 0");
    if (!(h_fd > 0)) throw ValidationError("solver: h_fd must be > 0");
    if (i_max < 1) throw ValidationError("solver: i_max must be >= 1");
    if (!(dt > 0)) throw ValidationError("solver: dt must be > 0");
    if (!(gmres_tol > 0)) throw ValidationError("solver: gmres_tol must be > 0");
    if (!(delta > 0)) throw ValidationError("solver: delta must be > 0");
    if (init_max_iter < 0) throw ValidationError("solver: init_max_iter must be >= 0");
    if (!(divergence_bound > 0)) throw ValidationError("solver: divergence_bound must be > 0");
  }

  bool operator==(const SolverSettings&) const = default;
};

/// b = -zeta F(X, U, t) - D_h F(X, U, t : X', 0, 1), with F(X, U, t) supplied.
template <class Residual>
Eigen::VectorXd continuation_rhs(Residual&& F, const Eigen::VectorXd& f_base, const Eigen::VectorXd& X,
                                 const Eigen::VectorXd& X_dot, const Eigen::VectorXd& U, double t,
                                 const SolverSettings& s) {
  const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(U.size());
  return -s.zeta * f_base - fd_directional(F, f_base, X, U, t, X_dot, zero_u, 1.0, s.h_fd);
}

template <class Residual>
Eigen::VectorXd continuation_rhs(Residual&& F, const Eigen::VectorXd& X, const Eigen::VectorXd& X_dot,
                                 const Eigen::VectorXd& U, double t, const SolverSettings& s) {
  const Eigen::VectorXd f_base = F(X, U, t);
  return continuation_rhs(F, f_base, X, X_dot, U, t, s);
}

struct ContinuationState {
  Eigen::VectorXd U;
  Eigen::VectorXd U_dot;
  Eigen::VectorXd X_prev;
  double t = 0.0;
  double last_residual = 0.0;  // ||F||_inf at the current U
  int gmres_iterations = 0;
  double gmres_residual = 0.0;
};

/// One sampling instant: X' from the measurement difference quotient, a single
/// FDGMRES solve for U', and an explicit Euler update of U over dt.
template <class Residual>
void continuation_update(Residual&& F, ContinuationState& st, const Eigen::VectorXd& X_meas,
                         const SolverSettings& s) {
  const Eigen::VectorXd X_dot = (X_meas - st.X_prev) / s.dt;
  const Eigen::VectorXd f_base = F(X_meas, st.U, st.t);
  const Eigen::VectorXd b = continuation_rhs(F, f_base, X_meas, X_dot, st.U, st.t, s);

  const Eigen::VectorXd zero_x = Eigen::VectorXd::Zero(X_meas.size());
  auto apply_a = [&](const Eigen::VectorXd& v) {
    return fd_directional(F, f_base, X_meas, st.U, st.t, zero_x, v, 0.0, s.h_fd);
  };
  GmresResult sol = fdgmres(apply_a, b, st.U_dot, s.i_max, s.gmres_tol);

  st.U += s.dt * sol.solution;
  st.U_dot = std::move(sol.solution);
  st.X_prev = X_meas;
  st.t += s.dt;
  st.gmres_iterations = sol.iterations;
  st.gmres_residual = sol.residual_norm;
  st.last_residual = F(X_meas, st.U, st.t).template lpNorm<Eigen::Infinity>();
}

}  // namespace hsc::cgmres
