#pragma once

// Dense damped Newton on a residual map with a forward-difference Jacobian.
// Used offline: to find the initial decision vector and as a test oracle.

#include <cmath>

#include <Eigen/Core>
#include <Eigen/QR>

namespace hsc {

struct NewtonOptions {
  double tol = 1e-10;  // on ||F||_inf
  int max_iter = 100;
  double fd_step = 1e-7;
  int max_halvings = 30;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class Fn>
Eigen::MatrixXd fd_jacobian(Fn&& F, const Eigen::VectorXd& x, const Eigen::VectorXd& fx, double step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(fx.size(), n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    J.col(i) = (F(xp) - fx) / h;
    xp[i] = x[i];
  }
  return J;
}

/// Newton steps with step halving whenever ||F||_inf fails to decrease.
template <class Fn>
NewtonResult damped_newton(Fn&& F, Eigen::VectorXd x, const NewtonOptions& opt = {}) {
  NewtonResult out;
  Eigen::VectorXd fx = F(x);
  double norm = fx.template lpNorm<Eigen::Infinity>();
  while (true) {
    if (norm <= opt.tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= opt.max_iter || !std::isfinite(norm)) break;
    const Eigen::MatrixXd J = fd_jacobian(F, x, fx, opt.fd_step);
    const Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-fx);
    double a = 1.0;
    Eigen::VectorXd trial = x + dx;
    Eigen::VectorXd f_trial = F(trial);
    double n_trial = f_trial.template lpNorm<Eigen::Infinity>();
    for (int k = 0; k < opt.max_halvings && !(n_trial < norm); ++k) {
      a *= 0.5;
      trial = x + a * dx;
      f_trial = F(trial);
      n_trial = f_trial.template lpNorm<Eigen::Infinity>();
    }
    ++out.iterations;
    if (!(n_trial < norm)) break;  // no descent along the Newton direction
    x = std::move(trial);
    fx = std::move(f_trial);
    norm = n_trial;
  }
  out.x = std::move(x);
  out.residual_inf = norm;
  return out;
}

}  // namespace hsc
