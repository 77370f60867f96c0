#pragma once

// Matrix-free Krylov machinery: forward-difference directional derivatives of
// a residual map and GMRES (Arnoldi with modified Gram-Schmidt, least squares
// by Givens rotations) driven only by operator applications.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hsc/errors.hpp"

namespace hsc::cgmres {

/// [F(X + h dX, U + h dU, t + h dw) - F(X, U, t)] / h, reusing a known F(X, U, t).
template <class Residual>
Eigen::VectorXd fd_directional(Residual&& F, const Eigen::VectorXd& f_base, const Eigen::VectorXd& X,
                               const Eigen::VectorXd& U, double t, const Eigen::VectorXd& dX,
                               const Eigen::VectorXd& dU, double domega, double h) {
  const Eigen::VectorXd X_h = X + h * dX;
  const Eigen::VectorXd U_h = U + h * dU;
  return (F(X_h, U_h, t + h * domega) - f_base) / h;
}

template <class Residual>
Eigen::VectorXd fd_directional(Residual&& F, const Eigen::VectorXd& X, const Eigen::VectorXd& U, double t,
                               const Eigen::VectorXd& dX, const Eigen::VectorXd& dU, double domega, double h) {
  const Eigen::VectorXd f_base = F(X, U, t);
  return fd_directional(F, f_base, X, U, t, dX, dU, domega, h);
}

struct GmresResult {
  Eigen::VectorXd solution;
  double residual_norm = 0.0;
  int iterations = 0;
  /// ||b - A x_k|| for k = 0 .. iterations.
  std::vector<double> residual_history;
};

/// Solve A x = b with A available only through apply_a(v). Stops once the
/// residual drops to tol * ||b|| or after i_max iterations; x0 is the warm start.
template <class ApplyA>
GmresResult fdgmres(ApplyA&& apply_a, const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int i_max, double tol) {
  if (i_max < 1) throw ValidationError("fdgmres: i_max must be >= 1");
  if (!b.allFinite()) throw ValidationError("fdgmres: right-hand side is not finite");

  const Eigen::Index n = b.size();
  GmresResult out;
  out.solution = x0;

  Eigen::VectorXd r = b;
  if (x0.squaredNorm() > 0.0) r -= apply_a(x0);
  const double beta = r.norm();
  const double target = tol * b.norm();
  out.residual_norm = beta;
  out.residual_history.push_back(beta);
  if (beta == 0.0 || beta <= target) return out;

  const int m = static_cast<int>(std::min<Eigen::Index>(i_max, n));
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
  g[0] = beta;
  V.col(0) = r / beta;

  int k = 0;
  while (k < m) {
    Eigen::VectorXd w = apply_a(V.col(k));
    const double w_norm0 = w.norm();
    for (int i = 0; i <= k; ++i) {
      H(i, k) = w.dot(V.col(i));
      w -= H(i, k) * V.col(i);
    }
    const double h_next = w.norm();
    H(k + 1, k) = h_next;

    for (int i = 0; i < k; ++i) {
      const double tmp = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
      H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
      H(i, k) = tmp;
    }
    const double d = std::hypot(H(k, k), H(k + 1, k));
    // Zero column after rotation: A v_k lies in the span already searched and
    // the residual (still above target) cannot shrink, so A is singular on b.
    if (d == 0.0) throw GmresBreakdown("fdgmres: breakdown with nonzero residual");
    cs[k] = H(k, k) / d;
    sn[k] = H(k + 1, k) / d;
    H(k, k) = d;
    H(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    ++k;
    out.residual_history.push_back(std::abs(g[k]));

    if (std::abs(g[k]) <= target) break;
    // Invariant Krylov space: the least-squares iterate is already exact.
    if (h_next <= 16.0 * std::numeric_limits<double>::epsilon() * w_norm0) break;
    V.col(k) = w / h_next;
  }

  if (k > 0) {
    const Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.solution = x0 + V.leftCols(k) * y;
  }
  out.iterations = k;
  out.residual_norm = std::abs(g[k]);
  return out;
}

}  // namespace hsc::cgmres
