#pragma once

// Coupled driver / steering column / automation motor model.
//
// State layout (rad, rad/s, gain units):
//   [theta_sw, omega_sw, theta_s, omega_s, b_h, k_h, b_a, k_a]
// The steering wheel carries the driver's arm inertia, the column carries the
// motor inertia reflected through the belt ratio, and the two are joined by
// the torque-sensor spring k_t. Impedance gains of both agents are states
// with first-order dynamics  z' = alpha * z + beta * gamma.

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "hsc/errors.hpp"

namespace hsc {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using InputMatrix = Eigen::Matrix<double, 8, 2>;

enum StateIndex : int {
  kThetaSw = 0,
  kOmegaSw = 1,
  kThetaS = 2,
  kOmegaS = 3,
  kBh = 4,
  kKh = 5,
  kBa = 6,
  kKa = 7,
};

struct PlantState {
  Vec8 x = Vec8::Zero();

  double theta_sw() const { return x[kThetaSw]; }
  double omega_sw() const { return x[kOmegaSw]; }
  double theta_s() const { return x[kThetaS]; }
  double omega_s() const { return x[kOmegaS]; }
  double b_h() const { return x[kBh]; }
  double k_h() const { return x[kKh]; }
  double b_a() const { return x[kBa]; }
  double k_a() const { return x[kKa]; }

  /// Zero angles and rates with the given gains.
  static PlantState at_rest(double b_h, double k_h, double b_a, double k_a) {
    PlantState s;
    s.x[kBh] = b_h;
    s.x[kKh] = k_h;
    s.x[kBa] = b_a;
    s.x[kKa] = k_a;
    return s;
  }

  bool operator==(const PlantState& o) const { return x == o.x; }
};

/// Exogenous signals: the driver's gain modulation, both intents with their
/// analytic rates, and the road torque.
struct ExogenousInput {
  double gamma_bh = 0.0;
  double gamma_kh = 0.0;
  double theta_h = 0.0;
  double dtheta_h = 0.0;
  double theta_a = 0.0;
  double dtheta_a = 0.0;
  double tau_v = 0.0;

  static constexpr int kSize = 7;

  Eigen::Matrix<double, kSize, 1> to_vector() const {
    Eigen::Matrix<double, kSize, 1> v;
    v << gamma_bh, gamma_kh, theta_h, dtheta_h, theta_a, dtheta_a, tau_v;
    return v;
  }

  template <class Derived>
  static ExogenousInput from_vector(const Eigen::MatrixBase<Derived>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  }

  bool operator==(const ExogenousInput&) const = default;
};

/// Automation gain-modulation command u = [gamma_ba, gamma_ka].
struct ControlInput {
  double gamma_ba = 0.0;
  double gamma_ka = 0.0;

  bool operator==(const ControlInput&) const = default;
};

struct MechanicalParams {
  double j_sw = 1e-2;
  double j_s = 1e-2;
  double j_m = 1e-3;
  double j_h = 1e-3;
  double k_t = 1000.0;
  double ratio = 1.0;  // r_S / r_M

  double alpha_bh = -1.0;
  double alpha_kh = -1.0;
  double alpha_ba = -1.0;
  double alpha_ka = -1.0;
  double beta_bh = 1.0;
  double beta_kh = 1.0;
  double beta_ba = 1.0;
  double beta_ka = 1.0;

  void validate() const {
    if (!(j_sw > 0 && j_s > 0 && j_m > 0 && j_h > 0)) throw ValidationError("inertias must be > 0");
    if (!(k_t > 0)) throw ValidationError("k_t must be > 0");
    if (!(ratio > 0)) throw ValidationError("ratio must be > 0");
    if (alpha_bh > 0 || alpha_kh > 0 || alpha_ba > 0 || alpha_ka > 0)
      throw ValidationError("memory coefficients alpha must be <= 0");
  }

  bool operator==(const MechanicalParams&) const = default;
};

struct Measurement {
  double theta_s = 0.0;
  double tau_t = 0.0;
  double k_h = 0.0;
  double b_h = 0.0;
  double k_a = 0.0;
  double b_a = 0.0;

  bool operator==(const Measurement&) const = default;
};

struct EffectiveInertia {
  double wheel;   // j_sw + j_h
  double column;  // j_s + ratio^2 j_m
};

inline EffectiveInertia effective_inertia(const MechanicalParams& p) {
  const EffectiveInertia j{p.j_sw + p.j_h, p.j_s + p.ratio * p.ratio * p.j_m};
  if (!(j.wheel > 0) || !(j.column > 0)) throw NonPositiveInertia("combined inertia must be > 0");
  return j;
}

inline double sensor_torque(const PlantState& s, const MechanicalParams& p) {
  return p.k_t * (s.theta_sw() - s.theta_s());
}

/// Driver torque on the wheel; acc_sw is the wheel acceleration.
inline double human_torque(const PlantState& s, const ExogenousInput& w, double acc_sw,
                           const MechanicalParams& p) {
  return -p.j_h * acc_sw + s.b_h() * (w.dtheta_h - s.omega_sw()) + s.k_h() * (w.theta_h - s.theta_sw());
}

/// Motor torque of the automation's impedance controller (motor side).
inline double automation_torque(const PlantState& s, const ExogenousInput& w, const MechanicalParams& p) {
  return s.b_a() * (w.dtheta_a - p.ratio * s.omega_s()) + s.k_a() * (w.theta_a - p.ratio * s.theta_s());
}

struct Accelerations {
  double wheel;
  double column;
};

inline Accelerations accelerations(const PlantState& s, const ExogenousInput& w, const MechanicalParams& p) {
  const EffectiveInertia j = effective_inertia(p);
  const double tau_t = sensor_torque(s, p);
  const double wheel =
      (s.b_h() * (w.dtheta_h - s.omega_sw()) + s.k_h() * (w.theta_h - s.theta_sw()) - tau_t) / j.wheel;
  const double column = (p.ratio * automation_torque(s, w, p) + tau_t + w.tau_v) / j.column;
  return {wheel, column};
}

inline InputMatrix input_matrix(const MechanicalParams& p) {
  InputMatrix b = InputMatrix::Zero();
  b(kBa, 0) = p.beta_ba;
  b(kKa, 1) = p.beta_ka;
  return b;
}

/// x' = f(x, w) + B u.
inline Vec8 state_derivative(const PlantState& s, const ExogenousInput& w, const ControlInput& u,
                             const MechanicalParams& p) {
  const Accelerations acc = accelerations(s, w, p);
  Vec8 dx;
  dx[kThetaSw] = s.omega_sw();
  dx[kOmegaSw] = acc.wheel;
  dx[kThetaS] = s.omega_s();
  dx[kOmegaS] = acc.column;
  dx[kBh] = p.alpha_bh * s.b_h() + p.beta_bh * w.gamma_bh;
  dx[kKh] = p.alpha_kh * s.k_h() + p.beta_kh * w.gamma_kh;
  dx[kBa] = p.alpha_ba * s.b_a() + p.beta_ba * u.gamma_ba;
  dx[kKa] = p.alpha_ka * s.k_a() + p.beta_ka * u.gamma_ka;
  return dx;
}

/// Analytic df/dx. The B u term does not depend on x.
inline Mat8 state_jacobian(const PlantState& s, const ExogenousInput& w, const MechanicalParams& p) {
  const EffectiveInertia j = effective_inertia(p);
  const double r = p.ratio;
  Mat8 a = Mat8::Zero();
  a(kThetaSw, kOmegaSw) = 1.0;
  a(kThetaS, kOmegaS) = 1.0;

  a(kOmegaSw, kThetaSw) = (-s.k_h() - p.k_t) / j.wheel;
  a(kOmegaSw, kOmegaSw) = -s.b_h() / j.wheel;
  a(kOmegaSw, kThetaS) = p.k_t / j.wheel;
  a(kOmegaSw, kBh) = (w.dtheta_h - s.omega_sw()) / j.wheel;
  a(kOmegaSw, kKh) = (w.theta_h - s.theta_sw()) / j.wheel;

  a(kOmegaS, kThetaSw) = p.k_t / j.column;
  a(kOmegaS, kThetaS) = (-r * r * s.k_a() - p.k_t) / j.column;
  a(kOmegaS, kOmegaS) = -r * r * s.b_a() / j.column;
  a(kOmegaS, kBa) = r * (w.dtheta_a - r * s.omega_s()) / j.column;
  a(kOmegaS, kKa) = r * (w.theta_a - r * s.theta_s()) / j.column;

  a(kBh, kBh) = p.alpha_bh;
  a(kKh, kKh) = p.alpha_kh;
  a(kBa, kBa) = p.alpha_ba;
  a(kKa, kKa) = p.alpha_ka;
  return a;
}

enum class Integrator { euler, rk4 };

/// One forward-Euler update x + dt (f + B u) without gain clamping. This is
/// the arithmetic shared by the plant's euler step and the OCP predictor.
inline PlantState euler_update(const PlantState& s, const ExogenousInput& w, const ControlInput& u,
                               const MechanicalParams& p, double dt) {
  PlantState next;
  next.x = s.x + dt * state_derivative(s, w, u, p);
  return next;
}

inline void clamp_gains(PlantState& s) {
  for (int i : {kBh, kKh, kBa, kKa}) s.x[i] = std::max(s.x[i], 0.0);
}

/// Advance the plant by dt with w and u held; gains are clamped at 0 afterwards.
inline PlantState step(const PlantState& s, const ExogenousInput& w, const ControlInput& u,
                       const MechanicalParams& p, double dt, Integrator method) {
  if (!(dt > 0)) throw ValidationError("step: dt must be > 0");
  PlantState next;
  if (method == Integrator::euler) {
    next = euler_update(s, w, u, p, dt);
  } else {
    auto f = [&](const Vec8& x) {
      PlantState t;
      t.x = x;
      return state_derivative(t, w, u, p);
    };
    const Vec8 k1 = f(s.x);
    const Vec8 k2 = f(s.x + 0.5 * dt * k1);
    const Vec8 k3 = f(s.x + 0.5 * dt * k2);
    const Vec8 k4 = f(s.x + dt * k3);
    next.x = s.x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  clamp_gains(next);
  return next;
}

inline Measurement measure(const PlantState& s, const MechanicalParams& p) {
  return {s.theta_s(), sensor_torque(s, p), s.k_h(), s.b_h(), s.k_a(), s.b_a()};
}

/// Static column angle where the driver spring (in series with the torque
/// sensor) balances the automation spring. With ratio r the balance is
///   k_eq (theta_h - theta_s) + r k_a (theta_a - r theta_s) = 0,
///   k_eq = k_h k_t / (k_h + k_t),
/// so theta_s = (k_eq theta_h + r k_a theta_a) / (k_eq + r^2 k_a).
inline double equilibrium_angle(double theta_h, double theta_a, double k_h, double k_a, double k_t,
                                double ratio = 1.0) {
  if (k_h < 0 || k_a < 0 || !(k_t > 0)) throw ValidationError("equilibrium_angle: need k_h, k_a >= 0, k_t > 0");
  const double k_eq = k_h * k_t / (k_h + k_t);
  const double denom = k_eq + ratio * ratio * k_a;
  if (!(denom > 0)) throw DegenerateStiffness("no unique equilibrium: k_eq + k_a = 0");
  return (k_eq * theta_h + ratio * k_a * theta_a) / denom;
}

}  // namespace hsc
