#pragma once

// Scripted higher-level behaviour of both agents: intent curves, the
// automation's intent rule, gain-hold inputs for the driver, mode
// classification and the cost weights attached to each mode.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "hsc/errors.hpp"
#include "hsc/plant.hpp"

namespace hsc {

/// Raised-cosine lane-change maneuver: rest for t1, rise over t2, hold for t3,
/// fall over t2. A positive period repeats the maneuver every period seconds.
struct IntentProfile {
  double t1 = 1.0;
  double t2 = 5.0;
  double t3 = 2.0;
  double w_amp = 1.0;
  double period = 0.0;

  double span() const { return t1 + 2.0 * t2 + t3; }

  void validate() const {
    if (t1 < 0 || !(t2 > 0) || t3 < 0) throw ValidationError("intent: need t1 >= 0, t2 > 0, t3 >= 0");
    if (!std::isfinite(w_amp)) throw ValidationError("intent: amplitude must be finite");
    if (period != 0.0 && !(period >= span())) throw ValidationError("intent: period must be 0 or >= maneuver span");
  }

  bool operator==(const IntentProfile&) const = default;
};

struct IntentSample {
  double angle;
  double rate;
};

inline IntentSample intent(double t, const IntentProfile& prof) {
  if (prof.period > 0.0) t = std::fmod(t, prof.period);
  const double pi = std::numbers::pi;
  const double half = 0.5 * prof.w_amp;
  const double rise_end = prof.t1 + prof.t2;
  const double hold_end = rise_end + prof.t3;
  const double fall_end = hold_end + prof.t2;

  auto blend = [&](double phase_origin) {
    const double a = pi / prof.t2 * t - phase_origin / prof.t2 * pi;
    return IntentSample{half * std::cos(a) + half, -half * pi / prof.t2 * std::sin(a)};
  };

  if (t <= prof.t1 || t >= fall_end) return {0.0, 0.0};
  if (t < rise_end) return blend(rise_end);
  if (t <= hold_end) return {prof.w_amp, 0.0};
  return blend(hold_end);
}

enum class Cooperation { cooperative, uncooperative };
enum class Authority { autopilot, active_safety };

struct InteractionMode {
  Cooperation cooperation = Cooperation::cooperative;
  Authority authority = Authority::autopilot;

  bool operator==(const InteractionMode&) const = default;
};

inline std::string to_string(Cooperation c) {
  return c == Cooperation::cooperative ? "cooperative" : "uncooperative";
}

inline std::string to_string(Authority a) { return a == Authority::autopilot ? "autopilot" : "active_safety"; }

inline std::string to_string(const InteractionMode& m) {
  return to_string(m.cooperation) + "/" + to_string(m.authority);
}

/// Automation intent: 0.9 of the driver's, same sign when cooperative,
/// opposite sign otherwise.
inline IntentSample automation_intent(double theta_h, double dtheta_h, Cooperation c, double scale = 0.9) {
  const double k = c == Cooperation::cooperative ? scale : -scale;
  return {k * theta_h, k * dtheta_h};
}

struct GainPair {
  double b = 0.0;  // damping
  double k = 0.0;  // stiffness

  bool operator==(const GainPair&) const = default;
};

/// Driver modulation input that makes z_target a fixed point of the driver's
/// gain dynamics: alpha z + beta gamma = 0.
inline GainPair human_gamma_hold(const GainPair& z_target, const MechanicalParams& p) {
  if (p.beta_bh == 0.0 || p.beta_kh == 0.0) throw ZeroActivation("human activation coefficient is zero");
  return {-p.alpha_bh * z_target.b / p.beta_bh, -p.alpha_kh * z_target.k / p.beta_kh};
}

/// Autopilot when the driver's stiffness suffices, active safety otherwise;
/// intents of equal sign (or a zero intent) count as cooperative.
inline InteractionMode select_mode(const GainPair& z_h_est, double theta_h, double theta_a, double k_threshold) {
  if (!(k_threshold > 0)) throw ValidationError("select_mode: k_threshold must be > 0");
  InteractionMode m;
  m.authority = z_h_est.k >= k_threshold ? Authority::autopilot : Authority::active_safety;
  m.cooperation = theta_h * theta_a >= 0.0 ? Cooperation::cooperative : Cooperation::uncooperative;
  return m;
}

/// Scalar weights on (theta_h - theta_s)^2, (theta_a - theta_s)^2 and tau_t^2.
struct CostWeights {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;

  void validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0) throw ValidationError("weights must be >= 0");
    if (w1 == 0 && w2 == 0 && w3 == 0) throw ValidationError("weights must not all be zero");
  }

  bool operator==(const CostWeights&) const = default;
};

struct WeightTable {
  CostWeights autopilot{0.2, 0.0, 0.8};
  CostWeights active_safety{0.0, 0.8, 0.2};

  bool operator==(const WeightTable&) const = default;
};

inline CostWeights weights_for(const InteractionMode& mode, const WeightTable& table = {}) {
  return mode.authority == Authority::autopilot ? table.autopilot : table.active_safety;
}

}  // namespace hsc
