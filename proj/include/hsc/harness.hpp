#pragma once

// Closed-loop scenario execution: intents and driver gains from the agents,
// automation gains from the NMPC (or frozen for the non-adaptive baseline),
// plant advanced with the truth integrator, one trace row per sample.

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hsc/agents.hpp"
#include "hsc/errors.hpp"
#include "hsc/nmpc.hpp"
#include "hsc/ocp.hpp"
#include "hsc/plant.hpp"

namespace hsc {

/// A block of the mode schedule. Without an authority the mode is chosen
/// online from the driver's stiffness.
struct Segment {
  double t_start = 0.0;
  GainPair z_h_target{0.5, 1.0};
  Cooperation cooperation = Cooperation::cooperative;
  std::optional<Authority> authority = Authority::autopilot;

  bool operator==(const Segment&) const = default;
};

struct ScenarioConfig {
  MechanicalParams plant;
  double beta_active = 1.0;     // automation activation in active safety
  double beta_autopilot = 0.1;  // automation activation in autopilot
  double k_threshold = 0.5;
  WeightTable weights;
  IntentProfile intent;
  std::vector<Segment> schedule{Segment{}};
  bool adaptive = true;
  std::optional<GainPair> z_a_fixed;  // baseline gains; defaults to the first segment's Z_H
  double duration = 15.0;
  double ts = 0.01;
  Integrator integrator = Integrator::rk4;
  int plant_substeps = 10;
  OcpSettings ocp;
  cgmres::SolverSettings solver;
  std::string csv_path;
  std::string metrics_path;

  void validate() const {
    plant.validate();
    intent.validate();
    ocp.validate();
    solver.validate();
    if (schedule.empty()) throw ValidationError("scenario: schedule must not be empty");
    if (schedule.front().t_start != 0.0) throw ValidationError("scenario: first segment must start at 0");
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (!(schedule[i].t_start > schedule[i - 1].t_start))
        throw ValidationError("scenario: segment start times must be strictly increasing");
    for (const Segment& s : schedule)
      if (s.z_h_target.b < 0 || s.z_h_target.k < 0) throw ValidationError("scenario: Z_H targets must be >= 0");
    if (!(duration > 0)) throw ValidationError("scenario: duration must be > 0");
    if (!(ts > 0)) throw ValidationError("scenario: ts must be > 0");
    if (plant_substeps < 1) throw ValidationError("plant: substeps must be >= 1");
    if (!(k_threshold > 0)) throw ValidationError("automation: k_threshold must be > 0");
    if (z_a_fixed && (z_a_fixed->b < 0 || z_a_fixed->k < 0)) throw ValidationError("automation: fixed gains must be >= 0");
  }

  bool operator==(const ScenarioConfig&) const = default;
};

struct TraceRow {
  double t = 0.0;
  double theta_h = 0.0;
  double theta_a = 0.0;
  double theta_s = 0.0;
  double theta_sw = 0.0;
  double tau_h = 0.0;
  double tau_a = 0.0;
  double tau_t = 0.0;
  double b_h = 0.0;
  double k_h = 0.0;
  double b_a = 0.0;
  double k_a = 0.0;
  double gamma_ba = 0.0;
  double gamma_ka = 0.0;
  InteractionMode mode;
  double kkt_residual = 0.0;
  int gmres_iters = 0;
};

struct SimulationTrace {
  std::vector<TraceRow> rows;
};

struct RunMetrics {
  double mean_abs_err = 0.0;
  double std_abs_err = 0.0;
  double disagreement_l1 = 0.0;
  double rms_to_human = 0.0;
  double rms_to_automation = 0.0;
};

inline std::size_t sample_count(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.duration / cfg.ts));
}

inline const Segment& active_segment(const ScenarioConfig& cfg, double t) {
  const double slack = 1e-9 * cfg.ts;
  const Segment* seg = &cfg.schedule.front();
  for (const Segment& s : cfg.schedule)
    if (s.t_start <= t + slack) seg = &s;
  return *seg;
}

inline ExogenousInput exogenous_at(const ScenarioConfig& cfg, const Segment& seg, double t) {
  const IntentSample h = intent(t, cfg.intent);
  const IntentSample a = automation_intent(h.angle, h.rate, seg.cooperation);
  const GainPair gamma = human_gamma_hold(seg.z_h_target, cfg.plant);
  return {gamma.b, gamma.k, h.angle, h.rate, a.angle, a.rate, 0.0};
}

inline InteractionMode mode_at(const ScenarioConfig& cfg, const Segment& seg, const PlantState& x,
                               const ExogenousInput& w) {
  if (seg.authority) return {seg.cooperation, *seg.authority};
  InteractionMode m = select_mode({x.b_h(), x.k_h()}, w.theta_h, w.theta_a, cfg.k_threshold);
  m.cooperation = seg.cooperation;
  return m;
}

inline TraceRow make_row(double t, const PlantState& x, const ExogenousInput& w, const MechanicalParams& p) {
  TraceRow r;
  r.t = t;
  r.theta_h = w.theta_h;
  r.theta_a = w.theta_a;
  r.theta_s = x.theta_s();
  r.theta_sw = x.theta_sw();
  r.tau_h = human_torque(x, w, accelerations(x, w, p).wheel, p);
  r.tau_a = automation_torque(x, w, p);
  r.tau_t = sensor_torque(x, p);
  r.b_h = x.b_h();
  r.k_h = x.k_h();
  r.b_a = x.b_a();
  r.k_a = x.k_a();
  return r;
}

/// What the controller saw and produced at one sample, for inspection.
struct TickView {
  double t;
  const PlantState& x;
  const ExogenousInput& w;
  const MechanicalParams& plant;
  const OcpSettings& ocp;
  const cgmres::SolverState& solver;
};

using TickObserver = std::function<void(const TickView&)>;

inline SimulationTrace run_scenario(const ScenarioConfig& cfg, const TickObserver& observe = {}) {
  cfg.validate();
  const std::size_t n = sample_count(cfg);
  const double h = cfg.ts / cfg.plant_substeps;

  const GainPair z_h0 = cfg.schedule.front().z_h_target;
  const GainPair z_a0 = cfg.adaptive ? z_h0 : cfg.z_a_fixed.value_or(z_h0);
  PlantState x = PlantState::at_rest(z_h0.b, z_h0.k, z_a0.b, z_a0.k);

  cgmres::SolverSettings solver = cfg.solver;
  solver.dt = cfg.ts;
  OcpSettings ocp = cfg.ocp;
  std::optional<cgmres::SolverState> state;

  SimulationTrace trace;
  trace.rows.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * cfg.ts;
    const Segment& seg = active_segment(cfg, t);
    const ExogenousInput w = exogenous_at(cfg, seg, t);
    const InteractionMode mode = mode_at(cfg, seg, x, w);

    MechanicalParams p = cfg.plant;
    ControlInput u;
    if (cfg.adaptive) {
      p.beta_ba = p.beta_ka = mode.authority == Authority::active_safety ? cfg.beta_active : cfg.beta_autopilot;
      ocp.weights = weights_for(mode, cfg.weights);
      if (!state) state = cgmres::initialize(x, w, t, solver, ocp, p);
      cgmres::StepResult res = cgmres::step(std::move(*state), x, w, solver, ocp, p);
      u = res.u;
      state = std::move(res.state);
      if (observe) observe({t, x, w, p, ocp, *state});
    } else {
      // Non-adaptive: the automation gains are constants.
      p.alpha_ba = p.alpha_ka = 0.0;
      p.beta_ba = p.beta_ka = 0.0;
    }

    TraceRow row = make_row(t, x, w, p);
    row.gamma_ba = u.gamma_ba;
    row.gamma_ka = u.gamma_ka;
    row.mode = mode;
    if (state) {
      row.kkt_residual = state->last_residual;
      row.gmres_iters = state->gmres_iterations;
    }
    trace.rows.push_back(row);
    if (i == n) break;

    for (int k = 0; k < cfg.plant_substeps; ++k) x = step(x, w, u, p, h, cfg.integrator);
  }
  return trace;
}

inline RunMetrics error_stats(const SimulationTrace& trace) {
  if (trace.rows.empty()) throw EmptyTrace("error_stats: empty trace");
  const double n = static_cast<double>(trace.rows.size());
  RunMetrics m;
  double sum = 0.0, sq_h = 0.0, sq_a = 0.0;
  for (const TraceRow& r : trace.rows) {
    sum += std::abs(r.theta_h - r.theta_s);
    sq_h += (r.theta_s - r.theta_h) * (r.theta_s - r.theta_h);
    sq_a += (r.theta_s - r.theta_a) * (r.theta_s - r.theta_a);
  }
  m.mean_abs_err = sum / n;
  double var = 0.0;
  for (const TraceRow& r : trace.rows) {
    const double d = std::abs(r.theta_h - r.theta_s) - m.mean_abs_err;
    var += d * d;
  }
  m.std_abs_err = std::sqrt(var / n);
  m.rms_to_human = std::sqrt(sq_h / n);
  m.rms_to_automation = std::sqrt(sq_a / n);
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const TraceRow& a = trace.rows[i - 1];
    const TraceRow& b = trace.rows[i];
    m.disagreement_l1 += 0.5 * (b.t - a.t) * (std::abs(a.tau_t) + std::abs(b.tau_t));
  }
  return m;
}

struct Comparison {
  SimulationTrace adaptive_trace;
  SimulationTrace baseline_trace;
  RunMetrics adaptive;
  RunMetrics baseline;
};

/// The same scenario with NMPC gain modulation and with Z_A frozen at Z_H.
inline Comparison compare(const ScenarioConfig& cfg) {
  ScenarioConfig a = cfg;
  a.adaptive = true;
  ScenarioConfig b = cfg;
  b.adaptive = false;
  b.z_a_fixed = cfg.schedule.front().z_h_target;
  Comparison c;
  c.adaptive_trace = run_scenario(a);
  c.baseline_trace = run_scenario(b);
  c.adaptive = error_stats(c.adaptive_trace);
  c.baseline = error_stats(c.baseline_trace);
  return c;
}

/// Four-segment sequence cooperative/active safety, uncooperative/autopilot,
/// uncooperative/active safety, cooperative/autopilot with low, high, low,
/// high driver stiffness. State carries across segment boundaries.
inline SimulationTrace combined_sequence(const ScenarioConfig& cfg) {
  const auto& s = cfg.schedule;
  if (s.size() != 4) throw ValidationError("combined: schedule must have exactly 4 segments");
  const InteractionMode expected[4] = {{Cooperation::cooperative, Authority::active_safety},
                                       {Cooperation::uncooperative, Authority::autopilot},
                                       {Cooperation::uncooperative, Authority::active_safety},
                                       {Cooperation::cooperative, Authority::autopilot}};
  for (int i = 0; i < 4; ++i) {
    if (s[i].cooperation != expected[i].cooperation || (s[i].authority && *s[i].authority != expected[i].authority))
      throw ValidationError("combined: segment " + std::to_string(i + 1) + " must be " + to_string(expected[i]));
  }
  if (!(s[0].z_h_target.k < s[1].z_h_target.k && s[2].z_h_target.k < s[1].z_h_target.k &&
        s[2].z_h_target.k < s[3].z_h_target.k))
    throw ValidationError("combined: driver stiffness must follow low, high, low, high");
  ScenarioConfig c = cfg;
  c.adaptive = true;
  return run_scenario(c);
}

inline ScenarioConfig driver_alone_config(const GainPair& z_h) {
  ScenarioConfig cfg;
  cfg.schedule = {Segment{0.0, z_h, Cooperation::cooperative, Authority::autopilot}};
  cfg.adaptive = false;
  cfg.z_a_fixed = GainPair{0.0, 0.0};
  return cfg;
}

inline constexpr const char* kTraceHeader =
    "t,theta_h,theta_a,theta_s,theta_sw,tau_h,tau_a,tau_t,b_h,k_h,b_a,k_a,gamma_ba,gamma_ka,mode,kkt_residual,"
    "gmres_iters";

inline void write_csv(const SimulationTrace& trace, std::ostream& os) {
  os << kTraceHeader << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    os << buf << ',';
  };
  for (const TraceRow& r : trace.rows) {
    for (double v : {r.t, r.theta_h, r.theta_a, r.theta_s, r.theta_sw, r.tau_h, r.tau_a, r.tau_t, r.b_h, r.k_h,
                     r.b_a, r.k_a, r.gamma_ba, r.gamma_ka})
      num(v);
    os << to_string(r.mode) << ',';
    num(r.kkt_residual);
    os << r.gmres_iters << '\n';
  }
}

inline void write_metrics(const RunMetrics& m, std::ostream& os, const std::string& prefix = "") {
  char buf[64];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    os << prefix << key << '=' << buf << '\n';
  };
  kv("mean_abs_err", m.mean_abs_err);
  kv("std_abs_err", m.std_abs_err);
  kv("disagreement_l1", m.disagreement_l1);
  kv("rms_to_human", m.rms_to_human);
  kv("rms_to_automation", m.rms_to_automation);
}

}  // namespace hsc
