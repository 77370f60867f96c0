// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 7        run criteria 3 and 7
//
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/config.hpp"
#include "hsc/harness.hpp"
#include "hsc/newton.hpp"
#include "oracles.hpp"

using namespace hsc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const Comparison& comparison(const std::string& preset) {
  static std::vector<std::pair<std::string, Comparison>> cache;
  for (const auto& [name, c] : cache)
    if (name == preset) return c;
  cache.emplace_back(preset, compare(*find_preset(preset)));
  return cache.back().second;
}

double max_over(const SimulationTrace& t, double t0, double t1, double TraceRow::*col) {
  double m = -1e300;
  for (const TraceRow& r : t.rows)
    if (r.t >= t0 && r.t <= t1) m = std::max(m, r.*col);
  return m;
}

double mean_over(const SimulationTrace& t, double t0, double t1, double TraceRow::*col) {
  double s = 0.0;
  int n = 0;
  for (const TraceRow& r : t.rows)
    if (r.t >= t0 - 1e-9 && r.t < t1 - 1e-9) {
      s += r.*col;
      ++n;
    }
  return n ? s / n : 0.0;
}

Outcome table2() {
  const std::vector<Table2Result> rows = run_table2();
  bool within = true, fast = true, monotone = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Table2Result& r = rows[i];
    within = within && r.within_tolerance();
    fast = fast && r.seconds < 1.0;
    if (i > 0) monotone = monotone && r.metrics.mean_abs_err < rows[i - 1].metrics.mean_abs_err;
    detail += format("Z_H=(%.1f,%.1f) mu=%.4f (ref %.4f, %+.0f%%) sigma=%.4f (ref %.4f, %+.0f%%) %.2fs; ",
                     r.reference.z_h.b, r.reference.z_h.k, r.metrics.mean_abs_err, r.reference.paper_mean,
                     100 * r.mean_deviation(), r.metrics.std_abs_err, r.reference.paper_std, 100 * r.std_deviation(),
                     r.seconds);
  }
  detail += format("within +-20%%: %s, monotone: %s, runtime < 1 s: %s", within ? "yes" : "no",
                   monotone ? "yes" : "no", fast ? "yes" : "no");
  return {within && monotone && fast, detail};
}

Outcome uncooperative_autopilot() {
  const Comparison& c = comparison("fig4_uncoop_autopilot");
  const SimulationTrace& t = c.adaptive_trace;
  const double end_k = mean_over(t, 14.0, 15.01, &TraceRow::k_a);
  const double end_b = mean_over(t, 14.0, 15.01, &TraceRow::b_a);
  const double k0 = t.rows.front().k_a, b0 = t.rows.front().b_a;
  const bool l1 = c.adaptive.disagreement_l1 <= 0.5 * c.baseline.disagreement_l1;
  const bool gains = end_k < k0 && end_b < b0;
  const bool rms = c.adaptive.rms_to_human < c.baseline.rms_to_human;
  return {l1 && gains && rms,
          format("L1 adaptive %.4g vs 0.5*baseline %.4g; final k_a %.3g < %.3g, b_a %.3g < %.3g; "
                 "rms_to_human %.4g < %.4g",
                 c.adaptive.disagreement_l1, 0.5 * c.baseline.disagreement_l1, end_k, k0, end_b, b0,
                 c.adaptive.rms_to_human, c.baseline.rms_to_human)};
}

Outcome uncooperative_active() {
  const Comparison& c = comparison("fig5_uncoop_active");
  const SimulationTrace& t = c.adaptive_trace;
  const double k_h = t.rows.front().k_h;
  const double peak = max_over(t, 0.0, 15.0, &TraceRow::k_a);
  const bool closer = c.adaptive.rms_to_automation < c.adaptive.rms_to_human;
  const bool rise = peak >= 2.0 * k_h;
  const bool l1 = c.adaptive.disagreement_l1 > c.baseline.disagreement_l1;
  return {closer && rise && l1,
          format("rms_to_automation %.4g < rms_to_human %.4g; peak k_a %.3g >= 2*k_h %.3g; "
                 "L1 adaptive %.4g > baseline %.4g",
                 c.adaptive.rms_to_automation, c.adaptive.rms_to_human, peak, 2 * k_h, c.adaptive.disagreement_l1,
                 c.baseline.disagreement_l1)};
}

Outcome cooperative_modes() {
  const Comparison& a = comparison("fig6_coop_autopilot");
  const Comparison& s = comparison("fig7_coop_active");
  const double z_k = s.adaptive_trace.rows.front().k_h;
  const IntentProfile prof;
  const double peak = max_over(s.adaptive_trace, prof.t1, prof.span(), &TraceRow::k_a);
  const bool l1 = a.adaptive.disagreement_l1 < a.baseline.disagreement_l1;
  const bool rms = s.adaptive.rms_to_automation < s.baseline.rms_to_automation;
  const bool rise = peak > z_k;
  return {l1 && rms && rise,
          format("autopilot L1 adaptive %.4g < baseline %.4g; active safety rms_to_automation %.4g < %.4g, "
                 "peak k_a during maneuver %.3g > %.3g",
                 a.adaptive.disagreement_l1, a.baseline.disagreement_l1, s.adaptive.rms_to_automation,
                 s.baseline.rms_to_automation, peak, z_k)};
}

Outcome combined() {
  const ScenarioConfig cfg = *find_preset("fig8_combined");
  SimulationTrace t;
  try {
    t = combined_sequence(cfg);
  } catch (const SolverFailure& e) {
    return {false, std::string("solver failure: ") + e.what()};
  }
  double m[4];
  for (int s = 0; s < 4; ++s) {
    const double t0 = cfg.schedule[s].t_start;
    const double t1 = s < 3 ? cfg.schedule[s + 1].t_start : cfg.duration + cfg.ts;
    m[s] = mean_over(t, t0, t1, &TraceRow::k_a);
  }
  const bool pattern = m[0] > m[1] && m[2] > m[1] && m[2] > m[3];
  return {pattern, format("segment mean k_a %.3g / %.3g / %.3g / %.3g (high-low-high-low: %s), %zu samples, "
                          "no solver failure",
                          m[0], m[1], m[2], m[3], pattern ? "yes" : "no", t.rows.size())};
}

Outcome solver_oracle() {
  const ScenarioConfig cfg = *find_preset("fig5_uncoop_active");
  const double times[5] = {2.0, 4.0, 7.0, 10.0, 13.0};
  bool ok = true;
  int seen = 0;
  double worst_f = 0.0, worst_ratio = 0.0;
  run_scenario(cfg, [&](const TickView& v) {
    for (double tf : times) {
      if (std::abs(v.t - tf) > 1e-9) continue;
      ++seen;
      const cgmres::OcpResidual F{v.plant, v.ocp};
      const Eigen::VectorXd X = cgmres::stack(v.x, v.w);
      auto at = [&](const Eigen::VectorXd& U) { return F(X, U, v.t); };
      const Eigen::VectorXd U_cg = v.solver.U.values();
      NewtonOptions opt;
      opt.tol = 1e-10;
      const NewtonResult n = damped_newton(at, seed_decision(v.x, hold(v.w, v.ocp), v.ocp, v.plant).values(), opt);
      const double f = at(U_cg).lpNorm<Eigen::Infinity>();
      const double bound = 0.1 * (1.0 + n.x.lpNorm<Eigen::Infinity>());
      const double dist = (U_cg - n.x).lpNorm<Eigen::Infinity>();
      ok = ok && n.converged && f <= 0.5 && dist <= bound;
      worst_f = std::max(worst_f, f);
      worst_ratio = std::max(worst_ratio, dist / bound);
    }
  });

  // Synthetic affine residual: one continuation step scales F by |1 - zeta dt|.
  std::mt19937_64 rng(2024);
  const Eigen::MatrixXd M = oracle::well_conditioned(rng, 12);
  const Eigen::VectorXd c = oracle::random_vector(rng, 12);
  auto affine = [&](const Eigen::VectorXd&, const Eigen::VectorXd& U, double) -> Eigen::VectorXd { return M * U - c; };
  cgmres::SolverSettings s;
  s.dt = 0.005;
  s.gmres_tol = 1e-13;
  const double factor = std::abs(1.0 - s.zeta * s.dt);
  cgmres::ContinuationState st;
  st.U = Eigen::VectorXd::Zero(12);
  st.U_dot = Eigen::VectorXd::Zero(12);
  st.X_prev = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd U_star = M.partialPivLu().solve(c);
  double prev = (st.U - U_star).norm(), worst_dev = 0.0;
  for (int k = 0; k < 20; ++k) {
    cgmres::continuation_update(affine, st, Eigen::VectorXd::Zero(1), s);
    const double e = (st.U - U_star).norm();
    worst_dev = std::max(worst_dev, std::abs(e / prev - factor) / factor);
    prev = e;
  }
  const bool geometric = worst_dev <= 0.1;
  return {ok && seen == 5 && geometric,
          format("%d/5 frozen points, Newton converged, max ||F(U_cg)||_inf %.3g <= 0.5, max distance/bound %.3g <= 1; "
                 "affine contraction factor deviation %.2g%% (<= 10%%), final error %.2g",
                 seen, worst_f, worst_ratio, 100 * worst_dev, prev)};
}

Outcome gmres_correctness() {
  std::mt19937_64 rng(7);
  double worst_rel = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd A = oracle::well_conditioned(rng, 60);
    const Eigen::VectorXd b = oracle::random_vector(rng, 60);
    auto apply = [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A * v); };
    const Eigen::VectorXd x_lu = A.partialPivLu().solve(b);
    const cgmres::GmresResult full = cgmres::fdgmres(apply, b, Eigen::VectorXd::Zero(60), 60, 1e-13);
    worst_rel = std::max({worst_rel, (A * full.solution - b).norm() / b.norm(),
                          (full.solution - x_lu).norm() / x_lu.norm()});
    const cgmres::GmresResult cut = cgmres::fdgmres(apply, b, Eigen::VectorXd::Zero(60), 12, 1e-13);
    for (std::size_t k = 1; k < cut.residual_history.size(); ++k)
      monotone = monotone && cut.residual_history[k] <= cut.residual_history[k - 1];
  }
  return {worst_rel <= 1e-8 && monotone,
          format("100 systems of size 60: worst relative residual / LU mismatch %.2g <= 1e-8; "
                 "i_max=12 residual history non-increasing: %s",
                 worst_rel, monotone ? "yes" : "no")};
}

Outcome adjoint_check() {
  std::mt19937_64 rng(8);
  double worst_u = 0.0, worst_x = 0.0;
  for (int i = 0; i < 20; ++i) {
    const oracle::GradientCheck c = oracle::check_gradients(oracle::random_problem(rng));
    worst_u = std::max(worst_u, c.control);
    worst_x = std::max(worst_x, c.state);
  }
  return {worst_u <= 1e-5 && worst_x <= 1e-5,
          format("20 random points: worst relative error, decision coordinates %.2g, state coordinates %.2g "
                 "(<= 1e-5)",
                 worst_u, worst_x)};
}

Outcome plant_oracles() {
  MechanicalParams p;
  double worst_eq = 0.0, worst_rate = 0.0;
  for (double kh : {0.1, 0.5, 1.0}) {
    for (double ka : {0.1, 0.5, 1.0}) {
      ExogenousInput w{0.2, kh, 1.0, 0.0, -0.5, 0.0, 0.0};
      PlantState x = PlantState::at_rest(0.2, kh, 0.2, ka);
      for (int i = 0; i < 60000; ++i) x = step(x, w, {0.2, ka}, p, 1e-3, Integrator::rk4);
      worst_eq = std::max(worst_eq, std::abs(x.theta_s() - equilibrium_angle(1.0, -0.5, kh, ka, p.k_t)));
      worst_rate = std::max(worst_rate, std::hypot(x.omega_sw(), x.omega_s()));
    }
  }

  double worst_decay = 0.0;
  PlantState g = PlantState::at_rest(0.3, 0.7, 1.1, 0.2);
  const PlantState g0 = g;
  for (int i = 1; i <= 500; ++i) {
    g = step(g, {}, {}, p, 0.01, Integrator::rk4);
    for (int k : {kBh, kKh, kBa, kKa})
      worst_decay = std::max(worst_decay, std::abs(g.x[k] / (g0.x[k] * std::exp(-0.01 * i)) - 1.0));
  }

  const double order_euler = std::log2(oracle::integrator_error(0.02, Integrator::euler) /
                                       oracle::integrator_error(0.01, Integrator::euler));
  const double order_rk4 = std::log2(oracle::integrator_error(0.02, Integrator::rk4) /
                                     oracle::integrator_error(0.01, Integrator::rk4));

  const bool pass = worst_eq <= 1e-6 && worst_rate < 1e-6 && worst_decay <= 1e-9 && std::abs(order_euler - 1) < 0.15 &&
                    std::abs(order_rk4 - 4) < 0.3;
  return {pass, format("equilibrium grid max |theta_s - theta_s*| %.2g rad (rates %.2g); gain decay rel error %.2g; "
                       "observed order euler %.2f, rk4 %.2f",
                       worst_eq, worst_rate, worst_decay, order_euler, order_rk4)};
}

Outcome determinism() {
  std::vector<std::pair<std::string, std::function<SimulationTrace()>>> runs;
  for (const Preset& p : presets()) {
    const ScenarioConfig cfg = p.config;
    if (cfg.schedule.size() == 4)
      runs.emplace_back(p.name, [cfg] { return combined_sequence(cfg); });
    else
      runs.emplace_back(p.name, [cfg] { return run_scenario(cfg); });
    ScenarioConfig base = cfg;
    base.adaptive = false;
    base.z_a_fixed = cfg.schedule.front().z_h_target;
    runs.emplace_back(p.name + " baseline", [base] { return run_scenario(base); });
  }
  for (const Table2Row& r : table2_reference()) {
    const ScenarioConfig cfg = driver_alone_config(r.z_h);
    runs.emplace_back(format("driver-alone (%.1f,%.1f)", r.z_h.b, r.z_h.k), [cfg] { return run_scenario(cfg); });
  }
  int identical = 0;
  std::string differing;
  for (const auto& [name, run] : runs) {
    std::ostringstream a, b;
    write_csv(run(), a);
    write_csv(run(), b);
    if (a.str() == b.str()) ++identical;
    else differing += " " + name;
  }
  const int total = static_cast<int>(runs.size());
  return {identical == total,
          format("%d/%d scenarios byte-identical across two runs%s", identical, total,
                 differing.empty() ? "" : ("; differing:" + differing).c_str())};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*check)();
};

const Criterion kCriteria[] = {
    {1, "Table 2 driver-alone error statistics", table2},
    {2, "uncooperative autopilot", uncooperative_autopilot},
    {3, "uncooperative active safety", uncooperative_active},
    {4, "cooperative modes", cooperative_modes},
    {5, "combined mode sequence", combined},
    {6, "solver-oracle equivalence", solver_oracle},
    {7, "FDGMRES correctness", gmres_correctness},
    {8, "adjoint/gradient check", adjoint_check},
    {9, "plant oracles", plant_oracles},
    {10, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > 10) {
      std::fprintf(stderr, "usage: acceptance [criterion 1-10 ...]\n");
      return 2;
    }
    selected.push_back(static_cast<int>(id));
  }

  int failed = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
