#pragma once

// Discretised optimal control problem for the automation's gain modulation.
//
// Per stage j the unknowns are d_j = [gamma_ba, gamma_ka, s1, s2, mu1, mu2]:
// the control, the slacks turning b_a >= 0, k_a >= 0 into s^2 - gain = 0, and
// the multipliers of those equalities. States follow by forward recursion,
// costates by backward recursion from lambda_Np = 0, and the residual stacks
//   [dH/du (2), dH/ds (2), C (2)]  for every stage.
//
// Each prediction stage of length ts is integrated with `substeps` forward
// Euler steps of ts / substeps; substeps = 1 is plain forward Euler on the ts
// grid. Cost and constraints live on the ts grid only.

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hsc/agents.hpp"
#include "hsc/errors.hpp"
#include "hsc/plant.hpp"

namespace hsc {

inline constexpr int kStageSize = 6;

struct OcpSettings {
  int np_horizon = 10;
  int nc_horizon = 10;
  double ts = 0.01;
  CostWeights weights{0.2, 0.0, 0.8};
  double r_u = 6e-3;
  double r_s = 3e-2;
  int substeps = 50;

  void validate() const {
    if (nc_horizon < 1 || np_horizon < nc_horizon) throw ValidationError("ocp: need np_horizon >= nc_horizon >= 1");
    if (!(ts > 0)) throw ValidationError("ocp: ts must be > 0");
    if (r_u < 0 || r_s < 0) throw ValidationError("ocp: r_u, r_s must be >= 0");
    if (substeps < 1) throw ValidationError("ocp: substeps must be >= 1");
    if (weights.w1 < 0 || weights.w2 < 0 || weights.w3 < 0) throw ValidationError("ocp: weights must be >= 0");
  }

  bool operator==(const OcpSettings&) const = default;
};

struct StageDecision {
  ControlInput u;
  double s1 = 0.0;
  double s2 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
};

/// Stacked per-stage unknowns, length kStageSize * np.
class DecisionVector {
 public:
  DecisionVector() = default;
  explicit DecisionVector(int np) : data_(Eigen::VectorXd::Zero(kStageSize * np)) {}
  explicit DecisionVector(Eigen::VectorXd data) : data_(std::move(data)) {
    if (data_.size() % kStageSize != 0) throw DimensionMismatch("decision vector length is not a multiple of 6");
  }

  int stages() const { return static_cast<int>(data_.size() / kStageSize); }

  StageDecision stage(int j) const {
    const auto b = data_.segment<kStageSize>(kStageSize * j);
    return {{b[0], b[1]}, b[2], b[3], b[4], b[5]};
  }

  void set_stage(int j, const StageDecision& d) {
    data_.segment<kStageSize>(kStageSize * j) << d.u.gamma_ba, d.u.gamma_ka, d.s1, d.s2, d.mu1, d.mu2;
  }

  ControlInput control(int j) const { return {data_[kStageSize * j], data_[kStageSize * j + 1]}; }

  const Eigen::VectorXd& values() const { return data_; }
  Eigen::VectorXd& values() { return data_; }

 private:
  Eigen::VectorXd data_;
};

using CostateVector = std::vector<Vec8>;

inline double stage_cost(const PlantState& x, const ExogenousInput& w, const StageDecision& d,
                         const OcpSettings& settings, const MechanicalParams& p) {
  const CostWeights& q = settings.weights;
  const double e_h = w.theta_h - x.theta_s();
  const double e_a = w.theta_a - x.theta_s();
  const double tau_t = sensor_torque(x, p);
  const double tracking = q.w1 * e_h * e_h + q.w2 * e_a * e_a + q.w3 * tau_t * tau_t;
  const double reg = settings.r_u * (d.u.gamma_ba * d.u.gamma_ba + d.u.gamma_ka * d.u.gamma_ka) -
                     settings.r_s * (d.s1 + d.s2);
  return settings.ts * (tracking + reg);
}

namespace detail {

inline void check_horizon(const DecisionVector& U, std::span<const ExogenousInput> w_seq,
                          const OcpSettings& settings) {
  if (U.stages() != settings.np_horizon) throw DimensionMismatch("decision vector does not match np_horizon");
  if (static_cast<int>(w_seq.size()) < settings.np_horizon) throw DimensionMismatch("w_seq shorter than np_horizon");
}

/// Control actually applied in stage j: frozen at stage nc-1 beyond the control horizon.
inline ControlInput applied_control(const DecisionVector& U, int j, const OcpSettings& settings) {
  return U.control(std::min(j, settings.nc_horizon - 1));
}

/// Every Euler sub-state, index j * substeps + m.
inline std::vector<PlantState> fine_rollout(const PlantState& x0, std::span<const ExogenousInput> w_seq,
                                            const DecisionVector& U, const OcpSettings& settings,
                                            const MechanicalParams& p) {
  const int m_sub = settings.substeps;
  const double h = settings.ts / m_sub;
  std::vector<PlantState> z;
  z.reserve(static_cast<std::size_t>(settings.np_horizon * m_sub + 1));
  z.push_back(x0);
  for (int j = 0; j < settings.np_horizon; ++j) {
    const ControlInput u = applied_control(U, j, settings);
    for (int m = 0; m < m_sub; ++m) z.push_back(euler_update(z.back(), w_seq[j], u, p, h));
  }
  return z;
}

inline Vec8 stage_cost_gradient(const PlantState& x, const ExogenousInput& w, const OcpSettings& settings,
                                const MechanicalParams& p) {
  const CostWeights& q = settings.weights;
  const double tau_t = sensor_torque(x, p);
  Vec8 g = Vec8::Zero();
  g[kThetaSw] = 2.0 * q.w3 * tau_t * p.k_t;
  g[kThetaS] = -2.0 * q.w1 * (w.theta_h - x.theta_s()) - 2.0 * q.w2 * (w.theta_a - x.theta_s()) -
               2.0 * q.w3 * tau_t * p.k_t;
  return settings.ts * g;
}

struct AdjointPass {
  CostateVector lambda;                        // stage-boundary costates, np + 1 entries
  std::vector<Eigen::Vector2d> control_grad;   // dH/du per stage, before horizon folding
};

inline AdjointPass adjoint(const std::vector<PlantState>& z, std::span<const ExogenousInput> w_seq,
                           const DecisionVector& U, const OcpSettings& settings, const MechanicalParams& p) {
  const int np = settings.np_horizon;
  const int m_sub = settings.substeps;
  const double h = settings.ts / m_sub;
  AdjointPass out;
  out.lambda.assign(static_cast<std::size_t>(np + 1), Vec8::Zero());
  out.control_grad.assign(static_cast<std::size_t>(np), Eigen::Vector2d::Zero());

  Vec8 lam = Vec8::Zero();
  for (int j = np - 1; j >= 0; --j) {
    const ExogenousInput& w = w_seq[j];
    Eigen::Vector2d gu = Eigen::Vector2d::Zero();
    for (int m = m_sub - 1; m >= 0; --m) {
      gu[0] += h * p.beta_ba * lam[kBa];
      gu[1] += h * p.beta_ka * lam[kKa];
      const PlantState& zm = z[static_cast<std::size_t>(j * m_sub + m)];
      lam += h * (state_jacobian(zm, w, p).transpose() * lam);
    }
    const PlantState& xj = z[static_cast<std::size_t>(j * m_sub)];
    const StageDecision d = U.stage(j);
    lam += stage_cost_gradient(xj, w, settings, p);
    lam[kBa] -= d.mu1;
    lam[kKa] -= d.mu2;
    out.lambda[static_cast<std::size_t>(j)] = lam;

    const ControlInput u = applied_control(U, j, settings);
    gu[0] += 2.0 * settings.ts * settings.r_u * u.gamma_ba;
    gu[1] += 2.0 * settings.ts * settings.r_u * u.gamma_ka;
    out.control_grad[static_cast<std::size_t>(j)] = gu;
  }
  return out;
}

inline std::vector<PlantState> stage_states(const std::vector<PlantState>& z, const OcpSettings& settings) {
  std::vector<PlantState> xs;
  xs.reserve(static_cast<std::size_t>(settings.np_horizon + 1));
  for (int j = 0; j <= settings.np_horizon; ++j) xs.push_back(z[static_cast<std::size_t>(j * settings.substeps)]);
  return xs;
}

}  // namespace detail

/// Stage-boundary states x_0 .. x_Np of the predictor.
inline std::vector<PlantState> rollout(const PlantState& x0, std::span<const ExogenousInput> w_seq,
                                       const DecisionVector& U, const OcpSettings& settings,
                                       const MechanicalParams& p) {
  detail::check_horizon(U, w_seq, settings);
  return detail::stage_states(detail::fine_rollout(x0, w_seq, U, settings, p), settings);
}

/// Costates lambda_0 .. lambda_Np (lambda_Np = 0) for the rollout x_seq of U.
inline CostateVector costates(const std::vector<PlantState>& x_seq, std::span<const ExogenousInput> w_seq,
                              const DecisionVector& U, const OcpSettings& settings, const MechanicalParams& p) {
  detail::check_horizon(U, w_seq, settings);
  if (static_cast<int>(x_seq.size()) != settings.np_horizon + 1)
    throw DimensionMismatch("x_seq must hold np_horizon + 1 states");
  // Rebuild the sub-states of each stage from its stage-boundary state.
  const int m_sub = settings.substeps;
  const double h = settings.ts / m_sub;
  std::vector<PlantState> z;
  z.reserve(static_cast<std::size_t>(settings.np_horizon * m_sub + 1));
  for (int j = 0; j < settings.np_horizon; ++j) {
    const ControlInput u = detail::applied_control(U, j, settings);
    z.push_back(x_seq[static_cast<std::size_t>(j)]);
    for (int m = 1; m < m_sub; ++m) z.push_back(euler_update(z.back(), w_seq[j], u, p, h));
  }
  z.push_back(x_seq.back());
  return detail::adjoint(z, w_seq, U, settings, p).lambda;
}

struct KktEvaluation {
  Eigen::VectorXd residual;
  std::vector<PlantState> states;
  CostateVector lambda;
};

inline KktEvaluation evaluate_kkt(const DecisionVector& U, const PlantState& x0,
                                  std::span<const ExogenousInput> w_seq, const OcpSettings& settings,
                                  const MechanicalParams& p) {
  detail::check_horizon(U, w_seq, settings);
  const int np = settings.np_horizon;
  const int nc = settings.nc_horizon;
  const std::vector<PlantState> z = detail::fine_rollout(x0, w_seq, U, settings, p);
  detail::AdjointPass adj = detail::adjoint(z, w_seq, U, settings, p);

  // Controls beyond the control horizon are copies of stage nc-1: their
  // gradients fold into that stage and their own slots pin the copy.
  for (int j = nc; j < np; ++j) adj.control_grad[static_cast<std::size_t>(nc - 1)] += adj.control_grad[static_cast<std::size_t>(j)];

  KktEvaluation out;
  out.residual.resize(kStageSize * np);
  for (int j = 0; j < np; ++j) {
    const StageDecision d = U.stage(j);
    const PlantState& xj = z[static_cast<std::size_t>(j * settings.substeps)];
    auto r = out.residual.segment<kStageSize>(kStageSize * j);
    if (j < nc) {
      r[0] = adj.control_grad[static_cast<std::size_t>(j)][0];
      r[1] = adj.control_grad[static_cast<std::size_t>(j)][1];
    } else {
      const ControlInput held = U.control(nc - 1);
      r[0] = d.u.gamma_ba - held.gamma_ba;
      r[1] = d.u.gamma_ka - held.gamma_ka;
    }
    r[2] = 2.0 * d.mu1 * d.s1 - settings.ts * settings.r_s;
    r[3] = 2.0 * d.mu2 * d.s2 - settings.ts * settings.r_s;
    r[4] = d.s1 * d.s1 - xj.b_a();
    r[5] = d.s2 * d.s2 - xj.k_a();
  }
  out.states = detail::stage_states(z, settings);
  out.lambda = std::move(adj.lambda);
  return out;
}

inline Eigen::VectorXd kkt_residual(const DecisionVector& U, const PlantState& x0,
                                    std::span<const ExogenousInput> w_seq, const OcpSettings& settings,
                                    const MechanicalParams& p) {
  return evaluate_kkt(U, x0, w_seq, settings, p).residual;
}

/// Zero-order hold of w over the prediction horizon.
inline std::vector<ExogenousInput> hold(const ExogenousInput& w, const OcpSettings& settings) {
  return std::vector<ExogenousInput>(static_cast<std::size_t>(settings.np_horizon), w);
}

inline ControlInput extract_control(const DecisionVector& U) {
  if (U.stages() == 0) throw EmptyHorizon("decision vector has no stages");
  return U.control(0);
}

/// u = 0, slacks matching the gains of the zero-control rollout and
/// multipliers satisfying 2 mu s = ts r_s.
inline DecisionVector seed_decision(const PlantState& x0, std::span<const ExogenousInput> w_seq,
                                    const OcpSettings& settings, const MechanicalParams& p, double eps = 1e-8) {
  DecisionVector U(settings.np_horizon);
  const std::vector<PlantState> xs = rollout(x0, w_seq, U, settings, p);
  for (int j = 0; j < settings.np_horizon; ++j) {
    StageDecision d;
    d.s1 = std::sqrt(std::max(xs[static_cast<std::size_t>(j)].b_a(), eps));
    d.s2 = std::sqrt(std::max(xs[static_cast<std::size_t>(j)].k_a(), eps));
    d.mu1 = settings.ts * settings.r_s / (2.0 * d.s1);
    d.mu2 = settings.ts * settings.r_s / (2.0 * d.s2);
    U.set_stage(j, d);
  }
  return U;
}

}  // namespace hsc
