#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hsc/agents.hpp"

namespace hsc {
namespace {

TEST(Intent, Branches) {
  const IntentProfile prof;
  const IntentSample rest = intent(0.5, prof);
  EXPECT_EQ(rest.angle, 0.0);
  EXPECT_EQ(rest.rate, 0.0);

  const IntentSample top = intent(6.0, prof);
  EXPECT_NEAR(top.angle, 1.0, 1e-15);
  EXPECT_NEAR(top.rate, 0.0, 1e-15);

  const IntentSample mid = intent(3.5, prof);
  EXPECT_NEAR(mid.angle, 0.5, 1e-15);
  EXPECT_NEAR(mid.rate, 0.1 * std::numbers::pi, 1e-15);

  EXPECT_DOUBLE_EQ(intent(7.0, prof).angle, 1.0);
  EXPECT_NEAR(intent(10.5, prof).angle, 0.5, 1e-15);
  EXPECT_NEAR(intent(10.5, prof).rate, -0.1 * std::numbers::pi, 1e-15);
  EXPECT_EQ(intent(14.5, prof).angle, 0.0);
}

TEST(Intent, RateIsDerivativeOfAngle) {
  const IntentProfile prof;
  for (double t = 0.05; t < 15.0; t += 0.37) {
    const double h = 1e-6;
    const double fd = (intent(t + h, prof).angle - intent(t - h, prof).angle) / (2 * h);
    EXPECT_NEAR(intent(t, prof).rate, fd, 1e-6) << "t=" << t;
  }
}

TEST(Intent, Continuous) {
  const IntentProfile prof;
  for (double t : {1.0, 6.0, 8.0, 13.0}) {
    EXPECT_NEAR(intent(t - 1e-9, prof).angle, intent(t + 1e-9, prof).angle, 1e-8) << "t=" << t;
  }
}

TEST(Intent, PeriodicRepeats) {
  IntentProfile prof;
  prof.period = 15.0;
  for (double t : {0.5, 3.5, 6.0, 10.5}) EXPECT_NEAR(intent(t + 30.0, prof).angle, intent(t, prof).angle, 1e-12);
  prof.period = 10.0;
  EXPECT_THROW(prof.validate(), ValidationError);
}

TEST(Intent, AmplitudeScales) {
  IntentProfile prof;
  prof.w_amp = -2.0;
  EXPECT_NEAR(intent(3.5, prof).angle, -1.0, 1e-15);
}

TEST(AutomationIntent, SignRule) {
  EXPECT_DOUBLE_EQ(automation_intent(1.0, 0.0, Cooperation::cooperative).angle, 0.9);
  EXPECT_DOUBLE_EQ(automation_intent(1.0, 0.0, Cooperation::uncooperative).angle, -0.9);
  EXPECT_EQ(automation_intent(0.0, 0.0, Cooperation::cooperative).angle, 0.0);
  EXPECT_EQ(automation_intent(0.0, 0.0, Cooperation::uncooperative).angle, 0.0);
  EXPECT_DOUBLE_EQ(automation_intent(0.2, 0.5, Cooperation::uncooperative).rate, -0.45);
}

TEST(GammaHold, FixedPoint) {
  MechanicalParams p;
  EXPECT_EQ(human_gamma_hold({0.5, 1.0}, p), (GainPair{0.5, 1.0}));
  EXPECT_EQ(human_gamma_hold({0.0, 0.0}, p), (GainPair{0.0, 0.0}));
  p.alpha_bh = p.alpha_kh = -2.0;
  p.beta_bh = p.beta_kh = 0.5;
  const GainPair g = human_gamma_hold({0.1, 0.1}, p);
  EXPECT_DOUBLE_EQ(g.b, 0.4);
  EXPECT_DOUBLE_EQ(g.k, 0.4);
}

TEST(GammaHold, ZeroActivation) {
  MechanicalParams p;
  p.beta_kh = 0.0;
  EXPECT_THROW(human_gamma_hold({0.5, 1.0}, p), ZeroActivation);
}

TEST(SelectMode, Examples) {
  EXPECT_EQ(select_mode({0.5, 1.0}, 1.0, 0.9, 0.5),
            (InteractionMode{Cooperation::cooperative, Authority::autopilot}));
  EXPECT_EQ(select_mode({0.1, 0.1}, 1.0, -0.9, 0.5),
            (InteractionMode{Cooperation::uncooperative, Authority::active_safety}));
  EXPECT_EQ(select_mode({0.1, 0.1}, 0.0, 0.0, 0.5).cooperation, Cooperation::cooperative);
  EXPECT_EQ(select_mode({0.1, 0.5}, 0.0, 0.0, 0.5).authority, Authority::autopilot);
  EXPECT_THROW(select_mode({0.1, 0.1}, 0.0, 0.0, 0.0), ValidationError);
}

TEST(Weights, PerAuthority) {
  const CostWeights a = weights_for({Cooperation::uncooperative, Authority::autopilot});
  EXPECT_EQ(a, (CostWeights{0.2, 0.0, 0.8}));
  const CostWeights s = weights_for({Cooperation::cooperative, Authority::active_safety});
  EXPECT_EQ(s, (CostWeights{0.0, 0.8, 0.2}));
  EXPECT_THROW((CostWeights{0, 0, 0}).validate(), ValidationError);
  EXPECT_THROW((CostWeights{-1, 0, 1}).validate(), ValidationError);
}

TEST(ModeNames, Format) {
  EXPECT_EQ(to_string(InteractionMode{Cooperation::uncooperative, Authority::active_safety}),
            "uncooperative/active_safety");
}

}  // namespace
}  // namespace hsc
