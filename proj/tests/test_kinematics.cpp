#include <gtest/gtest.h>

#include "support.hpp"

using namespace magvox;

namespace {

long long steps_of(const MoveResult& r, Motor m) {
  long long n = 0;
  for (const auto& c : r.commands) n += c.motor == m ? c.steps : 0;
  return n;
}

}  // namespace

TEST(Kinematics, TransRevs) {
  EXPECT_EQ(required_trans_revs(8, 8), 1.0);
  EXPECT_EQ(required_trans_revs(0, 8), 0.0);
  EXPECT_EQ(required_trans_revs(-4, 8), -0.5);
  EXPECT_THROW(required_trans_revs(1, 0), Error);
  EXPECT_THROW(required_trans_revs(1, -8), Error);
}

TEST(Kinematics, TransSteps) {
  EXPECT_EQ(required_trans_steps(0.5, 200), 100.0);
  EXPECT_EQ(required_trans_steps(0, 200), 0.0);
  EXPECT_NEAR(required_trans_steps(1.0 / 3.0, 200), 200.0 / 3.0, 1e-12);
}

TEST(Kinematics, RevoSteps) {
  EXPECT_EQ(required_revo_steps(90, 1.8), 50.0);
  EXPECT_EQ(required_revo_steps(0, 1.8), 0.0);
  EXPECT_EQ(required_revo_steps(45, 0.9), 50.0);
  EXPECT_THROW(required_revo_steps(45, 0), Error);
}

TEST(Kinematics, ComposedMatchesRationalOracle) {
  // Micrometre targets that are whole multiples of the 40 um step.
  for (long long um = -48000; um <= 48000; um += 40) {
    const double revs = required_trans_revs(um / 1000.0, 8.0);
    const double steps = required_trans_steps(revs, 200);
    EXPECT_EQ(std::round(steps), static_cast<double>(testkit::rational_steps(um, 8000, 200)));
    EXPECT_NEAR(steps, testkit::rational_steps(um, 8000, 200), 1e-9);
  }
}

TEST(Spherical, ConventionCases) {
  auto a = cartesian_to_spherical(Vec3{0, 0, 1});
  EXPECT_EQ(a.azimuth_deg, 0.0);
  EXPECT_EQ(a.inclination_deg, 0.0);
  a = cartesian_to_spherical(Vec3{0, 0, -1});
  EXPECT_EQ(a.azimuth_deg, 0.0);
  EXPECT_EQ(a.inclination_deg, 180.0);
  a = cartesian_to_spherical(Vec3{1, 0, 0});
  EXPECT_EQ(a.azimuth_deg, 0.0);
  EXPECT_EQ(a.inclination_deg, 90.0);
  a = cartesian_to_spherical(Vec3{1, 1, 0} / std::sqrt(2.0));
  EXPECT_NEAR(a.azimuth_deg, 45.0, 1e-12);
  EXPECT_EQ(a.inclination_deg, 90.0);
  a = cartesian_to_spherical(Vec3{-1, 0, 0});
  EXPECT_EQ(a.azimuth_deg, 180.0);
  EXPECT_THROW(cartesian_to_spherical(Vec3{0, 0, 0}), Error);
}

TEST(Spherical, RoundTrip) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 u = testkit::random_unit(rng);
    const auto a = cartesian_to_spherical(u);
    EXPECT_GT(a.azimuth_deg, -180.0);
    EXPECT_LE(a.azimuth_deg, 180.0);
    EXPECT_GE(a.inclination_deg, 0.0);
    EXPECT_LE(a.inclination_deg, 180.0);
    EXPECT_LT(norm(spherical_to_cartesian(a.azimuth_deg, a.inclination_deg) - u), 1e-12);
  }
}

TEST(PlanMove, OriginToFourMm) {
  const MachineConfig cfg;
  const auto r = plan_translation(MachineState{}, {4, 0, 0}, cfg);
  ASSERT_EQ(r.commands.size(), 1u);
  EXPECT_EQ(r.commands[0], (StepCommand{Motor::X, 100}));
  EXPECT_EQ(r.state.residual[0], 0.0);
  EXPECT_EQ(r.state.position(cfg), Vec3(4, 0, 0));
}

TEST(PlanMove, HalfStepCarry) {
  MachineConfig cfg;
  cfg.x.distance_per_rev = 8.0;  // 0.04 mm per step
  const auto first = plan_translation(MachineState{}, {0.02, 0, 0}, cfg);
  EXPECT_EQ(steps_of(first, Motor::X), 1);
  EXPECT_NEAR(first.state.residual[0], -0.5, 1e-12);
  const auto second = plan_translation(first.state, {0.04, 0, 0}, cfg);
  EXPECT_EQ(steps_of(second, Motor::X), 0);
  EXPECT_NEAR(second.state.residual[0], 0.0, 1e-12);
}

TEST(PlanMove, AzimuthTakesShortWay) {
  MachineConfig cfg;
  cfg.azimuth.degree_per_step = 0.5;
  const auto at170 = plan_orientation(MachineState{}, 170, 0, cfg);
  EXPECT_EQ(steps_of(at170, Motor::AZ), 340);
  const auto r = plan_orientation(at170.state, -170, 0, cfg);
  // Both directions, pick the smaller magnitude.
  const double ccw = -170.0 - 170.0, cw = -170.0 + 360.0 - 170.0;
  const double best = std::abs(ccw) < std::abs(cw) ? ccw : cw;
  EXPECT_EQ(steps_of(r, Motor::AZ), static_cast<long long>(best / 0.5));
  EXPECT_EQ(steps_of(r, Motor::AZ), 40);
  EXPECT_NEAR(r.state.azimuth_deg(cfg), -170.0, 1e-12);
}

TEST(PlanMove, InclinationLimits) {
  const MachineConfig cfg;
  EXPECT_THROW(plan_orientation(MachineState{}, 0, 181, cfg), Error);
  EXPECT_THROW(plan_orientation(MachineState{}, 0, -1, cfg), Error);
  EXPECT_EQ(steps_of(plan_orientation(MachineState{}, 0, 180, cfg), Motor::INC), 100);
}

TEST(PlanMove, TravelLimitNamesAxis) {
  const MachineConfig cfg;
  try {
    plan_translation(MachineState{}, {0, 51, 0}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
  }
}

TEST(PlanMove, CarryBoundsErrorOverRandomWalk) {
  const MachineConfig cfg;
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> pos(-10, 10), az(-179.9, 180), inc(0, 180);
  MachineState s;
  for (int i = 0; i < 5000; ++i) {
    const Pose target{{pos(rng), pos(rng), pos(rng)}, az(rng), inc(rng)};
    s = plan_move(s, target, cfg).state;
    const Vec3 p = s.position(cfg);
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(p[k] - target.position[k]), 0.5 * 0.04 + 1e-9);
    EXPECT_LE(std::abs(wrap_degrees(s.azimuth_deg(cfg) - target.azimuth_deg)), 0.9 + 1e-9);
    EXPECT_LE(std::abs(s.inclination_deg(cfg) - target.inclination_deg), 0.9 + 1e-9);
    for (double r : s.residual) EXPECT_LE(std::abs(r), 0.5 + 1e-9);
  }
}

TEST(PlanMove, Deterministic) {
  const MachineConfig cfg;
  const Pose t{{1.234, -5.678, 0.01}, 33.3, 44.4};
  EXPECT_EQ(plan_move(MachineState{}, t, cfg).state, plan_move(MachineState{}, t, cfg).state);
}
