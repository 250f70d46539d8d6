#include <gtest/gtest.h>

#include "support.hpp"

using namespace magvox;
using namespace magvox::actuation;
using magnetics::Dipole;
using magnetics::Uniform;

namespace {

const Material kMaterial{4.6e6, 0.49};

ChainModel worm_chain(std::size_t n = 4, Vec3 M = {1e5, 0, 0}) {
  return uniform_chain(n, 0.05, 0.05, 0.05, M, kMaterial);
}

double tip_angle(const EquilibriumResult& r) {
  double s = 0;
  for (double t : r.joint_angles) s += t;
  return s;
}

std::vector<double> fd_gradient(const ChainModel& c, const magnetics::FieldSource& src, std::vector<double> theta,
                                double h) {
  std::vector<double> g(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double t0 = theta[j];
    theta[j] = t0 + h;
    const double up = energy(c, src, theta);
    theta[j] = t0 - h;
    const double down = energy(c, src, theta);
    theta[j] = t0;
    g[j] = (up - down) / (2 * h);
  }
  return g;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]), den += b[i] * b[i];
  return std::sqrt(num / den);
}

}  // namespace

TEST(BuildChain, WormHasFourSegmentsThreeJoints) {
  const auto c = build_chain(testkit::fixture("worm"), kMaterial, ChainAxis::PosX);
  EXPECT_EQ(c.segments.size(), 4u);
  EXPECT_EQ(c.joint_count(), 3u);
  const double I = 0.05e-3 * std::pow(0.05e-3, 3) / 12;
  for (double k : c.joint_stiffness) EXPECT_NEAR(k, 4.6e6 * I / 0.05e-3, 1e-12 * k);
  EXPECT_EQ(c.base, Vec3(-0.025, 0, 0));
}

TEST(BuildChain, GripperArms) {
  const auto d = testkit::fixture("gripper");
  auto arm = [&](std::vector<VoxelId> ids, ChainAxis a) {
    Design s;
    for (auto id : ids) s.voxels.push_back(d.at(id));
    return build_chain(s, kMaterial, a);
  };
  EXPECT_EQ(arm({2, 3, 4}, ChainAxis::PosX).segments.size(), 3u);
  EXPECT_EQ(arm({1, 2, 3, 4}, ChainAxis::PosX).segments.size(), 4u);
  EXPECT_EQ(arm({8, 9, 10}, ChainAxis::PosY).segments.front().length_mm, 0.025);
}

TEST(BuildChain, LShapeRejected) {
  Design d;
  d.voxels = {{1, {0, 0, 0}, {0.05, 0.05, 0.05}, Magnetization::along({1, 0, 0})},
              {2, {0.05, 0, 0}, {0.05, 0.05, 0.05}, Magnetization::along({1, 0, 0})},
              {3, {0.05, 0.05, 0}, {0.05, 0.05, 0.05}, Magnetization::along({1, 0, 0})}};
  try {
    build_chain(d, kMaterial, ChainAxis::PosX);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find("not a chain"), std::string::npos);
  }
}

TEST(TipDeflection, Geometry) {
  const auto c = worm_chain(2);
  EXPECT_EQ(tip_deflection(std::vector<double>{0.0}, c), Vec3(0, 0, 0));
  EXPECT_NEAR(norm(tip_deflection(std::vector<double>{std::numbers::pi / 2}, c)), 0.05 * std::sqrt(2.0), 1e-15);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  const auto long_chain = worm_chain(9);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> th(8);
    for (auto& t : th) t = ang(rng);
    EXPECT_LE(norm(tip_position(long_chain, th) - long_chain.base), long_chain.total_length_mm() + 1e-12);
  }
}

TEST(Energy, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  const std::vector<magnetics::FieldSource> sources{Uniform{{0.001, -0.002, 0.004}},
                                                    Dipole{{0, 0, 0.05}, {0.1, 0.05, -3}}};
  for (const auto& src : sources) {
    for (int trial = 0; trial < 50; ++trial) {
      auto c = worm_chain(6, testkit::random_unit(rng) * 1e5);
      std::vector<double> th(c.joint_count());
      for (auto& t : th) t = ang(rng);
      EXPECT_LT(rel_l2(energy_gradient(c, src, th), fd_gradient(c, src, th, 1e-6)), 1e-6);
    }
  }
}

TEST(Solve, ZeroFieldIsExactlyStraight) {
  const auto r = solve_equilibrium(worm_chain(), Uniform{{0, 0, 0}});
  for (double t : r.joint_angles) EXPECT_EQ(t, 0.0);
  EXPECT_EQ(r.tip_displacement, Vec3(0, 0, 0));
}

TEST(Solve, BendsTowardFieldAndMonotoneInB) {
  double last = 0;
  for (double mT : {1.0, 2.0, 4.0}) {
    const auto c = worm_chain();
    const auto r = solve_equilibrium(c, Uniform{{0, 0, mT * 1e-3}});
    EXPECT_GT(r.tip_displacement.z, 0.0);
    EXPECT_GT(norm(r.tip_displacement), last);
    last = norm(r.tip_displacement);
    EXPECT_LE(r.energy, energy(c, Uniform{{0, 0, mT * 1e-3}}, std::vector<double>(c.joint_count(), 0.0)));
  }
}

TEST(Solve, SmallAngleMatchesCantilever) {
  const std::size_t n = 40;
  const double l = 0.05e-3, M = 1e5, B = 1e-4;
  const auto c = worm_chain(n, {M, 0, 0});
  const auto r = solve_equilibrium(c, Uniform{{0, 0, B}});
  const double I = l * l * l * l / 12, L = n * l;
  const double per_length = l * l * M * B;  // |v M x B| per unit length
  const double closed_form = per_length * L * L / (2 * 4.6e6 * I);
  ASSERT_LT(std::abs(tip_angle(r)), 5 * std::numbers::pi / 180);
  EXPECT_NEAR(std::abs(tip_angle(r)) / closed_form, 1.0, 0.05);
}

TEST(Solve, MirroredFieldMirrorsPose) {
  const auto c = worm_chain(5);
  const auto up = solve_equilibrium(c, Uniform{{0, 0, 0.004}});
  const auto down = solve_equilibrium(c, Uniform{{0, 0, -0.004}});
  for (std::size_t j = 0; j < c.joint_count(); ++j) EXPECT_NEAR(up.joint_angles[j], -down.joint_angles[j], 1e-12);
}

TEST(Solve, GripperArmsAgreeBySymmetry) {
  const auto d = testkit::fixture("gripper");
  std::vector<double> tips;
  const std::vector<std::pair<std::vector<VoxelId>, ChainAxis>> arms{
      {{2, 3, 4}, ChainAxis::PosX}, {{5, 6, 7}, ChainAxis::NegX}, {{8, 9, 10}, ChainAxis::PosY}, {{11, 12, 13}, ChainAxis::NegY}};
  for (const auto& [ids, axis] : arms) {
    Design s;
    for (auto id : ids) s.voxels.push_back(d.at(id));
    const auto c = build_chain(s, kMaterial, axis, 1e5);
    tips.push_back(norm(solve_equilibrium(c, Uniform{{0, 0, 0.004}}).tip_displacement));
  }
  for (double t : tips) EXPECT_NEAR(t, tips[0], 1e-9 * tips[0]);
  EXPECT_GT(tips[0], 0.0);
}

TEST(Stiffness, ScalesWithModulusAndThickness) {
  const auto a = uniform_chain(3, 0.05, 0.05, 0.05, {1e5, 0, 0}, kMaterial);
  const auto b = uniform_chain(3, 0.05, 0.05, 0.05, {1e5, 0, 0}, Material{2 * 4.6e6, 0.49});
  const auto t = uniform_chain(3, 0.05, 0.05, 0.1, {1e5, 0, 0}, kMaterial);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(b.joint_stiffness[j], 2 * a.joint_stiffness[j], 1e-12 * b.joint_stiffness[j]);
    EXPECT_NEAR(t.joint_stiffness[j], 8 * a.joint_stiffness[j], 1e-12 * t.joint_stiffness[j]);
  }
}

TEST(Solve, NonConvergenceReported) {
  SolverOptions opt;
  opt.max_iterations = 1;
  try {
    solve_equilibrium(worm_chain(), Uniform{{0, 0, 0.004}}, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Convergence);
  }
}
