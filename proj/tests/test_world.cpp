#include "jcas/world.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "jcas/rng.hpp"

namespace jcas {
namespace {

Target vehicle(const std::string& id, Vec2 pos, Vec2 vel) {
  Target t;
  t.id = id;
  t.position = pos;
  t.velocity = vel;
  t.cls = TargetClass::vehicle;
  t.pii = {"owner:" + id, "home:" + id};
  return t;
}

TEST(WorldStep, LinearKinematics) {
  World w;
  w.add_target(vehicle("a", {0, 0}, {1, 0}));
  w.step(5);
  EXPECT_EQ(w.targets()[0].position, (Vec2{5, 0}));
}

TEST(WorldStep, ZeroVelocityUnchanged) {
  World w;
  w.add_target(vehicle("a", {3, 4}, {0, 0}));
  w.step(10);
  EXPECT_EQ(w.targets()[0].position, (Vec2{3, 4}));
}

TEST(WorldStep, TenSmallStepsEqualOneBigStep) {
  World a, b;
  for (int i = 0; i < 3; ++i) {
    Vec2 pos{static_cast<double>(i), 2.0 * i};
    Vec2 vel{0.5 * i + 0.1, -0.3 * i};
    a.add_target(vehicle("t" + std::to_string(i), pos, vel));
    b.add_target(vehicle("t" + std::to_string(i), pos, vel));
  }
  for (int s = 0; s < 10; ++s) a.step(1);
  b.step(10);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(a.targets()[i].position.x, b.targets()[i].position.x, 1e-9);
    EXPECT_NEAR(a.targets()[i].position.y, b.targets()[i].position.y, 1e-9);
  }
}

TEST(WorldStep, ConservesCountAndClass) {
  World w;
  w.add_target(vehicle("a", {0, 0}, {1, 1}));
  Target p = vehicle("b", {5, 5}, {0, 1});
  p.cls = TargetClass::person;
  w.add_target(p);
  w.step(100);
  ASSERT_EQ(w.targets().size(), 2u);
  EXPECT_EQ(w.targets()[0].cls, TargetClass::vehicle);
  EXPECT_EQ(w.targets()[1].cls, TargetClass::person);
}

TEST(Sense, NoiselessExactRange) {
  World w;
  w.add_target(vehicle("a", {10, 0}, {0, 0}));
  SuPose pose{"su", {0, 0}, 50.0, 0.0};
  Rng rng(1);
  auto echoes = w.sense(pose, rng);
  ASSERT_EQ(echoes.size(), 1u);
  EXPECT_DOUBLE_EQ(echoes[0].range_m, 10.0);
  EXPECT_DOUBLE_EQ(echoes[0].bearing_rad, 0.0);
  EXPECT_DOUBLE_EQ(echoes[0].strength, 1.0 - 10.0 / 50.0);
  EXPECT_EQ(echoes[0].raw_object_ref, "a");
}

TEST(Sense, OutOfRangeNoEcho) {
  World w;
  w.add_target(vehicle("a", {51, 0}, {0, 0}));
  SuPose pose{"su", {0, 0}, 50.0, 0.0};
  Rng rng(1);
  EXPECT_TRUE(w.sense(pose, rng).empty());
}

TEST(Sense, NoiselessIsPure) {
  World w;
  w.add_target(vehicle("a", {10, 20}, {0, 0}));
  SuPose pose{"su", {0, 0}, 100.0, 0.0};
  Rng r1(1), r2(99);
  EXPECT_EQ(w.sense(pose, r1), w.sense(pose, r2));
}

// Statistical oracle on the seeded generator: 10000 noisy draws must show a
// sample mean within +-0.05 of zero error and a sample sigma within 5% of
// the configured sigma.
TEST(Sense, NoiseStatisticsMatchConfiguredSigma) {
  World w;
  w.add_target(vehicle("a", {30, 0}, {0, 0}));
  SuPose pose{"su", {0, 0}, 100.0, 1.0};
  Rng rng(20240607);
  const int n = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto echoes = w.sense(pose, rng);
    ASSERT_EQ(echoes.size(), 1u);
    const double err = echoes[0].range_m - 30.0;
    sum += err;
    sum_sq += err * err;
  }
  const double mean = sum / n;
  const double sigma = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sigma, 1.0, 0.05);
}

TEST(Sense, StrengthClampedPositive) {
  World w;
  w.add_target(vehicle("edge", {50, 0}, {0, 0}));  // exactly at range
  SuPose pose{"su", {0, 0}, 50.0, 0.0};
  Rng rng(1);
  auto echoes = w.sense(pose, rng);
  ASSERT_EQ(echoes.size(), 1u);
  EXPECT_GT(echoes[0].strength, 0.0);
  EXPECT_LE(echoes[0].strength, 1.0);
}

TEST(Sense, NoiseNeverYieldsNegativeRange) {
  World w;
  w.add_target(vehicle("near", {0.1, 0}, {0, 0}));
  SuPose pose{"su", {0, 0}, 50.0, 5.0};
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    for (const Echo& e : w.sense(pose, rng)) {
      EXPECT_GE(e.range_m, 0.0);
    }
  }
}

TEST(TargetsInRange, MatchesSense) {
  World w;
  w.add_target(vehicle("a", {10, 0}, {0, 0}));
  w.add_target(vehicle("b", {200, 0}, {0, 0}));
  SuPose pose{"su", {0, 0}, 50.0, 0.0};
  auto in_range = w.targets_in_range(pose);
  ASSERT_EQ(in_range.size(), 1u);
  EXPECT_EQ(in_range[0], "a");
}

}  // namespace
}  // namespace jcas
