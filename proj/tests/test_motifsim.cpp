#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wlc/error.hpp"
#include "wlc/motifsim.hpp"

using namespace wlc;

namespace {

// trajectory where neuron `which` dominates for all samples
NeuralTrajectory constant_winner(int n, int which, int samples, double dt) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, samples, 0.01);
  m.row(which - 1).setConstant(0.9);
  return NeuralTrajectory(0.0, dt, m);
}

}  // namespace

TEST(Motifsim, DefaultLibraryLayout) {
  const auto lib = default_library();
  ASSERT_EQ(lib.n(), 6);
  EXPECT_EQ(lib[1].turn_rate, 0.0);
  EXPECT_EQ(lib[2].turn_rate, 0.0);
  EXPECT_DOUBLE_EQ(lib[3].turn_rate, kDefaultSpeed / kDefaultTurnRadius);
  EXPECT_DOUBLE_EQ(lib[4].turn_rate, kDefaultSpeed / kDefaultTurnRadius);
  EXPECT_DOUBLE_EQ(lib[5].turn_rate, -kDefaultSpeed / kDefaultTurnRadius);
  EXPECT_DOUBLE_EQ(lib[6].turn_rate, -kDefaultSpeed / kDefaultTurnRadius);
  for (const auto& m : lib.motifs()) EXPECT_DOUBLE_EQ(m.speed, kDefaultSpeed);
  EXPECT_EQ(default_library(13).n(), 13);
  EXPECT_THROW(MotifLibrary({{"a", 1.0, 0.0}, {"b", 1.0, 0.0}}), Error);
}

TEST(Motifsim, NormalizeAngle) {
  EXPECT_NEAR(normalize_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(normalize_angle(-0.5), -0.5, 1e-15);
  EXPECT_NEAR(normalize_angle(7.0), 7.0 - 2 * std::numbers::pi, 1e-12);
}

TEST(Motifsim, StraightLine) {
  const auto lib = default_library();
  const auto path = simulate_pose_path(constant_winner(6, 1, 101, 0.1), lib, {1.0, 2.0, 0.5});
  ASSERT_EQ(path.size(), 101u);
  const Pose& end = path.poses.back();
  EXPECT_NEAR(end.x, 1.0 + 100.0 * std::cos(0.5), 1e-9);
  EXPECT_NEAR(end.y, 2.0 + 100.0 * std::sin(0.5), 1e-9);
  EXPECT_NEAR(end.heading, 0.5, 1e-15);
}

TEST(Motifsim, LeftTurnStaysOnCircle) {
  const auto lib = default_library();
  const double r = kDefaultTurnRadius;
  const auto path = simulate_pose_path(constant_winner(6, 3, 2001, 0.01), lib);
  // start at origin heading +x: centre (0, r)
  for (const Pose& p : path.poses) EXPECT_NEAR(std::hypot(p.x, p.y - r), r, 1e-9);
  const double expected_heading = normalize_angle(20.0 * kDefaultSpeed / r);
  EXPECT_NEAR(path.poses.back().heading, expected_heading, 1e-9);
}

TEST(Motifsim, RightTurnMirrorsLeft) {
  const auto lib = default_library();
  const auto left = simulate_pose_path(constant_winner(6, 3, 500, 0.01), lib);
  const auto right = simulate_pose_path(constant_winner(6, 5, 500, 0.01), lib);
  for (std::size_t k = 0; k < left.size(); ++k) {
    EXPECT_NEAR(left.poses[k].x, right.poses[k].x, 1e-12);
    EXPECT_NEAR(left.poses[k].y, -right.poses[k].y, 1e-12);
  }
}

TEST(Motifsim, ConstantSpeedAlongArcs) {
  // switching trajectory: winner changes every 50 samples
  const int n = 6, samples = 900;
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, samples, 0.01);
  for (int k = 0; k < samples; ++k) m((k / 50) % n, k) = 0.9;
  const double dt = 0.02, scale = 0.5;
  const auto path = simulate_pose_path(NeuralTrajectory(0.0, dt, m), default_library(), {}, scale);
  EXPECT_DOUBLE_EQ(path.dt, dt * scale);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Pose& a = path.poses[k - 1];
    const Pose& b = path.poses[k];
    const double chord = std::hypot(b.x - a.x, b.y - a.y);
    const double dphi = std::abs(normalize_angle(b.heading - a.heading));
    // arc length recovered from chord and turning angle
    const double arc = dphi > 0.0 ? chord * (0.5 * dphi) / std::sin(0.5 * dphi) : chord;
    ASSERT_NEAR(arc, kDefaultSpeed * path.dt, 1e-10) << k;
  }
}

TEST(Motifsim, RigidTransformPreservesShape) {
  const auto lib = default_library();
  const auto path = simulate_pose_path(constant_winner(6, 4, 300, 0.05), lib);
  const auto moved = rigid_transform(path, 1.1, 5.0, -3.0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double d0 = std::hypot(path.poses[k].x - path.poses[0].x, path.poses[k].y - path.poses[0].y);
    const double d1 = std::hypot(moved.poses[k].x - moved.poses[0].x, moved.poses[k].y - moved.poses[0].y);
    EXPECT_NEAR(d0, d1, 1e-10);
    EXPECT_NEAR(normalize_angle(moved.poses[k].heading - path.poses[k].heading), 1.1, 1e-12);
  }
}

TEST(Motifsim, DecodeAndRuns) {
  Eigen::MatrixXd m(3, 7);
  m << 0.9, 0.9, 0.1, 0.1, 0.1, 0.9, 0.9,  //
      0.1, 0.1, 0.9, 0.9, 0.1, 0.1, 0.1,   //
      0.1, 0.1, 0.1, 0.1, 0.9, 0.1, 0.1;
  const NeuralTrajectory traj(0.0, 1.0, m);
  EXPECT_EQ(decode_motif(traj.sample(2)), 2);
  const auto path = simulate_pose_path(traj, default_library(3));
  const auto runs = motif_runs(path);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0], (std::pair<int, std::size_t>{1, 2}));
  EXPECT_EQ(runs[1], (std::pair<int, std::size_t>{2, 2}));
  EXPECT_EQ(runs[2], (std::pair<int, std::size_t>{3, 1}));
  EXPECT_EQ(runs[3], (std::pair<int, std::size_t>{1, 2}));
}

TEST(Motifsim, Errors) {
  const auto traj = constant_winner(4, 1, 10, 0.1);
  try {
    simulate_pose_path(traj, default_library(6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSize);
  }
  try {
    simulate_pose_path(traj, default_library(4), {}, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
}
