#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "armkit/ik_solver.hpp"
#include "oracles.hpp"

using namespace armkit;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

Pose6D fk_pose(const ArmModel& m, const JointConfig& q) { return matrix_to_pose(forward_kinematics(m, q)); }


}  // namespace

TEST(PoseError, ZeroForEqualTransforms) {
  std::mt19937_64 rng(1);
  const Transform4 t = forward_kinematics(default_arm(), oracle::random_config(default_arm(), rng));
  EXPECT_EQ(pose_error(t, t), Vector6d::Zero());
}

TEST(PoseError, PureTranslation) {
  Transform4 target = Transform4::Identity();
  target(0, 3) = 0.1;
  Vector6d expected;
  expected << 0.1, 0, 0, 0, 0, 0;
  EXPECT_EQ(pose_error(Transform4::Identity(), target), expected);
}

TEST(PoseError, QuarterTurnAboutZ) {
  Transform4 target = Transform4::Identity();
  target.topLeftCorner<3, 3>() = Eigen::AngleAxisd(kHalfPi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Vector6d expected;
  expected << 0, 0, 0, 0, 0, kHalfPi;
  EXPECT_LT((pose_error(Transform4::Identity(), target) - expected).norm(), 1e-15);
}

TEST(IkSettings, Validation) {
  IkSettings s;
  EXPECT_NO_THROW(s.validate());
  s.position_tolerance = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.max_iterations = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.restarts = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.damping = -1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(SolveIk, SeedThatAlreadySolvesTarget) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    JointConfig seed = oracle::random_config(m, rng);
    for (std::size_t j = 0; j < 6; ++j) seed[j] = std::clamp(seed[j], m.limits[j].min + 1, m.limits[j].max - 1);
    const IkResult r = solve_ik(m, fk_pose(m, seed), seed);
    EXPECT_LE(r.final_position_error, 1e-4);
    EXPECT_LE(r.final_orientation_error, 1e-3);
    EXPECT_LE((r.solution.radians() - seed.radians()).norm(), 1e-3);
    EXPECT_EQ(r.restart_index, 0);
  }
}

TEST(SolveIk, RecoversRandomFkTargets) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(3);
  const int n = 300;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    const Pose6D target = fk_pose(m, oracle::random_config(m, rng));
    try {
      const IkResult r = solve_ik(m, target, m.mid_config());
      EXPECT_LE(r.final_position_error, 1e-4);
      EXPECT_LE(r.final_orientation_error, 1e-3);
      EXPECT_TRUE(check_limits(m, r.solution).empty());
      ++ok;
    } catch (const PlanningError& e) {
      EXPECT_EQ(e.kind(), PlanningFailure::no_convergence);
    }
  }
  EXPECT_GE(ok, static_cast<int>(0.99 * n));
}

TEST(SolveIk, ResidualsAreHonestAndDeterministic) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose6D target = fk_pose(m, oracle::random_config(m, rng));
    const IkResult a = solve_ik(m, target, m.mid_config());
    const IkResult b = solve_ik(m, target, m.mid_config());
    EXPECT_EQ(a, b);
    const Vector6d e = pose_error(forward_kinematics(m, a.solution), pose_to_matrix(target));
    EXPECT_NEAR(e.head<3>().norm(), a.final_position_error, 1e-12);
    EXPECT_NEAR(e.tail<3>().norm(), a.final_orientation_error, 1e-12);
  }
}

TEST(SolveIk, UnreachableBeyondWorkspaceBound) {
  const ArmModel m = default_arm();
  const Pose6D far(Eigen::Vector3d(2.0 * m.workspace_bound(), 0, 0), Eigen::Quaterniond::Identity());
  try {
    solve_ik(m, far, m.mid_config());
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), PlanningFailure::unreachable);
    EXPECT_FALSE(e.best().has_value());
  }
  EXPECT_THROW(solve_ik_position_only(m, far.position, m.mid_config()), PlanningError);
}

TEST(SolveIk, NoConvergenceReportsBestResidual) {
  const ArmModel m = default_arm();
  IkSettings s;
  s.restarts = 2;
  // Inside the conservative bound but below the base, which the limits never allow.
  const Pose6D below(Eigen::Vector3d(0, 0, -0.25), Eigen::Quaterniond::Identity());
  try {
    solve_ik(m, below, m.mid_config(), s);
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), PlanningFailure::no_convergence);
    ASSERT_TRUE(e.best().has_value());
    const IkResult& best = *e.best();
    EXPECT_TRUE(check_limits(m, best.solution).empty());
    const Vector6d err = pose_error(forward_kinematics(m, best.solution), pose_to_matrix(below));
    EXPECT_NEAR(err.head<3>().norm(), best.final_position_error, 1e-12);
    EXPECT_GT(best.final_position_error, 1e-4);
  }
}

TEST(SolveIk, RestartsPickSolutionNearestToSeed) {
  const ArmModel m = default_arm();
  IkSettings s;
  s.max_iterations = 5;  // seed attempt far from the target fails; restarts get the same budget
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 10; ++i) {
    const Pose6D target = fk_pose(m, oracle::random_config(m, rng));
    const JointConfig seed = oracle::random_config(m, rng);
    const detail::IkTarget<6> tgt{pose_to_matrix(target)};
    if (detail::run_attempt(m, tgt, seed, s, 0).converged) continue;

    // Replay the restart sequence independently.
    std::mt19937_64 restart_rng(kRestartSeed);
    std::optional<IkResult> expected;
    double best = 1e300;
    for (int k = 1; k <= s.restarts; ++k) {
      JointConfig start;
      for (std::size_t j = 0; j < 6; ++j) {
        start[j] = m.limits[j].min + detail::unit_uniform(restart_rng) * (m.limits[j].max - m.limits[j].min);
      }
      const auto a = detail::run_attempt(m, tgt, start, s, k);
      const double dist = (a.result.solution.radians() - seed.radians()).norm();
      if (a.converged && dist < best) {
        best = dist;
        expected = a.result;
      }
    }
    if (!expected) {
      EXPECT_THROW(solve_ik(m, target, seed, s), PlanningError);
      continue;
    }
    const IkResult r = solve_ik(m, target, seed, s);
    EXPECT_EQ(r, *expected);
    EXPECT_GT(r.restart_index, 0);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(IkStep, UndampedStepReducesResidualNearSolution) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(6);
  int tested = 0;
  for (int i = 0; i < 200; ++i) {
    JointConfig sol = oracle::random_config(m, rng);
    for (std::size_t j = 0; j < 6; ++j) sol[j] = std::clamp(sol[j], m.limits[j].min + 1, m.limits[j].max - 1);
    const auto jac = numeric_jacobian(m, sol);
    const Eigen::JacobiSVD<Jacobian> svd(jac);
    if (svd.singularValues()(5) < 1e-2) continue;  // keep away from singularities
    const Transform4 target = forward_kinematics(m, sol);
    JointConfig q = sol;
    for (std::size_t j = 0; j < 6; ++j) q[j] += rad_to_deg(oracle::uniform(rng, -1e-3, 1e-3) / std::sqrt(6.0));
    const double before = pose_error(forward_kinematics(m, q), target).norm();
    const JointConfig next = ik_step(m, target, q, 0.0, 0.3);
    const double after = pose_error(forward_kinematics(m, next), target).norm();
    EXPECT_LT(after, before);
    ++tested;
  }
  EXPECT_GT(tested, 50);
}

TEST(SolveIkPositionOnly, SeedPositionIsImmediate) {
  const ArmModel m = default_arm();
  const JointConfig seed = m.mid_config();
  const IkResult r = solve_ik_position_only(m, forward_kinematics(m, seed).topRightCorner<3, 1>(), seed);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.solution, seed);
  EXPECT_EQ(r.final_orientation_error, 0.0);
}

TEST(SolveIkPositionOnly, RecoversRandomPositions) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(7);
  const int n = 1000;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = forward_kinematics(m, oracle::random_config(m, rng)).topRightCorner<3, 1>();
    try {
      const IkResult r = solve_ik_position_only(m, p, m.mid_config());
      const double err = (forward_kinematics(m, r.solution).topRightCorner<3, 1>() - p).norm();
      EXPECT_NEAR(err, r.final_position_error, 1e-12);
      EXPECT_LE(err, 1e-4);
      ++ok;
    } catch (const PlanningError&) {
    }
  }
  EXPECT_GE(ok, static_cast<int>(0.99 * n));
}
