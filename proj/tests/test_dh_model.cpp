#include <gtest/gtest.h>

#include <random>
#include <string>

#include "armkit/dh_model.hpp"
#include "oracles.hpp"

using namespace armkit;

namespace {

std::string joint_json(double a = 0.0, const std::string& extra = "") {
  return R"({"theta_offset_deg": 0, "alpha_deg": 90, "a_m": )" + std::to_string(a) + R"(, "d_m": 0.01)" + extra +
         "}";
}

std::string arm_json(int n_joints, int bad_joint = -1, double bad_a = 0.0, const std::string& extra = "") {
  std::string s = R"({"name": "test", "joints": [)";
  for (int i = 0; i < n_joints; ++i) {
    if (i) s += ",";
    s += joint_json(i == bad_joint ? bad_a : 0.1, extra);
  }
  return s + "]}";
}

std::size_t violation_joint(const ArmModel& m, const JointConfig& q) {
  auto v = check_limits(m, q);
  EXPECT_EQ(v.size(), 1u);
  return v.empty() ? 99 : v.front().joint;
}

}  // namespace

TEST(LoadArmConfig, OmittedLimitsUseServoTable) {
  const ArmModel m = load_arm_config(arm_json(6));
  const std::array<JointLimit, 6> expected{{{0, 180}, {90, 180}, {0, 90}, {90, 180}, {0, 180}, {0, 90}}};
  EXPECT_EQ(m.limits, expected);
  EXPECT_EQ(m.name, "test");
  EXPECT_DOUBLE_EQ(m.rows[0].alpha, deg_to_rad(90.0));
  EXPECT_DOUBLE_EQ(m.rows[3].d, 0.01);
}

TEST(LoadArmConfig, WrongJointCountNamesCount) {
  try {
    load_arm_config(arm_json(5));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("got 5"), std::string::npos) << e.what();
  }
}

TEST(LoadArmConfig, NegativeLinkLengthNamesJoint) {
  try {
    load_arm_config(arm_json(6, 2, -0.1));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_TRUE(e.joint().has_value());
    EXPECT_EQ(*e.joint(), 2u);
    EXPECT_NE(std::string(e.what()).find("joint 2"), std::string::npos);
  }
}

TEST(LoadArmConfig, RejectsMalformedAndInvalidDocuments) {
  EXPECT_THROW(load_arm_config("{not json"), ConfigError);
  EXPECT_THROW(load_arm_config("[]"), ConfigError);
  EXPECT_THROW(load_arm_config(R"({"joints": []})"), ConfigError);
  EXPECT_THROW(load_arm_config(R"({"name": "x", "joints": [], "extra": 1})"), ConfigError);
  EXPECT_THROW(load_arm_config(arm_json(6, -1, 0, R"(, "bogus": 1)")), ConfigError);
  // degenerate and inverted ranges
  EXPECT_THROW(load_arm_config(arm_json(6, -1, 0, R"(, "limit_deg": [10, 10])")), ConfigError);
  EXPECT_THROW(load_arm_config(arm_json(6, -1, 0, R"(, "limit_deg": [20, 10])")), ConfigError);
  EXPECT_THROW(load_arm_config(arm_json(6, -1, 0, R"(, "limit_deg": [0, 360])")), ConfigError);
  EXPECT_THROW(load_arm_config(arm_json(6, -1, 0, R"(, "limit_deg": [0])")), ConfigError);
  // twist outside (-180, 180]
  std::string bad = arm_json(6);
  bad.replace(bad.find("\"alpha_deg\": 90"), 15, "\"alpha_deg\": -180");
  EXPECT_THROW(load_arm_config(bad), ConfigError);
}

TEST(LoadArmConfig, ExplicitLimitsOverrideDefaults) {
  const ArmModel m = load_arm_config(arm_json(6, -1, 0, R"(, "limit_deg": [10.5, 20])"));
  for (const auto& l : m.limits) EXPECT_EQ(l, (JointLimit{10.5, 20.0}));
}

TEST(LoadArmConfig, SaveThenLoadIsFieldIdentical) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    // Models as they come out of a document: angles converted from degrees.
    std::string doc = R"({"name": "rt", "joints": [)";
    for (int i = 0; i < 6; ++i) {
      if (i) doc += ",";
      char buf[256];
      const double lo = oracle::uniform(rng, 0, 170);
      std::snprintf(buf, sizeof buf,
                    R"({"theta_offset_deg": %.17g, "alpha_deg": %.17g, "a_m": %.17g, "d_m": %.17g, "limit_deg": [%.17g, %.17g]})",
                    oracle::uniform(rng, -179.9, 180), oracle::uniform(rng, -179.9, 180), oracle::uniform(rng, 0, 1),
                    oracle::uniform(rng, -1, 1), lo, lo + oracle::uniform(rng, 1, 180));
      doc += buf;
    }
    doc += "]}";
    const ArmModel m = load_arm_config(doc);
    EXPECT_EQ(load_arm_config(save_arm_config(m)), m) << doc;
  }
  const ArmModel d = default_arm();
  EXPECT_EQ(load_arm_config(save_arm_config(d)), d);
}

TEST(CheckLimits, ServoTableCases) {
  const ArmModel m = default_arm();
  JointConfig q = m.mid_config();
  q[5] = 120.0;
  EXPECT_EQ(violation_joint(m, q), 5u);

  q = m.mid_config();
  q[1] = 45.0;
  EXPECT_EQ(violation_joint(m, q), 1u);

  JointConfig lows, highs;
  for (std::size_t i = 0; i < 6; ++i) {
    lows[i] = m.limits[i].min;
    highs[i] = m.limits[i].max;
  }
  EXPECT_TRUE(check_limits(m, lows).empty());
  EXPECT_TRUE(check_limits(m, highs).empty());
}

TEST(CheckLimits, ReportsEveryViolatedJoint) {
  const ArmModel m = default_arm();
  const JointConfig q({-1.0, 0.0, 91.0, 135.0, 181.0, 45.0});
  const auto v = check_limits(m, q);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0], (LimitViolation{0, -1.0, {0, 180}}));
  EXPECT_EQ(v[1].joint, 1u);
  EXPECT_EQ(v[2].joint, 2u);
  EXPECT_EQ(v[3].joint, 4u);
}

TEST(ClampToLimits, ServoTableCases) {
  const ArmModel m = default_arm();
  JointConfig q = m.mid_config();
  q[5] = 120.0;
  q[2] = 45.0;
  q[1] = 10.0;
  const JointConfig c = clamp_to_limits(m, q);
  EXPECT_EQ(c[5], 90.0);
  EXPECT_EQ(c[2], 45.0);
  EXPECT_EQ(c[1], 90.0);
}

TEST(ClampToLimits, IdempotentAndAlwaysValid) {
  const ArmModel m = default_arm();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    const JointConfig q = oracle::random_any_config(rng);
    const JointConfig c = clamp_to_limits(m, q);
    EXPECT_TRUE(check_limits(m, c).empty());
    EXPECT_EQ(clamp_to_limits(m, c), c);
    for (std::size_t j = 0; j < 6; ++j) {
      if (m.limits[j].contains(q[j])) {
        EXPECT_EQ(c[j], q[j]);
      }
    }
  }
}

TEST(ArmModel, DefaultGeometry) {
  const ArmModel m = default_arm();
  EXPECT_EQ(m.name, "default-6dof");
  EXPECT_NEAR(m.workspace_bound(), 0.065 + 0.105 + 0.098 + 0.055 + 0.045, 1e-15);
  EXPECT_EQ(m.mid_config(), JointConfig({90, 135, 45, 135, 90, 45}));
}
