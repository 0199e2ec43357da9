#pragma once

// Arm geometry: Denavit-Hartenberg table, servo joint limits, and the JSON
// arm configuration document that carries both.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace armkit {

inline constexpr std::size_t kNumJoints = 6;

using Vector6d = Eigen::Matrix<double, 6, 1>;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kDegToRad; }
constexpr double rad_to_deg(double rad) { return rad * kRadToDeg; }

/// One link of the kinematic chain. Angles in radians, lengths in meters.
struct DHRow {
  double theta_offset = 0.0;  // added to the joint variable
  double alpha = 0.0;
  double a = 0.0;
  double d = 0.0;

  bool operator==(const DHRow&) const = default;
};

/// Inclusive servo range in degrees.
struct JointLimit {
  double min = 0.0;
  double max = 0.0;

  bool contains(double deg) const { return min <= deg && deg <= max; }
  double clamp(double deg) const { return deg < min ? min : (deg > max ? max : deg); }
  double mid() const { return 0.5 * (min + max); }

  bool operator==(const JointLimit&) const = default;
};

/// Servo ranges of the reference arm, normalized to [min, max].
inline constexpr std::array<JointLimit, kNumJoints> kDefaultLimits{{
    {0.0, 180.0},
    {90.0, 180.0},
    {0.0, 90.0},
    {90.0, 180.0},
    {0.0, 180.0},
    {0.0, 90.0},
}};

/// Six joint angles in degrees. Trigonometry always goes through radians().
class JointConfig {
 public:
  JointConfig() { deg_.fill(0.0); }
  explicit JointConfig(const std::array<double, kNumJoints>& degrees) : deg_(degrees) {}

  static JointConfig from_radians(const Vector6d& rad) {
    JointConfig q;
    for (std::size_t i = 0; i < kNumJoints; ++i) q.deg_[i] = rad_to_deg(rad[static_cast<Eigen::Index>(i)]);
    return q;
  }

  double& operator[](std::size_t i) { return deg_[i]; }
  double operator[](std::size_t i) const { return deg_[i]; }

  const std::array<double, kNumJoints>& degrees() const { return deg_; }

  Vector6d radians() const {
    Vector6d r;
    for (std::size_t i = 0; i < kNumJoints; ++i) r[static_cast<Eigen::Index>(i)] = deg_to_rad(deg_[i]);
    return r;
  }

  bool operator==(const JointConfig&) const = default;

 private:
  std::array<double, kNumJoints> deg_;
};

struct ArmModel {
  std::string name;
  std::array<DHRow, kNumJoints> rows{};
  std::array<JointLimit, kNumJoints> limits = kDefaultLimits;

  /// Conservative reach radius: no pose farther than this from the base is attainable.
  double workspace_bound() const {
    double r = 0.0;
    for (const auto& row : rows) r += row.a + std::abs(row.d);
    return r;
  }

  /// Configuration with every joint at the middle of its range.
  JointConfig mid_config() const {
    JointConfig q;
    for (std::size_t i = 0; i < kNumJoints; ++i) q[i] = limits[i].mid();
    return q;
  }

  bool operator==(const ArmModel&) const = default;
};

/// Raised for malformed or invalid arm configuration documents.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::optional<std::size_t> joint = std::nullopt)
      : std::runtime_error(what), joint_(joint) {}

  /// Index of the offending joint, when the failure pertains to one.
  std::optional<std::size_t> joint() const { return joint_; }

 private:
  std::optional<std::size_t> joint_;
};

/// Hobby-arm geometry shipped as the default model ("default-6dof").
inline ArmModel default_arm() {
  ArmModel m;
  m.name = "default-6dof";
  constexpr std::array<double, kNumJoints> a{0.0, 0.105, 0.098, 0.0, 0.0, 0.0};
  constexpr std::array<double, kNumJoints> d{0.065, 0.0, 0.0, 0.055, 0.0, 0.045};
  constexpr std::array<double, kNumJoints> alpha_deg{90.0, 0.0, 0.0, 90.0, -90.0, 0.0};
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    m.rows[i] = DHRow{0.0, deg_to_rad(alpha_deg[i]), a[i], d[i]};
  }
  m.limits = kDefaultLimits;
  return m;
}

struct LimitViolation {
  std::size_t joint;
  double angle;  // degrees
  JointLimit limit;

  bool operator==(const LimitViolation&) const = default;
};

inline std::vector<LimitViolation> check_limits(const ArmModel& model, const JointConfig& q) {
  std::vector<LimitViolation> out;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (!model.limits[i].contains(q[i])) out.push_back({i, q[i], model.limits[i]});
  }
  return out;
}

inline JointConfig clamp_to_limits(const ArmModel& model, const JointConfig& q) {
  JointConfig out = q;
  for (std::size_t i = 0; i < kNumJoints; ++i) out[i] = model.limits[i].clamp(q[i]);
  return out;
}

namespace detail {

inline std::string joint_label(std::size_t i) { return "joint " + std::to_string(i); }

inline double require_number(const nlohmann::json& obj, const char* key, std::size_t joint) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(joint_label(joint) + ": missing field '" + key + "'", joint);
  if (!it->is_number()) throw ConfigError(joint_label(joint) + ": field '" + key + "' must be a number", joint);
  double v = it->get<double>();
  if (!std::isfinite(v)) throw ConfigError(joint_label(joint) + ": field '" + key + "' must be finite", joint);
  return v;
}

// Degree value whose conversion reproduces `rad` bit-for-bit, so that a saved
// model reloads field-identical. Falls back to the plain conversion.
inline double degrees_for_exact_reload(double rad) {
  const double guess = rad_to_deg(rad);
  double up = guess;
  double down = guess;
  for (int step = 0; step < 64; ++step) {
    if (deg_to_rad(up) == rad) return up;
    if (deg_to_rad(down) == rad) return down;
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
  }
  return guess;
}

inline void validate_angle_deg(double deg, const char* key, std::size_t joint) {
  if (!(deg > -180.0 && deg <= 180.0)) {
    throw ConfigError(joint_label(joint) + ": '" + key + "' must lie in (-180, 180]", joint);
  }
}

}  // namespace detail

/// Parses and validates an arm configuration document (JSON). Throws ConfigError.
inline ArmModel load_arm_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed arm configuration: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("arm configuration must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "name" && key != "joints") throw ConfigError("unknown top-level field '" + key + "'");
  }

  ArmModel model;
  auto name = doc.find("name");
  if (name == doc.end() || !name->is_string()) throw ConfigError("field 'name' must be a string");
  model.name = name->get<std::string>();

  auto joints = doc.find("joints");
  if (joints == doc.end() || !joints->is_array()) throw ConfigError("field 'joints' must be an array");
  if (joints->size() != kNumJoints) {
    throw ConfigError("expected exactly 6 joints, got " + std::to_string(joints->size()));
  }

  for (std::size_t i = 0; i < kNumJoints; ++i) {
    const auto& j = (*joints)[i];
    if (!j.is_object()) throw ConfigError(detail::joint_label(i) + ": must be an object", i);
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key != "theta_offset_deg" && key != "alpha_deg" && key != "a_m" && key != "d_m" && key != "limit_deg") {
        throw ConfigError(detail::joint_label(i) + ": unknown field '" + key + "'", i);
      }
    }
    const double theta_deg = detail::require_number(j, "theta_offset_deg", i);
    const double alpha_deg = detail::require_number(j, "alpha_deg", i);
    const double a = detail::require_number(j, "a_m", i);
    const double d = detail::require_number(j, "d_m", i);
    detail::validate_angle_deg(theta_deg, "theta_offset_deg", i);
    detail::validate_angle_deg(alpha_deg, "alpha_deg", i);
    if (a < 0.0) throw ConfigError(detail::joint_label(i) + ": link length 'a_m' must be >= 0", i);
    model.rows[i] = DHRow{deg_to_rad(theta_deg), deg_to_rad(alpha_deg), a, d};

    if (auto lim = j.find("limit_deg"); lim != j.end()) {
      if (!lim->is_array() || lim->size() != 2 || !(*lim)[0].is_number() || !(*lim)[1].is_number()) {
        throw ConfigError(detail::joint_label(i) + ": 'limit_deg' must be [min, max]", i);
      }
      const JointLimit limit{(*lim)[0].get<double>(), (*lim)[1].get<double>()};
      if (!(limit.min < limit.max)) {
        throw ConfigError(detail::joint_label(i) + ": limit min must be < max", i);
      }
      if (!(limit.min >= 0.0 && limit.max < 360.0)) {
        throw ConfigError(detail::joint_label(i) + ": limits must lie within [0, 360)", i);
      }
      model.limits[i] = limit;
    } else {
      model.limits[i] = kDefaultLimits[i];
    }
  }
  return model;
}

/// Serializes a model to the same document format load_arm_config reads.
inline std::string save_arm_config(const ArmModel& model) {
  nlohmann::json joints = nlohmann::json::array();
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    const auto& r = model.rows[i];
    joints.push_back({
        {"theta_offset_deg", detail::degrees_for_exact_reload(r.theta_offset)},
        {"alpha_deg", detail::degrees_for_exact_reload(r.alpha)},
        {"a_m", r.a},
        {"d_m", r.d},
        {"limit_deg", {model.limits[i].min, model.limits[i].max}},
    });
  }
  nlohmann::json doc{{"name", model.name}, {"joints", joints}};
  return doc.dump(2);
}

}  // namespace armkit
