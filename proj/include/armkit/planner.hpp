#pragma once

// Pick-and-place planning: grasp waypoints above the object and the place
// pose, joint-space interpolation between their IK solutions, and encoding
// of the result as servo frames.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "armkit/dh_model.hpp"
#include "armkit/ik_solver.hpp"
#include "armkit/kinematics.hpp"
#include "armkit/servo_frame.hpp"

namespace armkit {

enum class WaypointId { home, pre_grasp, grasp, lift, pre_place, place, retreat };

inline constexpr std::size_t kNumWaypoints = 7;

inline constexpr std::array<std::string_view, kNumWaypoints> kWaypointNames{
    "home", "pre_grasp", "grasp", "lift", "pre_place", "place", "retreat"};

inline constexpr std::string_view to_string(WaypointId id) { return kWaypointNames[static_cast<std::size_t>(id)]; }

/// Which residual the waypoint IK drives to zero. position_only leaves the tool
/// orientation free; the waypoint orientations are then nominal.
enum class OrientationMode { full_pose, position_only };

struct Waypoint {
  WaypointId id = WaypointId::home;
  Pose6D pose;
  Gripper gripper = Gripper::open;
};

struct GraspPlan {
  std::array<Waypoint, kNumWaypoints> waypoints;
  double clearance = 0.05;
  OrientationMode orientation = OrientationMode::full_pose;

  const Waypoint& operator[](WaypointId id) const { return waypoints[static_cast<std::size_t>(id)]; }
};

struct PlanSettings {
  double clearance = 0.05;  // m
  IkSettings ik;
  OrientationMode orientation = OrientationMode::full_pose;
  std::optional<JointConfig> home;  // defaults to the mid-range configuration
};

/// Tool z-axis pointing straight down (anti-parallel to world z), rotated by yaw (radians).
inline Eigen::Quaterniond top_down_orientation(double yaw = 0.0) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitX()));
}

/// IK for one waypoint in the requested residual mode.
inline IkResult solve_waypoint(const ArmModel& model, const Pose6D& pose, OrientationMode mode,
                               const JointConfig& seed, const IkSettings& ik) {
  return mode == OrientationMode::full_pose ? solve_ik(model, pose, seed, ik)
                                            : solve_ik_position_only(model, pose.position, seed, ik);
}

namespace detail {

inline Pose6D raised(const Pose6D& p, double dz) {
  Pose6D out = p;
  out.position.z() += dz;
  return out;
}

inline void require_in_bound(const ArmModel& model, const Pose6D& pose, WaypointId id) {
  const double r = pose.position.norm();
  if (r > model.workspace_bound()) {
    throw PlanningError(PlanningFailure::unreachable,
                        std::string(to_string(id)) + ": target at distance " + std::to_string(r) +
                            " m exceeds workspace bound " + std::to_string(model.workspace_bound()) + " m",
                        std::nullopt, std::string(to_string(id)));
  }
}

}  // namespace detail

/// Builds the seven-waypoint plan and checks that IK solves every waypoint.
/// Throws PlanningError naming the first waypoint that fails.
inline GraspPlan plan_pick_place(const ArmModel& model, const Pose6D& object_pose, const Pose6D& place_pose,
                                 const PlanSettings& settings = {}) {
  if (!(settings.clearance >= 0.0)) throw std::invalid_argument("clearance must be >= 0");
  settings.ik.validate();
  detail::require_in_bound(model, object_pose, WaypointId::grasp);
  detail::require_in_bound(model, place_pose, WaypointId::place);

  const JointConfig home = settings.home.value_or(model.mid_config());
  const double c = settings.clearance;

  GraspPlan plan;
  plan.clearance = c;
  plan.orientation = settings.orientation;
  plan.waypoints = {{
      {WaypointId::home, matrix_to_pose(forward_kinematics(model, home)), Gripper::open},
      {WaypointId::pre_grasp, detail::raised(object_pose, c), Gripper::open},
      {WaypointId::grasp, object_pose, Gripper::closed},
      {WaypointId::lift, detail::raised(object_pose, c), Gripper::closed},
      {WaypointId::pre_place, detail::raised(place_pose, c), Gripper::closed},
      {WaypointId::place, place_pose, Gripper::open},
      {WaypointId::retreat, detail::raised(place_pose, c), Gripper::open},
  }};

  JointConfig seed = home;
  for (const auto& wp : plan.waypoints) {
    try {
      seed = solve_waypoint(model, wp.pose, plan.orientation, seed, settings.ik).solution;
    } catch (const PlanningError& e) {
      throw e.at_waypoint(std::string(to_string(wp.id)));
    }
  }
  return plan;
}

struct Knot {
  JointConfig q;
  Gripper gripper = Gripper::open;
};

struct Trajectory {
  std::vector<Knot> knots;
};

inline constexpr double kDefaultMaxStepDeg = 2.0;

namespace detail {

inline double max_joint_gap(const JointConfig& a, const JointConfig& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < kNumJoints; ++i) m = std::max(m, std::abs(b[i] - a[i]));
  return m;
}

// Appends the segment (from, to]: ceil(gap / max_step) - 1 interpolated knots and then `to`.
inline void append_segment(const ArmModel& model, std::vector<Knot>& knots, const JointConfig& from,
                           const JointConfig& to, Gripper gripper, double max_step) {
  const double gap = max_joint_gap(from, to);
  if (gap == 0.0) return;
  const auto n = static_cast<long>(std::ceil(gap / max_step));
  for (long j = 1; j < n; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(n);
    JointConfig q;
    for (std::size_t i = 0; i < kNumJoints; ++i) q[i] = from[i] + t * (to[i] - from[i]);
    knots.push_back({clamp_to_limits(model, q), gripper});
  }
  knots.push_back({to, gripper});
}

}  // namespace detail

/// Solves each waypoint seeded with the previous solution and interpolates in
/// joint space so no joint moves more than max_step degrees between knots.
/// Gripper changes get their own zero-motion knot.
inline Trajectory plan_to_trajectory(const ArmModel& model, const GraspPlan& plan, const JointConfig& seed,
                                     double max_step = kDefaultMaxStepDeg, const IkSettings& ik = {}) {
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  Trajectory traj;
  JointConfig prev = clamp_to_limits(model, seed);
  bool first = true;
  Gripper gripper = Gripper::open;
  for (const auto& wp : plan.waypoints) {
    JointConfig q;
    try {
      q = solve_waypoint(model, wp.pose, plan.orientation, prev, ik).solution;
    } catch (const PlanningError& e) {
      throw e.at_waypoint(std::string(to_string(wp.id)));
    }
    if (first) {
      traj.knots.push_back({q, wp.gripper});
      gripper = wp.gripper;
      first = false;
    } else {
      detail::append_segment(model, traj.knots, prev, q, gripper, max_step);
      if (wp.gripper != gripper) {
        traj.knots.push_back({q, wp.gripper});
        gripper = wp.gripper;
      }
    }
    prev = q;
  }
  return traj;
}

/// One frame per knot, sequence numbers from 0, angles rounded half up to centidegrees.
inline std::vector<ServoFrame> encode_servo_frames(const Trajectory& traj) {
  std::vector<ServoFrame> frames;
  frames.reserve(traj.knots.size());
  std::uint64_t seq = 0;
  for (const auto& k : traj.knots) {
    ServoFrame f;
    f.seq = seq++;
    for (std::size_t i = 0; i < kNumJoints; ++i) f.centidegrees[i] = to_centidegrees(k.q[i]);
    f.gripper = k.gripper;
    frames.push_back(f);
  }
  return frames;
}

}  // namespace armkit
