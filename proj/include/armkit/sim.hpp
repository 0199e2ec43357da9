#pragma once

// Deterministic servo-bus simulator: constant-rate servos driven by servo
// frames, a binary gripper, and a single graspable object.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "armkit/dh_model.hpp"
#include "armkit/kinematics.hpp"
#include "armkit/planner.hpp"
#include "armkit/servo_frame.hpp"

namespace armkit {

struct SimConfig {
  double rate = 300.0;           // deg/s per servo
  double tick = 0.01;            // s
  double capture_radius = 0.01;  // m

  void validate() const {
    if (!(rate > 0.0) || !(tick > 0.0) || !(capture_radius > 0.0)) {
      throw std::invalid_argument("simulator rate, tick and capture radius must be positive");
    }
  }
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimState {
  JointConfig current;
  JointConfig target;
  Gripper gripper = Gripper::open;            // actual jaw state
  Gripper commanded_gripper = Gripper::open;  // last frame's request
  double elapsed = 0.0;                       // s
  std::optional<Transform4> object;           // world pose of the object, if one is in the scene
  bool attached = false;
  Transform4 object_in_tool = Transform4::Identity();  // valid while attached
  std::optional<std::uint64_t> last_seq;
};

inline Transform4 rigid_inverse(const Transform4& t) {
  Transform4 inv = Transform4::Identity();
  const Eigen::Matrix3d rt = t.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * t.topRightCorner<3, 1>();
  return inv;
}

/// Resting state at `start`, optionally with an object placed at `object`.
inline SimState initial_state(const ArmModel& model, const JointConfig& start,
                              const std::optional<Pose6D>& object = std::nullopt) {
  if (!check_limits(model, start).empty()) throw SimError("initial configuration violates joint limits");
  SimState s;
  s.current = start;
  s.target = start;
  if (object) s.object = pose_to_matrix(*object);
  return s;
}

/// Latches a frame's targets. Joints move only in sim_step.
inline SimState apply_frame(const SimState& state, const ArmModel& model, const ServoFrame& frame) {
  if (state.last_seq && frame.seq <= *state.last_seq) {
    throw SimError("out-of-order frame: seq " + std::to_string(frame.seq) + " after " +
                   std::to_string(*state.last_seq));
  }
  SimState next = state;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    const double deg = static_cast<double>(frame.centidegrees[i]) / 100.0;
    if (!model.limits[i].contains(deg)) {
      throw SimError("frame " + std::to_string(frame.seq) + ": joint " + std::to_string(i) + " angle " +
                     std::to_string(deg) + " outside limits");
    }
    next.target[i] = deg;
  }
  next.commanded_gripper = frame.gripper;
  next.last_seq = frame.seq;
  return next;
}

inline SimState apply_frame(const SimState& state, const ArmModel& model, std::string_view line) {
  return apply_frame(state, model, parse_servo_frame(line));
}

/// Advances time by dt: gripper transitions happen at once, joints slew toward
/// their targets at the rate limit without overshoot, and an attached object
/// rides along with the tool frame.
inline SimState sim_step(const SimState& state, const ArmModel& model, const SimConfig& config, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
  SimState s = state;
  s.elapsed += dt;
  if (dt == 0.0) return s;

  if (s.gripper != s.commanded_gripper) {
    if (s.commanded_gripper == Gripper::closed && s.object && !s.attached) {
      const Transform4 tool = forward_kinematics(model, s.current);
      const double dist = (tool.topRightCorner<3, 1>() - s.object->topRightCorner<3, 1>()).norm();
      if (dist <= config.capture_radius) {
        s.attached = true;
        s.object_in_tool = rigid_inverse(tool) * *s.object;
      }
    } else if (s.commanded_gripper == Gripper::open && s.attached) {
      s.attached = false;
    }
    s.gripper = s.commanded_gripper;
  }

  const double max_move = config.rate * dt;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    const double gap = s.target[i] - s.current[i];
    if (std::abs(gap) <= max_move) {
      s.current[i] = s.target[i];
    } else {
      s.current[i] += gap > 0.0 ? max_move : -max_move;
    }
  }

  if (s.attached) s.object = forward_kinematics(model, s.current) * s.object_in_tool;
  return s;
}

inline bool settled(const SimState& s) { return s.current == s.target && s.gripper == s.commanded_gripper; }

/// Settle-then-send execution: each frame is applied, then the simulator ticks
/// until every joint and the gripper have reached the request.
inline SimState execute_frames(SimState state, const ArmModel& model, const SimConfig& config,
                               const std::vector<ServoFrame>& frames) {
  config.validate();
  for (const auto& f : frames) {
    state = apply_frame(state, model, f);
    do {
      state = sim_step(state, model, config, config.tick);
    } while (!settled(state));
  }
  return state;
}

struct CycleReport {
  bool success = false;
  std::optional<Pose6D> final_object_pose;
  std::size_t frames_sent = 0;
  double sim_time = 0.0;
  JointConfig final_joints;

  bool operator==(const CycleReport& o) const {
    auto same_pose = [](const std::optional<Pose6D>& a, const std::optional<Pose6D>& b) {
      if (a.has_value() != b.has_value()) return false;
      return !a || (a->position == b->position && a->orientation.coeffs() == b->orientation.coeffs());
    };
    return success == o.success && same_pose(final_object_pose, o.final_object_pose) &&
           frames_sent == o.frames_sent && sim_time == o.sim_time && final_joints == o.final_joints;
  }
};

inline nlohmann::json to_json(const CycleReport& r) {
  nlohmann::json j;
  j["success"] = r.success;
  j["frames_sent"] = r.frames_sent;
  j["sim_time_s"] = r.sim_time;
  j["final_joints_deg"] = r.final_joints.degrees();
  if (r.final_object_pose) {
    const auto& p = *r.final_object_pose;
    const auto e = p.euler_zyx();
    j["final_object_pose"] = {
        {"position_m", {p.position.x(), p.position.y(), p.position.z()}},
        {"quaternion_wxyz", {p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()}},
        {"euler_zyx_deg", {e.yaw, e.pitch, e.roll}},
    };
  } else {
    j["final_object_pose"] = nullptr;
  }
  return j;
}

struct PickSettings {
  PlanSettings plan;
  double max_step = kDefaultMaxStepDeg;  // deg
  double success_radius = 0.002;         // m
};

/// Plan, encode and execute a full pick-and-place in the simulator. Planning
/// failures propagate as PlanningError before any frame is sent.
inline CycleReport run_pick_cycle(const ArmModel& model, const Pose6D& object_pose, const Pose6D& place_pose,
                                  const PickSettings& settings = {}, const SimConfig& config = {}) {
  config.validate();
  const JointConfig home = settings.plan.home.value_or(model.mid_config());
  const GraspPlan plan = plan_pick_place(model, object_pose, place_pose, settings.plan);
  const Trajectory traj = plan_to_trajectory(model, plan, home, settings.max_step, settings.plan.ik);
  const std::vector<ServoFrame> frames = encode_servo_frames(traj);

  SimState state = initial_state(model, home, object_pose);
  state = execute_frames(std::move(state), model, config, frames);

  CycleReport report;
  report.frames_sent = frames.size();
  report.sim_time = state.elapsed;
  report.final_joints = state.current;
  report.final_object_pose = matrix_to_pose(*state.object);
  report.success =
      (report.final_object_pose->position - place_pose.position).norm() <= settings.success_radius;
  return report;
}

}  // namespace armkit
