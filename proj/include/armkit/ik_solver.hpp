#pragma once

// Damped least-squares inverse kinematics with joint-limit projection and
// deterministic random restarts.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "armkit/dh_model.hpp"
#include "armkit/kinematics.hpp"

namespace armkit {

struct IkSettings {
  double position_tolerance = 1e-4;     // m
  double orientation_tolerance = 1e-3;  // rad
  int max_iterations = 200;
  double damping = 1e-2;
  int restarts = 8;
  double step_limit = 0.3;  // rad per iteration, per joint

  void validate() const {
    if (!(position_tolerance > 0.0) || !(orientation_tolerance > 0.0)) {
      throw std::invalid_argument("IK tolerances must be positive");
    }
    if (max_iterations < 1) throw std::invalid_argument("IK max_iterations must be >= 1");
    if (restarts < 1) throw std::invalid_argument("IK restarts must be >= 1");
    if (!(damping >= 0.0)) throw std::invalid_argument("IK damping must be >= 0");
    if (!(step_limit > 0.0)) throw std::invalid_argument("IK step_limit must be positive");
  }
};

struct IkResult {
  JointConfig solution;
  int iterations = 0;
  double final_position_error = 0.0;     // m
  double final_orientation_error = 0.0;  // rad; always 0 for position-only solves
  int restart_index = 0;                 // 0 = the caller's seed, k = k-th random restart

  bool operator==(const IkResult&) const = default;
};

enum class PlanningFailure { unreachable, no_convergence };

/// Unreachable or NoConvergence, optionally tagged with the plan waypoint that failed.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(PlanningFailure kind, const std::string& what, std::optional<IkResult> best = std::nullopt,
                std::string waypoint = {})
      : std::runtime_error(what), kind_(kind), best_(std::move(best)), waypoint_(std::move(waypoint)) {}

  PlanningFailure kind() const { return kind_; }
  /// Closest attempt found, for NoConvergence.
  const std::optional<IkResult>& best() const { return best_; }
  const std::string& waypoint() const { return waypoint_; }

  PlanningError at_waypoint(const std::string& name) const {
    return PlanningError(kind_, name + ": " + what(), best_, name);
  }

 private:
  PlanningFailure kind_;
  std::optional<IkResult> best_;
  std::string waypoint_;
};

inline constexpr std::uint64_t kRestartSeed = 0xA5C0FFEE;

/// Translation error (target - current) followed by the axis-angle of target.R * current.R^T.
inline Vector6d pose_error(const Transform4& current, const Transform4& target) {
  Vector6d e;
  e.head<3>() = target.topRightCorner<3, 1>() - current.topRightCorner<3, 1>();
  e.tail<3>() = rotation_log(target.topLeftCorner<3, 3>() * current.topLeftCorner<3, 3>().transpose());
  return e;
}

namespace detail {

// Residual dimension 6 solves full pose, 3 solves position only.
template <int Rows>
struct IkTarget {
  Transform4 pose;

  Eigen::Matrix<double, Rows, 1> residual(const Transform4& current) const {
    if constexpr (Rows == 6) {
      return pose_error(current, pose);
    } else {
      return pose.topRightCorner<3, 1>() - current.topRightCorner<3, 1>();
    }
  }
};

template <int Rows>
JointConfig dls_step(const ArmModel& model, const IkTarget<Rows>& target, const JointConfig& q, double damping,
                     double step_limit) {
  const Vector6d q_rad = q.radians();
  const Eigen::Matrix<double, Rows, 1> e = target.residual(forward_kinematics(model, q_rad));
  const Eigen::Matrix<double, Rows, 6> jac = numeric_jacobian(model, q_rad).template topRows<Rows>();
  Eigen::Matrix<double, Rows, Rows> jjt = jac * jac.transpose();
  jjt.diagonal().array() += damping * damping;
  Vector6d dq = jac.transpose() * jjt.colPivHouseholderQr().solve(e);
  const double largest = dq.cwiseAbs().maxCoeff();
  if (largest > step_limit) dq *= step_limit / largest;
  JointConfig next;
  for (std::size_t i = 0; i < kNumJoints; ++i) next[i] = q[i] + rad_to_deg(dq[static_cast<Eigen::Index>(i)]);
  return clamp_to_limits(model, next);
}

struct Attempt {
  IkResult result;
  bool converged = false;
  double score = 0.0;  // worst residual relative to its tolerance
};

template <int Rows>
Attempt run_attempt(const ArmModel& model, const IkTarget<Rows>& target, const JointConfig& seed,
                    const IkSettings& s, int restart_index) {
  JointConfig q = clamp_to_limits(model, seed);
  Attempt a;
  a.result.restart_index = restart_index;
  for (int it = 0;; ++it) {
    const Eigen::Matrix<double, Rows, 1> e = target.residual(forward_kinematics(model, q));
    const double pos = e.template head<3>().norm();
    double ori = 0.0;
    if constexpr (Rows == 6) ori = e.template tail<3>().norm();
    a.result.solution = q;
    a.result.iterations = it;
    a.result.final_position_error = pos;
    a.result.final_orientation_error = ori;
    a.score = std::max(pos / s.position_tolerance, ori / s.orientation_tolerance);
    if (pos <= s.position_tolerance && ori <= s.orientation_tolerance) {
      a.converged = true;
      return a;
    }
    if (it == s.max_iterations) return a;
    const JointConfig next = dls_step(model, target, q, s.damping, s.step_limit);
    if (next == q) return a;  // pinned against limits or at a stationary point
    q = next;
  }
}

inline double joint_distance(const JointConfig& a, const JointConfig& b) {
  return (a.radians() - b.radians()).norm();
}

// Uniform doubles in [0, 1) straight from the engine bits, so restart seeds
// do not depend on the standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <int Rows>
IkResult solve(const ArmModel& model, const IkTarget<Rows>& target, const JointConfig& seed,
               const IkSettings& settings) {
  settings.validate();
  const double reach = target.pose.template topRightCorner<3, 1>().norm();
  const double bound = model.workspace_bound();
  if (reach > bound) {
    throw PlanningError(PlanningFailure::unreachable, "target at distance " + std::to_string(reach) +
                                                          " m exceeds workspace bound " + std::to_string(bound) +
                                                          " m");
  }

  Attempt first = run_attempt(model, target, seed, settings, 0);
  if (first.converged) return first.result;

  std::mt19937_64 rng(kRestartSeed);
  Attempt best_fail = first;
  std::optional<Attempt> best_ok;
  double best_ok_dist = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= settings.restarts; ++k) {
    JointConfig start;
    for (std::size_t i = 0; i < kNumJoints; ++i) {
      const JointLimit& lim = model.limits[i];
      start[i] = lim.min + unit_uniform(rng) * (lim.max - lim.min);
    }
    Attempt a = run_attempt(model, target, start, settings, k);
    if (a.converged) {
      const double dist = joint_distance(a.result.solution, seed);
      if (dist < best_ok_dist) {
        best_ok_dist = dist;
        best_ok = a;
      }
    } else if (a.score < best_fail.score) {
      best_fail = a;
    }
  }
  if (best_ok) return best_ok->result;
  throw PlanningError(PlanningFailure::no_convergence,
                      "no convergence after " + std::to_string(settings.restarts) +
                          " restarts (best position error " + std::to_string(best_fail.result.final_position_error) +
                          " m, orientation error " + std::to_string(best_fail.result.final_orientation_error) +
                          " rad)",
                      best_fail.result);
}

}  // namespace detail

/// Joint angles realizing `target`. Returned solutions always satisfy the joint
/// limits. Throws PlanningError (unreachable / no_convergence).
inline IkResult solve_ik(const ArmModel& model, const Pose6D& target, const JointConfig& seed,
                         const IkSettings& settings = {}) {
  return detail::solve(model, detail::IkTarget<6>{pose_to_matrix(target)}, seed, settings);
}

/// As solve_ik, leaving the tool orientation free.
inline IkResult solve_ik_position_only(const ArmModel& model, const Eigen::Vector3d& target_position,
                                       const JointConfig& seed, const IkSettings& settings = {}) {
  Transform4 t = Transform4::Identity();
  t.topRightCorner<3, 1>() = target_position;
  return detail::solve(model, detail::IkTarget<3>{t}, seed, settings);
}

/// A single damped least-squares update toward `target`, limits applied.
inline JointConfig ik_step(const ArmModel& model, const Transform4& target, const JointConfig& q, double damping,
                           double step_limit) {
  return detail::dls_step(model, detail::IkTarget<6>{target}, q, damping, step_limit);
}

}  // namespace armkit
