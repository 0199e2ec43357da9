#pragma once

// Forward kinematics over a DH chain, pose <-> matrix conversion and the
// finite-difference Jacobian used by the IK solver.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "armkit/dh_model.hpp"

namespace armkit {

/// Homogeneous transform: rotation block R (0..2, 0..2), translation p (0..2, 3),
/// bottom row [0 0 0 1].
using Transform4 = Eigen::Matrix4d;
using Jacobian = Eigen::Matrix<double, 6, 6>;

/// Yaw-pitch-roll, intrinsic Z-Y-X, in degrees.
struct EulerZYX {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// Position in meters plus a unit quaternion kept in canonical form (w >= 0).
struct Pose6D {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Pose6D() = default;
  Pose6D(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) : position(p), orientation(canonical(q)) {}

  static Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
    q.normalize();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    return q;
  }

  static Pose6D from_euler_zyx(const Eigen::Vector3d& p, const EulerZYX& e) {
    const Eigen::Quaterniond q = Eigen::AngleAxisd(deg_to_rad(e.yaw), Eigen::Vector3d::UnitZ()) *
                                 Eigen::AngleAxisd(deg_to_rad(e.pitch), Eigen::Vector3d::UnitY()) *
                                 Eigen::AngleAxisd(deg_to_rad(e.roll), Eigen::Vector3d::UnitX());
    return Pose6D(p, q);
  }

  /// Euler angles of the orientation. At pitch = +-90 deg roll is reported as 0.
  EulerZYX euler_zyx() const {
    const Eigen::Matrix3d r = orientation.toRotationMatrix();
    const double s = std::clamp(-r(2, 0), -1.0, 1.0);
    EulerZYX e;
    e.pitch = rad_to_deg(std::asin(s));
    if (std::abs(s) < 1.0 - 1e-12) {
      e.yaw = rad_to_deg(std::atan2(r(1, 0), r(0, 0)));
      e.roll = rad_to_deg(std::atan2(r(2, 1), r(2, 2)));
    } else {
      e.pitch = s > 0.0 ? 90.0 : -90.0;
      e.yaw = rad_to_deg(std::atan2(-r(0, 1), r(1, 1)));
      e.roll = 0.0;
    }
    return e;
  }
};

/// Link transform for one DH row with `joint_angle` (radians) added to theta_offset.
inline Transform4 dh_transform(const DHRow& row, double joint_angle) {
  const double theta = joint_angle + row.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Transform4 t;
  t << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return t;
}

/// Base-to-tool transform for joint angles given in radians.
inline Transform4 forward_kinematics(const ArmModel& model, const Vector6d& q_rad) {
  Transform4 t = Transform4::Identity();
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    t = t * dh_transform(model.rows[i], q_rad[static_cast<Eigen::Index>(i)]);
  }
  t.row(3) << 0.0, 0.0, 0.0, 1.0;
  return t;
}

inline Transform4 forward_kinematics(const ArmModel& model, const JointConfig& q) {
  return forward_kinematics(model, q.radians());
}

inline Pose6D matrix_to_pose(const Transform4& t) {
  const Eigen::Matrix3d r = t.topLeftCorner<3, 3>();
  return Pose6D(t.topRightCorner<3, 1>(), Eigen::Quaterniond(r));
}

inline Transform4 pose_to_matrix(const Pose6D& pose) {
  Transform4 t = Transform4::Identity();
  t.topLeftCorner<3, 3>() = pose.orientation.normalized().toRotationMatrix();
  t.topRightCorner<3, 1>() = pose.position;
  return t;
}

/// Axis-angle vector (axis * angle, angle in [0, pi]) of a rotation matrix.
inline Eigen::Vector3d rotation_log(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v = q.vec();
  const double s = v.norm();
  if (s == 0.0) return Eigen::Vector3d::Zero();
  return (2.0 * std::atan2(s, q.w()) / s) * v;
}

/// Angle of the relative rotation between two orientations, radians.
inline double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return rotation_log(a * b.transpose()).norm();
}

/// max |R^T R - I| entry of the rotation block.
inline double orthonormality_error(const Transform4& t) {
  const Eigen::Matrix3d r = t.topLeftCorner<3, 3>();
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

inline bool is_rigid_transform(const Transform4& t, double tol = 1e-9) {
  const bool bottom = t(3, 0) == 0.0 && t(3, 1) == 0.0 && t(3, 2) == 0.0 && t(3, 3) == 1.0;
  const double det = t.topLeftCorner<3, 3>().determinant();
  return bottom && orthonormality_error(t) <= tol && std::abs(det - 1.0) <= tol;
}

inline constexpr double kJacobianStep = 1e-6;

/// Central-difference Jacobian of the tool pose. Rows 0..2 are linear velocity
/// (m/rad), rows 3..5 angular velocity in the base frame (rad/rad).
inline Jacobian numeric_jacobian(const ArmModel& model, const Vector6d& q_rad) {
  Jacobian j;
  for (Eigen::Index i = 0; i < 6; ++i) {
    Vector6d qp = q_rad, qm = q_rad;
    qp[i] += kJacobianStep;
    qm[i] -= kJacobianStep;
    const Transform4 tp = forward_kinematics(model, qp);
    const Transform4 tm = forward_kinematics(model, qm);
    const Eigen::Matrix3d rel = tp.topLeftCorner<3, 3>() * tm.topLeftCorner<3, 3>().transpose();
    j.block<3, 1>(0, i) = (tp.topRightCorner<3, 1>() - tm.topRightCorner<3, 1>()) / (2.0 * kJacobianStep);
    j.block<3, 1>(3, i) = rotation_log(rel) / (2.0 * kJacobianStep);
  }
  return j;
}

inline Jacobian numeric_jacobian(const ArmModel& model, const JointConfig& q) {
  return numeric_jacobian(model, q.radians());
}

/// Row-major, comma-separated, 6 significant digits; one matrix row per line.
template <typename Derived>
std::string format_matrix(const Eigen::MatrixBase<Derived>& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      if (v == 0.0) v = 0.0;  // drop negative zero
      std::snprintf(buf, sizeof(buf), "%.6g", v);
      if (c > 0) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace armkit
