#include "gscout/spatial.hpp"

#include <cmath>

namespace gscout::spatial {

double wrap_angle(double a) {
  double w = std::fmod(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  if (w > kPi) w -= 2.0 * kPi;
  return w;
}

Transform Transform::rot_x(double a) {
  Transform t;
  t.rotation = Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
  return t;
}

Transform Transform::rot_y(double a) {
  Transform t;
  t.rotation = Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix();
  return t;
}

Transform Transform::rot_z(double a) {
  Transform t;
  t.rotation = Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
  return t;
}

Transform Transform::operator*(const Transform& rhs) const {
  Transform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

Vec3 Transform::operator*(const Vec3& p) const {
  return rotation * p + translation;
}

Transform Transform::inverse() const {
  Transform out;
  out.rotation = rotation.transpose();
  out.translation = -(rotation.transpose() * translation);
  return out;
}

bool Transform::is_rigid(double tol) const {
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Mat3 rpy_to_rotation(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 rotation_to_rpy(const Mat3& r) {
  const double sp = -r(2, 0);
  const double pitch = std::asin(std::clamp(sp, -1.0, 1.0));
  if (std::abs(sp) > 1.0 - 1e-12) {
    // Pitch singularity: only roll+-yaw is observable; report roll = 0.
    const double yaw = std::atan2(-r(0, 1), r(1, 1));
    return {0.0, pitch, yaw};
  }
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

Mat3 so3_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Mat3 skew;
    skew << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Mat3::Identity() + skew;
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Transform BodyState::to_transform() const {
  return {rpy_to_rotation(attitude), position};
}

BodyState BodyState::from_transform(const Transform& t, Frame frame) {
  BodyState s;
  s.position = t.translation;
  s.attitude = rotation_to_rpy(t.rotation);
  s.frame = frame;
  return s;
}

ArmModel ArmModel::planar_default() {
  ArmModel m;
  m.link_offsets[0] = Transform::translate({0.15, 0.0, 0.0});
  m.link_offsets[1] = Transform::translate({0.15, 0.0, 0.0});
  m.link_offsets[2] = Transform::translate({0.10, 0.0, 0.0}) * Transform::rot_y(kPi / 2.0);
  return m;
}

MountingConfig MountingConfig::defaults() {
  MountingConfig m;
  Mat3 r;
  // Columns are the arm-base axes expressed in the body frame:
  // x0 = xb, y0 = zb, z0 = -yb (arm plane vertical, joints pitch the camera).
  r << 1, 0, 0,
       0, 0, -1,
       0, 1, 0;
  m.body_to_arm_base = Transform{r, Vec3(0.0, 0.0, -0.05)};
  m.ee_to_camera = Transform::identity();
  return m;
}

Vec7 ReducedConfig::to_vector() const {
  Vec7 v;
  v << x, y, z, psi, q1, q2, q3;
  return v;
}

ReducedConfig ReducedConfig::from_vector(const Vec7& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

Transform compose_chain(const Transform& t_wb, const Transform& t_b0,
                        const Transform& t_0ee) {
  return t_wb * t_b0 * t_0ee;
}

Transform arm_fk(const ArmModel& model, const ArmConfig& cfg) {
  Transform t = Transform::identity();
  for (int j = 0; j < 3; ++j) {
    if (cfg.q[j] < model.joint_min[j] || cfg.q[j] > model.joint_max[j]) {
      throw JointLimitError("arm_fk: joint " + std::to_string(j + 1) +
                            " out of limits: q=" + std::to_string(cfg.q[j]));
    }
    t = t * Transform::rot_z(cfg.q[j]) * model.link_offsets[j];
  }
  return t;
}

std::pair<BodyState, ArmConfig> reduced_to_pose(const ReducedConfig& q) {
  BodyState body;
  body.position = {q.x, q.y, q.z};
  body.attitude = {0.0, 0.0, wrap_angle(q.psi)};
  ArmConfig arm;
  arm.q = {q.q1, q.q2, q.q3};
  return {body, arm};
}

ReducedConfig pose_to_reduced(const BodyState& body, const ArmConfig& arm) {
  ReducedConfig q;
  q.x = body.position.x();
  q.y = body.position.y();
  q.z = body.position.z();
  q.psi = wrap_angle(body.attitude.z());
  q.q1 = arm.q[0];
  q.q2 = arm.q[1];
  q.q3 = arm.q[2];
  return q;
}

Vec3 euler_rates_to_body_rates(const Vec3& rpy, const Vec3& rpy_rates) {
  const double roll = rpy.x(), pitch = rpy.y();
  if (std::abs(std::cos(pitch)) < 1e-6) {
    throw SingularityError("euler_rates_to_body_rates: gimbal lock at pitch=" +
                           std::to_string(pitch));
  }
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double dr = rpy_rates.x(), dp = rpy_rates.y(), dy = rpy_rates.z();
  return {dr - dy * sp,
          dp * cr + dy * cp * sr,
          -dp * sr + dy * cp * cr};
}

Vec3 body_rates_to_euler_rates(const Vec3& rpy, const Vec3& pqr) {
  const double roll = rpy.x(), pitch = rpy.y();
  const double cp = std::cos(pitch);
  if (std::abs(cp) < 1e-6) {
    throw SingularityError("body_rates_to_euler_rates: gimbal lock at pitch=" +
                           std::to_string(pitch));
  }
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double tp = std::tan(pitch);
  const double p = pqr.x(), q = pqr.y(), r = pqr.z();
  return {p + q * sr * tp + r * cr * tp,
          q * cr - r * sr,
          q * sr / cp + r * cr / cp};
}

Transform ee_pose(const ReducedConfig& q, const ArmModel& model,
                  const MountingConfig& mount) {
  auto [body, arm] = reduced_to_pose(q);
  return compose_chain(body.to_transform(), mount.body_to_arm_base,
                       arm_fk(model, arm));
}

Transform camera_pose(const ReducedConfig& q, const ArmModel& model,
                      const MountingConfig& mount) {
  return ee_pose(q, model, mount) * mount.ee_to_camera;
}

}  // namespace gscout::spatial
