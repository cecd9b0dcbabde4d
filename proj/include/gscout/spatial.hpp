#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <utility>

namespace gscout::spatial {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec7 = Eigen::Matrix<double, 7, 1>;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown when a rate mapping is evaluated at a representation singularity.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a joint command violates the arm's configured limits.
struct JointLimitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Rigid transform (rotation + translation). Composition follows the usual
/// chain convention: (A * B) maps a point from B's frame through A's frame.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform translate(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Transform rot_x(double a);
  static Transform rot_y(double a);
  static Transform rot_z(double a);

  Transform operator*(const Transform& rhs) const;
  Vec3 operator*(const Vec3& p) const;
  Transform inverse() const;

  /// Orthonormality + unit determinant within tol.
  bool is_rigid(double tol = 1e-9) const;
};

/// Rotation from ZYX intrinsic Euler angles rpy = (roll, pitch, yaw):
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rpy_to_rotation(const Vec3& rpy);

/// Inverse of rpy_to_rotation; pitch in [-pi/2, pi/2]. At the pitch
/// singularity roll is taken as 0.
Vec3 rotation_to_rpy(const Mat3& r);

/// Matrix exponential on SO(3) (Rodrigues).
Mat3 so3_exp(const Vec3& w);

enum class Frame { World, Body, ArmBase, EndEffector };

/// 6-DoF pose: position plus ZYX Euler attitude, tagged with the frame the
/// pose is expressed in.
struct BodyState {
  Vec3 position = Vec3::Zero();
  Vec3 attitude = Vec3::Zero();  // roll, pitch, yaw
  Frame frame = Frame::World;

  Transform to_transform() const;
  static BodyState from_transform(const Transform& t, Frame frame = Frame::World);
};

/// Fixed geometry of the 3R arm. Each joint rotates about its local z axis
/// and is followed by a constant link offset; joint angles are limited.
struct ArmModel {
  std::array<Transform, 3> link_offsets;
  std::array<double, 3> joint_min{{-2.9, -2.9, -2.9}};
  std::array<double, 3> joint_max{{2.9, 2.9, 2.9}};

  /// Two 0.15 m links plus a 0.10 m tool segment whose offset carries a
  /// fixed Ry(pi/2) so the end-effector z axis points along the reach
  /// direction (the optical axis of an attached camera).
  static ArmModel planar_default();
};

struct ArmConfig {
  std::array<double, 3> q{{0.0, 0.0, 0.0}};
};

/// Transforms tying the arm base and camera into the body chain.
struct MountingConfig {
  Transform body_to_arm_base;  // T_b^0
  Transform ee_to_camera;      // camera rigidly attached to the end effector

  /// Arm base 5 cm under the body origin, rotated so the arm plane is
  /// vertical (x0 = xb, y0 = zb, z0 = -yb): joint angles sum to camera
  /// pitch. Camera coincides with the end effector.
  static MountingConfig defaults();
};

/// Reduced planning configuration (x, y, z, yaw, q1, q2, q3): the attitude
/// is flat apart from yaw, roll/pitch being reserved for vehicle control.
struct ReducedConfig {
  double x = 0, y = 0, z = 0;
  double psi = 0;
  double q1 = 0, q2 = 0, q3 = 0;

  Vec7 to_vector() const;
  static ReducedConfig from_vector(const Vec7& v);
};

/// One sample of a time-parameterized trajectory in the reduced space.
struct TrajectoryPoint {
  Vec7 position = Vec7::Zero();
  Vec7 velocity = Vec7::Zero();
  Vec7 acceleration = Vec7::Zero();
};

/// T_w^ee = T_w^b * T_b^0 * T_0^ee.
Transform compose_chain(const Transform& t_wb, const Transform& t_b0,
                        const Transform& t_0ee);

/// Forward kinematics of the 3R chain: product of Rz(q_i) * offset_i.
/// Throws JointLimitError when q violates the model limits.
Transform arm_fk(const ArmModel& model, const ArmConfig& cfg);

std::pair<BodyState, ArmConfig> reduced_to_pose(const ReducedConfig& q);
ReducedConfig pose_to_reduced(const BodyState& body, const ArmConfig& arm);

/// Body angular velocity (p, q, r) from ZYX Euler angles and their rates.
/// Throws SingularityError when |cos(pitch)| < 1e-6 (gimbal lock).
Vec3 euler_rates_to_body_rates(const Vec3& rpy, const Vec3& rpy_rates);

/// Inverse mapping; throws SingularityError near pitch = +-pi/2.
Vec3 body_rates_to_euler_rates(const Vec3& rpy, const Vec3& pqr);

/// World pose of the end effector for a reduced configuration.
Transform ee_pose(const ReducedConfig& q, const ArmModel& model,
                  const MountingConfig& mount);

/// World pose of the camera (end effector pose times the camera offset).
Transform camera_pose(const ReducedConfig& q, const ArmModel& model,
                      const MountingConfig& mount);

}  // namespace gscout::spatial
