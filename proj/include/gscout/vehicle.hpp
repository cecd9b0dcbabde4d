#pragma once

#include "gscout/scanplan.hpp"
#include "gscout/spatial.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace gscout::vehicle {

using spatial::Mat3;
using spatial::Vec3;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec9 = Eigen::Matrix<double, 9, 1>;

struct InfeasibleCommand : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrackingError : std::runtime_error {
  double t;
  TrackingError(const std::string& msg, double t_) : std::runtime_error(msg), t(t_) {}
};

struct VehicleParams {
  double mass = 2.0;                       // kg, including the arm
  Vec3 inertia{0.02, 0.02, 0.035};         // body-frame diagonal, kg m^2
  std::array<double, 3> joint_inertia{{0.008, 0.006, 0.004}};
  std::array<double, 3> joint_gravity{{0.0, 0.0, 0.0}};  // torque = c*cos(sum q)
  double k_f = 1.0e-5;                     // thrust coefficient, N s^2
  double k_m = 2.0e-7;                     // drag torque coefficient, N m s^2
  double rotor_arm = 0.25;                 // m
  double rotor_speed_max = 1100.0;         // rad/s
  double gravity = 9.81;
};

enum class RotorLayout { Plus, Cross };

/// Maps squared rotor speeds to the collective thrust and body moments:
/// u = K * omega^2.
struct AllocationMatrix {
  Mat4 k;
  Mat4 k_inv;
};

/// Builds the allocation from rotor positions and spin directions. Plus:
/// rotors on the body axes, Cross: rotated 45 degrees; alternating spin.
AllocationMatrix build_allocation(const VehicleParams& p,
                                  RotorLayout layout = RotorLayout::Plus);

struct RotorCommand {
  Vec4 omega;       // rad/s, clamped to [0, rotor_speed_max]
  bool saturated = false;
};

/// Inverts the allocation. Throws InfeasibleCommand when the demanded wrench
/// requires a negative squared rotor speed; clamping at the speed ceiling
/// sets the saturation flag instead.
RotorCommand allocate_inverse(const AllocationMatrix& alloc, const Vec4& u,
                              const VehicleParams& p);

/// Full simulation state. Attitude is carried as a rotation matrix (the
/// Euler angles are derived on demand), angular velocity in the body frame.
struct FullState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  std::array<double, 3> q{{0.0, 0.0, 0.0}};
  std::array<double, 3> qd{{0.0, 0.0, 0.0}};
  double t = 0.0;

  Vec3 rpy() const { return spatial::rotation_to_rpy(rotation); }
  Vec9 config() const;    // (position, rpy, q)
  Vec9 config_dot() const;  // (velocity, omega, qd)

  static FullState from_reduced(const spatial::ReducedConfig& rc);
};

struct ControlInput {
  Vec4 u_uav = Vec4::Zero();   // collective thrust + body moments
  Vec3 tau_arm = Vec3::Zero();
};

/// One integration step. Translation and joints use a velocity-Verlet
/// update (exact for piecewise-constant acceleration); attitude integrates
/// the body rates through the SO(3) exponential at the trapezoidal mean.
/// dt must lie in (0, 0.1]; non-finite results raise IntegrationError.
FullState step_dynamics(const FullState& s, const ControlInput& u, double dt,
                        const VehicleParams& p);

struct ControlGains {
  Vec3 pos_p{12.0, 12.0, 14.0};
  Vec3 pos_d{6.5, 6.5, 7.5};
  Vec3 pos_i{0.3, 0.3, 0.4};
  double integral_limit = 0.3;
  double tilt_max = 0.35;           // rad
  Vec3 att_p{200.0, 200.0, 50.0};
  Vec3 att_d{26.0, 26.0, 14.0};
  double joint_p = 60.0;
  double joint_d = 12.0;
  double thrust_max_factor = 2.4;   // times hover thrust
  double moment_max = 2.0;          // N m
  double joint_torque_max = 3.0;    // N m
};

/// Position -> attitude -> rate cascade with joint PD. The position loop
/// keeps an integral state, so the controller is stateful; reset() clears it.
class CascadeController {
 public:
  CascadeController(const VehicleParams& params, const ControlGains& gains)
      : params_(params), gains_(gains) {}

  ControlInput compute(const FullState& s, const spatial::TrajectoryPoint& ref,
                       double dt);
  void reset() { integral_.setZero(); }

 private:
  VehicleParams params_;
  ControlGains gains_;
  Vec3 integral_ = Vec3::Zero();
};

struct StateLog {
  double dt = 0.0;
  std::vector<FullState> states;
  std::vector<Vec4> rotor_speeds;  // applied during the step ending at states[i]

  std::string to_csv() const;
};

/// Closed-loop tracking of a trajectory from rest at its first sample.
/// Rotor saturation is applied in the loop (commands map through the
/// allocation and back). Throws TrackingError when the position error
/// exceeds 5 m. A zero-length trajectory yields only the initial state.
StateLog simulate_tracking(const scanplan::Trajectory& traj,
                           const VehicleParams& params,
                           const ControlGains& gains, double dt = 1e-3,
                           RotorLayout layout = RotorLayout::Plus);

/// RMS of the position tracking error against the reference trajectory.
double tracking_rms(const StateLog& log, const scanplan::Trajectory& traj);

}  // namespace gscout::vehicle
