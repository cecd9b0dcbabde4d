#include "gscout/vehicle.hpp"

#include "gscout/ioutil.hpp"

#include <cmath>

namespace gscout::vehicle {

AllocationMatrix build_allocation(const VehicleParams& p, RotorLayout layout) {
  std::array<Vec3, 4> pos;
  std::array<double, 4> spin;  // +1 = counter-clockwise seen from above
  const double l = p.rotor_arm;
  if (layout == RotorLayout::Plus) {
    pos = {Vec3(l, 0, 0), Vec3(0, l, 0), Vec3(-l, 0, 0), Vec3(0, -l, 0)};
  } else {
    const double d = l / std::sqrt(2.0);
    pos = {Vec3(d, d, 0), Vec3(-d, d, 0), Vec3(-d, -d, 0), Vec3(d, -d, 0)};
  }
  spin = {1.0, -1.0, 1.0, -1.0};

  AllocationMatrix a;
  for (int i = 0; i < 4; ++i) {
    a.k(0, i) = p.k_f;                  // collective thrust
    a.k(1, i) = p.k_f * pos[i].y();     // roll moment
    a.k(2, i) = -p.k_f * pos[i].x();    // pitch moment
    a.k(3, i) = -spin[i] * p.k_m;       // yaw reaction torque
  }
  a.k_inv = a.k.inverse();
  return a;
}

RotorCommand allocate_inverse(const AllocationMatrix& alloc, const Vec4& u,
                              const VehicleParams& p) {
  const Vec4 omega_sq = alloc.k_inv * u;
  RotorCommand cmd;
  const double w_max_sq = p.rotor_speed_max * p.rotor_speed_max;
  for (int i = 0; i < 4; ++i) {
    double w2 = omega_sq[i];
    if (w2 < -1e-9 * std::max(1.0, std::abs(u[0]) / p.k_f)) {
      throw InfeasibleCommand("allocate_inverse: rotor " + std::to_string(i) +
                              " demands negative squared speed " +
                              std::to_string(w2));
    }
    w2 = std::max(w2, 0.0);
    if (w2 > w_max_sq) {
      w2 = w_max_sq;
      cmd.saturated = true;
    }
    cmd.omega[i] = std::sqrt(w2);
  }
  return cmd;
}

Vec9 FullState::config() const {
  Vec9 v;
  v << position, rpy(), q[0], q[1], q[2];
  return v;
}

Vec9 FullState::config_dot() const {
  Vec9 v;
  v << velocity, omega, qd[0], qd[1], qd[2];
  return v;
}

FullState FullState::from_reduced(const spatial::ReducedConfig& rc) {
  FullState s;
  s.position = Vec3(rc.x, rc.y, rc.z);
  s.rotation = spatial::rpy_to_rotation({0.0, 0.0, rc.psi});
  s.q = {rc.q1, rc.q2, rc.q3};
  return s;
}

FullState step_dynamics(const FullState& s, const ControlInput& u, double dt,
                        const VehicleParams& p) {
  if (!(dt > 0.0) || dt > 0.1) {
    throw IntegrationError("step_dynamics: dt out of range: " + std::to_string(dt));
  }
  if (!u.u_uav.allFinite() || !u.tau_arm.allFinite()) {
    throw IntegrationError("step_dynamics: non-finite input");
  }

  FullState out = s;

  const Vec3 accel = Vec3(0.0, 0.0, -p.gravity) +
                     (u.u_uav[0] / p.mass) * s.rotation.col(2);
  out.position = s.position + s.velocity * dt + 0.5 * accel * dt * dt;
  out.velocity = s.velocity + accel * dt;

  const Vec3 inertia = p.inertia;
  const Vec3 torque = u.u_uav.tail<3>();
  const Vec3 omega_dot =
      (torque - s.omega.cross(inertia.cwiseProduct(s.omega))).cwiseQuotient(inertia);
  out.omega = s.omega + omega_dot * dt;
  out.rotation = s.rotation * spatial::so3_exp(0.5 * (s.omega + out.omega) * dt);

  double q_sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    q_sum += s.q[j];
    const double load = p.joint_gravity[j] * std::cos(q_sum);
    const double qdd = (u.tau_arm[j] - load) / p.joint_inertia[j];
    out.q[j] = s.q[j] + s.qd[j] * dt + 0.5 * qdd * dt * dt;
    out.qd[j] = s.qd[j] + qdd * dt;
  }

  out.t = s.t + dt;
  if (!out.position.allFinite() || !out.velocity.allFinite() ||
      !out.rotation.allFinite() || !out.omega.allFinite()) {
    throw IntegrationError("step_dynamics: state diverged to non-finite values");
  }
  return out;
}

ControlInput CascadeController::compute(const FullState& s,
                                        const spatial::TrajectoryPoint& ref,
                                        double dt) {
  const Vec3 p_ref = ref.position.head<3>();
  const Vec3 v_ref = ref.velocity.head<3>();
  const Vec3 a_ref = ref.acceleration.head<3>();
  const double yaw_ref = ref.position[3];
  const double yaw_rate_ref = ref.velocity[3];

  const Vec3 e_p = p_ref - s.position;
  const Vec3 e_v = v_ref - s.velocity;
  integral_ += e_p * dt;
  for (int i = 0; i < 3; ++i) {
    integral_[i] = std::clamp(integral_[i], -gains_.integral_limit,
                              gains_.integral_limit);
  }

  Vec3 a_des = gains_.pos_p.cwiseProduct(e_p) + gains_.pos_d.cwiseProduct(e_v) +
               gains_.pos_i.cwiseProduct(integral_) + a_ref;
  a_des.z() += params_.gravity;

  ControlInput u;
  const double hover = params_.mass * params_.gravity;
  u.u_uav[0] = std::clamp(params_.mass * a_des.dot(s.rotation.col(2)), 0.0,
                          gains_.thrust_max_factor * hover);

  // Small-angle attitude targets from the desired lateral acceleration.
  const double cy = std::cos(yaw_ref), sy = std::sin(yaw_ref);
  const double g = params_.gravity;
  const double roll_d =
      std::clamp((a_des.x() * sy - a_des.y() * cy) / g, -gains_.tilt_max,
                 gains_.tilt_max);
  const double pitch_d =
      std::clamp((a_des.x() * cy + a_des.y() * sy) / g, -gains_.tilt_max,
                 gains_.tilt_max);

  const Vec3 rpy = s.rpy();
  const Vec3 e_att(spatial::wrap_angle(roll_d - rpy.x()),
                   spatial::wrap_angle(pitch_d - rpy.y()),
                   spatial::wrap_angle(yaw_ref - rpy.z()));
  const Vec3 rate_ref(0.0, 0.0, yaw_rate_ref);
  const Vec3 e_rate = rate_ref - s.omega;
  const Vec3 moment = params_.inertia.cwiseProduct(
      gains_.att_p.cwiseProduct(e_att) + gains_.att_d.cwiseProduct(e_rate));
  for (int i = 0; i < 3; ++i) {
    u.u_uav[1 + i] = std::clamp(moment[i], -gains_.moment_max, gains_.moment_max);
  }

  double q_sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double q_ref = ref.position[4 + j];
    const double qd_ref = ref.velocity[4 + j];
    q_sum += s.q[j];
    const double comp = params_.joint_gravity[j] * std::cos(q_sum);
    const double tau = params_.joint_inertia[j] *
                           (gains_.joint_p * (q_ref - s.q[j]) +
                            gains_.joint_d * (qd_ref - s.qd[j])) +
                       comp;
    u.tau_arm[j] = std::clamp(tau, -gains_.joint_torque_max,
                              gains_.joint_torque_max);
  }
  return u;
}

std::string StateLog::to_csv() const {
  std::string out =
      "t,x,y,z,roll,pitch,yaw,q1,q2,q3,"
      "vx,vy,vz,wx,wy,wz,qd1,qd2,qd3,"
      "w_rotor1,w_rotor2,w_rotor3,w_rotor4\n";
  for (size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const Vec9 c = s.config();
    const Vec9 cd = s.config_dot();
    out += io::format_double(s.t);
    for (int k = 0; k < 9; ++k) out += "," + io::format_double(c[k]);
    for (int k = 0; k < 9; ++k) out += "," + io::format_double(cd[k]);
    const Vec4 w = i < rotor_speeds.size() ? rotor_speeds[i] : Vec4::Zero();
    for (int k = 0; k < 4; ++k) out += "," + io::format_double(w[k]);
    out += "\n";
  }
  return out;
}

StateLog simulate_tracking(const scanplan::Trajectory& traj,
                           const VehicleParams& params,
                           const ControlGains& gains, double dt,
                           RotorLayout layout) {
  StateLog log;
  log.dt = dt;
  if (traj.points.empty()) return log;

  const AllocationMatrix alloc = build_allocation(params, layout);
  CascadeController ctrl(params, gains);

  FullState s = FullState::from_reduced(
      spatial::ReducedConfig::from_vector(traj.points.front().position));
  log.states.push_back(s);
  log.rotor_speeds.push_back(Vec4::Zero());

  const double t_end = traj.t_end();
  const long n_steps = std::lround(std::ceil(t_end / dt - 1e-9));
  for (long k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    const auto ref = traj.sample(t);
    ControlInput u = ctrl.compute(s, ref, dt);

    // Actuator model: commands pass through the rotors, including clamping.
    const Vec4 omega_sq_raw = alloc.k_inv * u.u_uav;
    Vec4 omega;
    const double w_max_sq = params.rotor_speed_max * params.rotor_speed_max;
    for (int i = 0; i < 4; ++i) {
      omega[i] = std::sqrt(std::clamp(omega_sq_raw[i], 0.0, w_max_sq));
    }
    u.u_uav = alloc.k * omega.cwiseProduct(omega).matrix();

    s = step_dynamics(s, u, dt, params);
    log.states.push_back(s);
    log.rotor_speeds.push_back(omega);

    const Vec3 p_ref = traj.sample(s.t).position.head<3>();
    if ((s.position - p_ref).norm() > 5.0) {
      throw TrackingError("simulate_tracking: diverged at t=" +
                              std::to_string(s.t), s.t);
    }
  }
  return log;
}

double tracking_rms(const StateLog& log, const scanplan::Trajectory& traj) {
  if (log.states.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : log.states) {
    const Vec3 p_ref = traj.sample(s.t).position.head<3>();
    acc += (s.position - p_ref).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(log.states.size()));
}

}  // namespace gscout::vehicle
