// Acceptance gate for the greenhouse scouting stack. Runs the seven release
// criteria end to end, prints one line per criterion, and exits nonzero if
// any of them fails. Expect a few minutes of wall time; the yield criterion
// alone runs the full pipeline ten times.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gscout/mission.hpp"
#include "gscout/pipeline.hpp"
#include "gscout/scanplan.hpp"
#include "gscout/spatial.hpp"
#include "gscout/vehicle.hpp"
#include "gscout/worldsim.hpp"
#include "gscout/yieldcount.hpp"
#include "oracles.hpp"

using namespace gscout;
using spatial::Transform;
using spatial::Vec3;
using spatial::Vec7;

namespace {

// ---- pinned tolerances and budgets ----------------------------------------
constexpr double kYieldMargin = 0.10;          // relative count error per run
constexpr int kYieldRuns = 10;                 // fixed seeds 1..10
constexpr int kYieldPassesNeeded = 9;
constexpr double kYieldSecondsPerRun = 300.0;

constexpr int kOpticsInstances = 200;          // DBSCAN equivalence sweep
constexpr int kOpticsMaxPoints = 200;
constexpr double kOpticsBudgetSeconds = 30.0;

constexpr int kSevenPepperTrials = 100;
constexpr int kSevenPepperNeeded = 95;

constexpr double kProfileTolerance = 0.02;     // vs closed-form line profiles
constexpr double kVelocitySlack = 1e-6;        // absolute, per axis
constexpr double kAccelSlackFactor = 1.05;     // relative, per axis
constexpr double kToppSecondsPerRow = 1.0;

constexpr double kHoverDrift = 1e-9;           // m after 1000 steps
constexpr double kFreeFallError = 1e-6;        // m over 0.5 s at dt = 1 ms
constexpr double kTrackingRmsMax = 0.05;       // m over a full row scan

constexpr int kGaInstances = 100;              // n <= 6 actions, 2 robots
constexpr double kGaOptimalityFactor = 1.05;   // vs brute-force makespan
constexpr int kGaHitsNeeded = 95;
constexpr double kGaBudgetSeconds = 60.0;

constexpr double kDepthRoundTrip = 1e-9;       // px and m
constexpr double kFkTolerance = 1e-10;
// ---------------------------------------------------------------------------

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool line(int id, const char* label, bool ok, const std::string& detail) {
  std::printf("criterion %d: %-34s %s  [%s]\n", id, label, ok ? "pass" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  return ok;
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// 1. Ten fixed seeds of the default scenario: the estimated total count must
// land within the margin on at least kYieldPassesNeeded of them, and no run
// may exceed the per-run time budget.
bool yield_accuracy() {
  int within = 0;
  double max_err = 0.0;
  double slowest = 0.0;
  for (int seed = 1; seed <= kYieldRuns; ++seed) {
    config::ScenarioConfig cfg;
    cfg.seed = std::uint64_t(seed);
    const auto t0 = Clock::now();
    const auto report = pipeline::run_pipeline(cfg);
    slowest = std::max(slowest, seconds_since(t0));
    max_err = std::max(max_err, report.relative_error);
    if (report.relative_error <= kYieldMargin) ++within;
  }
  const bool ok = within >= kYieldPassesNeeded && slowest < kYieldSecondsPerRun;
  return line(1, "end-to-end yield within 10%", ok,
              fmt("%d/%d runs, max err %.2f%%, slowest %.1f s", within,
                  kYieldRuns, 100.0 * max_err, slowest));
}

std::vector<int> labels_from(const yieldcount::ClusterResult& res, int n) {
  std::vector<int> label(n, -1);
  for (std::size_t c = 0; c < res.clusters.size(); ++c) {
    for (const int i : res.clusters[c].members) label[i] = int(c);
  }
  return label;
}

// 2. Cluster extraction must equal brute-force DBSCAN partitions exactly on
// random Gaussian-blob instances, within the time budget.
bool optics_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double eps_pool[4] = {0.02, 0.04, 0.06, 0.08};

  int matched = 0;
  for (int instance = 0; instance < kOpticsInstances; ++instance) {
    std::vector<Vec3> pts;
    const int blobs = 1 + int(u01(gen) * 6);
    for (int b = 0; b < blobs && int(pts.size()) < kOpticsMaxPoints - 20; ++b) {
      const Vec3 c(u01(gen) * 0.5, u01(gen) * 0.5, u01(gen) * 0.5);
      const double sigma = 0.005 + 0.025 * u01(gen);
      const int m = 5 + int(u01(gen) * 55);
      std::normal_distribution<double> g(0.0, sigma);
      for (int k = 0; k < m && int(pts.size()) < kOpticsMaxPoints - 20; ++k) {
        pts.push_back(c + Vec3(g(gen), g(gen), g(gen)));
      }
    }
    const int noise = int(u01(gen) * 20);
    for (int k = 0; k < noise; ++k) {
      pts.push_back(Vec3(u01(gen) * 0.5, u01(gen) * 0.5, u01(gen) * 0.5));
    }

    const double eps = eps_pool[instance % 4];
    const int min_pts = 2 + int(u01(gen) * 7);
    const auto res = yieldcount::extract_clusters(
        pts, yieldcount::optics_order(pts, eps, min_pts), eps);
    const auto mine = oracle::canonical_partition(labels_from(res, int(pts.size())));
    const auto ref = oracle::canonical_partition(oracle::dbscan(pts, eps, min_pts));
    if (mine == ref) ++matched;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = matched == kOpticsInstances && elapsed < kOpticsBudgetSeconds;
  return line(2, "OPTICS matches DBSCAN oracle", ok,
              fmt("%d/%d partitions, %.1f s", matched, kOpticsInstances, elapsed));
}

Vec3 truncated_noise(random::Rng& rng, double sigma) {
  while (true) {
    const Vec3 v(rng.gaussian(0, sigma), rng.gaussian(0, sigma),
                 rng.gaussian(0, sigma));
    if (v.norm() <= 4.0 * sigma) return v;
  }
}

// 3. A seven-pepper row with 5-10 noisy detections per pepper, augmented to
// the fixed working set, must count to exactly seven in nearly every seed.
bool seven_pepper_scene() {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[0];
  const yieldcount::CountingParams params;
  const double cx = row.table.center().x();
  const double cy = row.table.center().y();
  const std::vector<Vec3> truth{
      Vec3(cx - 0.75, cy - 0.05, 1.05), Vec3(cx - 0.75, cy + 0.05, 1.45),
      Vec3(cx - 0.25, cy, 1.10),        Vec3(cx - 0.25, cy, 1.45),
      Vec3(cx + 0.25, cy - 0.05, 1.25), Vec3(cx + 0.75, cy + 0.05, 1.05),
      Vec3(cx + 0.75, cy, 1.40),
  };

  int exact = 0;
  for (int trial = 0; trial < kSevenPepperTrials; ++trial) {
    random::Rng rng(1000 + trial);
    std::vector<Vec3> dets;
    for (const auto& p : truth) {
      const int m = rng.uniform_int(5, 10);
      for (int k = 0; k < m; ++k) dets.push_back(p + truncated_noise(rng, 0.01));
    }
    if (yieldcount::count_row(dets, row, params, rng).count == 7) ++exact;
  }
  const bool ok = exact >= kSevenPepperNeeded;
  return line(3, "seven-pepper scene counts to 7", ok,
              fmt("%d/%d seeds exact", exact, kSevenPepperTrials));
}

scanplan::Path line_path(double length) {
  Vec7 to = Vec7::Zero();
  to[0] = length;
  scanplan::Path p;
  p.waypoints.push_back(spatial::ReducedConfig::from_vector(Vec7::Zero()));
  p.waypoints.push_back(spatial::ReducedConfig::from_vector(to));
  return p;
}

bool within_limits(const scanplan::Trajectory& traj,
                   const scanplan::KinodynamicLimits& lim) {
  for (const auto& p : traj.points) {
    for (int k = 0; k < 7; ++k) {
      if (std::abs(p.velocity[k]) > lim.v_max[k] + kVelocitySlack) return false;
      if (std::abs(p.acceleration[k]) > lim.a_max[k] * kAccelSlackFactor + 1e-9)
        return false;
    }
  }
  return true;
}

// 4. Straight-line parameterizations must match the closed-form triangular
// and trapezoidal profiles, and every trajectory the planner emits must stay
// inside the velocity and acceleration bounds.
bool topp_optimality() {
  scanplan::KinodynamicLimits unit;
  unit.v_max = Vec7::Ones();
  unit.a_max = Vec7::Ones();

  const auto short_line =
      scanplan::topp_ra(scanplan::interpolate_path(line_path(1.0)), unit, 200);
  const auto long_line =
      scanplan::topp_ra(scanplan::interpolate_path(line_path(10.0)), unit, 200);
  const double err1 =
      std::abs(short_line.t_end() - oracle::line_time(1.0, 1.0, 1.0)) / 2.0;
  const double err10 =
      std::abs(long_line.t_end() - oracle::line_time(10.0, 1.0, 1.0)) / 11.0;

  bool bounded = within_limits(short_line, unit) && within_limits(long_line, unit);

  const config::ScenarioConfig cfg;
  const auto t0 = Clock::now();
  const auto rows = pipeline::plan_rows(cfg);
  const double per_row = seconds_since(t0) / double(rows.size());
  for (const auto& row : rows) bounded = bounded && within_limits(row.trajectory, cfg.limits);

  const bool ok = err1 <= kProfileTolerance && err10 <= kProfileTolerance &&
                  bounded && per_row < kToppSecondsPerRow;
  return line(4, "TOPP profiles and bounds", ok,
              fmt("1 m %.3f s, 10 m %.3f s, bounds %s, %.2f s/row",
                  short_line.t_end(), long_line.t_end(), bounded ? "ok" : "violated",
                  per_row));
}

// 5. Hover must be a fixed point, free fall must integrate exactly, and the
// tuned controller must track a full row scan inside the frozen RMS gate.
bool dynamics_control() {
  using namespace vehicle;
  const VehicleParams vp;

  FullState hover;
  hover.position = Vec3(1.0, -2.0, 1.5);
  ControlInput hold;
  hold.u_uav[0] = vp.mass * vp.gravity;
  FullState cur = hover;
  for (int k = 0; k < 1000; ++k) cur = step_dynamics(cur, hold, 1e-3, vp);
  const double drift = (cur.position - hover.position).cwiseAbs().maxCoeff();

  FullState drop;
  drop.position = Vec3(0.0, 0.0, 10.0);
  const ControlInput off;
  cur = drop;
  for (int k = 0; k < 500; ++k) cur = step_dynamics(cur, off, 1e-3, vp);
  const double fall_err =
      std::abs(cur.position.z() - (10.0 - 0.5 * vp.gravity * 0.25));

  const auto layout = worldsim::GreenhouseLayout::make();
  const scanplan::ScanParams sp;
  const auto gp = scanplan::interpolate_path(
      scanplan::plan_row(layout.rows[0], layout, sp), sp.corner_split_angle);
  const auto traj =
      scanplan::topp_ra(gp, scanplan::KinodynamicLimits::defaults(), 200);
  const auto log = simulate_tracking(traj, vp, ControlGains{});
  const double rms = tracking_rms(log, traj);

  const bool ok = drift <= kHoverDrift && fall_err <= kFreeFallError &&
                  rms <= kTrackingRmsMax;
  return line(5, "dynamics and tracking", ok,
              fmt("hover drift %.1e m, fall err %.1e m, scan rms %.3f m", drift,
                  fall_err, rms));
}

mission::MissionProblem random_problem(int n, int m, random::Rng& rng) {
  mission::MissionProblem prob;
  for (int i = 0; i < m; ++i) {
    prob.depots.push_back(Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), 0));
    prob.speed.push_back(rng.uniform(0.5, 1.5));
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    mission::MissionProblem::Action action;
    action.location = Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4), 0);
    int supported = 0;
    for (int i = 0; i < m; ++i) {
      const bool ok = rng.uniform() < 0.8 || (i == m - 1 && supported == 0);
      action.duration.push_back(ok ? rng.uniform(1, 5) : inf);
      action.cost.push_back(ok ? rng.uniform(0.5, 3) : inf);
      supported += ok ? 1 : 0;
    }
    prob.actions.push_back(action);
  }
  for (int b = 1; b < n; ++b) {
    for (int a = 0; a < b; ++a) {
      if (rng.uniform() < 0.15) prob.precedence.emplace_back(a, b);
    }
  }
  return prob;
}

bool schedule_ok(const mission::Schedule& s, const mission::MissionProblem& prob) {
  if (!s.feasible) return false;
  if (int(s.robot_schedules.size()) != prob.robots()) return false;
  std::vector<int> seen(prob.actions.size(), 0);
  std::vector<double> start(prob.actions.size(), 0.0);
  std::vector<double> finish(prob.actions.size(), 0.0);
  for (int i = 0; i < prob.robots(); ++i) {
    Vec3 loc = prob.depots[std::size_t(i)];
    double avail = 0.0;
    for (const auto& e : s.robot_schedules[std::size_t(i)]) {
      if (e.action < 0 || e.action >= int(prob.actions.size())) return false;
      ++seen[std::size_t(e.action)];
      const auto& action = prob.actions[std::size_t(e.action)];
      if (std::abs(e.finish - (e.start + action.duration[std::size_t(i)])) > 1e-9)
        return false;
      if (e.start < avail + prob.transition(i, loc, action.location) - 1e-9)
        return false;
      avail = e.finish;
      loc = action.location;
      start[std::size_t(e.action)] = e.start;
      finish[std::size_t(e.action)] = e.finish;
    }
  }
  for (const int c : seen) {
    if (c != 1) return false;
  }
  for (const auto& [a, b] : prob.precedence) {
    if (!(finish[std::size_t(a)] < start[std::size_t(b)])) return false;
  }
  return true;
}

// 6. The distributed GA must land within the optimality factor of the
// brute-force makespan on nearly every small random instance, and every
// schedule it returns must satisfy the scheduling invariants.
bool ga_near_optimality() {
  const auto t0 = Clock::now();
  int hits = 0;
  int valid = 0;
  random::Rng inst_rng(402);
  for (int i = 0; i < kGaInstances; ++i) {
    const auto prob = random_problem(inst_rng.uniform_int(2, 6), 2, inst_rng);
    const auto best = mission::brute_force_schedule(prob);
    mission::SolveConfig sc;
    sc.agents = 2;
    sc.population = 16;
    sc.generations = 400;
    sc.seed = 9000 + std::uint64_t(i);
    const auto got = mission::solve(prob, sc);
    if (schedule_ok(got, prob)) ++valid;
    if (got.feasible &&
        got.makespan <= kGaOptimalityFactor * best.makespan + 1e-9)
      ++hits;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = hits >= kGaHitsNeeded && valid == kGaInstances &&
                  elapsed < kGaBudgetSeconds;
  return line(6, "mission GA near-optimal", ok,
              fmt("%d/%d within 1.05x, %d/%d invariants, %.1f s", hits,
                  kGaInstances, valid, kGaInstances, elapsed));
}

// 7. Geometry round trips: depth-image deprojection must invert exactly, the
// FK chain must match a homogeneous matrix product, and the stochastic
// components must be bit-reproducible per seed.
bool geometry_round_trips() {
  worldsim::World w;
  {
    worldsim::Plant p;
    p.volume = worldsim::Aabb::from_center({0.4, -0.2, 2.0}, {0.8, 0.8, 0.8});
    p.peppers.push_back({Vec3(0.4, -0.2, 2.0), 0.5, true, +1});
    p.peppers.push_back({Vec3(-0.6, 0.3, 3.0), 0.4, true, -1});
    w.plants.push_back(p);
  }
  worldsim::CameraIntrinsics intr;
  intr.width = 65;
  intr.height = 65;
  intr.fx = 50.0;
  intr.fy = 50.0;
  intr.cx = 32.0;
  intr.cy = 32.0;
  intr.max_range = 10.0;

  Transform pose;
  pose.rotation = spatial::rpy_to_rotation(Vec3(-0.15, 0.1, 0.05));
  pose.translation = Vec3(0.3, -0.1, 0.2);
  const auto img = worldsim::render_depth(w, pose, intr);
  const auto cloud = worldsim::depth_to_pointcloud(img, intr);
  double depth_err = 0.0;
  int n_valid = 0;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const std::size_t idx = std::size_t(v) * intr.width + u;
      if (!cloud.valid[idx]) continue;
      ++n_valid;
      const Vec3 p = cloud.points[idx];
      depth_err = std::max(depth_err, std::abs(p.z() - img.at(u, v)));
      depth_err =
          std::max(depth_err, std::abs(intr.cx + intr.fx * p.x() / p.z() - u));
      depth_err =
          std::max(depth_err, std::abs(intr.cy + intr.fy * p.y() / p.z() - v));
    }
  }

  const auto arm = spatial::ArmModel::planar_default();
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(-2.8, 2.8);
  double fk_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const spatial::ArmConfig cfg{{u(gen), u(gen), u(gen)}};
    const Transform t = spatial::arm_fk(arm, cfg);
    oracle::Mat4 ref = oracle::Mat4::Identity();
    for (int j = 0; j < 3; ++j) {
      ref = ref *
            oracle::homogeneous(
                Eigen::AngleAxisd(cfg.q[j], Vec3::UnitZ()).toRotationMatrix(),
                Vec3::Zero()) *
            oracle::homogeneous(arm.link_offsets[std::size_t(j)].rotation,
                                arm.link_offsets[std::size_t(j)].translation);
    }
    fk_err = std::max(
        fk_err, (t.translation - ref.block<3, 1>(0, 3)).cwiseAbs().maxCoeff());
    fk_err = std::max(
        fk_err, (t.rotation - ref.block<3, 3>(0, 0)).cwiseAbs().maxCoeff());
  }

  bool deterministic = true;
  {
    const auto layout = worldsim::GreenhouseLayout::make();
    const worldsim::WorldGenParams wp;
    const auto w1 = worldsim::generate_world(layout, wp, 5);
    const auto w2 = worldsim::generate_world(layout, wp, 5);
    deterministic = deterministic && w1.total_peppers() == w2.total_peppers();
    for (std::size_t i = 0; deterministic && i < w1.plants.size(); ++i) {
      const auto& a = w1.plants[i].peppers;
      const auto& b = w2.plants[i].peppers;
      deterministic = a.size() == b.size();
      for (std::size_t j = 0; deterministic && j < a.size(); ++j) {
        deterministic = a[j].center == b[j].center && a[j].ripe == b[j].ripe;
      }
    }

    const worldsim::DetectorModel dm;
    random::Rng r1(3);
    random::Rng r2(3);
    const auto d1 = worldsim::simulate_detections(w1, pose, intr, dm, r1);
    const auto d2 = worldsim::simulate_detections(w2, pose, intr, dm, r2);
    deterministic = deterministic && d1.size() == d2.size();
    for (std::size_t i = 0; deterministic && i < d1.size(); ++i) {
      deterministic =
          d1[i].point == d2[i].point && d1[i].confidence == d2[i].confidence;
    }

    random::Rng g(17);
    const auto prob = random_problem(5, 2, g);
    mission::SolveConfig sc;
    sc.agents = 2;
    sc.population = 16;
    sc.generations = 60;
    sc.seed = 4;
    deterministic = deterministic &&
                    mission::schedule_to_json(mission::solve(prob, sc)) ==
                        mission::schedule_to_json(mission::solve(prob, sc));
  }

  const bool ok = n_valid > 100 && depth_err <= kDepthRoundTrip &&
                  fk_err <= kFkTolerance && deterministic;
  return line(7, "geometry and determinism", ok,
              fmt("depth err %.1e, fk err %.1e, %s", depth_err, fk_err,
                  deterministic ? "deterministic" : "NOT deterministic"));
}

}  // namespace

int main() {
  int failures = 0;
  failures += !yield_accuracy();
  failures += !optics_equivalence();
  failures += !seven_pepper_scene();
  failures += !topp_optimality();
  failures += !dynamics_control();
  failures += !ga_near_optimality();
  failures += !geometry_round_trips();
  if (failures == 0) {
    std::printf("all 7 criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
