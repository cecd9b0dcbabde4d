#include "gscout/scanplan.hpp"

#include "gscout/ioutil.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>

namespace gscout::scanplan {

namespace {

constexpr double kBig = 1e18;
constexpr double kTinyDeriv = 1e-9;

Vec7 config_vec(const ReducedConfig& c) { return c.to_vector(); }

}  // namespace

// ---------------------------------------------------------------------------
// GeometricPath

int GeometricPath::Section::segment(double s) const {
  const auto it = std::upper_bound(knots.begin(), knots.end(), s);
  int idx = static_cast<int>(it - knots.begin()) - 1;
  idx = std::clamp(idx, 0, static_cast<int>(coef.size()) - 1);
  return idx;
}

Vec7 GeometricPath::Section::eval(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const int i = segment(s);
  const double u = s - knots[i];
  const auto& c = coef[i];
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

Vec7 GeometricPath::Section::deriv(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const int i = segment(s);
  const double u = s - knots[i];
  const auto& c = coef[i];
  return c[1] + u * (2.0 * c[2] + u * 3.0 * c[3]);
}

Vec7 GeometricPath::Section::deriv2(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const int i = segment(s);
  const double u = s - knots[i];
  const auto& c = coef[i];
  return 2.0 * c[2] + u * 6.0 * c[3];
}

namespace {

// Clamped (zero end derivative) C2 cubic through the given knot/value pairs.
// Solves the tridiagonal system for second derivatives with the Thomas
// algorithm, vector-valued over all 7 dofs at once.
GeometricPath::Section build_section(const std::vector<double>& u,
                                     const std::vector<Vec7>& y) {
  const int k = static_cast<int>(u.size()) - 1;  // segments
  std::vector<double> h(k);
  std::vector<Vec7> delta(k);
  for (int i = 0; i < k; ++i) {
    h[i] = u[i + 1] - u[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }

  std::vector<double> diag(k + 1), upper(k + 1, 0.0), lower(k + 1, 0.0);
  std::vector<Vec7> rhs(k + 1);
  diag[0] = 2.0 * h[0];
  upper[0] = h[0];
  rhs[0] = 6.0 * delta[0];
  for (int i = 1; i < k; ++i) {
    lower[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i];
    rhs[i] = 6.0 * (delta[i] - delta[i - 1]);
  }
  lower[k] = h[k - 1];
  diag[k] = 2.0 * h[k - 1];
  rhs[k] = -6.0 * delta[k - 1];

  for (int i = 1; i <= k; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<Vec7> m(k + 1);
  m[k] = rhs[k] / diag[k];
  for (int i = k - 1; i >= 0; --i) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];

  GeometricPath::Section sec;
  sec.knots = u;
  sec.coef.resize(k);
  for (int i = 0; i < k; ++i) {
    sec.coef[i][0] = y[i];
    sec.coef[i][1] = delta[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    sec.coef[i][2] = 0.5 * m[i];
    sec.coef[i][3] = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
  return sec;
}

}  // namespace

GeometricPath GeometricPath::build(const Path& path, double corner_split_angle) {
  const auto& wp = path.waypoints;
  if (wp.size() < 2) throw PlanningError("path needs at least 2 waypoints");

  std::vector<Vec7> pts(wp.size());
  for (size_t i = 0; i < wp.size(); ++i) pts[i] = config_vec(wp[i]);
  // Yaw continuity: unwrap onto the shortest arc between neighbors.
  for (size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i][3] - pts[i - 1][3];
    pts[i][3] -= 2.0 * spatial::kPi * std::round(d / (2.0 * spatial::kPi));
  }
  for (size_t i = 1; i < pts.size(); ++i) {
    if ((pts[i] - pts[i - 1]).norm() < 1e-12) {
      throw PlanningError("duplicate consecutive waypoint at index " +
                          std::to_string(i));
    }
  }

  std::vector<size_t> cuts{0};
  for (size_t i = 1; i + 1 < pts.size(); ++i) {
    const Eigen::Vector3d v1 = (pts[i] - pts[i - 1]).head<3>();
    const Eigen::Vector3d v2 = (pts[i + 1] - pts[i]).head<3>();
    if (v1.norm() < 1e-9 || v2.norm() < 1e-9) continue;
    const double c = std::clamp(v1.normalized().dot(v2.normalized()), -1.0, 1.0);
    if (std::acos(c) > corner_split_angle) cuts.push_back(i);
  }
  cuts.push_back(pts.size() - 1);

  GeometricPath g;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const size_t a = cuts[s], b = cuts[s + 1];
    std::vector<Vec7> y(pts.begin() + a, pts.begin() + b + 1);
    std::vector<double> u(y.size());
    u[0] = 0.0;
    for (size_t i = 1; i < y.size(); ++i)
      u[i] = u[i - 1] + (y[i] - y[i - 1]).norm();
    const double total = u.back();
    for (auto& v : u) v /= total;
    Section sec = build_section(u, y);
    sec.chord = total;
    g.sections_.push_back(std::move(sec));
  }
  return g;
}

GeometricPath interpolate_path(const Path& path, double corner_split_angle) {
  return GeometricPath::build(path, corner_split_angle);
}

KinodynamicLimits KinodynamicLimits::defaults() {
  KinodynamicLimits l;
  l.v_max << 1.2, 1.2, 0.6, 1.2, 1.5, 1.5, 1.5;
  l.a_max << 1.5, 1.5, 1.0, 2.5, 3.0, 3.0, 3.0;
  return l;
}

// ---------------------------------------------------------------------------
// Trajectory

TrajectoryPoint Trajectory::sample(double t) const {
  if (points.empty()) return {};
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const size_t i = static_cast<size_t>(it - times.begin()) - 1;
  const double span = times[i + 1] - times[i];
  const double w = span > 0.0 ? (t - times[i]) / span : 0.0;
  TrajectoryPoint p;
  p.position = (1.0 - w) * points[i].position + w * points[i + 1].position;
  p.velocity = (1.0 - w) * points[i].velocity + w * points[i + 1].velocity;
  p.acceleration =
      (1.0 - w) * points[i].acceleration + w * points[i + 1].acceleration;
  return p;
}

std::string Trajectory::to_csv() const {
  std::string out =
      "t,x,y,z,psi,q1,q2,q3,"
      "vx,vy,vz,vpsi,vq1,vq2,vq3,"
      "ax,ay,az,apsi,aq1,aq2,aq3\n";
  for (size_t i = 0; i < times.size(); ++i) {
    out += io::format_double(times[i]);
    for (int k = 0; k < 7; ++k) out += "," + io::format_double(points[i].position[k]);
    for (int k = 0; k < 7; ++k) out += "," + io::format_double(points[i].velocity[k]);
    for (int k = 0; k < 7; ++k) out += "," + io::format_double(points[i].acceleration[k]);
    out += "\n";
  }
  return out;
}

Trajectory Trajectory::from_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) throw io::ParseError("trajectory csv: empty");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = io::split(line, ',');
    if (cells.size() != 22)
      throw io::ParseError("trajectory csv: expected 22 columns, got " +
                           std::to_string(cells.size()));
    traj.times.push_back(io::parse_double(cells[0]));
    TrajectoryPoint p;
    for (int k = 0; k < 7; ++k) p.position[k] = io::parse_double(cells[1 + k]);
    for (int k = 0; k < 7; ++k) p.velocity[k] = io::parse_double(cells[8 + k]);
    for (int k = 0; k < 7; ++k) p.acceleration[k] = io::parse_double(cells[15 + k]);
    traj.points.push_back(p);
  }
  if (traj.times.size() >= 2) traj.dt = traj.times[1] - traj.times[0];
  for (size_t i = 1; i < traj.times.size(); ++i) {
    if (traj.times[i] <= traj.times[i - 1])
      throw io::ParseError("trajectory csv: times not increasing");
  }
  return traj;
}

// ---------------------------------------------------------------------------
// TOPP-RA

namespace {

struct SectionProfile {
  const GeometricPath::Section* section;
  std::vector<double> s;       // grid
  std::vector<double> x;       // squared path velocity at grid points
  std::vector<double> u;       // path acceleration per interval
  std::vector<double> tau;     // cumulative time at grid points
};

struct AccelBounds {
  double lo, hi;
  bool ok;
};

// Admissible path acceleration interval at squared velocity x. The
// derivative pairs are sampled across the grid interval so the bounds hold
// (conservatively) between nodes, not just at them.
AccelBounds accel_bounds(const std::vector<std::pair<Vec7, Vec7>>& coefs,
                         const Vec7& a_max, double x) {
  AccelBounds b{-kBig, kBig, true};
  for (const auto& [qp, qpp] : coefs) {
    for (int k = 0; k < 7; ++k) {
      const double p = qp[k], pp = qpp[k], a = a_max[k];
      if (std::abs(p) > kTinyDeriv) {
        double lo = (-a - pp * x) / p;
        double hi = (a - pp * x) / p;
        if (p < 0.0) std::swap(lo, hi);
        b.lo = std::max(b.lo, lo);
        b.hi = std::min(b.hi, hi);
      } else if (std::abs(pp * x) > a + 1e-9 * std::max(1.0, a)) {
        b.ok = false;
        return b;
      }
    }
  }
  b.ok = b.lo <= b.hi + 1e-12;
  return b;
}

SectionProfile solve_section(const GeometricPath::Section& sec,
                             const KinodynamicLimits& lim, int n,
                             int stage_offset) {
  SectionProfile prof;
  prof.section = &sec;
  // Cosine-spaced grid: the admissible path acceleration changes fastest
  // near the section ends (where the clamped spline's derivative vanishes),
  // so end cells shrink quadratically while the interior stays near 1/n.
  prof.s.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    prof.s[i] = 0.5 * (1.0 - std::cos(spatial::kPi * double(i) / n));
  }
  prof.s.front() = 0.0;
  prof.s.back() = 1.0;

  std::vector<double> x_vmax(n + 1);
  // Per-interval derivative samples for the conservative accel bounds.
  std::vector<std::vector<std::pair<Vec7, Vec7>>> icoef(n);
  for (int i = 0; i <= n; ++i) {
    const double s = prof.s[i];
    if (i < n) {
      // With piecewise-constant path acceleration u, the squared velocity at
      // fraction f across the interval is x_i + 2*h*f*u, so the constraint
      // |qp*u + qpp*x| <= a stays linear in u with an effective first
      // derivative of qp + 2*h*f*qpp.
      const double h = prof.s[i + 1] - s;
      icoef[i].reserve(3);
      for (const double f : {0.0, 0.5, 1.0}) {
        const double su = s + f * h;
        const Vec7 qp = sec.deriv(su);
        const Vec7 qpp = sec.deriv2(su);
        icoef[i].emplace_back(qp + 2.0 * h * f * qpp, qpp);
      }
    }
    // Velocity cap at the node; between nodes the sampler rescales to the
    // exact bound, so no window margin is needed here.
    double cap = kBig;
    const Vec7 d = sec.deriv(s);
    for (int k = 0; k < 7; ++k) {
      if (std::abs(d[k]) > kTinyDeriv) {
        const double v = lim.v_max[k] / std::abs(d[k]);
        cap = std::min(cap, v * v);
      }
    }
    x_vmax[i] = cap;
  }

  auto feasible = [&](int i, double x, double next_hi) {
    if (x < 0.0 || x > x_vmax[i] * (1.0 + 1e-12)) return false;
    const AccelBounds b = accel_bounds(icoef[i], lim.a_max, x);
    if (!b.ok) return false;
    const double h = prof.s[i + 1] - prof.s[i];
    const double reach_lo = b.lo <= -kBig / 2 ? -kBig : x + 2.0 * h * b.lo;
    const double reach_hi = b.hi >= kBig / 2 ? kBig : x + 2.0 * h * b.hi;
    return reach_hi >= -1e-12 && reach_lo <= next_hi + 1e-12;
  };

  // Backward pass: controllable upper bound per grid point.
  std::vector<double> x_hi(n + 1);
  x_hi[n] = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    if (feasible(i, x_vmax[i], x_hi[i + 1])) {
      x_hi[i] = x_vmax[i];
      continue;
    }
    if (!feasible(i, 0.0, x_hi[i + 1])) {
      throw ToppError("topp_ra: no admissible velocity at stage " +
                          std::to_string(stage_offset + i),
                      stage_offset + i);
    }
    double lo = 0.0, hi = std::min(x_vmax[i], kBig);
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(i, mid, x_hi[i + 1]))
        lo = mid;
      else
        hi = mid;
    }
    x_hi[i] = lo;
  }

  // Greedy forward pass at maximum admissible acceleration.
  prof.x.assign(n + 1, 0.0);
  prof.u.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const AccelBounds b = accel_bounds(icoef[i], lim.a_max, prof.x[i]);
    if (!b.ok) {
      throw ToppError("topp_ra: forward pass infeasible at stage " +
                          std::to_string(stage_offset + i),
                      stage_offset + i);
    }
    const double h = prof.s[i + 1] - prof.s[i];
    double next = x_hi[i + 1];
    if (b.hi < kBig / 2) next = std::min(next, prof.x[i] + 2.0 * h * b.hi);
    next = std::max(next, 0.0);
    prof.x[i + 1] = next;
    prof.u[i] = (next - prof.x[i]) / (2.0 * h);
  }

  prof.tau.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double v0 = std::sqrt(prof.x[i]), v1 = std::sqrt(prof.x[i + 1]);
    if (v0 + v1 < 1e-9) {
      throw ToppError("topp_ra: profile stalls at stage " +
                          std::to_string(stage_offset + i),
                      stage_offset + i);
    }
    const double h = prof.s[i + 1] - prof.s[i];
    prof.tau[i + 1] = prof.tau[i] + 2.0 * h / (v0 + v1);
  }
  return prof;
}

TrajectoryPoint sample_profile(const SectionProfile& prof, double tau,
                               const KinodynamicLimits& lim) {
  const auto it = std::upper_bound(prof.tau.begin(), prof.tau.end(), tau);
  int i = static_cast<int>(it - prof.tau.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(prof.u.size()) - 1);
  const double dt = tau - prof.tau[i];
  const double v0 = std::sqrt(prof.x[i]);
  double s = prof.s[i] + v0 * dt + 0.5 * prof.u[i] * dt * dt;
  s = std::clamp(s, prof.s[i], prof.s[i + 1]);
  double sd = v0 + prof.u[i] * dt;
  sd = std::max(sd, 0.0);

  TrajectoryPoint p;
  p.position = prof.section->eval(s);
  const Vec7 qp = prof.section->deriv(s);
  const Vec7 qpp = prof.section->deriv2(s);
  p.velocity = qp * sd;
  p.acceleration = qpp * sd * sd + qp * prof.u[i];
  // Guarantee the published velocities respect the caps exactly.
  double scale = 1.0;
  for (int k = 0; k < 7; ++k) {
    if (lim.v_max[k] > 0.0)
      scale = std::max(scale, std::abs(p.velocity[k]) / lim.v_max[k]);
  }
  if (scale > 1.0) p.velocity /= scale;
  return p;
}

}  // namespace

Trajectory topp_ra(const GeometricPath& gpath, const KinodynamicLimits& limits,
                   int grid_n, double dt) {
  if (grid_n < 2) throw std::invalid_argument("topp_ra: grid_n must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("topp_ra: dt must be positive");
  for (int k = 0; k < 7; ++k) {
    if (limits.v_max[k] < 0.0 || limits.a_max[k] < 0.0)
      throw std::invalid_argument("topp_ra: negative limit");
  }

  std::vector<SectionProfile> profs;
  std::vector<double> start_time;
  double total = 0.0;
  int stage = 0;
  for (const auto& sec : gpath.sections()) {
    profs.push_back(solve_section(sec, limits, grid_n, stage));
    start_time.push_back(total);
    total += profs.back().tau.back();
    stage += grid_n + 1;
  }

  Trajectory traj;
  traj.dt = dt;
  const double t_end = total;
  for (double t = 0.0;; t += dt) {
    const bool last = t >= t_end - 1e-12;
    const double tc = last ? t_end : t;
    size_t si = profs.size() - 1;
    for (size_t i = 0; i + 1 < profs.size(); ++i) {
      if (tc < start_time[i + 1]) {
        si = i;
        break;
      }
    }
    const double local = std::clamp(tc - start_time[si], 0.0, profs[si].tau.back());
    traj.times.push_back(tc);
    traj.points.push_back(sample_profile(profs[si], local, limits));
    if (last) break;
  }
  return traj;
}

double path_clearance(const GeometricPath& gpath,
                      const worldsim::GreenhouseLayout& layout,
                      int samples_per_section) {
  double clear = std::numeric_limits<double>::infinity();
  for (const auto& sec : gpath.sections()) {
    for (int i = 0; i <= samples_per_section; ++i) {
      const double s = static_cast<double>(i) / samples_per_section;
      const Vec3 p = sec.eval(s).head<3>();
      clear = std::min(clear, worldsim::obstacle_clearance(p, layout));
    }
  }
  return clear;
}

// ---------------------------------------------------------------------------
// Planners

namespace {

void check_waypoint(const Vec3& pos, const worldsim::RowLayout& row,
                    int plant_index, const worldsim::GreenhouseLayout& layout,
                    double uav_radius) {
  if (!layout.bounds.contains(pos)) {
    throw PlanningError("scan waypoint outside greenhouse bounds");
  }
  for (const auto& r : layout.rows) {
    for (size_t k = 0; k < r.plant_volumes.size(); ++k) {
      if (r.id == row.id && static_cast<int>(k) == plant_index) continue;
      if (r.plant_volumes[k].distance(pos) < uav_radius) {
        throw PlanningError("scan waypoint within uav radius of plant " +
                            std::to_string(k) + " in row " + std::to_string(r.id));
      }
    }
  }
}

}  // namespace

Path plan_plant_ellipse(const worldsim::RowLayout& row, int plant_index,
                        const ScanParams& params,
                        const worldsim::GreenhouseLayout& layout,
                        Side side, int height_level, bool reverse,
                        int pitch_parity) {
  if (plant_index < 0 ||
      plant_index >= static_cast<int>(row.plant_centers.size())) {
    throw PlanningError("plant index out of range");
  }
  const int m = params.waypoints_per_side;
  if (m < 2) throw PlanningError("need at least 2 waypoints per side");

  const Vec3 c = row.plant_centers[plant_index];
  const double a = params.semi_axis_along, b = params.semi_axis_across;
  const double z = c.z() + params.height_offsets[height_level % 2];

  Path path;
  for (int j = 0; j < m; ++j) {
    double theta;
    double lateral_sign = 1.0;
    if (side == Side::Full) {
      theta = 2.0 * spatial::kPi * j / m * (reverse ? -1.0 : 1.0);
    } else {
      const double f = (j + 0.5) / m;
      theta = reverse ? params.arc_begin + (params.arc_end - params.arc_begin) * f
                      : params.arc_end - (params.arc_end - params.arc_begin) * f;
      lateral_sign = (side == Side::Left) ? 1.0 : -1.0;
    }
    Vec3 pos = c + a * std::cos(theta) * row.axis +
               b * std::sin(theta) * lateral_sign * row.normal;
    pos.z() = z;
    check_waypoint(pos, row, plant_index, layout, params.uav_radius);

    ReducedConfig q;
    q.x = pos.x();
    q.y = pos.y();
    q.z = pos.z();
    const Vec3 d = c - pos;
    q.psi = std::atan2(d.y(), d.x());
    q.q1 = ((j + pitch_parity) % 2 == 0 ? 1.0 : -1.0) * params.pitch_amplitude;
    path.waypoints.push_back(q);
  }
  return path;
}

Path plan_row(const worldsim::RowLayout& row,
              const worldsim::GreenhouseLayout& layout,
              const ScanParams& params) {
  const int n_plants = static_cast<int>(row.plant_centers.size());
  if (n_plants == 0) throw PlanningError("row has no plants");

  // Visit order runs toward the outer end, where the transit is allowed.
  std::vector<int> order(n_plants);
  for (int i = 0; i < n_plants; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    return row.outer_sign * row.plant_centers[lhs].dot(row.axis) <
           row.outer_sign * row.plant_centers[rhs].dot(row.axis);
  });
  const bool reverse = row.outer_sign < 0.0;

  std::vector<int> out_level(n_plants);
  for (int k = 0; k < n_plants; ++k) out_level[order[k]] = k % 2;

  Path path;
  int wp_count = 0;
  auto append = [&](const Path& part) {
    path.waypoints.insert(path.waypoints.end(), part.waypoints.begin(),
                          part.waypoints.end());
    wp_count += static_cast<int>(part.waypoints.size());
  };

  for (int k = 0; k < n_plants; ++k) {
    const int p = order[k];
    append(plan_plant_ellipse(row, p, params, layout, Side::Left, out_level[p],
                              reverse, wp_count % 2));
  }

  // Transit around the outer table end at the configured clearance.
  const int outer_plant = order.back();
  const Vec3 c_outer = row.plant_centers[outer_plant];
  const double table_end = row.outer_sign > 0.0
                               ? row.table.hi.dot(row.axis.cwiseAbs())
                               : row.table.lo.dot(row.axis.cwiseAbs());
  const double e = table_end + row.outer_sign * params.transit_clearance;
  const Vec3 row_center = row.table.center();
  const double z_t = c_outer.z() + params.height_offsets[0];
  for (const double lat : {params.semi_axis_across, 0.0, -params.semi_axis_across}) {
    Vec3 pos = row_center + (e - row_center.dot(row.axis)) * row.axis +
               lat * row.normal;
    pos.z() = z_t;
    if (!layout.bounds.contains(pos)) {
      throw PlanningError("transit waypoint outside greenhouse bounds");
    }
    ReducedConfig q;
    q.x = pos.x();
    q.y = pos.y();
    q.z = pos.z();
    const Vec3 d = c_outer - pos;
    q.psi = std::atan2(d.y(), d.x());
    q.q1 = (wp_count % 2 == 0 ? 1.0 : -1.0) * params.pitch_amplitude;
    path.waypoints.push_back(q);
    ++wp_count;
  }

  for (int k = n_plants - 1; k >= 0; --k) {
    const int p = order[k];
    append(plan_plant_ellipse(row, p, params, layout, Side::Right,
                              1 - out_level[p], !reverse, wp_count % 2));
  }

  const GeometricPath g = interpolate_path(path, params.corner_split_angle);
  const double clearance = path_clearance(g, layout);
  if (clearance < params.uav_radius - 1e-6) {
    throw PlanningError("row path clearance " + std::to_string(clearance) +
                        " below uav radius " + std::to_string(params.uav_radius));
  }
  return path;
}

}  // namespace gscout::scanplan
