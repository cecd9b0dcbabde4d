#include "gscout/worldsim.hpp"

#include "gscout/ioutil.hpp"

#include <json.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gscout::worldsim {

namespace {

constexpr double kRayEps = 1e-9;

}  // namespace

std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c,
                                 double r) {
  const Vec3 m = o - c;
  const double a = d.squaredNorm();
  const double b = m.dot(d);
  const double q = m.squaredNorm() - r * r;
  const double disc = b * b - a * q;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / a;
  if (t > kRayEps) return t;
  return std::nullopt;
}

std::optional<double> ray_aabb(const Vec3& o, const Vec3& d, const Aabb& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < box.lo[i] || o[i] > box.hi[i]) return std::nullopt;
      continue;
    }
    double t1 = (box.lo[i] - o[i]) / d[i];
    double t2 = (box.hi[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > kRayEps) return t_near;
  return std::nullopt;
}

std::optional<double> ray_disc(const Vec3& o, const Vec3& d, const Vec3& c,
                               const Vec3& n, double r) {
  const double denom = d.dot(n);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = (c - o).dot(n) / denom;
  if (t <= kRayEps) return std::nullopt;
  if ((o + t * d - c).squaredNorm() > r * r) return std::nullopt;
  return t;
}

std::optional<double> ray_capsule(const Vec3& o, const Vec3& d, const Vec3& a,
                                  const Vec3& b, double r) {
  std::optional<double> best;
  const auto consider = [&best](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };
  const Vec3 ab = b - a;
  const double abb = ab.squaredNorm();
  if (abb < 1e-16) return ray_sphere(o, d, a, r);
  const Vec3 m = o - a;
  const Vec3 d_perp = d - ab * (d.dot(ab) / abb);
  const Vec3 m_perp = m - ab * (m.dot(ab) / abb);
  const double qa = d_perp.squaredNorm();
  const double qb = m_perp.dot(d_perp);
  const double qc = m_perp.squaredNorm() - r * r;
  if (qa > 1e-16) {
    const double disc = qb * qb - qa * qc;
    if (disc >= 0.0) {
      const double t = (-qb - std::sqrt(disc)) / qa;
      if (t > kRayEps) {
        const double s = (m + t * d).dot(ab) / abb;
        if (s >= 0.0 && s <= 1.0) consider(t);
      }
    }
  }
  consider(ray_sphere(o, d, a, r));
  consider(ray_sphere(o, d, b, r));
  return best;
}

namespace {

struct SphereRef {
  Vec3 c;
  double r;
  int plant;
  int pepper;
};

/// Flattened primitive lists, pre-culled to a ball around the camera.
struct Soup {
  std::vector<SphereRef> spheres;
  std::vector<StemSegment> capsules;
  std::vector<LeafDisc> discs;
  std::vector<Aabb> boxes;
};

Soup build_soup(const World& w, const Vec3& origin, double range,
                bool include_peppers) {
  Soup s;
  const auto near = [&](const Vec3& c, double r) {
    return (c - origin).norm() - r <= range;
  };
  for (const auto& b : w.static_boxes) {
    if (near(b.center(), 0.5 * b.size().norm())) s.boxes.push_back(b);
  }
  for (std::size_t i = 0; i < w.plants.size(); ++i) {
    const Plant& p = w.plants[i];
    if (!near(p.volume.center(), 0.5 * p.volume.size().norm() + 0.1)) continue;
    for (const auto& seg : p.stem) s.capsules.push_back(seg);
    for (const auto& leaf : p.leaves) s.discs.push_back(leaf);
    if (include_peppers) {
      for (std::size_t k = 0; k < p.peppers.size(); ++k) {
        s.spheres.push_back(
            {p.peppers[k].center, p.peppers[k].radius, int(i), int(k)});
      }
    }
  }
  return s;
}

std::optional<double> nearest_hit(const Soup& s, const Vec3& o, const Vec3& d) {
  std::optional<double> best;
  const auto consider = [&best](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };
  for (const auto& sp : s.spheres) consider(ray_sphere(o, d, sp.c, sp.r));
  for (const auto& cap : s.capsules)
    consider(ray_capsule(o, d, cap.a, cap.b, cap.radius));
  for (const auto& disc : s.discs)
    consider(ray_disc(o, d, disc.center, disc.normal, disc.radius));
  for (const auto& box : s.boxes) consider(ray_aabb(o, d, box));
  return best;
}

bool occluded_before(const Soup& s, const Vec3& o, const Vec3& d,
                     double t_limit, int skip_plant, int skip_pepper) {
  for (const auto& sp : s.spheres) {
    if (sp.plant == skip_plant && sp.pepper == skip_pepper) continue;
    const auto t = ray_sphere(o, d, sp.c, sp.r);
    if (t && *t < t_limit) return true;
  }
  for (const auto& cap : s.capsules) {
    const auto t = ray_capsule(o, d, cap.a, cap.b, cap.radius);
    if (t && *t < t_limit) return true;
  }
  for (const auto& disc : s.discs) {
    const auto t = ray_disc(o, d, disc.center, disc.normal, disc.radius);
    if (t && *t < t_limit) return true;
  }
  for (const auto& box : s.boxes) {
    const auto t = ray_aabb(o, d, box);
    if (t && *t < t_limit) return true;
  }
  return false;
}

struct Visibility {
  double fraction = 0.0;
  Vec3 centroid = Vec3::Zero();  // of the unoccluded samples
};

/// Fibonacci samples on the camera-facing hemisphere of the pepper. The
/// pattern is deterministic so visibility consumes no random numbers.
Visibility sample_visibility(const Soup& soup, const Vec3& origin,
                             const Vec3& c, double r, int plant, int pepper,
                             int n) {
  const Vec3 w = (origin - c).normalized();
  Vec3 ref = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = w.cross(ref).normalized();
  const Vec3 e2 = w.cross(e1);
  const double golden = spatial::kPi * (3.0 - std::sqrt(5.0));
  int vis = 0;
  Vec3 acc = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const double z = (i + 0.5) / n;
    const double rho = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    const Vec3 s =
        c + r * (z * w + rho * (std::cos(phi) * e1 + std::sin(phi) * e2));
    const Vec3 d = s - origin;
    if (!occluded_before(soup, origin, d, 1.0 - 1e-9, plant, pepper)) {
      ++vis;
      acc += s;
    }
  }
  Visibility out;
  out.fraction = double(vis) / double(n);
  out.centroid = vis > 0 ? Vec3(acc / vis) : c;
  return out;
}

}  // namespace

int World::total_peppers() const {
  int n = 0;
  for (const auto& p : plants) n += int(p.peppers.size());
  return n;
}

std::vector<int> World::per_row_counts() const {
  std::vector<int> counts(layout.rows.size(), 0);
  for (const auto& p : plants) counts[p.row] += int(p.peppers.size());
  return counts;
}

World generate_world(const GreenhouseLayout& layout,
                     const WorldGenParams& params, std::uint64_t seed) {
  if (params.peppers_min < 0 || params.peppers_min > params.peppers_max) {
    throw std::invalid_argument("empty peppers-per-side range");
  }
  const int total = layout.total_plants();
  if (params.fruiting_count < 0 || params.fruiting_count > total) {
    throw std::invalid_argument("fruiting_count outside [0, plant count]");
  }

  World w;
  w.layout = layout;
  for (const auto& row : layout.rows) {
    w.static_boxes.push_back(row.table);
    for (const auto& pot : row.pots) w.static_boxes.push_back(pot);
  }
  w.static_boxes.push_back(layout.workstation);

  random::Rng rng(seed);
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < params.fruiting_count; ++i) {
    std::swap(order[i], order[i + rng.uniform_int(0, total - 1 - i)]);
  }
  std::vector<char> fruiting(total, 0);
  for (int i = 0; i < params.fruiting_count; ++i) fruiting[order[i]] = 1;

  int global = 0;
  for (const auto& row : layout.rows) {
    for (std::size_t slot = 0; slot < row.plant_centers.size(); ++slot) {
      Plant plant;
      plant.row = row.id;
      plant.slot = int(slot);
      plant.volume = row.plant_volumes[slot];
      const Vec3 c = row.plant_centers[slot];
      const Vec3 half = 0.5 * plant.volume.size();
      const double ha = std::abs(row.axis.dot(half));
      const double hn = std::abs(row.normal.dot(half));
      const double hz = half.z();

      const Vec3 base(c.x(), c.y(), plant.volume.lo.z());
      const Vec3 mid =
          base + Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.30);
      const Vec3 top =
          mid + Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.25);
      plant.stem.push_back({base, mid, params.stem_radius});
      plant.stem.push_back({mid, top, params.stem_radius});

      // canopy in the inner shell of the volume
      const double leaf_a = std::max(ha - 0.06, 0.0);
      const double leaf_n =
          std::max(hn - params.pepper_radius - 0.08, 0.0);
      const double leaf_z = std::max(hz - 0.05, 0.0);
      for (int j = 0; j < params.leaves_per_plant; ++j) {
        LeafDisc leaf;
        leaf.center = c + row.axis * rng.uniform(-leaf_a, leaf_a) +
                      row.normal * rng.uniform(-leaf_n, leaf_n) +
                      Vec3(0.0, 0.0, rng.uniform(-leaf_z, leaf_z));
        Vec3 n(rng.gaussian(), rng.gaussian(), rng.gaussian());
        leaf.normal = n.norm() > 1e-9 ? Vec3(n.normalized()) : Vec3::UnitZ();
        leaf.radius = params.leaf_radius;
        plant.leaves.push_back(leaf);
      }

      if (fruiting[global]) {
        // fruit in the outer shell, facing the scan arcs on each side
        const double r = params.pepper_radius;
        const double pep_a = std::max(ha - r - 0.02, 0.0);
        const double pep_n_hi = std::max(hn - r, 0.0);
        const double pep_n_lo = std::max(pep_n_hi - 0.07, 0.0);
        const double pep_z = std::max(hz - r - 0.03, 0.0);
        for (const int side : {+1, -1}) {
          const int count = rng.uniform_int(params.peppers_min, params.peppers_max);
          for (int j = 0; j < count; ++j) {
            Vec3 pos;
            for (int attempt = 0; attempt < 200; ++attempt) {
              pos = c + row.axis * rng.uniform(-pep_a, pep_a) +
                    row.normal * (side * rng.uniform(pep_n_lo, pep_n_hi)) +
                    Vec3(0.0, 0.0, rng.uniform(-pep_z, pep_z));
              bool ok = true;
              for (const auto& other : plant.peppers) {
                if ((pos - other.center).norm() < params.pepper_min_separation) {
                  ok = false;
                  break;
                }
              }
              if (ok) break;
            }
            plant.peppers.push_back({pos, r, true, side});
          }
        }
      }
      w.plants.push_back(std::move(plant));
      ++global;
    }
  }
  return w;
}

DepthImage render_depth(const World& world, const Transform& pose,
                        const CameraIntrinsics& intr) {
  DepthImage img;
  img.width = intr.width;
  img.height = intr.height;
  img.depth.assign(std::size_t(intr.width) * intr.height, 0.0);
  img.pose = pose;
  const Soup soup = build_soup(world, pose.translation, intr.max_range + 0.5, true);
  const Vec3 o = pose.translation;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = pose.rotation * Vec3((u - intr.cx) / intr.fx,
                                            (v - intr.cy) / intr.fy, 1.0);
      const auto t = nearest_hit(soup, o, dir);
      if (t && *t <= intr.max_range) img.at(u, v) = *t;
    }
  }
  return img;
}

OrganizedCloud depth_to_pointcloud(const DepthImage& img,
                                   const CameraIntrinsics& intr) {
  if (img.width != intr.width || img.height != intr.height) {
    throw std::invalid_argument("depth image dimensions do not match intrinsics");
  }
  OrganizedCloud cloud;
  cloud.width = img.width;
  cloud.height = img.height;
  cloud.pose = img.pose;
  cloud.points.assign(img.depth.size(), Vec3::Zero());
  cloud.valid.assign(img.depth.size(), 0);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const double d = img.at(u, v);
      if (d <= 0.0) continue;
      const std::size_t idx = std::size_t(v) * img.width + u;
      cloud.points[idx] =
          Vec3((u - intr.cx) * d / intr.fx, (v - intr.cy) * d / intr.fy, d);
      cloud.valid[idx] = 1;
    }
  }
  return cloud;
}

Vec3 detection_to_3d(const PixelBox& bbox, const OrganizedCloud& cloud,
                     double pepper_radius) {
  std::vector<const Vec3*> inside;
  const int u_lo = std::max(0, int(std::ceil(bbox.u0 - 1e-9)));
  const int u_hi = std::min(cloud.width - 1, int(std::floor(bbox.u1 + 1e-9)));
  const int v_lo = std::max(0, int(std::ceil(bbox.v0 - 1e-9)));
  const int v_hi = std::min(cloud.height - 1, int(std::floor(bbox.v1 + 1e-9)));
  for (int v = v_lo; v <= v_hi; ++v) {
    for (int u = u_lo; u <= u_hi; ++u) {
      const std::size_t idx = std::size_t(v) * cloud.width + u;
      if (cloud.valid[idx]) inside.push_back(&cloud.points[idx]);
    }
  }
  if (inside.empty()) throw NoDepthError("no valid depth inside the box");

  std::vector<double> depths;
  depths.reserve(inside.size());
  for (const Vec3* p : inside) depths.push_back(p->z());
  std::sort(depths.begin(), depths.end());
  const double median = depths[(depths.size() - 1) / 2];
  const double cutoff = median + 2.0 * pepper_radius;

  Vec3 acc = Vec3::Zero();
  int n = 0;
  for (const Vec3* p : inside) {
    if (p->z() <= cutoff) {
      acc += *p;
      ++n;
    }
  }
  return cloud.pose * Vec3(acc / n);
}

double pepper_visibility(const World& world, const Vec3& origin,
                         int plant_index, int pepper_index, int samples) {
  const Plant& plant = world.plants.at(plant_index);
  const Pepper& pep = plant.peppers.at(pepper_index);
  const double reach = (origin - pep.center).norm() + 1.0;
  const Soup soup = build_soup(world, origin, reach, true);
  return sample_visibility(soup, origin, pep.center, pep.radius, plant_index,
                           pepper_index, samples)
      .fraction;
}

std::vector<Detection> simulate_detections(const World& world,
                                           const Transform& pose,
                                           const CameraIntrinsics& intr,
                                           const DetectorModel& model,
                                           random::Rng& rng, int frame_index) {
  std::vector<Detection> out;
  const Transform inv = pose.inverse();
  const Vec3 o = pose.translation;
  const Soup soup = build_soup(world, o, intr.max_range + 0.5, true);

  const auto noise_vec = [&]() {
    if (model.position_sigma <= 0.0) return Vec3(Vec3::Zero());
    while (true) {
      const Vec3 n(rng.gaussian(0.0, model.position_sigma),
                   rng.gaussian(0.0, model.position_sigma),
                   rng.gaussian(0.0, model.position_sigma));
      if (n.norm() <= 4.0 * model.position_sigma) return n;
    }
  };

  for (std::size_t i = 0; i < world.plants.size(); ++i) {
    const Plant& plant = world.plants[i];
    for (std::size_t k = 0; k < plant.peppers.size(); ++k) {
      const Pepper& pep = plant.peppers[k];
      if (!pep.ripe) continue;
      const Vec3 pc = inv * pep.center;
      if (pc.z() < 0.05 || pc.z() > intr.max_range) continue;
      const double u = intr.cx + intr.fx * pc.x() / pc.z();
      const double v = intr.cy + intr.fy * pc.y() / pc.z();
      if (u < 0.0 || u > intr.width - 1.0 || v < 0.0 || v > intr.height - 1.0)
        continue;
      const Visibility vis =
          sample_visibility(soup, o, pep.center, pep.radius, int(i), int(k),
                            model.visibility_samples);
      if (vis.fraction + 1e-12 < model.visibility_threshold) continue;
      if (rng.uniform() >= model.recall) continue;
      Detection det;
      det.point = vis.centroid + noise_vec();
      det.confidence = rng.uniform(model.confidence_min, model.confidence_max);
      det.frame = frame_index;
      det.camera_pose = pose;
      const double ru = intr.fx * pep.radius / pc.z();
      const double rv = intr.fy * pep.radius / pc.z();
      det.bbox = {u - ru, v - rv, u + ru, v + rv};
      out.push_back(det);
    }
  }

  const Soup background = build_soup(world, o, intr.max_range + 0.5, false);
  const int n_fp = rng.poisson(model.false_positive_rate);
  for (int j = 0; j < n_fp; ++j) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double u = rng.uniform(0.0, intr.width - 1.0);
      const double v = rng.uniform(0.0, intr.height - 1.0);
      const Vec3 dir = pose.rotation *
                       Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      const auto t = nearest_hit(background, o, dir);
      if (!t || *t > intr.max_range) continue;
      Detection det;
      det.point = o + *t * dir + noise_vec();
      det.confidence = rng.uniform(model.fp_confidence_min, model.fp_confidence_max);
      det.frame = frame_index;
      det.camera_pose = pose;
      det.bbox = {u - 3.0, v - 3.0, u + 3.0, v + 3.0};
      det.false_positive = true;
      out.push_back(det);
      break;
    }
  }
  return out;
}

std::vector<Transform> sample_camera_poses(const scanplan::Trajectory& traj,
                                           double frame_rate,
                                           const spatial::ArmModel& arm,
                                           const spatial::MountingConfig& mount) {
  if (frame_rate <= 0.0) throw std::invalid_argument("frame_rate must be > 0");
  if (traj.points.empty()) return {};
  const int count = int(std::floor(traj.t_end() * frame_rate + 1e-9)) + 1;
  std::vector<Transform> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const auto tp = traj.sample(double(k) / frame_rate);
    const auto rc = spatial::ReducedConfig::from_vector(tp.position);
    out.push_back(spatial::camera_pose(rc, arm, mount));
  }
  return out;
}

std::vector<Transform> sample_camera_poses(const vehicle::StateLog& log,
                                           double frame_rate,
                                           const spatial::ArmModel& arm,
                                           const spatial::MountingConfig& mount) {
  if (frame_rate <= 0.0) throw std::invalid_argument("frame_rate must be > 0");
  if (log.states.empty()) return {};
  const double t_end = log.states.back().t;
  const int count = int(std::floor(t_end * frame_rate + 1e-9)) + 1;
  const int last = int(log.states.size()) - 1;
  std::vector<Transform> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double t = double(k) / frame_rate;
    int idx = log.dt > 0.0 ? int(std::llround(t / log.dt)) : 0;
    idx = std::clamp(idx, 0, last);
    const auto& s = log.states[idx];
    const Transform t_wb{s.rotation, s.position};
    const Transform t_0ee = spatial::arm_fk(arm, spatial::ArmConfig{s.q});
    out.push_back(spatial::compose_chain(t_wb, mount.body_to_arm_base, t_0ee) *
                  mount.ee_to_camera);
  }
  return out;
}

namespace {

constexpr const char* kDetectionHeader =
    "frame,time,px,py,pz,qw,qx,qy,qz,x,y,z,confidence";

int parse_int(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw io::ParseError("bad integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string detections_to_csv(const std::vector<DetectionRecord>& records) {
  std::string out = std::string(kDetectionHeader) + "\n";
  for (const auto& r : records) {
    const Eigen::Quaterniond q(r.camera_pose.rotation);
    out += std::to_string(r.frame);
    out += ',';
    out += io::format_double(r.time);
    for (const double v : {r.camera_pose.translation.x(),
                           r.camera_pose.translation.y(),
                           r.camera_pose.translation.z(), q.w(), q.x(), q.y(),
                           q.z(), r.point.x(), r.point.y(), r.point.z(),
                           r.confidence}) {
      out += ',';
      out += io::format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<DetectionRecord> detections_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDetectionHeader) {
    throw io::ParseError("bad detection log header");
  }
  std::vector<DetectionRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = io::split(line, ',');
    if (f.size() != 13) {
      throw io::ParseError("detection row needs 13 fields, got " +
                           std::to_string(f.size()));
    }
    DetectionRecord r;
    r.frame = parse_int(f[0]);
    r.time = io::parse_double(f[1]);
    r.camera_pose.translation =
        Vec3(io::parse_double(f[2]), io::parse_double(f[3]), io::parse_double(f[4]));
    const Eigen::Quaterniond q(io::parse_double(f[5]), io::parse_double(f[6]),
                               io::parse_double(f[7]), io::parse_double(f[8]));
    r.camera_pose.rotation = q.normalized().toRotationMatrix();
    r.point = Vec3(io::parse_double(f[9]), io::parse_double(f[10]),
                   io::parse_double(f[11]));
    r.confidence = io::parse_double(f[12]);
    out.push_back(r);
  }
  return out;
}

std::string detections_to_json(const std::vector<DetectionRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    const Eigen::Quaterniond q(r.camera_pose.rotation);
    arr.push_back(
        {{"frame", r.frame},
         {"time", r.time},
         {"camera",
          {{"position",
            {r.camera_pose.translation.x(), r.camera_pose.translation.y(),
             r.camera_pose.translation.z()}},
           {"orientation", {q.w(), q.x(), q.y(), q.z()}}}},
         {"point", {r.point.x(), r.point.y(), r.point.z()}},
         {"confidence", r.confidence}});
  }
  return arr.dump(2);
}

std::vector<DetectionRecord> detections_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io::ParseError(e.what());
  }
  if (!arr.is_array()) throw io::ParseError("detection log must be a JSON array");
  std::vector<DetectionRecord> out;
  try {
    for (const auto& j : arr) {
      DetectionRecord r;
      r.frame = j.at("frame").get<int>();
      r.time = j.at("time").get<double>();
      const auto& pos = j.at("camera").at("position");
      r.camera_pose.translation = Vec3(pos.at(0), pos.at(1), pos.at(2));
      const auto& ori = j.at("camera").at("orientation");
      const Eigen::Quaterniond q(ori.at(0), ori.at(1), ori.at(2), ori.at(3));
      r.camera_pose.rotation = q.normalized().toRotationMatrix();
      const auto& pt = j.at("point");
      r.point = Vec3(pt.at(0), pt.at(1), pt.at(2));
      r.confidence = j.at("confidence").get<double>();
      out.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw io::ParseError(e.what());
  }
  return out;
}

}  // namespace gscout::worldsim
