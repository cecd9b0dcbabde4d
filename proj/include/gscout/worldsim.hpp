#pragma once

#include "gscout/layout.hpp"
#include "gscout/random.hpp"
#include "gscout/scanplan.hpp"
#include "gscout/spatial.hpp"
#include "gscout/vehicle.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gscout::worldsim {

using spatial::Transform;

/// Thrown by detection_to_3d when the box contains no valid depth.
struct NoDepthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CameraIntrinsics {
  int width = 640;
  int height = 480;
  double fx = 570.0;
  double fy = 570.0;
  double cx = 319.5;
  double cy = 239.5;
  double max_range = 5.0;  // m
};

// Ray intersection helpers: smallest t > 0 with o + t*d on the surface.
// The direction need not be unit length.
std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c,
                                 double r);
std::optional<double> ray_aabb(const Vec3& o, const Vec3& d, const Aabb& box);
std::optional<double> ray_disc(const Vec3& o, const Vec3& d, const Vec3& c,
                               const Vec3& n, double r);
std::optional<double> ray_capsule(const Vec3& o, const Vec3& d, const Vec3& a,
                                  const Vec3& b, double r);

struct StemSegment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.015;
};

struct LeafDisc {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double radius = 0.055;
};

struct Pepper {
  Vec3 center = Vec3::Zero();
  double radius = 0.04;
  bool ripe = true;
  int side = 0;  // +-1, sign along the row normal
};

struct Plant {
  int row = 0;
  int slot = 0;
  Aabb volume;
  std::vector<StemSegment> stem;
  std::vector<LeafDisc> leaves;
  std::vector<Pepper> peppers;
};

struct World {
  GreenhouseLayout layout;
  std::vector<Plant> plants;          // row-major over (row, slot)
  std::vector<Aabb> static_boxes;     // tables, pots, workstation

  int total_peppers() const;
  std::vector<int> per_row_counts() const;
};

struct WorldGenParams {
  int fruiting_count = 20;
  int peppers_min = 1;                // per plant side
  int peppers_max = 5;
  double pepper_radius = 0.04;
  double pepper_min_separation = 0.12;
  int leaves_per_plant = 12;
  double leaf_radius = 0.055;
  double stem_radius = 0.015;
};

/// Procedural greenhouse: every plant gets a stem and leaves; a random
/// subset of fruiting_count plants gets peppers, drawn per side. Peppers sit
/// in the outer shell of the plant volume (facing the aisles), leaves in the
/// inner shell, so fruit is mostly visible from the scan arcs while the
/// canopy occludes the interior.
World generate_world(const GreenhouseLayout& layout,
                     const WorldGenParams& params, std::uint64_t seed);

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // row-major z-depth, 0 = no return
  Transform pose;             // camera -> world

  double at(int u, int v) const { return depth[std::size_t(v) * width + u]; }
  double& at(int u, int v) { return depth[std::size_t(v) * width + u]; }
};

/// Per-pixel nearest hit against all world primitives. Depth is the
/// camera-frame z coordinate of the hit (z-buffer convention); pixels with
/// no hit inside max_range stay 0.
DepthImage render_depth(const World& world, const Transform& pose,
                        const CameraIntrinsics& intr);

struct OrganizedCloud {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;          // camera frame, aligned with the image
  std::vector<std::uint8_t> valid;
  Transform pose;
};

OrganizedCloud depth_to_pointcloud(const DepthImage& img,
                                   const CameraIntrinsics& intr);

struct PixelBox {
  double u0 = 0, v0 = 0, u1 = 0, v1 = 0;
};

/// Centroid of the valid in-box points after rejecting depths beyond the
/// in-box median plus two pepper radii, expressed in the world frame.
/// Throws NoDepthError when the box holds no valid point.
Vec3 detection_to_3d(const PixelBox& bbox, const OrganizedCloud& cloud,
                     double pepper_radius = 0.04);

struct DetectorModel {
  double recall = 0.8;
  double position_sigma = 0.01;       // m, truncated at 4 sigma
  double false_positive_rate = 0.2;   // Poisson mean per frame
  double visibility_threshold = 0.3;
  int visibility_samples = 32;
  double confidence_min = 0.5;
  double confidence_max = 1.0;
  double fp_confidence_min = 0.1;
  double fp_confidence_max = 0.6;
};

struct Detection {
  Vec3 point = Vec3::Zero();  // world frame
  double confidence = 1.0;
  int frame = 0;
  Transform camera_pose;
  PixelBox bbox;
  bool false_positive = false;
};

/// Fraction of camera-facing surface sample points of the given pepper that
/// are unoccluded from the origin. The pepper itself never occludes.
double pepper_visibility(const World& world, const Vec3& origin,
                         int plant_index, int pepper_index, int samples = 32);

/// Statistical detector: each ripe pepper in the frustum whose visibility
/// reaches the threshold is reported with probability `recall` at the
/// centroid of its visible surface samples plus isotropic Gaussian noise,
/// followed by Poisson false positives on non-pepper scene surfaces.
std::vector<Detection> simulate_detections(const World& world,
                                           const Transform& pose,
                                           const CameraIntrinsics& intr,
                                           const DetectorModel& model,
                                           random::Rng& rng,
                                           int frame_index = 0);

/// Camera poses at 1/frame_rate spacing along a planned trajectory
/// (frame count = floor(t_end * rate) + 1).
std::vector<Transform> sample_camera_poses(const scanplan::Trajectory& traj,
                                           double frame_rate,
                                           const spatial::ArmModel& arm,
                                           const spatial::MountingConfig& mount);

/// Same over a simulation log, using the nearest logged state per frame and
/// the full (rolled/pitched) body pose.
std::vector<Transform> sample_camera_poses(const vehicle::StateLog& log,
                                           double frame_rate,
                                           const spatial::ArmModel& arm,
                                           const spatial::MountingConfig& mount);

struct DetectionRecord {
  int frame = 0;
  double time = 0.0;
  Transform camera_pose;
  Vec3 point = Vec3::Zero();
  double confidence = 1.0;
};

std::string detections_to_csv(const std::vector<DetectionRecord>& records);
std::vector<DetectionRecord> detections_from_csv(std::istream& in);
std::string detections_to_json(const std::vector<DetectionRecord>& records);
std::vector<DetectionRecord> detections_from_json(const std::string& text);

}  // namespace gscout::worldsim
