#pragma once

#include "gscout/layout.hpp"
#include "gscout/spatial.hpp"

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gscout::scanplan {

using spatial::ReducedConfig;
using spatial::TrajectoryPoint;
using spatial::Vec3;
using spatial::Vec7;

struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Time parameterization failed; `stage` is the path grid index at which no
/// admissible squared path velocity exists.
struct ToppError : std::runtime_error {
  int stage;
  ToppError(const std::string& msg, int stage_) : std::runtime_error(msg), stage(stage_) {}
};

struct ScanParams {
  double semi_axis_along = 0.30;            // a, along the row axis
  double semi_axis_across = 1.40;           // b, standoff from the row plane
  int waypoints_per_side = 8;
  std::array<double, 2> height_offsets{{-0.10, 0.25}};  // relative to plant center
  double pitch_amplitude = 20.0 * spatial::kPi / 180.0;
  double arc_begin = 50.0 * spatial::kPi / 180.0;   // side arc span, measured
  double arc_end = 130.0 * spatial::kPi / 180.0;    // from the row axis
  double transit_clearance = 1.0;           // beyond the outer table end
  double uav_radius = 0.6;
  double corner_split_angle = 60.0 * spatial::kPi / 180.0;
};

enum class Side { Left, Right, Full };

/// Waypoint sequence in the reduced configuration space.
struct Path {
  std::vector<ReducedConfig> waypoints;
};

/// Scan waypoints around one plant. Side arcs sweep the configured angular
/// span at one height level with the camera yawed at the plant; the full
/// ellipse circles the plant (only collision-free for isolated plants).
/// Throws PlanningError when a waypoint enters another plant's inflated
/// volume or leaves the layout bounds.
Path plan_plant_ellipse(const worldsim::RowLayout& row, int plant_index,
                        const ScanParams& params,
                        const worldsim::GreenhouseLayout& layout,
                        Side side, int height_level = 0, bool reverse = false,
                        int pitch_parity = 0);

/// Full scan of one row: outbound sweep on the left side, transit around the
/// outer end, return sweep on the right side. Height levels alternate per
/// plant and flip between sides so every plant is covered at both levels.
/// The interpolated path is collision-checked against the whole layout
/// inflated by uav_radius.
Path plan_row(const worldsim::RowLayout& row,
              const worldsim::GreenhouseLayout& layout,
              const ScanParams& params);

/// C2 cubic spline through the waypoints, chord-length parameterized and
/// clamped (zero derivative) at section ends. Sections are split where the
/// spatial turn angle between consecutive segments exceeds the threshold, so
/// sharp corners are taken at rest. Yaw is unwrapped to the shortest arc.
class GeometricPath {
 public:
  struct Section {
    std::vector<double> knots;               // in [0, 1]
    std::vector<std::array<Vec7, 4>> coef;   // per segment: a + b u + c u^2 + d u^3
    double chord = 0.0;

    Vec7 eval(double s) const;
    Vec7 deriv(double s) const;
    Vec7 deriv2(double s) const;

   private:
    int segment(double s) const;
  };

  const std::vector<Section>& sections() const { return sections_; }

  static GeometricPath build(const Path& path, double corner_split_angle);

 private:
  std::vector<Section> sections_;
};

/// Convenience wrapper over GeometricPath::build.
GeometricPath interpolate_path(const Path& path,
                               double corner_split_angle = 60.0 * spatial::kPi / 180.0);

struct KinodynamicLimits {
  Vec7 v_max;
  Vec7 a_max;
  static KinodynamicLimits defaults();
};

/// Time-parameterized trajectory, sampled at fixed dt plus an exact final
/// sample at t_end.
struct Trajectory {
  double dt = 0.01;
  std::vector<double> times;
  std::vector<TrajectoryPoint> points;

  double t_end() const { return times.empty() ? 0.0 : times.back(); }

  /// Linear interpolation between samples; t clamped to [0, t_end].
  TrajectoryPoint sample(double t) const;

  std::string to_csv() const;
  static Trajectory from_csv(std::istream& in);
};

/// TOPP-RA over the squared path velocity x = s_dot^2: a backward pass
/// computes the controllable upper bound per grid point (bisection on the
/// one-step feasibility predicate), a greedy forward pass integrates at
/// maximum admissible acceleration. Velocity and acceleration limits are
/// enforced per degree of freedom; each section starts and ends at rest.
Trajectory topp_ra(const GeometricPath& gpath, const KinodynamicLimits& limits,
                   int grid_n = 200, double dt = 0.01);

/// Minimum clearance between the interpolated path and the layout obstacle
/// volumes, sampled densely per section.
double path_clearance(const GeometricPath& gpath,
                      const worldsim::GreenhouseLayout& layout,
                      int samples_per_section = 200);

}  // namespace gscout::scanplan
