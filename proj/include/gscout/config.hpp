#pragma once

#include "gscout/layout.hpp"
#include "gscout/mission.hpp"
#include "gscout/scanplan.hpp"
#include "gscout/vehicle.hpp"
#include "gscout/worldsim.hpp"
#include "gscout/yieldcount.hpp"

#include <cstdint>
#include <string>

namespace gscout::config {

/// Everything a scenario run needs, with the greenhouse default scenario as
/// the defaults. One master seed fans out to the per-stage seeds via
/// random::derive_seed with fixed stage tags.
struct ScenarioConfig {
  worldsim::LayoutParams layout;
  worldsim::WorldGenParams world;
  scanplan::ScanParams scan;
  scanplan::KinodynamicLimits limits = scanplan::KinodynamicLimits::defaults();
  vehicle::VehicleParams vehicle;
  vehicle::ControlGains gains;
  worldsim::CameraIntrinsics camera;
  worldsim::DetectorModel detector;
  yieldcount::CountingParams counting;
  mission::SolveConfig mission_ga;       // seed field is ignored; derived instead
  mission::MissionGenParams harvest;

  double frame_rate = 10.0;              // Hz, detector frames along the scan
  bool use_tracking = true;              // false: detect from planned poses
  double tracking_dt = 1e-3;             // s, closed-loop integration step
  double trajectory_dt = 0.01;           // s, trajectory sample spacing
  int topp_grid = 200;
  double rms_threshold = 0.05;           // m, tracking gate per row
  std::uint64_t seed = 0;                // master seed
};

/// Stage tags used to derive per-stage seeds from the master seed.
inline constexpr const char* kSeedWorld = "world";
inline constexpr const char* kSeedSense = "sense";
inline constexpr const char* kSeedCount = "count";
inline constexpr const char* kSeedMission = "mission";

std::string to_json(const ScenarioConfig& cfg);

/// Parses a scenario. Every key is optional and falls back to the default;
/// unknown keys anywhere raise io::ParseError naming the section.
ScenarioConfig from_json(const std::string& text);

/// Range checks across all sections (positive rates, sane dimensions).
void validate(const ScenarioConfig& cfg);

}  // namespace gscout::config
