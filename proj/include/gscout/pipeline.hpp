#pragma once

#include "gscout/config.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gscout::pipeline {

/// Any failure inside run_pipeline, tagged with the stage that raised it.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(const std::string& stage_, const std::string& msg)
      : std::runtime_error(stage_ + ": " + msg), stage(stage_) {}
};

struct RowReport {
  int row = 0;
  int truth = 0;
  int estimate = 0;
};

struct RunReport {
  std::vector<RowReport> rows;
  int truth_total = 0;
  int estimate_total = 0;
  int absolute_error = 0;
  double relative_error = 0.0;       // |est - truth| / truth when truth > 0
  double total_scan_time = 0.0;      // summed row trajectory durations, s
  double max_velocity_ratio = 0.0;   // worst |v| / v_max over all samples
  double max_acceleration_ratio = 0.0;
  double tracking_rms = -1.0;        // worst row RMS, m; -1 without tracking
  int frames = 0;
  int detections = 0;
  double mission_makespan = 0.0;
  bool mission_feasible = true;
  std::uint64_t master_seed = 0;
  std::uint64_t world_seed = 0;
  std::uint64_t sense_seed = 0;
  std::uint64_t count_seed = 0;
  std::uint64_t mission_seed = 0;

  struct Timings {
    double world = 0.0;
    double plan = 0.0;
    double track = 0.0;
    double sense = 0.0;
    double count = 0.0;
    double mission = 0.0;
    double total = 0.0;
  };
  Timings timings;
};

/// Alphabetically keyed JSON; with include_timings = false the output of two
/// identical runs is byte-identical.
std::string report_to_json(const RunReport& report, bool include_timings = true);

struct PlannedRow {
  int row = 0;
  scanplan::Path path;
  scanplan::Trajectory trajectory;
};

/// Scan plan and time parameterization for every row.
std::vector<PlannedRow> plan_rows(const config::ScenarioConfig& cfg);

/// Detector frames at the given camera poses. Frame indices and times are
/// shifted by the offsets so multi-row logs stay monotonic.
std::vector<worldsim::DetectionRecord> sense_poses(
    const config::ScenarioConfig& cfg, const worldsim::World& world,
    const std::vector<spatial::Transform>& poses, random::Rng& rng,
    int frame_offset = 0, double time_offset = 0.0);

/// Same along one trajectory, with the camera poses taken from a closed-loop
/// tracking run or from the plan itself per the config flag.
std::vector<worldsim::DetectionRecord> sense_trajectory(
    const config::ScenarioConfig& cfg, const worldsim::World& world,
    const scanplan::Trajectory& traj, random::Rng& rng, int frame_offset = 0,
    double time_offset = 0.0);

struct CountReport {
  std::vector<yieldcount::RowCount> rows;
  std::vector<mission::PlantYield> plants;  // fruiting plants only
  int total = 0;
};

/// Row splitting and per-row counting; cluster centers are attributed to the
/// nearest plant slot. The stage seed is derived internally from the master
/// seed, so equal inputs give bit-equal results in or out of process.
CountReport count_detections(const config::ScenarioConfig& cfg,
                             const std::vector<worldsim::DetectionRecord>& records,
                             const worldsim::GreenhouseLayout& layout);

std::string count_report_to_json(const CountReport& report);
CountReport count_report_from_json(const std::string& text);

/// The whole scenario: world, plan, (optional) tracking, sensing, counting,
/// mission. Artifacts land in out_dir when it is non-empty.
RunReport run_pipeline(const config::ScenarioConfig& cfg,
                       const std::string& out_dir = "");

}  // namespace gscout::pipeline
