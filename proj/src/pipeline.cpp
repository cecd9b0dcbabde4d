#include "gscout/pipeline.hpp"

#include "gscout/ioutil.hpp"
#include "gscout/logging.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace gscout::pipeline {

namespace {

using nlohmann::json;
using spatial::Transform;
using spatial::Vec3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("io", "cannot write " + path.string());
  out << content;
}

std::string truth_csv(const worldsim::World& world) {
  std::string out = "row,slot,side,x,y,z,radius,ripe\n";
  for (const auto& plant : world.plants) {
    for (const auto& pepper : plant.peppers) {
      out += std::to_string(plant.row) + ',' + std::to_string(plant.slot) + ',' +
             std::to_string(pepper.side) + ',' + io::format_double(pepper.center.x()) +
             ',' + io::format_double(pepper.center.y()) + ',' +
             io::format_double(pepper.center.z()) + ',' +
             io::format_double(pepper.radius) + ',' + (pepper.ripe ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string path_csv(const scanplan::Path& path) {
  std::string out = "x,y,z,yaw,q1,q2,q3\n";
  for (const auto& wp : path.waypoints) {
    const auto v = wp.to_vector();
    for (int i = 0; i < 7; ++i) {
      out += io::format_double(v[i]);
      out += i + 1 < 7 ? ',' : '\n';
    }
  }
  return out;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

std::vector<PlannedRow> plan_rows(const config::ScenarioConfig& cfg) {
  const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
  std::vector<PlannedRow> out;
  out.reserve(layout.rows.size());
  for (const auto& row : layout.rows) {
    PlannedRow planned;
    planned.row = row.id;
    planned.path = scanplan::plan_row(row, layout, cfg.scan);
    const auto gpath =
        scanplan::interpolate_path(planned.path, cfg.scan.corner_split_angle);
    planned.trajectory =
        scanplan::topp_ra(gpath, cfg.limits, cfg.topp_grid, cfg.trajectory_dt);
    logging::debug("planned row " + std::to_string(row.id) + ": " +
                   std::to_string(planned.path.waypoints.size()) + " waypoints, " +
                   io::format_double(planned.trajectory.t_end()) + " s");
    out.push_back(std::move(planned));
  }
  return out;
}

std::vector<worldsim::DetectionRecord> sense_poses(
    const config::ScenarioConfig& cfg, const worldsim::World& world,
    const std::vector<Transform>& poses, random::Rng& rng, int frame_offset,
    double time_offset) {
  std::vector<worldsim::DetectionRecord> records;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const int frame = frame_offset + int(k);
    const double time = time_offset + double(k) / cfg.frame_rate;
    const auto dets = worldsim::simulate_detections(world, poses[k], cfg.camera,
                                                   cfg.detector, rng, frame);
    for (const auto& det : dets) {
      worldsim::DetectionRecord rec;
      rec.frame = frame;
      rec.time = time;
      rec.camera_pose = poses[k];
      rec.point = det.point;
      rec.confidence = det.confidence;
      records.push_back(rec);
    }
  }
  return records;
}

std::vector<worldsim::DetectionRecord> sense_trajectory(
    const config::ScenarioConfig& cfg, const worldsim::World& world,
    const scanplan::Trajectory& traj, random::Rng& rng, int frame_offset,
    double time_offset) {
  const auto arm = spatial::ArmModel::planar_default();
  const auto mount = spatial::MountingConfig::defaults();
  std::vector<Transform> poses;
  if (cfg.use_tracking) {
    const auto log =
        vehicle::simulate_tracking(traj, cfg.vehicle, cfg.gains, cfg.tracking_dt);
    poses = worldsim::sample_camera_poses(log, cfg.frame_rate, arm, mount);
  } else {
    poses = worldsim::sample_camera_poses(traj, cfg.frame_rate, arm, mount);
  }
  return sense_poses(cfg, world, poses, rng, frame_offset, time_offset);
}

CountReport count_detections(const config::ScenarioConfig& cfg,
                             const std::vector<worldsim::DetectionRecord>& records,
                             const worldsim::GreenhouseLayout& layout) {
  random::Rng rng(random::derive_seed(cfg.seed, config::kSeedCount));
  const auto split = yieldcount::split_by_row(records, layout, cfg.counting);

  CountReport report;
  std::vector<std::vector<int>> tally(layout.rows.size());
  for (std::size_t r = 0; r < layout.rows.size(); ++r) {
    const auto& row = layout.rows[r];
    tally[r].assign(row.plant_centers.size(), 0);
    auto rc = yieldcount::count_row(split[r], row, cfg.counting, rng);
    for (const auto& center : rc.centers) {
      std::size_t slot = 0;
      for (std::size_t p = 1; p < row.plant_centers.size(); ++p) {
        if ((center - row.plant_centers[p]).norm() <
            (center - row.plant_centers[slot]).norm()) {
          slot = p;
        }
      }
      ++tally[r][slot];
    }
    report.total += rc.count;
    report.rows.push_back(std::move(rc));
  }
  for (std::size_t r = 0; r < tally.size(); ++r) {
    for (std::size_t p = 0; p < tally[r].size(); ++p) {
      if (tally[r][p] == 0) continue;
      mission::PlantYield y;
      y.row = int(r);
      y.slot = int(p);
      y.location = layout.rows[r].plant_centers[p];
      y.count = tally[r][p];
      report.plants.push_back(y);
    }
  }
  return report;
}

std::string count_report_to_json(const CountReport& report) {
  json j;
  j["total"] = report.total;
  j["rows"] = json::array();
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& rc = report.rows[r];
    json centers = json::array();
    for (const auto& c : rc.centers) centers.push_back({c.x(), c.y(), c.z()});
    j["rows"].push_back({{"row", int(r)},
                         {"count", rc.count},
                         {"n_init", rc.n_init},
                         {"min_pts", rc.min_pts},
                         {"undefined", rc.undefined},
                         {"centers", std::move(centers)}});
  }
  j["plants"] = json::array();
  for (const auto& y : report.plants) {
    j["plants"].push_back({{"row", y.row},
                           {"slot", y.slot},
                           {"location", {y.location.x(), y.location.y(), y.location.z()}},
                           {"count", y.count}});
  }
  return j.dump(2);
}

CountReport count_report_from_json(const std::string& text) {
  CountReport report;
  try {
    const json j = json::parse(text);
    report.total = j.at("total").get<int>();
    for (const auto& jr : j.at("rows")) {
      yieldcount::RowCount rc;
      rc.count = jr.at("count").get<int>();
      rc.n_init = jr.at("n_init").get<int>();
      rc.min_pts = jr.at("min_pts").get<int>();
      rc.undefined = jr.at("undefined").get<int>();
      for (const auto& c : jr.at("centers")) {
        rc.centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>(),
                                c.at(2).get<double>());
      }
      report.rows.push_back(std::move(rc));
    }
    for (const auto& jp : j.at("plants")) {
      mission::PlantYield y;
      y.row = jp.at("row").get<int>();
      y.slot = jp.at("slot").get<int>();
      y.location = Vec3(jp.at("location").at(0).get<double>(),
                        jp.at("location").at(1).get<double>(),
                        jp.at("location").at(2).get<double>());
      y.count = jp.at("count").get<int>();
      report.plants.push_back(y);
    }
  } catch (const json::exception& e) {
    throw io::ParseError(e.what());
  }
  return report;
}

std::string report_to_json(const RunReport& report, bool include_timings) {
  json j;
  j["rows"] = json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back(
        {{"row", row.row}, {"truth", row.truth}, {"estimate", row.estimate}});
  }
  j["truth_total"] = report.truth_total;
  j["estimate_total"] = report.estimate_total;
  j["absolute_error"] = report.absolute_error;
  j["relative_error"] = report.relative_error;
  j["total_scan_time"] = report.total_scan_time;
  j["max_velocity_ratio"] = report.max_velocity_ratio;
  j["max_acceleration_ratio"] = report.max_acceleration_ratio;
  j["tracking_rms"] = report.tracking_rms;
  j["frames"] = report.frames;
  j["detections"] = report.detections;
  j["mission_makespan"] = report.mission_makespan;
  j["mission_feasible"] = report.mission_feasible;
  j["seeds"] = {{"master", report.master_seed},
                {"world", report.world_seed},
                {"sense", report.sense_seed},
                {"count", report.count_seed},
                {"mission", report.mission_seed}};
  if (include_timings) {
    j["timings"] = {{"world", report.timings.world},   {"plan", report.timings.plan},
                    {"track", report.timings.track},   {"sense", report.timings.sense},
                    {"count", report.timings.count},   {"mission", report.timings.mission},
                    {"total", report.timings.total}};
  }
  return j.dump(2);
}

RunReport run_pipeline(const config::ScenarioConfig& cfg, const std::string& out_dir) {
  const auto t_total = std::chrono::steady_clock::now();
  stage("config", [&] { config::validate(cfg); });

  const bool emit = !out_dir.empty();
  const std::filesystem::path out(out_dir);
  if (emit) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw StageError("io", "cannot create " + out.string());
    write_file(out / "config.json", config::to_json(cfg));
  }

  RunReport report;
  report.master_seed = cfg.seed;
  report.world_seed = random::derive_seed(cfg.seed, config::kSeedWorld);
  report.sense_seed = random::derive_seed(cfg.seed, config::kSeedSense);
  report.count_seed = random::derive_seed(cfg.seed, config::kSeedCount);
  report.mission_seed = random::derive_seed(cfg.seed, config::kSeedMission);

  const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);

  logging::info("stage world");
  auto t0 = std::chrono::steady_clock::now();
  const auto world = stage("world", [&] {
    return worldsim::generate_world(layout, cfg.world, report.world_seed);
  });
  report.timings.world = seconds_since(t0);
  if (emit) write_file(out / "truth.csv", truth_csv(world));

  logging::info("stage plan");
  t0 = std::chrono::steady_clock::now();
  const auto planned = stage("plan", [&] { return plan_rows(cfg); });
  for (const auto& row : planned) {
    report.total_scan_time += row.trajectory.t_end();
    for (const auto& pt : row.trajectory.points) {
      for (int i = 0; i < 7; ++i) {
        report.max_velocity_ratio = std::max(
            report.max_velocity_ratio, std::abs(pt.velocity[i]) / cfg.limits.v_max[i]);
        report.max_acceleration_ratio =
            std::max(report.max_acceleration_ratio,
                     std::abs(pt.acceleration[i]) / cfg.limits.a_max[i]);
      }
    }
    if (emit) {
      const auto tag = std::to_string(row.row);
      write_file(out / ("path_row" + tag + ".csv"), path_csv(row.path));
      write_file(out / ("trajectory_row" + tag + ".csv"), row.trajectory.to_csv());
    }
  }
  report.timings.plan = seconds_since(t0);

  std::vector<vehicle::StateLog> logs;
  if (cfg.use_tracking) {
    logging::info("stage track");
    t0 = std::chrono::steady_clock::now();
    report.tracking_rms = 0.0;
    for (const auto& row : planned) {
      const auto log = stage("track", [&] {
        return vehicle::simulate_tracking(row.trajectory, cfg.vehicle, cfg.gains,
                                          cfg.tracking_dt);
      });
      const double rms = vehicle::tracking_rms(log, row.trajectory);
      logging::debug("row " + std::to_string(row.row) + " tracking rms " +
                     io::format_double(rms));
      if (rms > cfg.rms_threshold) {
        throw StageError("track", "row " + std::to_string(row.row) + " rms " +
                                      io::format_double(rms) + " exceeds threshold " +
                                      io::format_double(cfg.rms_threshold));
      }
      report.tracking_rms = std::max(report.tracking_rms, rms);
      if (emit) {
        write_file(out / ("tracking_row" + std::to_string(row.row) + ".csv"),
                   log.to_csv());
      }
      logs.push_back(std::move(log));
    }
    report.timings.track = seconds_since(t0);
  }

  logging::info("stage sense");
  t0 = std::chrono::steady_clock::now();
  const auto arm = spatial::ArmModel::planar_default();
  const auto mount = spatial::MountingConfig::defaults();
  random::Rng sense_rng(report.sense_seed);
  std::vector<worldsim::DetectionRecord> records;
  int frame_offset = 0;
  double time_offset = 0.0;
  for (std::size_t i = 0; i < planned.size(); ++i) {
    const auto poses = stage("sense", [&] {
      return cfg.use_tracking
                 ? worldsim::sample_camera_poses(logs[i], cfg.frame_rate, arm, mount)
                 : worldsim::sample_camera_poses(planned[i].trajectory, cfg.frame_rate,
                                                 arm, mount);
    });
    auto rows_records = stage("sense", [&] {
      return sense_poses(cfg, world, poses, sense_rng, frame_offset, time_offset);
    });
    records.insert(records.end(), rows_records.begin(), rows_records.end());
    frame_offset += int(poses.size());
    time_offset += planned[i].trajectory.t_end();
  }
  report.frames = frame_offset;
  report.detections = int(records.size());
  report.timings.sense = seconds_since(t0);
  if (emit) write_file(out / "detections.csv", worldsim::detections_to_csv(records));

  logging::info("stage count");
  t0 = std::chrono::steady_clock::now();
  const auto counts =
      stage("count", [&] { return count_detections(cfg, records, layout); });
  report.timings.count = seconds_since(t0);
  if (emit) write_file(out / "counts.json", count_report_to_json(counts));

  const auto truth_rows = world.per_row_counts();
  for (std::size_t r = 0; r < layout.rows.size(); ++r) {
    RowReport row;
    row.row = int(r);
    row.truth = truth_rows[r];
    row.estimate = counts.rows[r].count;
    report.rows.push_back(row);
    report.truth_total += row.truth;
    report.estimate_total += row.estimate;
  }
  report.absolute_error = std::abs(report.estimate_total - report.truth_total);
  report.relative_error = report.truth_total > 0
                              ? double(report.absolute_error) / report.truth_total
                              : 0.0;

  logging::info("stage mission");
  t0 = std::chrono::steady_clock::now();
  const auto schedule = stage("mission", [&] {
    const auto prob = mission::actions_from_counts(counts.plants, layout, cfg.harvest);
    auto ga = cfg.mission_ga;
    ga.seed = report.mission_seed;
    if (emit) write_file(out / "mission.json", mission::problem_to_json(prob));
    return mission::solve(prob, ga);
  });
  report.mission_makespan = schedule.makespan;
  report.mission_feasible = schedule.feasible;
  report.timings.mission = seconds_since(t0);
  if (emit) {
    write_file(out / "schedule.json", mission::schedule_to_json(schedule));
    write_file(out / "schedule.csv", mission::schedule_to_csv(schedule));
  }

  report.timings.total = seconds_since(t_total);
  if (emit) write_file(out / "report.json", report_to_json(report));
  logging::info("run complete: truth " + std::to_string(report.truth_total) +
                ", estimate " + std::to_string(report.estimate_total));
  return report;
}

}  // namespace gscout::pipeline
