#include "gscout/pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gscout/ioutil.hpp"

using namespace gscout;
using spatial::Vec3;

namespace {

namespace fs = std::filesystem;

/// Single-column scenario without tracking: fast enough for unit tests while
/// still exercising every stage.
config::ScenarioConfig small_scenario() {
  config::ScenarioConfig cfg;
  cfg.layout.columns = 1;
  cfg.layout.rows_per_column = 2;
  cfg.world.fruiting_count = 5;
  cfg.use_tracking = false;
  cfg.mission_ga.agents = 2;
  cfg.mission_ga.population = 16;
  cfg.mission_ga.generations = 40;
  cfg.seed = 11;
  return cfg;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config serialization round trips") {
  config::ScenarioConfig cfg;
  cfg.seed = 1234;
  cfg.world.fruiting_count = 7;
  cfg.scan.semi_axis_across = 1.25;
  cfg.detector.recall = 0.9;
  cfg.counting.eps = 0.05;
  cfg.mission_ga.population = 32;
  cfg.frame_rate = 5.0;
  cfg.use_tracking = false;
  cfg.gains.pos_p = Vec3(10, 11, 12);
  cfg.limits.v_max[3] = 2.5;

  const auto back = config::from_json(config::to_json(cfg));
  CHECK(back.seed == cfg.seed);
  CHECK(back.world.fruiting_count == 7);
  CHECK(back.scan.semi_axis_across == 1.25);
  CHECK(back.detector.recall == 0.9);
  CHECK(back.counting.eps == 0.05);
  CHECK(back.mission_ga.population == 32);
  CHECK(back.frame_rate == 5.0);
  CHECK(back.use_tracking == false);
  CHECK(back.gains.pos_p == Vec3(10, 11, 12));
  CHECK(back.limits.v_max[3] == 2.5);
  // the round trip of the round trip is byte-stable
  CHECK(config::to_json(back) == config::to_json(cfg));
}

TEST_CASE("config parsing accepts partial files and rejects unknown keys") {
  const auto partial = config::from_json(R"({"world": {"fruiting_count": 3}})");
  CHECK(partial.world.fruiting_count == 3);
  CHECK(partial.world.peppers_max == 5);  // untouched default

  CHECK_THROWS_AS(config::from_json("{"), io::ParseError);
  CHECK_THROWS_AS(config::from_json(R"({"worlds": {}})"), io::ParseError);
  CHECK_THROWS_AS(config::from_json(R"({"world": {"fruiting": 3}})"), io::ParseError);
  CHECK_THROWS_AS(config::from_json(R"({"frame_rate": 10})"), io::ParseError);
  CHECK_THROWS_AS(config::from_json(R"({"gains": {"pos_p": [1, 2]}})"), io::ParseError);
  CHECK_THROWS_AS(config::from_json(R"({"limits": {"v_max": [1,1,1,1,1,1]}})"),
                  io::ParseError);

  // unknown-key errors carry the offending key and section
  try {
    config::from_json(R"({"detector": {"recal": 0.9}})");
    FAIL("expected a parse error");
  } catch (const io::ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("recal") != std::string::npos);
    CHECK(msg.find("detector") != std::string::npos);
  }
}

TEST_CASE("config validation rejects inconsistent scenarios") {
  config::ScenarioConfig cfg;
  cfg.world.fruiting_count = 33;  // more than 2*4*4 plants
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);

  cfg = config::ScenarioConfig{};
  cfg.frame_rate = 0.0;
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);

  cfg = config::ScenarioConfig{};
  cfg.counting.eps = -1.0;
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);

  CHECK_NOTHROW(config::validate(config::ScenarioConfig{}));
}

TEST_CASE("stage seeds derive deterministically and distinctly") {
  const std::uint64_t master = 99;
  const auto w = random::derive_seed(master, config::kSeedWorld);
  CHECK(w == random::derive_seed(master, config::kSeedWorld));
  const auto s = random::derive_seed(master, config::kSeedSense);
  const auto c = random::derive_seed(master, config::kSeedCount);
  const auto m = random::derive_seed(master, config::kSeedMission);
  CHECK(w != s);
  CHECK(w != c);
  CHECK(w != m);
  CHECK(s != c);
  CHECK(s != m);
  CHECK(c != m);
  CHECK(w != random::derive_seed(master + 1, config::kSeedWorld));
}

TEST_CASE("plan_rows parameterizes every row within the limits") {
  auto cfg = small_scenario();
  const auto planned = pipeline::plan_rows(cfg);
  REQUIRE(planned.size() == 2);
  for (const auto& row : planned) {
    CHECK(row.path.waypoints.size() > 10);
    CHECK(row.trajectory.t_end() > 10.0);
    for (const auto& pt : row.trajectory.points) {
      for (int i = 0; i < 7; ++i) {
        CHECK(std::abs(pt.velocity[i]) <= cfg.limits.v_max[i] + 1e-6);
        CHECK(std::abs(pt.acceleration[i]) <= cfg.limits.a_max[i] * 1.05);
      }
    }
  }

  // frame fencepost for the sensing chain
  const auto arm = spatial::ArmModel::planar_default();
  const auto mount = spatial::MountingConfig::defaults();
  const auto poses = worldsim::sample_camera_poses(planned[0].trajectory,
                                                   cfg.frame_rate, arm, mount);
  const auto expected =
      std::size_t(std::floor(planned[0].trajectory.t_end() * cfg.frame_rate + 1e-9)) + 1;
  CHECK(poses.size() == expected);
}

TEST_CASE("zero fruiting plants give an all-zero report and empty mission") {
  auto cfg = small_scenario();
  cfg.world.fruiting_count = 0;
  cfg.detector.false_positive_rate = 0.0;
  const auto report = pipeline::run_pipeline(cfg);
  CHECK(report.truth_total == 0);
  CHECK(report.estimate_total == 0);
  CHECK(report.absolute_error == 0);
  CHECK(report.relative_error == 0.0);
  CHECK(report.detections == 0);
  CHECK(report.mission_makespan == 0.0);
  CHECK(report.mission_feasible);
  for (const auto& row : report.rows) {
    CHECK(row.truth == 0);
    CHECK(row.estimate == 0);
  }
}

TEST_CASE("pipeline reports are byte-identical for a fixed seed") {
  const auto cfg = small_scenario();
  const auto a = pipeline::run_pipeline(cfg);
  const auto b = pipeline::run_pipeline(cfg);
  CHECK(pipeline::report_to_json(a, false) == pipeline::report_to_json(b, false));
  CHECK(a.truth_total > 0);
  CHECK(a.frames > 0);
  CHECK(a.detections > 0);

  auto other = cfg;
  other.seed = cfg.seed + 1;
  const auto c = pipeline::run_pipeline(other);
  CHECK(pipeline::report_to_json(a, false) != pipeline::report_to_json(c, false));
}

TEST_CASE("report serialization includes timings only on request") {
  pipeline::RunReport report;
  report.truth_total = 5;
  report.timings.total = 1.5;
  const auto with = pipeline::report_to_json(report, true);
  const auto without = pipeline::report_to_json(report, false);
  CHECK(with.find("timings") != std::string::npos);
  CHECK(without.find("timings") == std::string::npos);
  CHECK(without.find("truth_total") != std::string::npos);
}

TEST_CASE("artifacts on disk reproduce the in-process count bit-exactly") {
  TempDir dir("gscout_pipeline_artifacts");
  const auto cfg = small_scenario();
  const auto report = pipeline::run_pipeline(cfg, dir.path.string());

  for (const char* name :
       {"config.json", "truth.csv", "detections.csv", "counts.json", "mission.json",
        "schedule.json", "schedule.csv", "report.json", "path_row0.csv",
        "trajectory_row0.csv", "path_row1.csv", "trajectory_row1.csv"}) {
    CHECK_MESSAGE(fs::exists(dir.path / name), name);
  }

  // the emitted config re-parses to the same scenario
  const auto cfg_back = config::from_json(slurp(dir.path / "config.json"));
  CHECK(config::to_json(cfg_back) == config::to_json(cfg));

  // count on the detection file matches the emitted counts byte for byte
  std::ifstream det(dir.path / "detections.csv");
  const auto records = worldsim::detections_from_csv(det);
  CHECK(int(records.size()) == report.detections);
  const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
  const auto counts = pipeline::count_detections(cfg, records, layout);
  CHECK(pipeline::count_report_to_json(counts) == slurp(dir.path / "counts.json"));

  // and the report on disk is the one returned
  CHECK(pipeline::report_to_json(report) == slurp(dir.path / "report.json"));
}

TEST_CASE("a hand-written log of one pepper counts to one") {
  config::ScenarioConfig cfg;
  const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
  const Vec3 center = layout.rows[0].plant_centers[2] + Vec3(0.05, 0.1, 0.08);

  std::vector<worldsim::DetectionRecord> records;
  random::Rng rng(5);
  for (int i = 0; i < 6; ++i) {
    worldsim::DetectionRecord r;
    r.frame = i;
    r.time = 0.1 * i;
    r.point = center + Vec3(rng.gaussian(0, 0.008), rng.gaussian(0, 0.008),
                            rng.gaussian(0, 0.008));
    r.confidence = 0.9;
    records.push_back(r);
  }
  const auto report = pipeline::count_detections(cfg, records, layout);
  CHECK(report.total == 1);
  REQUIRE(report.plants.size() == 1);
  CHECK(report.plants[0].row == 0);
  CHECK(report.plants[0].slot == 2);
  CHECK(report.plants[0].count == 1);
  CHECK((report.rows[0].centers[0] - center).norm() < 0.02);
}

TEST_CASE("count reports round trip through JSON") {
  pipeline::CountReport report;
  yieldcount::RowCount rc;
  rc.count = 3;
  rc.n_init = 40;
  rc.min_pts = 26;
  rc.undefined = 2;
  rc.centers = {Vec3(1, 2, 3), Vec3(-0.5, 0.25, 1.125)};
  report.rows.push_back(rc);
  mission::PlantYield y;
  y.row = 0;
  y.slot = 3;
  y.location = Vec3(3, -4.5, 1.25);
  y.count = 2;
  report.plants.push_back(y);
  report.total = 3;

  const auto back = pipeline::count_report_from_json(count_report_to_json(report));
  CHECK(back.total == 3);
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].count == 3);
  CHECK(back.rows[0].n_init == 40);
  CHECK(back.rows[0].min_pts == 26);
  CHECK(back.rows[0].undefined == 2);
  CHECK(back.rows[0].centers[1] == Vec3(-0.5, 0.25, 1.125));
  REQUIRE(back.plants.size() == 1);
  CHECK(back.plants[0].slot == 3);
  CHECK(back.plants[0].location == Vec3(3, -4.5, 1.25));

  CHECK_THROWS_AS(pipeline::count_report_from_json("{}"), io::ParseError);
  CHECK_THROWS_AS(pipeline::count_report_from_json("nonsense"), io::ParseError);
}

TEST_CASE("stage failures carry the stage name") {
  auto cfg = small_scenario();
  cfg.use_tracking = true;
  cfg.rms_threshold = 1e-9;  // unreachable, so tracking must fail
  cfg.layout.rows_per_column = 1;
  cfg.world.fruiting_count = 3;
  try {
    pipeline::run_pipeline(cfg);
    FAIL("expected a stage error");
  } catch (const pipeline::StageError& e) {
    CHECK(e.stage == "track");
    CHECK(std::string(e.what()).find("rms") != std::string::npos);
  }

  auto bad = small_scenario();
  bad.counting.augment_target = 0;
  try {
    pipeline::run_pipeline(bad);
    FAIL("expected a stage error");
  } catch (const pipeline::StageError& e) {
    CHECK(e.stage == "config");
  }
}

TEST_CASE("tracked and planned sensing agree on the fruit count") {
  auto cfg = small_scenario();
  cfg.layout.rows_per_column = 1;
  cfg.world.fruiting_count = 3;
  cfg.seed = 21;
  cfg.use_tracking = true;
  const auto tracked = pipeline::run_pipeline(cfg);
  cfg.use_tracking = false;
  const auto planned = pipeline::run_pipeline(cfg);
  CHECK(tracked.truth_total == planned.truth_total);
  CHECK(tracked.tracking_rms >= 0.0);
  CHECK(tracked.tracking_rms <= cfg.rms_threshold);
  CHECK(planned.tracking_rms == -1.0);
  // both modes stay within the headline error band on this small scene
  CHECK(std::abs(tracked.estimate_total - tracked.truth_total) <= 2);
  CHECK(std::abs(planned.estimate_total - planned.truth_total) <= 2);
}
