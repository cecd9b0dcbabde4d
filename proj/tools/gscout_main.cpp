#include "gscout/ioutil.hpp"
#include "gscout/logging.hpp"
#include "gscout/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace gscout;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

config::ScenarioConfig load_config(const CommonArgs& args) {
  config::ScenarioConfig cfg;
  if (!args.config_path.empty()) {
    cfg = config::from_json(read_file(args.config_path));
  }
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_format = false) {
  cmd->add_option("--config", args.config_path, "scenario config JSON");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  if (with_format) {
    cmd->add_option("--format", args.format, "detection log format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
}

std::vector<worldsim::DetectionRecord> read_detections(const std::string& path) {
  if (path.ends_with(".json")) {
    return worldsim::detections_from_json(read_file(path));
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return worldsim::detections_from_csv(in);
}

scanplan::Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return scanplan::Trajectory::from_csv(in);
}

template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const pipeline::StageError&) {
    throw;
  } catch (const io::ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw pipeline::StageError(name, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greenhouse scouting pipeline: scan planning, detection "
               "simulation, fruit counting and harvest scheduling"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string traj_path;
  std::string detections_path;
  std::string counts_path;
  std::string gen_out;

  auto* gen = app.add_subcommand("gen-config", "write the default scenario config");
  gen->add_option("--out", gen_out, "output file (default stdout)");
  gen->callback([&] {
    const std::string text = config::to_json(config::ScenarioConfig{});
    if (gen_out.empty()) {
      std::printf("%s\n", text.c_str());
    } else {
      write_file(gen_out, text);
    }
  });

  auto* plan = app.add_subcommand("plan", "plan scan paths and trajectories per row");
  add_common(plan, args);
  plan->callback([&] {
    run_stage("plan", [&] {
      const auto cfg = load_config(args);
      const auto planned = pipeline::plan_rows(cfg);
      for (const auto& row : planned) {
        const auto tag = std::to_string(row.row);
        write_file(fs::path(args.out_dir) / ("path_row" + tag + ".csv"),
                   [&] {
                     std::string out = "x,y,z,yaw,q1,q2,q3\n";
                     for (const auto& wp : row.path.waypoints) {
                       const auto v = wp.to_vector();
                       for (int i = 0; i < 7; ++i) {
                         out += io::format_double(v[i]);
                         out += i + 1 < 7 ? ',' : '\n';
                       }
                     }
                     return out;
                   }());
        write_file(fs::path(args.out_dir) / ("trajectory_row" + tag + ".csv"),
                   row.trajectory.to_csv());
        std::printf("row %d: %zu waypoints, %s s\n", row.row,
                    row.path.waypoints.size(),
                    io::format_double(row.trajectory.t_end()).c_str());
      }
    });
  });

  auto* sim = app.add_subcommand("simulate", "closed-loop tracking of a trajectory");
  add_common(sim, args);
  sim->add_option("--traj", traj_path, "trajectory CSV")->required();
  sim->callback([&] {
    run_stage("simulate", [&] {
      const auto cfg = load_config(args);
      const auto traj = read_trajectory(traj_path);
      const auto log =
          vehicle::simulate_tracking(traj, cfg.vehicle, cfg.gains, cfg.tracking_dt);
      const double rms = vehicle::tracking_rms(log, traj);
      write_file(fs::path(args.out_dir) / "tracking.csv", log.to_csv());
      std::printf("tracking rms: %s m\n", io::format_double(rms).c_str());
      if (rms > cfg.rms_threshold) {
        logging::warn("rms above the configured threshold " +
                      io::format_double(cfg.rms_threshold));
      }
    });
  });

  auto* sense = app.add_subcommand("sense", "detection log along a trajectory");
  add_common(sense, args, true);
  sense->add_option("--traj", traj_path, "trajectory CSV")->required();
  sense->callback([&] {
    run_stage("sense", [&] {
      const auto cfg = load_config(args);
      const auto traj = read_trajectory(traj_path);
      const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
      const auto world = worldsim::generate_world(
          layout, cfg.world, random::derive_seed(cfg.seed, config::kSeedWorld));
      random::Rng rng(random::derive_seed(cfg.seed, config::kSeedSense));
      const auto records = pipeline::sense_trajectory(cfg, world, traj, rng);
      if (args.format == "json") {
        write_file(fs::path(args.out_dir) / "detections.json",
                   worldsim::detections_to_json(records));
      } else {
        write_file(fs::path(args.out_dir) / "detections.csv",
                   worldsim::detections_to_csv(records));
      }
      int frames = 0;
      for (const auto& r : records) frames = std::max(frames, r.frame + 1);
      std::printf("%zu detections\n", records.size());
    });
  });

  auto* count = app.add_subcommand("count", "fruit counts from a detection log");
  add_common(count, args);
  count->add_option("--detections", detections_path, "detection log (csv or json)")
      ->required();
  count->callback([&] {
    run_stage("count", [&] {
      const auto cfg = load_config(args);
      const auto records = read_detections(detections_path);
      const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
      const auto report = pipeline::count_detections(cfg, records, layout);
      write_file(fs::path(args.out_dir) / "counts.json",
                 pipeline::count_report_to_json(report));
      for (std::size_t r = 0; r < report.rows.size(); ++r) {
        std::printf("row %zu: %d\n", r, report.rows[r].count);
      }
      std::printf("total: %d\n", report.total);
    });
  });

  auto* mission_cmd = app.add_subcommand("mission", "harvest schedule from counts");
  add_common(mission_cmd, args);
  mission_cmd->add_option("--counts", counts_path, "count report JSON")->required();
  mission_cmd->callback([&] {
    run_stage("mission", [&] {
      const auto cfg = load_config(args);
      const auto counts = pipeline::count_report_from_json(read_file(counts_path));
      const auto layout = worldsim::GreenhouseLayout::make(cfg.layout);
      const auto prob = mission::actions_from_counts(counts.plants, layout, cfg.harvest);
      auto ga = cfg.mission_ga;
      ga.seed = random::derive_seed(cfg.seed, config::kSeedMission);
      const auto schedule = mission::solve(prob, ga);
      write_file(fs::path(args.out_dir) / "mission.json", mission::problem_to_json(prob));
      write_file(fs::path(args.out_dir) / "schedule.json",
                 mission::schedule_to_json(schedule));
      write_file(fs::path(args.out_dir) / "schedule.csv",
                 mission::schedule_to_csv(schedule));
      std::printf("makespan: %s s (%s)\n", io::format_double(schedule.makespan).c_str(),
                  schedule.feasible ? "feasible" : "infeasible");
    });
  });

  auto* e2e = app.add_subcommand("e2e", "full pipeline run");
  add_common(e2e, args);
  e2e->callback([&] {
    const auto cfg = load_config(args);
    const auto report = pipeline::run_pipeline(cfg, args.out_dir);
    std::printf("truth: %d\nestimate: %d\nrelative error: %s\nmakespan: %s s\n",
                report.truth_total, report.estimate_total,
                io::format_double(report.relative_error).c_str(),
                io::format_double(report.mission_makespan).c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pipeline::StageError& e) {
    std::fprintf(stderr, "error in stage '%s': %s\n", e.stage.c_str(), e.what());
    return 1;
  } catch (const io::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
