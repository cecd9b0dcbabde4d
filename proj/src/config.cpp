#include "gscout/config.hpp"

#include "gscout/ioutil.hpp"

#include <json.hpp>

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace gscout::config {

namespace {

using nlohmann::json;
using spatial::Vec3;
using spatial::Vec7;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw io::ParseError("section '" + section + "' must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || key == k;
    if (!known) {
      throw io::ParseError("unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void opt_vec3(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw io::ParseError(std::string("key '") + key + "' must be a 3-element array");
  }
  out = Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
}

void opt_vec7(const json& j, const char* key, Vec7& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 7) {
    throw io::ParseError(std::string("key '") + key + "' must be a 7-element array");
  }
  for (int i = 0; i < 7; ++i) out[i] = a.at(std::size_t(i)).get<double>();
}

template <std::size_t N>
void opt_arr(const json& j, const char* key, std::array<double, N>& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N) {
    throw io::ParseError(std::string("key '") + key + "' has the wrong length");
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = a.at(i).get<double>();
}

json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

json vec7_json(const Vec7& v) {
  json a = json::array();
  for (int i = 0; i < 7; ++i) a.push_back(v[i]);
  return a;
}

void parse_layout(const json& j, worldsim::LayoutParams& p) {
  check_keys(j, "layout",
             {"columns", "rows_per_column", "plants_per_row", "table_length",
              "table_width", "table_height", "column_offset", "row_pitch",
              "plant_spacing", "plant_box_size", "pot_size", "workstation_size",
              "bounds_margin", "bounds_height"});
  opt(j, "columns", p.columns);
  opt(j, "rows_per_column", p.rows_per_column);
  opt(j, "plants_per_row", p.plants_per_row);
  opt(j, "table_length", p.table_length);
  opt(j, "table_width", p.table_width);
  opt(j, "table_height", p.table_height);
  opt(j, "column_offset", p.column_offset);
  opt(j, "row_pitch", p.row_pitch);
  opt(j, "plant_spacing", p.plant_spacing);
  opt_vec3(j, "plant_box_size", p.plant_box_size);
  opt_vec3(j, "pot_size", p.pot_size);
  opt_vec3(j, "workstation_size", p.workstation_size);
  opt(j, "bounds_margin", p.bounds_margin);
  opt(j, "bounds_height", p.bounds_height);
}

json layout_json(const worldsim::LayoutParams& p) {
  return {{"columns", p.columns},
          {"rows_per_column", p.rows_per_column},
          {"plants_per_row", p.plants_per_row},
          {"table_length", p.table_length},
          {"table_width", p.table_width},
          {"table_height", p.table_height},
          {"column_offset", p.column_offset},
          {"row_pitch", p.row_pitch},
          {"plant_spacing", p.plant_spacing},
          {"plant_box_size", vec3_json(p.plant_box_size)},
          {"pot_size", vec3_json(p.pot_size)},
          {"workstation_size", vec3_json(p.workstation_size)},
          {"bounds_margin", p.bounds_margin},
          {"bounds_height", p.bounds_height}};
}

void parse_world(const json& j, worldsim::WorldGenParams& p) {
  check_keys(j, "world",
             {"fruiting_count", "peppers_min", "peppers_max", "pepper_radius",
              "pepper_min_separation", "leaves_per_plant", "leaf_radius",
              "stem_radius"});
  opt(j, "fruiting_count", p.fruiting_count);
  opt(j, "peppers_min", p.peppers_min);
  opt(j, "peppers_max", p.peppers_max);
  opt(j, "pepper_radius", p.pepper_radius);
  opt(j, "pepper_min_separation", p.pepper_min_separation);
  opt(j, "leaves_per_plant", p.leaves_per_plant);
  opt(j, "leaf_radius", p.leaf_radius);
  opt(j, "stem_radius", p.stem_radius);
}

json world_json(const worldsim::WorldGenParams& p) {
  return {{"fruiting_count", p.fruiting_count},
          {"peppers_min", p.peppers_min},
          {"peppers_max", p.peppers_max},
          {"pepper_radius", p.pepper_radius},
          {"pepper_min_separation", p.pepper_min_separation},
          {"leaves_per_plant", p.leaves_per_plant},
          {"leaf_radius", p.leaf_radius},
          {"stem_radius", p.stem_radius}};
}

void parse_scan(const json& j, scanplan::ScanParams& p) {
  check_keys(j, "scan",
             {"semi_axis_along", "semi_axis_across", "waypoints_per_side",
              "height_offsets", "pitch_amplitude", "arc_begin", "arc_end",
              "transit_clearance", "uav_radius", "corner_split_angle"});
  opt(j, "semi_axis_along", p.semi_axis_along);
  opt(j, "semi_axis_across", p.semi_axis_across);
  opt(j, "waypoints_per_side", p.waypoints_per_side);
  opt_arr(j, "height_offsets", p.height_offsets);
  opt(j, "pitch_amplitude", p.pitch_amplitude);
  opt(j, "arc_begin", p.arc_begin);
  opt(j, "arc_end", p.arc_end);
  opt(j, "transit_clearance", p.transit_clearance);
  opt(j, "uav_radius", p.uav_radius);
  opt(j, "corner_split_angle", p.corner_split_angle);
}

json scan_json(const scanplan::ScanParams& p) {
  return {{"semi_axis_along", p.semi_axis_along},
          {"semi_axis_across", p.semi_axis_across},
          {"waypoints_per_side", p.waypoints_per_side},
          {"height_offsets", {p.height_offsets[0], p.height_offsets[1]}},
          {"pitch_amplitude", p.pitch_amplitude},
          {"arc_begin", p.arc_begin},
          {"arc_end", p.arc_end},
          {"transit_clearance", p.transit_clearance},
          {"uav_radius", p.uav_radius},
          {"corner_split_angle", p.corner_split_angle}};
}

void parse_limits(const json& j, scanplan::KinodynamicLimits& p) {
  check_keys(j, "limits", {"v_max", "a_max"});
  opt_vec7(j, "v_max", p.v_max);
  opt_vec7(j, "a_max", p.a_max);
}

json limits_json(const scanplan::KinodynamicLimits& p) {
  return {{"v_max", vec7_json(p.v_max)}, {"a_max", vec7_json(p.a_max)}};
}

void parse_vehicle(const json& j, vehicle::VehicleParams& p) {
  check_keys(j, "vehicle",
             {"mass", "inertia", "joint_inertia", "joint_gravity", "k_f", "k_m",
              "rotor_arm", "rotor_speed_max", "gravity"});
  opt(j, "mass", p.mass);
  opt_vec3(j, "inertia", p.inertia);
  opt_arr(j, "joint_inertia", p.joint_inertia);
  opt_arr(j, "joint_gravity", p.joint_gravity);
  opt(j, "k_f", p.k_f);
  opt(j, "k_m", p.k_m);
  opt(j, "rotor_arm", p.rotor_arm);
  opt(j, "rotor_speed_max", p.rotor_speed_max);
  opt(j, "gravity", p.gravity);
}

json vehicle_json(const vehicle::VehicleParams& p) {
  return {{"mass", p.mass},
          {"inertia", vec3_json(p.inertia)},
          {"joint_inertia", {p.joint_inertia[0], p.joint_inertia[1], p.joint_inertia[2]}},
          {"joint_gravity", {p.joint_gravity[0], p.joint_gravity[1], p.joint_gravity[2]}},
          {"k_f", p.k_f},
          {"k_m", p.k_m},
          {"rotor_arm", p.rotor_arm},
          {"rotor_speed_max", p.rotor_speed_max},
          {"gravity", p.gravity}};
}

void parse_gains(const json& j, vehicle::ControlGains& p) {
  check_keys(j, "gains",
             {"pos_p", "pos_d", "pos_i", "integral_limit", "tilt_max", "att_p",
              "att_d", "joint_p", "joint_d", "thrust_max_factor", "moment_max",
              "joint_torque_max"});
  opt_vec3(j, "pos_p", p.pos_p);
  opt_vec3(j, "pos_d", p.pos_d);
  opt_vec3(j, "pos_i", p.pos_i);
  opt(j, "integral_limit", p.integral_limit);
  opt(j, "tilt_max", p.tilt_max);
  opt_vec3(j, "att_p", p.att_p);
  opt_vec3(j, "att_d", p.att_d);
  opt(j, "joint_p", p.joint_p);
  opt(j, "joint_d", p.joint_d);
  opt(j, "thrust_max_factor", p.thrust_max_factor);
  opt(j, "moment_max", p.moment_max);
  opt(j, "joint_torque_max", p.joint_torque_max);
}

json gains_json(const vehicle::ControlGains& p) {
  return {{"pos_p", vec3_json(p.pos_p)},
          {"pos_d", vec3_json(p.pos_d)},
          {"pos_i", vec3_json(p.pos_i)},
          {"integral_limit", p.integral_limit},
          {"tilt_max", p.tilt_max},
          {"att_p", vec3_json(p.att_p)},
          {"att_d", vec3_json(p.att_d)},
          {"joint_p", p.joint_p},
          {"joint_d", p.joint_d},
          {"thrust_max_factor", p.thrust_max_factor},
          {"moment_max", p.moment_max},
          {"joint_torque_max", p.joint_torque_max}};
}

void parse_camera(const json& j, worldsim::CameraIntrinsics& p) {
  check_keys(j, "camera", {"width", "height", "fx", "fy", "cx", "cy", "max_range"});
  opt(j, "width", p.width);
  opt(j, "height", p.height);
  opt(j, "fx", p.fx);
  opt(j, "fy", p.fy);
  opt(j, "cx", p.cx);
  opt(j, "cy", p.cy);
  opt(j, "max_range", p.max_range);
}

json camera_json(const worldsim::CameraIntrinsics& p) {
  return {{"width", p.width},   {"height", p.height}, {"fx", p.fx},
          {"fy", p.fy},         {"cx", p.cx},         {"cy", p.cy},
          {"max_range", p.max_range}};
}

void parse_detector(const json& j, worldsim::DetectorModel& p) {
  check_keys(j, "detector",
             {"recall", "position_sigma", "false_positive_rate",
              "visibility_threshold", "visibility_samples", "confidence_min",
              "confidence_max", "fp_confidence_min", "fp_confidence_max"});
  opt(j, "recall", p.recall);
  opt(j, "position_sigma", p.position_sigma);
  opt(j, "false_positive_rate", p.false_positive_rate);
  opt(j, "visibility_threshold", p.visibility_threshold);
  opt(j, "visibility_samples", p.visibility_samples);
  opt(j, "confidence_min", p.confidence_min);
  opt(j, "confidence_max", p.confidence_max);
  opt(j, "fp_confidence_min", p.fp_confidence_min);
  opt(j, "fp_confidence_max", p.fp_confidence_max);
}

json detector_json(const worldsim::DetectorModel& p) {
  return {{"recall", p.recall},
          {"position_sigma", p.position_sigma},
          {"false_positive_rate", p.false_positive_rate},
          {"visibility_threshold", p.visibility_threshold},
          {"visibility_samples", p.visibility_samples},
          {"confidence_min", p.confidence_min},
          {"confidence_max", p.confidence_max},
          {"fp_confidence_min", p.fp_confidence_min},
          {"fp_confidence_max", p.fp_confidence_max}};
}

void parse_counting(const json& j, yieldcount::CountingParams& p) {
  check_keys(j, "counting",
             {"eps", "base_min_detections", "augment_target", "noise_sigma",
              "expected_yield_upper", "subsample_per_fruit", "confidence_min"});
  opt(j, "eps", p.eps);
  opt(j, "base_min_detections", p.base_min_detections);
  opt(j, "augment_target", p.augment_target);
  opt(j, "noise_sigma", p.noise_sigma);
  opt(j, "expected_yield_upper", p.expected_yield_upper);
  opt(j, "subsample_per_fruit", p.subsample_per_fruit);
  opt(j, "confidence_min", p.confidence_min);
}

json counting_json(const yieldcount::CountingParams& p) {
  return {{"eps", p.eps},
          {"base_min_detections", p.base_min_detections},
          {"augment_target", p.augment_target},
          {"noise_sigma", p.noise_sigma},
          {"expected_yield_upper", p.expected_yield_upper},
          {"subsample_per_fruit", p.subsample_per_fruit},
          {"confidence_min", p.confidence_min}};
}

void parse_mission(const json& j, mission::SolveConfig& p) {
  check_keys(j, "mission",
             {"agents", "population", "generations", "exchange_period",
              "crossover_rate", "mutation_rate"});
  opt(j, "agents", p.agents);
  opt(j, "population", p.population);
  opt(j, "generations", p.generations);
  opt(j, "exchange_period", p.exchange_period);
  opt(j, "crossover_rate", p.crossover_rate);
  opt(j, "mutation_rate", p.mutation_rate);
}

json mission_json(const mission::SolveConfig& p) {
  return {{"agents", p.agents},
          {"population", p.population},
          {"generations", p.generations},
          {"exchange_period", p.exchange_period},
          {"crossover_rate", p.crossover_rate},
          {"mutation_rate", p.mutation_rate}};
}

void parse_harvest(const json& j, mission::MissionGenParams& p) {
  check_keys(j, "harvest",
             {"robots", "robot_speed", "time_per_fruit", "depot_spacing"});
  opt(j, "robots", p.robots);
  opt(j, "robot_speed", p.robot_speed);
  opt(j, "time_per_fruit", p.time_per_fruit);
  opt(j, "depot_spacing", p.depot_spacing);
}

json harvest_json(const mission::MissionGenParams& p) {
  return {{"robots", p.robots},
          {"robot_speed", p.robot_speed},
          {"time_per_fruit", p.time_per_fruit},
          {"depot_spacing", p.depot_spacing}};
}

void parse_pipeline(const json& j, ScenarioConfig& cfg) {
  check_keys(j, "pipeline",
             {"frame_rate", "use_tracking", "tracking_dt", "trajectory_dt",
              "topp_grid", "rms_threshold"});
  opt(j, "frame_rate", cfg.frame_rate);
  opt(j, "use_tracking", cfg.use_tracking);
  opt(j, "tracking_dt", cfg.tracking_dt);
  opt(j, "trajectory_dt", cfg.trajectory_dt);
  opt(j, "topp_grid", cfg.topp_grid);
  opt(j, "rms_threshold", cfg.rms_threshold);
}

json pipeline_json(const ScenarioConfig& cfg) {
  return {{"frame_rate", cfg.frame_rate},
          {"use_tracking", cfg.use_tracking},
          {"tracking_dt", cfg.tracking_dt},
          {"trajectory_dt", cfg.trajectory_dt},
          {"topp_grid", cfg.topp_grid},
          {"rms_threshold", cfg.rms_threshold}};
}

}  // namespace

std::string to_json(const ScenarioConfig& cfg) {
  json j;
  j["layout"] = layout_json(cfg.layout);
  j["world"] = world_json(cfg.world);
  j["scan"] = scan_json(cfg.scan);
  j["limits"] = limits_json(cfg.limits);
  j["vehicle"] = vehicle_json(cfg.vehicle);
  j["gains"] = gains_json(cfg.gains);
  j["camera"] = camera_json(cfg.camera);
  j["detector"] = detector_json(cfg.detector);
  j["counting"] = counting_json(cfg.counting);
  j["mission"] = mission_json(cfg.mission_ga);
  j["harvest"] = harvest_json(cfg.harvest);
  j["pipeline"] = pipeline_json(cfg);
  j["seed"] = cfg.seed;
  return j.dump(2);
}

ScenarioConfig from_json(const std::string& text) {
  ScenarioConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io::ParseError(e.what());
  }
  try {
    check_keys(j, "scenario",
               {"layout", "world", "scan", "limits", "vehicle", "gains", "camera",
                "detector", "counting", "mission", "harvest", "pipeline", "seed"});
    if (j.contains("layout")) parse_layout(j["layout"], cfg.layout);
    if (j.contains("world")) parse_world(j["world"], cfg.world);
    if (j.contains("scan")) parse_scan(j["scan"], cfg.scan);
    if (j.contains("limits")) parse_limits(j["limits"], cfg.limits);
    if (j.contains("vehicle")) parse_vehicle(j["vehicle"], cfg.vehicle);
    if (j.contains("gains")) parse_gains(j["gains"], cfg.gains);
    if (j.contains("camera")) parse_camera(j["camera"], cfg.camera);
    if (j.contains("detector")) parse_detector(j["detector"], cfg.detector);
    if (j.contains("counting")) parse_counting(j["counting"], cfg.counting);
    if (j.contains("mission")) parse_mission(j["mission"], cfg.mission_ga);
    if (j.contains("harvest")) parse_harvest(j["harvest"], cfg.harvest);
    if (j.contains("pipeline")) parse_pipeline(j["pipeline"], cfg);
    opt(j, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw io::ParseError(e.what());
  }
  validate(cfg);
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(cfg.layout.columns >= 1 && cfg.layout.rows_per_column >= 1 &&
              cfg.layout.plants_per_row >= 1,
          "layout dimensions must be positive");
  require(cfg.world.fruiting_count >= 0, "fruiting_count must be non-negative");
  require(cfg.world.fruiting_count <=
              cfg.layout.columns * cfg.layout.rows_per_column * cfg.layout.plants_per_row,
          "fruiting_count exceeds the plant count");
  require(cfg.world.peppers_min >= 0 && cfg.world.peppers_max >= cfg.world.peppers_min,
          "pepper count range is inverted");
  require(cfg.frame_rate > 0.0, "frame_rate must be positive");
  require(cfg.tracking_dt > 0.0 && cfg.tracking_dt <= 0.1, "tracking_dt out of range");
  require(cfg.trajectory_dt > 0.0, "trajectory_dt must be positive");
  require(cfg.topp_grid >= 2, "topp_grid too small");
  require(cfg.rms_threshold > 0.0, "rms_threshold must be positive");
  require(cfg.camera.width > 0 && cfg.camera.height > 0, "camera size must be positive");
  require(cfg.camera.fx > 0.0 && cfg.camera.fy > 0.0, "focal length must be positive");
  require(cfg.camera.max_range > 0.0, "max_range must be positive");
  require(cfg.detector.recall >= 0.0 && cfg.detector.recall <= 1.0,
          "recall must lie in [0, 1]");
  require(cfg.detector.false_positive_rate >= 0.0, "false_positive_rate negative");
  require(cfg.counting.eps > 0.0, "counting eps must be positive");
  require(cfg.counting.base_min_detections >= 1, "base_min_detections too small");
  require(cfg.counting.augment_target >= 1, "augment_target too small");
  require(cfg.mission_ga.agents >= 1 && cfg.mission_ga.population >= 2,
          "mission GA needs at least one agent and population 2");
  require(cfg.mission_ga.generations >= 0 && cfg.mission_ga.exchange_period >= 1,
          "mission GA schedule parameters out of range");
  require(cfg.harvest.robots >= 1, "harvest robots must be positive");
  require(cfg.harvest.robot_speed > 0.0, "harvest robot_speed must be positive");
  require(cfg.harvest.time_per_fruit > 0.0, "time_per_fruit must be positive");
  for (int i = 0; i < 7; ++i) {
    require(cfg.limits.v_max[i] > 0.0 && cfg.limits.a_max[i] > 0.0,
            "kinodynamic limits must be positive");
  }
}

}  // namespace gscout::config
