// armsim: command-line front end for the armkit kinematics, planning,
// vision and simulator components.
//
// Exit codes: 0 success, 2 parse/validation error, 3 planning error,
// 4 no object detected.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "armkit/dh_model.hpp"
#include "armkit/ik_solver.hpp"
#include "armkit/image.hpp"
#include "armkit/kinematics.hpp"
#include "armkit/planner.hpp"
#include "armkit/servo_frame.hpp"
#include "armkit/sim.hpp"
#include "armkit/vision.hpp"

namespace {

using namespace armkit;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitPlanning = 3;
constexpr int kExitNoDetection = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<double> parse_csv(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    if (used != item.size() || !std::isfinite(v)) throw UsageError(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.size() != expected) {
    throw UsageError(flag + ": expected " + std::to_string(expected) + " comma-separated values, got " +
                     std::to_string(out.size()));
  }
  return out;
}

Eigen::Vector3d parse_vec3(const std::string& text, const std::string& flag) {
  const auto v = parse_csv(text, 3, flag);
  return {v[0], v[1], v[2]};
}

JointConfig parse_joints(const std::string& text, const std::string& flag) {
  const auto v = parse_csv(text, 6, flag);
  std::array<double, 6> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return JointConfig(a);
}

std::string fmt(double v) {
  char buf[32];
  if (v == 0.0) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <typename Range>
std::string join(const Range& r) {
  std::string out;
  for (auto v : r) {
    if (!out.empty()) out += ",";
    out += fmt(v);
  }
  return out;
}

void print_pose(const Pose6D& p) {
  const auto e = p.euler_zyx();
  const auto& q = p.orientation;
  std::cout << "position_m: " << join(std::array{p.position.x(), p.position.y(), p.position.z()}) << "\n"
            << "quaternion_wxyz: " << join(std::array{q.w(), q.x(), q.y(), q.z()}) << "\n"
            << "euler_zyx_deg: " << join(std::array{e.yaw, e.pitch, e.roll}) << "\n";
}

void print_ik(const IkResult& r) {
  std::cout << "solution_deg: " << join(r.solution.degrees()) << "\n"
            << "iterations: " << r.iterations << "\n"
            << "position_error_m: " << fmt(r.final_position_error) << "\n"
            << "orientation_error_rad: " << fmt(r.final_orientation_error) << "\n"
            << "restart_index: " << r.restart_index << "\n";
}

struct VisionInputs {
  std::string background, frame, calib;
  int threshold = 30;
  std::size_t min_area = 20;
  double table_z = 0.0;
};

void add_vision_options(CLI::App* cmd, VisionInputs& v) {
  cmd->add_option("--background", v.background, "Background PGM (P5)")->required();
  cmd->add_option("--frame", v.frame, "Current frame PGM (P5)")->required();
  cmd->add_option("--calib", v.calib, "Calibration JSON: [{px, py, wx_m, wy_m}, ...]")->required();
  cmd->add_option("--threshold", v.threshold, "Absolute-difference threshold")->check(CLI::Range(0, 255));
  cmd->add_option("--min-area", v.min_area, "Minimum blob area in pixels");
  cmd->add_option("--table-z", v.table_z, "Table height in meters");
}

std::optional<Detection> run_detection(const VisionInputs& v) {
  const GrayImage bg = read_pgm(v.background);
  const GrayImage frame = read_pgm(v.frame);
  const auto pairs = load_calibration(read_file(v.calib));
  const Homography h = estimate_homography(pairs);
  return detect_object(bg, frame, h, DetectParams{v.threshold, v.min_area, v.table_z});
}

void print_detection(const Detection& d) {
  std::cout << "pixel_centroid: " << join(std::array{d.pixel_centroid.x(), d.pixel_centroid.y()}) << "\n"
            << "area_px: " << d.area << "\n"
            << "world_point_m: " << join(std::array{d.world_point.x(), d.world_point.y(), d.world_point.z()})
            << "\n";
}

// Vision yields positions only; grasps are planned without an orientation constraint.
PlanSettings position_plan(double clearance) {
  PlanSettings s;
  s.clearance = clearance;
  s.orientation = OrientationMode::position_only;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"armsim - 6-DOF arm kinematics, pick-and-place planning and servo simulation"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Arm configuration JSON")->required();
  };

  auto* fk = app.add_subcommand("fk", "Forward kinematics");
  std::string joints;
  add_config(fk);
  fk->add_option("--joints", joints, "Joint angles d0,...,d5 in degrees")->required();

  auto* ik = app.add_subcommand("ik", "Inverse kinematics");
  std::string pos, euler, seed;
  add_config(ik);
  ik->add_option("--pos", pos, "Target position x,y,z in meters")->required();
  ik->add_option("--euler-zyx", euler, "Target orientation yaw,pitch,roll in degrees (omit for position only)");
  ik->add_option("--seed", seed, "Seed configuration d0,...,d5 in degrees");

  auto* detect = app.add_subcommand("detect", "Locate the object by background subtraction");
  VisionInputs detect_in;
  add_vision_options(detect, detect_in);

  auto* plan = app.add_subcommand("plan", "Plan a pick-and-place and emit servo frames");
  std::string object_pos, place_pos;
  double clearance = 0.05;
  add_config(plan);
  plan->add_option("--object-pos", object_pos, "Object position x,y,z in meters")->required();
  plan->add_option("--place-pos", place_pos, "Place position x,y,z in meters")->required();
  plan->add_option("--clearance", clearance, "Approach/lift clearance in meters");

  auto* sim = app.add_subcommand("sim", "Execute a servo frame stream in the simulator");
  std::string frames_path;
  SimConfig sim_cfg;
  add_config(sim);
  sim->add_option("--frames", frames_path, "Frame file, or - for stdin")->required();
  sim->add_option("--rate", sim_cfg.rate, "Servo rate limit in deg/s");
  sim->add_option("--tick", sim_cfg.tick, "Simulation tick in seconds");

  auto* pick = app.add_subcommand("pick", "Detect, plan and execute a full pick-and-place cycle");
  VisionInputs pick_in;
  std::string pick_place;
  double pick_clearance = 0.05;
  add_config(pick);
  add_vision_options(pick, pick_in);
  pick->add_option("--place-pos", pick_place, "Place position x,y,z in meters")->required();
  pick->add_option("--clearance", pick_clearance, "Approach/lift clearance in meters");
  pick->add_option("--rate", sim_cfg.rate, "Servo rate limit in deg/s");
  pick->add_option("--tick", sim_cfg.tick, "Simulation tick in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*fk) {
      const ArmModel model = load_arm_config(read_file(config_path));
      const Transform4 t = forward_kinematics(model, parse_joints(joints, "--joints"));
      std::cout << "transform:\n" << format_matrix(t);
      print_pose(matrix_to_pose(t));
    } else if (*ik) {
      const ArmModel model = load_arm_config(read_file(config_path));
      const Eigen::Vector3d p = parse_vec3(pos, "--pos");
      const JointConfig start = seed.empty() ? model.mid_config() : parse_joints(seed, "--seed");
      IkResult r;
      if (euler.empty()) {
        r = solve_ik_position_only(model, p, start);
      } else {
        const auto e = parse_csv(euler, 3, "--euler-zyx");
        r = solve_ik(model, Pose6D::from_euler_zyx(p, {e[0], e[1], e[2]}), start);
      }
      print_ik(r);
    } else if (*detect) {
      const auto d = run_detection(detect_in);
      if (!d) {
        std::cout << "none\n";
        return kExitNoDetection;
      }
      print_detection(*d);
    } else if (*plan) {
      const ArmModel model = load_arm_config(read_file(config_path));
      const Pose6D obj(parse_vec3(object_pos, "--object-pos"), top_down_orientation());
      const Pose6D place(parse_vec3(place_pos, "--place-pos"), top_down_orientation());
      const PlanSettings ps = position_plan(clearance);
      const GraspPlan gp = plan_pick_place(model, obj, place, ps);
      const Trajectory traj = plan_to_trajectory(model, gp, model.mid_config(), kDefaultMaxStepDeg, ps.ik);
      std::cout << format_servo_frames(encode_servo_frames(traj));
    } else if (*sim) {
      const ArmModel model = load_arm_config(read_file(config_path));
      sim_cfg.validate();
      const auto frames = parse_servo_frames(read_file(frames_path));
      SimState state = execute_frames(initial_state(model, model.mid_config()), model, sim_cfg, frames);
      CycleReport report;
      report.success = true;
      report.frames_sent = frames.size();
      report.sim_time = state.elapsed;
      report.final_joints = state.current;
      std::cout << to_json(report).dump(2) << "\n";
    } else if (*pick) {
      const ArmModel model = load_arm_config(read_file(config_path));
      const Eigen::Vector3d place_p = parse_vec3(pick_place, "--place-pos");
      const auto d = run_detection(pick_in);
      if (!d) {
        std::cout << "none\n";
        return kExitNoDetection;
      }
      PickSettings ps;
      ps.plan = position_plan(pick_clearance);
      const CycleReport report = run_pick_cycle(model, Pose6D(d->world_point, top_down_orientation()),
                                                Pose6D(place_p, top_down_orientation()), ps, sim_cfg);
      nlohmann::json out = to_json(report);
      out["detection"] = {{"pixel_centroid", {d->pixel_centroid.x(), d->pixel_centroid.y()}},
                          {"area_px", d->area},
                          {"world_point_m", {d->world_point.x(), d->world_point.y(), d->world_point.z()}}};
      std::cout << out.dump(2) << "\n";
    }
  } catch (const PlanningError& e) {
    std::cerr << "error: " << (e.kind() == PlanningFailure::unreachable ? "unreachable: " : "no convergence: ")
              << e.what() << "\n";
    return kExitPlanning;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
