#include "armtraj/scenario.hpp"
#include "armtraj/structural.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace armtraj;

namespace {

RobotParams robot_from(const std::string& config) {
  return config.empty() ? default_params() : load_config(config);
}

int cmd_plan(const std::string& config, const std::string& out_dir) {
  if (config.empty()) {
    std::cerr << "plan: --config <scenario.json> is required\n";
    return 2;
  }
  const Scenario sc = load_scenario(config);
  const RunReport report = run_scenario(sc);
  write_run_outputs(report, out_dir);
  std::cout << summarize(report);
  std::cout << "wrote " << (fs::path(out_dir) / "trajectory.csv").string() << '\n';
  return 0;
}

int cmd_torture(const std::string& config, const std::string& out_dir, std::uint64_t seed,
                int count, int threads) {
  const RobotParams p = robot_from(config);
  const TortureReport rep = torture_test(count, seed, p, threads);
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "torture.csv";
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_torture_csv(rep, out);
  std::cout << summarize(rep) << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_surface(const std::string& config, const std::string& out_dir, const std::string& grid_spec,
                double mass, bool over_phi) {
  const RobotParams p = robot_from(config).with_payload(mass);
  SurfaceGrid grid;
  parse_grid_spec(grid_spec, grid);
  grid.max_over_phi = over_phi;
  char name[64];
  std::snprintf(name, sizeof name, "surface_m%.3f.csv", mass);
  const fs::path path = fs::path(out_dir) / name;
  const TorqueSurface s = export_surface(p, grid, path);
  std::cout << "m_obj " << mass << " kg: max |u_phi0| " << s.max() << " N m, stall plane "
            << s.stall << " N m" << (s.max() > s.stall ? " (exceeded)" : "") << '\n'
            << "gear geometry: " << p.gear.provenance << '\n'
            << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_capacity(const std::string& config, const std::string& grid_spec, bool over_phi) {
  const RobotParams p = robot_from(config);
  SurfaceGrid grid;
  parse_grid_spec(grid_spec, grid);
  grid.max_over_phi = over_phi;
  const double stall = p.derived.effective_stall[kAzimuth];
  const CapacityReport rep = payload_capacity(p, stall, grid);
  if (rep.unbounded) {
    std::cout << "capacity: unbounded (max slope " << rep.max_slope << " N m/kg)\n";
  } else {
    std::cout << "capacity: " << rep.capacity << " kg (" << rep.capacity / 0.45359237
              << " lb), bisection " << rep.bisection << " kg\n";
  }
  std::cout << "stall plane: " << stall << " N m, gear geometry: " << p.gear.provenance << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory planner for a 4-DOF spherical manipulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  std::string grid_spec = "41x41";
  double mass = 0.0;
  int count = 100;
  int threads = 0;
  bool over_phi = false;

  CLI::App* plan = app.add_subcommand("plan", "Run a waypoint scenario and export trajectories");
  plan->add_option("--config", config, "Scenario file")->required();
  plan->add_option("--out", out_dir, "Output directory");

  CLI::App* torture = app.add_subcommand("torture", "GDTH convergence over random targets");
  torture->add_option("--config", config, "Robot config (defaults built in)");
  torture->add_option("--out", out_dir, "Output directory");
  torture->add_option("--seed", seed, "Random seed");
  torture->add_option("--count", count, "Number of targets")->check(CLI::PositiveNumber);
  torture->add_option("--threads", threads, "Worker threads (0 = all cores)");

  CLI::App* surface = app.add_subcommand("surface", "Azimuthal holding-torque surface");
  surface->add_option("--config", config, "Robot config");
  surface->add_option("--out", out_dir, "Output directory");
  surface->add_option("--grid", grid_spec, "Grid as NxM over (theta1, theta2)");
  surface->add_option("--mass", mass, "Payload, kg")->check(CLI::NonNegativeNumber);
  surface->add_flag("--max-over-phi", over_phi, "Take the worst azimuth at each node");

  CLI::App* capacity = app.add_subcommand("capacity", "Critical payload against the stall plane");
  capacity->add_option("--config", config, "Robot config");
  capacity->add_option("--grid", grid_spec, "Grid as NxM over (theta1, theta2)");
  capacity->add_flag("--max-over-phi", over_phi, "Take the worst azimuth at each node");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) {
      return cmd_plan(config, out_dir);
    }
    if (*torture) {
      return cmd_torture(config, out_dir, seed, count, threads);
    }
    if (*surface) {
      return cmd_surface(config, out_dir, grid_spec, mass, over_phi);
    }
    if (*capacity) {
      return cmd_capacity(config, grid_spec, over_phi);
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error (waypoint " << e.waypoint() << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
