#pragma once

#include "armtraj/dynamics.hpp"
#include "armtraj/gdth.hpp"
#include "armtraj/params.hpp"
#include "armtraj/pmp.hpp"
#include "armtraj/structural.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace armtraj {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int waypoint)
      : std::runtime_error(what), waypoint_(waypoint) {}
  int waypoint() const { return waypoint_; }

 private:
  int waypoint_;
};

struct Waypoint {
  Vec3 ee_target = Vec3::Zero();
  std::optional<double> z1_target;
  std::optional<double> tolerance;  // overrides gdth.ee_tolerance for this waypoint
  double m_obj = 0.0;               // payload carried on the way into this waypoint
};

struct Scenario {
  RobotParams params = default_params();
  std::vector<Waypoint> waypoints;
  std::optional<Vec4> start_pose;  // defaults to params.home_pose
  double dt = 0.01;                // sampling step of exported series, s
  bool stop_on_failure = false;
};

/// Reads a scenario file. "config" names a robot config relative to the scenario
/// file; "robot" may instead hold the config inline.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir = ".");

struct SegmentReport {
  int index = 0;
  double t_offset = 0.0;
  double m_obj = 0.0;
  Vec4 q_start = Vec4::Zero();
  Vec4 q_end = Vec4::Zero();
  GdthResult gdth;
  PmpTrajectory pmp;
  std::vector<TrajectorySample> samples;  // local time; u from inverse dynamics
  Vec4 peak_abs_u = Vec4::Zero();
  std::array<bool, kNumJoints> stall{};
  bool converged = false;
};

struct RunReport {
  std::vector<SegmentReport> segments;
  Vec4 effective_stall = Vec4::Zero();
  std::array<bool, kNumJoints> stall_any{};
};

RunReport run_scenario(const Scenario& scenario);

/// Feeds the segment's inverse-dynamics torques (zero-order hold at step dt)
/// to forward_integrate and returns |q(T) - q_ref(T)|.
double retrack_terminal_error(const SegmentReport& segment, const RobotParams& params,
                              double dt);

/// Largest step dt / 2^k for which explicit Euler stays inside its stability
/// region: dt * rho <= 1, rho the spectral radius of the spring-damper
/// linearization sampled at the segment start, middle and end.
double stable_retrack_step(const SegmentReport& segment, const RobotParams& params, double dt);

/// Segment parameters: the scenario robot with the segment payload.
RobotParams segment_params(const Scenario& scenario, const SegmentReport& segment);

void write_trajectory_csv(const SegmentReport& segment, std::ostream& out,
                          bool header = true);
void write_run_outputs(const RunReport& report, const std::filesystem::path& dir);
std::string summarize(const RunReport& report);

// --- torture test ----------------------------------------------------------

/// Uniform samples of the conservative reach annulus (rejection from its bounding box).
std::vector<Vec3> sample_reachable_targets(int n, std::uint64_t seed, const GeometryParams& geom);

struct TortureRow {
  Vec3 target = Vec3::Zero();
  double error_mm = 0.0;
  Vec4 horizons = Vec4::Zero();
  int iterations = 0;
  bool converged = false;
};

struct TortureReport {
  std::vector<TortureRow> rows;
  double fraction_within_inch = 0.0;
  double median_error_mm = 0.0;
  double mean_error_mm = 0.0;
  double max_error_mm = 0.0;
  Vec4 mean_horizons = Vec4::Zero();
  Vec4 max_horizons = Vec4::Zero();
};

TortureReport run_targets(const std::vector<Vec3>& targets, const RobotParams& params,
                          int threads = 0);
TortureReport torture_test(int n, std::uint64_t seed, const RobotParams& params,
                           int threads = 0);
void write_torture_csv(const TortureReport& report, std::ostream& out);
std::string summarize(const TortureReport& report);

// --- surfaces ----------------------------------------------------------------

void write_surface_csv(const TorqueSurface& surface, std::ostream& out);
/// Computes the surface, writes it to `path` and returns it.
TorqueSurface export_surface(const RobotParams& params, const SurfaceGrid& grid,
                             const std::filesystem::path& path);
TorqueSurface read_surface_csv(std::istream& in);

/// Parses "NxM" into grid node counts.
void parse_grid_spec(const std::string& spec, SurfaceGrid& grid);

}  // namespace armtraj
