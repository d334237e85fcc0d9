#include "armtraj/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace armtraj;
namespace fs = std::filesystem;

namespace {

const RunReport& pick_place_run() {
  static const RunReport report =
      run_scenario(load_scenario(ARMTRAJ_CONFIG_DIR "/pick_place.json"));
  return report;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Scenario, ParsesWaypoints) {
  const Scenario sc = load_scenario(ARMTRAJ_CONFIG_DIR "/pick_place.json");
  ASSERT_EQ(sc.waypoints.size(), 3u);
  EXPECT_DOUBLE_EQ(sc.waypoints[1].m_obj, 4.0);
  ASSERT_TRUE(sc.waypoints[2].z1_target.has_value());
  EXPECT_DOUBLE_EQ(*sc.waypoints[2].z1_target, 0.4164);
  EXPECT_DOUBLE_EQ(sc.dt, 0.01);
}

TEST(Scenario, RejectsBadInput) {
  EXPECT_THROW(parse_scenario(R"({"waypoints": []})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"waypoints": [{"m_obj": 1}]})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"waypoints": [{"ee_target": [1, 2]}]})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"dt": 0, "waypoints": [{"ee_target": [0.5, 0.5, 0.2]}]})"),
               ParameterError);
  EXPECT_THROW(
      parse_scenario(R"({"waypoints": [{"ee_target": [0.5, 0.5, 0.2], "m_obj": -1}]})"),
      ParameterError);
}

TEST(Scenario, UnreachableWaypointNamesIndex) {
  Scenario sc;
  sc.waypoints = {{Vec3(0.5, 0.5, 0.2), std::nullopt, std::nullopt, 0.0},
                  {Vec3(3.0, 0.0, 0.0), std::nullopt, std::nullopt, 0.0}};
  try {
    run_scenario(sc);
    FAIL() << "unreachable waypoint accepted";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.waypoint(), 2);
  }
}

TEST(Scenario, PickPlaceConvergesAndChains) {
  const RunReport& r = pick_place_run();
  ASSERT_EQ(r.segments.size(), 3u);
  double clock = 0.0;
  Vec4 q = default_params().home_pose;
  for (const SegmentReport& s : r.segments) {
    EXPECT_TRUE(s.converged) << "segment " << s.index;
    EXPECT_LE(s.gdth.ee_error, 0.0254);
    EXPECT_DOUBLE_EQ(s.t_offset, clock);
    EXPECT_EQ(s.q_start, q);
    ASSERT_FALSE(s.samples.empty());
    EXPECT_DOUBLE_EQ(s.samples.front().t, 0.0);
    EXPECT_DOUBLE_EQ(s.samples.back().t, s.pmp.duration());
    EXPECT_LT((s.samples.back().state.q - s.q_end).norm(), 1e-9);
    EXPECT_LT(s.samples.back().state.qdot.norm(), 1e-9);
    clock += s.pmp.duration();
    q = s.q_end;
  }
}

TEST(Scenario, RetrackErrorIsFirstOrder) {
  const Scenario sc = load_scenario(ARMTRAJ_CONFIG_DIR "/pick_place.json");
  const SegmentReport& s = pick_place_run().segments[0];
  const RobotParams p = segment_params(sc, s);
  const double h = stable_retrack_step(s, p, sc.dt);
  EXPECT_LE(h, sc.dt);
  const double e1 = retrack_terminal_error(s, p, h);
  const double e2 = retrack_terminal_error(s, p, 0.5 * h);
  EXPECT_NEAR(e2 / e1, 0.5, 0.1);
}

TEST(Scenario, OutputsAreDeterministic) {
  const fs::path a = fs::temp_directory_path() / "armtraj_run_a";
  const fs::path b = fs::temp_directory_path() / "armtraj_run_b";
  write_run_outputs(pick_place_run(), a);
  write_run_outputs(run_scenario(load_scenario(ARMTRAJ_CONFIG_DIR "/pick_place.json")), b);
  for (const char* f : {"trajectory.csv", "segment_1.csv", "segment_2.csv", "segment_3.csv",
                        "report.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string traj = slurp(a / "trajectory.csv");
  EXPECT_EQ(traj.rfind("t,r,theta1,theta2,phi,r_dot,theta1_dot,theta2_dot,phi_dot,u_r,u_theta1,"
                       "u_theta2,u_phi\n",
                       0),
            0u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Scenario, TortureSamplingIsSeeded) {
  const GeometryParams g = default_params().geometry;
  const auto a = sample_reachable_targets(20, 42, g);
  const auto b = sample_reachable_targets(20, 42, g);
  const auto c = sample_reachable_targets(20, 43, g);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const Vec3& t : a) {
    EXPECT_TRUE(is_reachable(t, g));
  }
}

TEST(Scenario, TortureCsvAndThreadInvariance) {
  const RobotParams p = default_params();
  const auto targets = sample_reachable_targets(8, 7, p.geometry);
  const TortureReport one = run_targets(targets, p, 1);
  const TortureReport many = run_targets(targets, p, 4);
  ASSERT_EQ(one.rows.size(), 8u);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].error_mm, many.rows[i].error_mm);
    EXPECT_EQ(one.rows[i].horizons, many.rows[i].horizons);
  }
  std::ostringstream os;
  write_torture_csv(one, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,z,error_mm,t_r,t_theta1,t_theta2,t_phi,converged");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
  }
  EXPECT_EQ(rows, 8);
}

TEST(Scenario, SurfaceCsvRoundTrip) {
  SurfaceGrid grid;
  parse_grid_spec("5x7", grid);
  EXPECT_EQ(grid.n_theta1, 5);
  EXPECT_EQ(grid.n_theta2, 7);
  const TorqueSurface s = torque_surface(default_params().with_payload(1.0), grid);
  std::stringstream buf;
  write_surface_csv(s, buf);
  const TorqueSurface back = read_surface_csv(buf);
  ASSERT_EQ(back.u_phi0.size(), s.u_phi0.size());
  for (std::size_t i = 0; i < s.u_phi0.size(); ++i) {
    EXPECT_DOUBLE_EQ(back.u_phi0[i], s.u_phi0[i]);
  }
  EXPECT_DOUBLE_EQ(back.stall, s.stall);
}

TEST(Scenario, GridSpecErrors) {
  SurfaceGrid g;
  EXPECT_THROW(parse_grid_spec("", g), ParameterError);
  EXPECT_THROW(parse_grid_spec("0x5", g), ParameterError);
  EXPECT_THROW(parse_grid_spec("4x", g), ParameterError);
  EXPECT_THROW(parse_grid_spec("axb", g), ParameterError);
}
