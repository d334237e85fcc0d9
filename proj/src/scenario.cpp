#include "armtraj/scenario.hpp"

#include "armtraj/kinematics.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace armtraj {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec3 read_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ParameterError(field + ": expected [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("scenario: ") + e.what());
  }
  Scenario sc;
  if (root.contains("robot")) {
    sc.params = parse_config(root["robot"].dump());
  } else if (root.contains("config")) {
    sc.params = load_config(base_dir / root["config"].get<std::string>());
  }
  if (root.contains("dt")) {
    sc.dt = root["dt"].get<double>();
    if (!(sc.dt > 0.0)) {
      throw ParameterError("scenario.dt must be positive");
    }
  }
  if (root.contains("start_pose")) {
    const json& a = root["start_pose"];
    if (!a.is_array() || a.size() != 4) {
      throw ParameterError("scenario.start_pose: expected 4 values");
    }
    sc.start_pose = Vec4{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(),
                         a[3].get<double>()};
  }
  if (root.contains("stop_on_failure")) {
    sc.stop_on_failure = root["stop_on_failure"].get<bool>();
  }
  if (!root.contains("waypoints") || !root["waypoints"].is_array() ||
      root["waypoints"].empty()) {
    throw ParameterError("scenario.waypoints: at least one waypoint is required");
  }
  int idx = 0;
  for (const json& w : root["waypoints"]) {
    ++idx;
    const std::string field = "scenario.waypoints[" + std::to_string(idx) + "]";
    Waypoint wp;
    if (!w.contains("ee_target")) {
      throw ParameterError(field + ".ee_target is required");
    }
    wp.ee_target = read_vec3(w["ee_target"], field + ".ee_target");
    if (w.contains("z1_target") && !w["z1_target"].is_null()) {
      wp.z1_target = w["z1_target"].get<double>();
    }
    if (w.contains("tolerance") && !w["tolerance"].is_null()) {
      wp.tolerance = w["tolerance"].get<double>();
    }
    if (w.contains("m_obj")) {
      wp.m_obj = w["m_obj"].get<double>();
    }
    if (wp.m_obj < 0.0) {
      throw ParameterError(field + ".m_obj must be nonnegative");
    }
    sc.waypoints.push_back(wp);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParameterError("scenario: cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

RobotParams segment_params(const Scenario& scenario, const SegmentReport& segment) {
  return scenario.params.with_payload(segment.m_obj);
}

RunReport run_scenario(const Scenario& sc) {
  RunReport report;
  report.effective_stall = sc.params.derived.effective_stall;
  Vec4 q = sc.start_pose.value_or(sc.params.home_pose);
  double clock = 0.0;

  for (std::size_t k = 0; k < sc.waypoints.size(); ++k) {
    const Waypoint& wp = sc.waypoints[k];
    const int index = static_cast<int>(k) + 1;
    if (!is_reachable(wp.ee_target, sc.params.geometry)) {
      throw ScenarioError("waypoint " + std::to_string(index) + " is outside the reachable annulus",
                          index);
    }
    GdthConfig cfg = sc.params.gdth;
    if (wp.tolerance) {
      cfg.ee_tolerance = *wp.tolerance;
    }

    SegmentReport seg;
    seg.index = index;
    seg.t_offset = clock;
    seg.m_obj = wp.m_obj;
    seg.q_start = q;
    seg.gdth = run({wp.ee_target, wp.z1_target, wp.m_obj}, JointState::at(q), cfg, sc.params,
                   {false, 1});
    seg.converged = seg.gdth.converged;
    if (!seg.converged && sc.stop_on_failure) {
      throw ScenarioError("GDTH did not converge for waypoint " + std::to_string(index), index);
    }
    seg.q_end = seg.gdth.q_star;

    // A joint that froze at once still has to cover its residual move. The cubic
    // peaks at 1.5 dq / tf, so tf is floored to keep that under the no-load limit.
    const RobotParams p = sc.params.with_payload(wp.m_obj);
    const Vec4 vlim = velocity_limits(p);
    Vec4 tf = seg.gdth.horizons.cwiseMax(Vec4::Constant(sc.dt));
    for (int j = 0; j < kNumJoints; ++j) {
      const double need = 1.5 * std::abs(seg.q_end[j] - seg.q_start[j]) / vlim[j];
      tf[j] = std::max(tf[j], sc.dt * std::ceil(need / sc.dt - 1e-9));
    }
    seg.pmp = PmpTrajectory::rest_to_rest(seg.q_start, seg.q_end, tf);

    const double duration = seg.pmp.duration();
    const auto steps = static_cast<long>(std::ceil(duration / sc.dt - 1e-9));
    for (long i = 0; i <= steps; ++i) {
      const double t = std::min(i * sc.dt, duration);
      Vec4 qs, qd, qdd;
      seg.pmp.eval_all(t, qs, qd, qdd);
      const JointState st = JointState::at(qs, qd);
      const Vec4 u = inverse_dynamics(st, qdd, p, seg.q_start);
      seg.samples.push_back({t, st, u});
      for (int j = 0; j < kNumJoints; ++j) {
        seg.peak_abs_u[j] = std::max(seg.peak_abs_u[j], std::abs(u[j]));
      }
    }
    for (int j = 0; j < kNumJoints; ++j) {
      seg.stall[j] = seg.peak_abs_u[j] > report.effective_stall[j];
      report.stall_any[j] = report.stall_any[j] || seg.stall[j];
    }
    clock += duration;
    q = seg.q_end;
    report.segments.push_back(std::move(seg));
  }
  return report;
}

double retrack_terminal_error(const SegmentReport& segment, const RobotParams& params,
                              double dt) {
  const PmpTrajectory& ref = segment.pmp;
  const Vec4 rest = segment.q_start;
  const ControlLaw feedforward = [&](double t, const JointState&) {
    // Torque is held over each step, evaluated on the reference at the step start.
    Vec4 q, qd, qdd;
    ref.eval_all(t, q, qd, qdd);
    return inverse_dynamics(JointState::at(q, qd), qdd, params, rest);
  };
  const double horizon = ref.duration();
  const std::vector<TrajectorySample> out =
      forward_integrate(JointState::at(segment.q_start), feedforward, dt, horizon, params, rest);
  Vec4 q, qd, qdd;
  ref.eval_all(out.back().t, q, qd, qdd);
  return (out.back().state.q - q).norm();
}

double stable_retrack_step(const SegmentReport& segment, const RobotParams& params, double dt) {
  using Mat8 = Eigen::Matrix<double, 8, 8>;
  const double T = segment.pmp.duration();
  double rho = 0.0;
  for (double t : {0.0, 0.5 * T, T}) {
    Vec4 q, qd, qdd;
    segment.pmp.eval_all(t, q, qd, qdd);
    const Mat4 minv = mass_matrix(JointState::at(q), params).inverse();
    Mat8 a = Mat8::Zero();
    a.topRightCorner<4, 4>().setIdentity();
    a.bottomLeftCorner<4, 4>() = -minv * params.derived.stiffness.asDiagonal();
    a.bottomRightCorner<4, 4>() = -minv * params.derived.damping.asDiagonal();
    rho = std::max(rho, a.eigenvalues().cwiseAbs().maxCoeff());
  }
  double h = dt;
  while (h * rho > 1.0) {
    h *= 0.5;
  }
  return h;
}

void write_trajectory_csv(const SegmentReport& seg, std::ostream& out, bool header) {
  if (header) {
    out << "t,r,theta1,theta2,phi,r_dot,theta1_dot,theta2_dot,phi_dot,u_r,u_theta1,u_theta2,"
           "u_phi\n";
  }
  for (const TrajectorySample& s : seg.samples) {
    out << num(seg.t_offset + s.t);
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << num(s.state.q[j]);
    }
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << num(s.state.qdot[j]);
    }
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << num(s.u[j]);
    }
    out << '\n';
  }
}

std::string summarize(const RunReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  static const char* names[] = {"r", "theta1", "theta2", "phi"};
  for (const SegmentReport& s : report.segments) {
    os << "segment " << s.index << "  m_obj=" << s.m_obj << " kg  ee_error="
       << s.gdth.ee_error * 1000.0 << " mm (" << s.gdth.ee_error / 0.0254 << " in)"
       << (s.converged ? "" : "  NOT CONVERGED") << '\n';
    for (int j = 0; j < kNumJoints; ++j) {
      os << "  " << names[j] << ": " << s.q_start[j] << " -> " << s.q_end[j]
         << "  t_f=" << s.pmp.tf[j] << " s  c=(" << s.pmp.coeffs[j].c1 << ", "
         << s.pmp.coeffs[j].c2 << ", " << s.pmp.coeffs[j].c3 << ", " << s.pmp.coeffs[j].c4
         << ")  peak|u|=" << s.peak_abs_u[j] << " / stall " << report.effective_stall[j]
         << (s.stall[j] ? "  STALL" : "") << '\n';
    }
  }
  return os.str();
}

void write_run_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream all = open_out(dir / "trajectory.csv");
    bool header = true;
    for (const SegmentReport& s : report.segments) {
      write_trajectory_csv(s, all, header);
      header = false;
      std::ofstream one = open_out(dir / ("segment_" + std::to_string(s.index) + ".csv"));
      write_trajectory_csv(s, one);
    }
  }
  json segs = json::array();
  for (const SegmentReport& s : report.segments) {
    json coeffs = json::array();
    for (const CubicCoefficients& c : s.pmp.coeffs) {
      coeffs.push_back({c.c1, c.c2, c.c3, c.c4});
    }
    segs.push_back({
        {"index", s.index},
        {"m_obj", s.m_obj},
        {"t_offset", s.t_offset},
        {"q_start", {s.q_start[0], s.q_start[1], s.q_start[2], s.q_start[3]}},
        {"q_end", {s.q_end[0], s.q_end[1], s.q_end[2], s.q_end[3]}},
        {"horizons", {s.gdth.horizons[0], s.gdth.horizons[1], s.gdth.horizons[2],
                      s.gdth.horizons[3]}},
        {"pmp_tf", {s.pmp.tf[0], s.pmp.tf[1], s.pmp.tf[2], s.pmp.tf[3]}},
        {"pmp_coefficients", coeffs},
        {"ee_error_m", s.gdth.ee_error},
        {"converged", s.converged},
        {"peak_abs_u", {s.peak_abs_u[0], s.peak_abs_u[1], s.peak_abs_u[2], s.peak_abs_u[3]}},
        {"stall", {s.stall[0], s.stall[1], s.stall[2], s.stall[3]}},
    });
  }
  const Vec4& es = report.effective_stall;
  json root = {{"segments", segs},
               {"effective_stall", {es[0], es[1], es[2], es[3]}},
               {"stall_any", {report.stall_any[0], report.stall_any[1], report.stall_any[2],
                              report.stall_any[3]}}};
  std::ofstream rep = open_out(dir / "report.json");
  rep << root.dump(2) << '\n';
}

std::vector<Vec3> sample_reachable_targets(int n, std::uint64_t seed, const GeometryParams& geom) {
  if (n < 1) {
    throw ParameterError("torture test: n must be at least 1");
  }
  const ReachAnnulus a = reach_annulus(geom);
  const double mount_rho = geom.l0 * std::sin(geom.vartheta);
  const double mount_z = geom.l0 * std::cos(geom.vartheta);
  const double half = mount_rho + a.upper;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uxy(-half, half);
  std::uniform_real_distribution<double> uz(mount_z - a.upper, mount_z + a.upper);
  std::vector<Vec3> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    const Vec3 x{uxy(rng), uxy(rng), uz(rng)};
    if (is_reachable(x, geom)) {
      out.push_back(x);
    }
  }
  return out;
}

TortureReport run_targets(const std::vector<Vec3>& targets, const RobotParams& params,
                          int threads) {
  TortureReport rep;
  rep.rows.resize(targets.size());
  const JointState start = JointState::at(params.home_pose);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < targets.size(); i = next++) {
      const GdthResult r = run({targets[i], std::nullopt, params.mass.m_obj}, start, params.gdth,
                               params, {false, 1});
      rep.rows[i] = {targets[i], r.ee_error * 1000.0, r.horizons, r.iterations, r.converged};
    }
  };
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::clamp(nt, 1, static_cast<int>(std::max<std::size_t>(1, targets.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& th : pool) {
    th.join();
  }

  if (rep.rows.empty()) {
    return rep;
  }
  std::vector<double> errs;
  int within = 0;
  for (const TortureRow& r : rep.rows) {
    errs.push_back(r.error_mm);
    within += r.error_mm <= 25.4;
    rep.mean_horizons += r.horizons;
    rep.max_horizons = rep.max_horizons.cwiseMax(r.horizons);
  }
  const auto n = static_cast<double>(errs.size());
  rep.mean_horizons /= n;
  rep.fraction_within_inch = within / n;
  std::sort(errs.begin(), errs.end());
  const std::size_t mid = errs.size() / 2;
  rep.median_error_mm = errs.size() % 2 ? errs[mid] : 0.5 * (errs[mid - 1] + errs[mid]);
  double sum = 0.0;
  for (double e : errs) {
    sum += e;
  }
  rep.mean_error_mm = sum / n;
  rep.max_error_mm = errs.back();
  return rep;
}

TortureReport torture_test(int n, std::uint64_t seed, const RobotParams& params, int threads) {
  return run_targets(sample_reachable_targets(n, seed, params.geometry), params, threads);
}

void write_torture_csv(const TortureReport& report, std::ostream& out) {
  out << "x,y,z,error_mm,t_r,t_theta1,t_theta2,t_phi,converged\n";
  for (const TortureRow& r : report.rows) {
    out << num(r.target.x()) << ',' << num(r.target.y()) << ',' << num(r.target.z()) << ','
        << num(r.error_mm);
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << num(r.horizons[j]);
    }
    out << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::string summarize(const TortureReport& rep) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "targets: " << rep.rows.size() << '\n'
     << "within 25.4 mm (1 in): " << rep.fraction_within_inch * 100.0 << " %\n"
     << "median error: " << rep.median_error_mm << " mm (" << rep.median_error_mm / 25.4
     << " in)\n"
     << "mean error: " << rep.mean_error_mm << " mm, max " << rep.max_error_mm << " mm\n"
     << "mean horizons (r, th1, th2, phi): " << rep.mean_horizons.transpose() << " s\n"
     << "max horizons: " << rep.max_horizons.transpose() << " s\n";
  return os.str();
}

void write_surface_csv(const TorqueSurface& s, std::ostream& out) {
  out << "theta1,theta2,u_phi0,stall\n";
  for (std::size_t i = 0; i < s.theta1.size(); ++i) {
    for (std::size_t j = 0; j < s.theta2.size(); ++j) {
      out << num(s.theta1[i]) << ',' << num(s.theta2[j]) << ',' << num(s.at(i, j)) << ','
          << num(s.stall) << '\n';
    }
  }
}

TorqueSurface export_surface(const RobotParams& params, const SurfaceGrid& grid,
                             const std::filesystem::path& path) {
  const TorqueSurface s = torque_surface(params, grid);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out = open_out(path);
  write_surface_csv(s, out);
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
  return s;
}

TorqueSurface read_surface_csv(std::istream& in) {
  TorqueSurface s;
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 4>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::array<double, 4> v{};
    std::stringstream ss(line);
    std::string cell;
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) {
        throw ParameterError("surface csv: short row");
      }
      x = std::stod(cell);
    }
    rows.push_back(v);
  }
  for (const auto& r : rows) {
    if (s.theta1.empty() || s.theta1.back() != r[0]) {
      s.theta1.push_back(r[0]);
    }
    if (s.theta1.size() == 1) {
      s.theta2.push_back(r[1]);
    }
    s.u_phi0.push_back(r[2]);
    s.stall = r[3];
  }
  return s;
}

void parse_grid_spec(const std::string& spec, SurfaceGrid& grid) {
  int n = 0;
  int m = 0;
  char x = 0;
  std::stringstream ss(spec);
  if (!(ss >> n >> x >> m) || (x != 'x' && x != 'X') || n < 1 || m < 1 || !ss.eof()) {
    throw ParameterError("grid spec must look like NxM with N, M >= 1 (got '" + spec + "')");
  }
  grid.n_theta1 = n;
  grid.n_theta2 = m;
}

}  // namespace armtraj
