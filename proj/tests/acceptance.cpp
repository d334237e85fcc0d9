// Acceptance run: one PASS/FAIL line per criterion.
//
// Criterion 6 cannot pass as stated: a similarity transform keeps the
// eigenvalues of the reported principal tensors, and the printed link sets
// differ from them in the last digit. It is reported as FAIL and, unless
// --strict is given, does not change the exit status.

#include "armtraj/inertia.hpp"
#include "armtraj/pmp.hpp"
#include "armtraj/scenario.hpp"
#include "armtraj/structural.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace armtraj;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
  bool known_failure = false;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome pmp_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> tfd(0.1, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const BoundaryConditions bc{u(rng), u(rng), u(rng), u(rng), tfd(rng)};
    const CubicCoefficients c = solve_boundary(bc);
    const PmpSample a = eval(c, bc.tf, 0.0);
    const PmpSample b = eval(c, bc.tf, bc.tf);
    worst = std::max({worst, std::abs(a.q - bc.q0), std::abs(a.qdot - bc.v0),
                      std::abs(b.q - bc.qf), std::abs(b.qdot - bc.vf)});
    // independent route: dense LU on the same boundary rows
    const Vec4 lu = boundary_matrix(bc.tf).fullPivLu().solve(Vec4(bc.vf, bc.qf, bc.v0, bc.q0));
    worst = std::max(worst, (lu - Vec4(c.c1, c.c2, c.c3, c.c4)).cwiseAbs().maxCoeff() /
                                std::max(1.0, lu.cwiseAbs().maxCoeff()));
  }
  const CubicCoefficients unit = solve_boundary({0.0, 1.0, 0.0, 0.0, 1.0});
  const double unit_err = (Vec4(unit.c1, unit.c2, unit.c3, unit.c4) - Vec4(-12, 6, 0, 0))
                              .cwiseAbs()
                              .maxCoeff();
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && unit_err <= 1e-12 && t < 1.0,
          fmt("max residual %.2e, unit case err %.1e, %.3f s", worst, unit_err, t)};
}

Outcome pmp_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> tfd(0.2, 5.0);
  bool ok = true;
  double min_inc = INFINITY;
  int total = 0;
  for (int k = 0; k < 100; ++k) {
    const double tf = tfd(rng);
    const CubicCoefficients c = solve_boundary({u(rng), u(rng), 0.0, 0.0, tf});
    const OptimalityReport r = verify_optimality(c, tf, 20);
    ok = ok && r.all_increase && r.min_increase > 1e-8;
    min_inc = std::min(min_inc, r.min_increase);
    total += r.perturbations;
  }
  const double t = seconds_since(t0);
  return {ok && t < 5.0,
          fmt("%d perturbations, smallest increase %.3e, %.3f s", total, min_inc, t)};
}

Outcome dynamics_certification() {
  const auto t0 = std::chrono::steady_clock::now();
  const RobotParams p = default_params().with_payload(2.0);
  const Vec4 rest = p.home_pose;
  const testkit::ElOracle oracle(p, rest);
  std::mt19937_64 rng(103);
  double el = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vec4 q = testkit::random_pose(rng, p.geometry);
    const Vec4 qd = testkit::random_vec(rng, 1.0);
    const Vec4 qdd = testkit::random_vec(rng, 2.0);
    const Vec4 ref = oracle.forces(q, qd, qdd);
    el = std::max(el, (inverse_dynamics(JointState::at(q, qd), qdd, p, rest) - ref).norm() /
                          ref.norm());
  }
  double min_eig = INFINITY;
  double skew = 0.0;
  double grav = 0.0;
  bool gphi_zero = true;
  for (int k = 0; k < 1000; ++k) {
    const JointState s =
        JointState::at(testkit::random_pose(rng, p.geometry), testkit::random_vec(rng, 2.0));
    const Mat4 m = mass_matrix(s, p);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat4>(m).eigenvalues().minCoeff());
    if (k < 200) {
      const Vec4 x = testkit::random_vec(rng, 1.0);
      skew = std::max(skew,
                      std::abs(x.dot((mass_matrix_rate(s, p) - 2.0 * coriolis_matrix(s, p)) * x)));
      const Vec4 g = gravity_gradient(s, p);
      Vec4 fd;
      for (int i = 0; i < kNumJoints; ++i) {
        JointState a = s;
        JointState b = s;
        a.q[i] += 1e-6;
        b.q[i] -= 1e-6;
        fd[i] = (potential_energy(a, p, rest).gravitational -
                 potential_energy(b, p, rest).gravitational) /
                2e-6;
      }
      grav = std::max(grav, (g - fd).norm() / g.norm());
      gphi_zero = gphi_zero && g[kAzimuth] == 0.0;
    }
  }
  const double t = seconds_since(t0);
  return {el <= 1e-5 && min_eig > 0.0 && skew <= 1e-8 && grav <= 1e-6 && gphi_zero && t < 30.0,
          fmt("EL rel %.2e, min eig(M) %.3e, |x'(Mdot-2C)x| %.1e, G rel %.1e, G_phi%s0, %.2f s",
              el, min_eig, skew, grav, gphi_zero ? "==" : "!=", t)};
}

Outcome structural_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  double route = 0.0;
  double resid = 0.0;
  double affine = 0.0;
  for (int k = 0; k < 1000; ++k) {
    RobotParams p = default_params();
    GearTrainParams& g = p.gear;
    g.r_avg *= u(rng);
    g.h_w *= u(rng);
    g.cap_h_w *= u(rng);
    g.l_gx *= u(rng);
    g.l_gy *= u(rng);
    g.psi *= u(rng);
    p.mass.m_obj = 6.0 * (u(rng) - 0.5);
    finalize(p);
    const JointState s = JointState::at(testkit::random_pose(rng, p.geometry));
    const ReactionSolution r = solve_reactions(s, p);
    const double cf = closed_form_u_phi0(s, p);
    route = std::max(route, std::abs(r.u_phi0 - cf) / std::max(1.0, std::abs(cf)));
    resid = std::max(resid, r.max_residual);
    const Vec3 obj = body_positions(s, p.geometry).s_obj;
    const double coef = g.r_avg * p.gravity * (g.l_gx * obj.y() - g.l_gy * obj.x()) /
                        (g.g_p * g.torque_denominator());
    const double slope = closed_form_u_phi0(s, p.with_payload(p.mass.m_obj + 1.0)) - cf;
    affine = std::max(affine, std::abs(slope - coef) / std::max(1.0, std::abs(coef)));
  }
  const double t = seconds_since(t0);
  return {route <= 1e-10 && resid <= 1e-9 && affine <= 1e-10 && t < 5.0,
          fmt("route rel %.1e, residual %.1e, slope rel %.1e, %.3f s", route, resid, affine, t)};
}

Outcome effective_stalls() {
  const double a = effective_stall(68.64655, 0.95, 2.0);
  const double b = effective_stall(68.64655, 0.85, 2.0);
  const double c = effective_stall(68.64655, 0.85, 4.0);
  const bool ok =
      std::abs(a - 130.4) <= 0.05 && std::abs(b - 116.7) <= 0.05 && std::abs(c - 233.4) <= 0.05;
  return {ok, fmt("%.4f / %.4f / %.4f N m", a, b, c)};
}

bool matches_printed(const Vec3& computed, const std::vector<double>& printed,
                     const std::vector<double>& quantum) {
  Vec3 c = computed;
  std::sort(c.data(), c.data() + 3);
  std::vector<std::pair<double, double>> p;
  for (std::size_t i = 0; i < printed.size(); ++i) {
    p.emplace_back(printed[i], quantum[i]);
  }
  std::sort(p.begin(), p.end());
  for (int i = 0; i < 3; ++i) {
    if (std::abs(c[i] - p[i].first) > 0.5 * p[i].second) {
      return false;
    }
  }
  return true;
}

Outcome inertia_transforms() {
  constexpr double deg = kPi / 180.0;
  const Mat3 l1 = cad_to_dynamic(DiagInertia{0.023, 0.005, 0.020}, {1.82 * deg, -0.70 * deg, 0.12 * deg});
  const Mat3 l2 = cad_to_dynamic(DiagInertia{0.000252, 0.000044, 0.000251},
                                 {-0.13 * deg, 41.11 * deg, -0.13 * deg});
  const Vec3 e1 = Eigen::SelfAdjointEigenSolver<Mat3>(l1).eigenvalues();
  const Vec3 e2 = Eigen::SelfAdjointEigenSolver<Mat3>(l2).eigenvalues();
  const bool link1 = matches_printed(e1, {0.021, 0.0240, 0.0050}, {1e-3, 1e-4, 1e-4});
  const bool link2 = matches_printed(e2, {2.53e-4, 2.52e-4, 4.40e-5}, {1e-6, 1e-6, 1e-7});

  Mat3 lo;
  lo << 0.01187588, 0, 0, 0.00748855, 0.02456819, 0, 0.00036682, -0.00146963, 0.03076740;
  const CadOrientation base{-19.3684 * deg * deg, 6.2986 * deg * deg, 24.3646 * deg * deg};
  const Vec3 d = parallel_axis(cad_to_dynamic(symmetrize_lower(lo), base), 3.53790071,
                               Vec3(0.005, 0.006, 0.065), ParallelAxisMode::kDiagonalOnly)
                     .diagonal();
  const bool base_ok = (d - Vec3(0.0270, 0.0396, 0.0310)).cwiseAbs().maxCoeff() <= 5e-4;
  return {link1 && link2 && base_ok,
          fmt("link1 eig {%.4f %.4f %.4f} vs {0.021 0.0240 0.0050} %s; link2 eig {%.3e %.3e %.3e} "
              "vs {2.53e-4 2.52e-4 4.40e-5} %s; base diag (%.5f %.5f %.5f) %s",
              e1[0], e1[1], e1[2], link1 ? "ok" : "mismatch", e2[0], e2[1], e2[2],
              link2 ? "ok" : "mismatch", d[0], d[1], d[2], base_ok ? "ok" : "mismatch")};
}

Outcome gdth_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const TortureReport r = torture_test(100, 42, default_params(), 1);
  const double t = seconds_since(t0);
  return {r.fraction_within_inch >= 0.9 && r.median_error_mm <= 25.4 && t < 120.0,
          fmt("%.0f%% within 25.4 mm, median %.2f mm, max %.1f mm, %.2f s",
              100.0 * r.fraction_within_inch, r.median_error_mm, r.max_error_mm, t)};
}

Outcome payload_capacity_check() {
  const RobotParams p = load_config(ARMTRAJ_CONFIG_DIR "/gear_calibrated.json");
  const double stall = p.derived.effective_stall[kAzimuth];
  const SurfaceGrid grid;
  const CapacityReport cap = payload_capacity(p, stall, grid);
  const double heavy = torque_surface(p.with_payload(7.11), grid).max();
  const double empty = torque_surface(p.with_payload(0.0), grid).max();
  const bool conditional = p.gear.provenance == "fitted" && !cap.unbounded &&
                           std::abs(cap.capacity - 6.80389) <= 0.01 && heavy > stall &&
                           empty <= stall;

  // unconditional properties over arbitrary valid gear geometry
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  SurfaceGrid coarse;
  coarse.n_theta1 = coarse.n_theta2 = 11;
  double bis = 0.0;
  bool mono = true;
  bool linear = true;
  for (int k = 0; k < 20; ++k) {
    RobotParams q = default_params();
    q.gear.h_w *= u(rng);
    q.gear.cap_h_w *= u(rng);
    q.gear.l_gx *= u(rng);
    q.gear.l_gy *= u(rng);
    q.gear.psi *= u(rng);
    finalize(q);
    const CapacityReport c = payload_capacity(q, stall, coarse);
    if (!c.unbounded) {
      bis = std::max(bis, std::abs(c.capacity - c.bisection));
    }
    const double m0 = torque_surface(q.with_payload(0.0), coarse).max();
    const double m2 = torque_surface(q.with_payload(2.0), coarse).max();
    const double m4 = torque_surface(q.with_payload(4.0), coarse).max();
    mono = mono && m0 <= m2 + 1e-12 && m2 <= m4 + 1e-12;
    const JointState s = JointState::at(testkit::random_pose(rng, q.geometry));
    const double a = closed_form_u_phi0(s, q.with_payload(0.0));
    const double b = closed_form_u_phi0(s, q.with_payload(1.0));
    const double c3 = closed_form_u_phi0(s, q.with_payload(3.0));
    linear = linear && std::abs((c3 - a) - 3.0 * (b - a)) <= 1e-10 * std::max(1.0, std::abs(c3));
  }
  const bool unconditional = bis <= 1e-3 && mono && linear;
  return {conditional && unconditional,
          fmt("capacity %.5f kg (bisection %.5f), max|u| %.1f at 7.11 kg, %.1f at 0 kg, stall "
              "%.1f N m; unconditional: bisection gap %.1e kg, monotone %s, affine %s",
              cap.capacity, cap.bisection, heavy, empty, stall, bis, mono ? "yes" : "no",
              linear ? "yes" : "no")};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = load_scenario(ARMTRAJ_CONFIG_DIR "/pick_place.json");
  const RunReport a = run_scenario(sc);
  const RunReport b = run_scenario(sc);
  const fs::path da = fs::temp_directory_path() / "armtraj_accept_a";
  const fs::path db = fs::temp_directory_path() / "armtraj_accept_b";
  write_run_outputs(a, da);
  write_run_outputs(b, db);
  bool same = true;
  for (const auto& e : fs::directory_iterator(da)) {
    same = same && read_all(e.path()) == read_all(db / e.path().filename());
  }
  fs::remove_all(da);
  fs::remove_all(db);

  bool converged = true;
  bool ratios_ok = true;
  std::string ratios;
  for (const SegmentReport& s : a.segments) {
    converged = converged && s.converged;
    const RobotParams p = segment_params(sc, s);
    const double h = stable_retrack_step(s, p, sc.dt);
    const double e1 = retrack_terminal_error(s, p, h);
    const double e2 = retrack_terminal_error(s, p, 0.5 * h);
    const double ratio = e2 / e1;
    ratios_ok = ratios_ok && std::abs(ratio - 0.5) <= 0.1;
    ratios += fmt(" %.3f@%gs", ratio, h);
  }
  const double t = seconds_since(t0);
  return {a.segments.size() == 3 && converged && same && ratios_ok && t < 60.0,
          fmt("%zu segments, converged %s, deterministic %s, halving ratios%s, %.1f s",
              a.segments.size(), converged ? "yes" : "no", same ? "yes" : "no", ratios.c_str(),
              t)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<Criterion> criteria{
      {1, "PMP exactness", pmp_exactness},
      {2, "PMP optimality", pmp_optimality},
      {3, "dynamics certification", dynamics_certification},
      {4, "structural equivalence", structural_equivalence},
      {5, "effective stalls", effective_stalls},
      {6, "inertia transforms", inertia_transforms, true},
      {7, "GDTH convergence", gdth_convergence},
      {8, "payload capacity", payload_capacity_check},
      {9, "end-to-end scenario", end_to_end},
  };
  int unexpected = 0;
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %d %-24s %s  %s%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), !o.pass && c.known_failure ? "  [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass) {
      ++failed;
      if (!c.known_failure || strict) {
        ++unexpected;
      }
    }
  }
  std::printf("%zu criteria, %d passed, %d failed (%d unexpected)\n", criteria.size(),
              static_cast<int>(criteria.size()) - failed, failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
