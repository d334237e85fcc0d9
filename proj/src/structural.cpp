#include "armtraj/structural.hpp"

#include "armtraj/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace armtraj {

Vec6 ReactionSolution::as_vector() const {
  Vec6 v;
  v << ax, ay, u_phi0, bx, by, bz;
  return v;
}

MassMoments mass_moments(const JointState& state, const RobotParams& params) {
  const BodyPositions p = body_positions(state, params.geometry);
  const MassParams& m = params.mass;
  const std::array<std::pair<double, const Vec3*>, 5> bodies{{{m.m_bf, &p.s0},
                                                              {m.m1, &p.s1},
                                                              {m.m2, &p.s2},
                                                              {m.m_act, &p.s_act},
                                                              {m.grasp_mass(), &p.s_obj}}};
  MassMoments out;
  for (const auto& [mass, pos] : bodies) {
    out.total += mass;
    out.mx += mass * pos->x();
    out.my += mass * pos->y();
  }
  return out;
}

ReactionSystem assemble_system(const JointState& state, const RobotParams& params) {
  const GearTrainParams& g = params.gear;
  const double gp = g.g_p;
  const double ra = g.r_avg;
  const double tpsi = std::tan(g.psi);
  const double tphi = std::tan(g.varphi);

  ReactionSystem s;
  s.k << 1.0, 0.0, -gp * tpsi / ra, 1.0, 0.0, 0.0,
         0.0, 0.0, gp * g.h_w / ra, 0.0, g.cap_h_w, g.l_gy,
         0.0, 1.0, gp / ra, 0.0, 1.0, 0.0,
         0.0, 0.0, gp * tphi + gp * g.h_w * tpsi / ra, -g.cap_h_w, 0.0, -g.l_gx,
         0.0, 0.0, -gp * tphi / ra, 0.0, 0.0, 1.0,
         0.0, 0.0, gp, -g.l_gy, g.l_gx, 0.0;

  const MassMoments mm = mass_moments(state, params);
  const double grav = params.gravity;
  s.load << 0.0, grav * mm.my, 0.0, -grav * mm.mx, grav * mm.total, 0.0;
  return s;
}

ReactionSolution solve_reactions(const JointState& state, const RobotParams& params) {
  const GearTrainParams& g = params.gear;
  if (g.cap_h_w == 0.0 || std::abs(g.torque_denominator()) < 1e-12 || g.g_p == 0.0) {
    throw ParameterError(
        "solve_reactions: singular reaction system (H_w, G_p or the torque denominator "
        "h_w l_Gx - H_w R_avg + R_avg l_Gy tan(varphi) + h_w l_Gy tan(psi) vanishes)");
  }
  const ReactionSystem sys = assemble_system(state, params);
  Eigen::FullPivLU<Mat6> lu(sys.k);
  if (!lu.isInvertible()) {
    throw ParameterError("solve_reactions: reaction stiffness matrix is singular");
  }
  const Vec6 x = lu.solve(sys.load);
  ReactionSolution out{x[0], x[1], x[2], x[3], x[4], x[5], 0.0};
  out.max_residual = (sys.k * x - sys.load).cwiseAbs().maxCoeff();
  return out;
}

double closed_form_u_phi0(const JointState& state, const RobotParams& params) {
  const GearTrainParams& g = params.gear;
  const double denom = g.g_p * g.torque_denominator();
  if (std::abs(denom) < 1e-12) {
    throw ParameterError("closed_form_u_phi0: denominator G_p (h_w l_Gx - H_w R_avg + ...) is zero");
  }
  const MassMoments mm = mass_moments(state, params);
  return g.r_avg * params.gravity * (g.l_gx * mm.my - g.l_gy * mm.mx) / denom;
}

double SurfaceGrid::theta1_at(int i) const {
  return n_theta1 == 1 ? theta1_min
                       : theta1_min + (theta1_max - theta1_min) * i / (n_theta1 - 1.0);
}

double SurfaceGrid::theta2_at(int j) const {
  return n_theta2 == 1 ? theta2_min
                       : theta2_min + (theta2_max - theta2_min) * j / (n_theta2 - 1.0);
}

double TorqueSurface::max() const {
  return u_phi0.empty() ? 0.0 : *std::max_element(u_phi0.begin(), u_phi0.end());
}

namespace {

void check_grid(const SurfaceGrid& grid) {
  if (grid.n_theta1 < 1 || grid.n_theta2 < 1) {
    throw ParameterError("surface grid must have at least one node per axis");
  }
  if (grid.max_over_phi && grid.n_phi < 1) {
    throw ParameterError("surface grid: n_phi must be positive");
  }
}

std::vector<double> phi_samples(const SurfaceGrid& grid) {
  if (!grid.max_over_phi) {
    return {grid.phi};
  }
  std::vector<double> out(grid.n_phi);
  for (int k = 0; k < grid.n_phi; ++k) {
    out[k] = -kPi + 2.0 * kPi * k / grid.n_phi;
  }
  return out;
}

double grid_r(const SurfaceGrid& grid, const RobotParams& params) {
  return grid.r < 0.0 ? params.geometry.r_ext : grid.r;
}

// u_phi0 = a + b * m_obj at one node (worst phi when sweeping).
struct AffineTorque {
  double a;
  double b;
};

std::vector<AffineTorque> affine_nodes(const RobotParams& params, const SurfaceGrid& grid) {
  RobotParams p0 = params;
  p0.mass.m_obj = 0.0;
  RobotParams p1 = params;
  p1.mass.m_obj = 1.0;
  std::vector<AffineTorque> out;
  const double r = grid_r(grid, params);
  for (int i = 0; i < grid.n_theta1; ++i) {
    for (int j = 0; j < grid.n_theta2; ++j) {
      for (double phi : phi_samples(grid)) {
        const JointState s = JointState::at(Vec4{r, grid.theta1_at(i), grid.theta2_at(j), phi});
        const double a = closed_form_u_phi0(s, p0);
        out.push_back({a, closed_form_u_phi0(s, p1) - a});
      }
    }
  }
  return out;
}

double max_abs_torque(const std::vector<AffineTorque>& nodes, double m) {
  double best = 0.0;
  for (const AffineTorque& n : nodes) {
    best = std::max(best, std::abs(n.a + n.b * m));
  }
  return best;
}

}  // namespace

TorqueSurface torque_surface(const RobotParams& params, const SurfaceGrid& grid) {
  check_grid(grid);
  TorqueSurface out;
  out.stall = params.derived.effective_stall[kAzimuth];
  for (int i = 0; i < grid.n_theta1; ++i) {
    out.theta1.push_back(grid.theta1_at(i));
  }
  for (int j = 0; j < grid.n_theta2; ++j) {
    out.theta2.push_back(grid.theta2_at(j));
  }
  const double r = grid_r(grid, params);
  const std::vector<double> phis = phi_samples(grid);
  out.u_phi0.resize(out.theta1.size() * out.theta2.size());
  for (std::size_t i = 0; i < out.theta1.size(); ++i) {
    for (std::size_t j = 0; j < out.theta2.size(); ++j) {
      double worst = 0.0;
      for (double phi : phis) {
        const JointState s = JointState::at(Vec4{r, out.theta1[i], out.theta2[j], phi});
        worst = std::max(worst, std::abs(closed_form_u_phi0(s, params)));
      }
      out.u_phi0[i * out.theta2.size() + j] = worst;
    }
  }
  return out;
}

CapacityReport payload_capacity(const RobotParams& params, double stall, const SurfaceGrid& grid,
                                double bisection_tol) {
  check_grid(grid);
  const std::vector<AffineTorque> nodes = affine_nodes(params, grid);
  CapacityReport rep;
  for (const AffineTorque& n : nodes) {
    rep.max_slope = std::max(rep.max_slope, std::abs(n.b));
  }
  if (max_abs_torque(nodes, 0.0) >= stall) {
    return rep;
  }

  // Direct route: first payload at which any node's |a + b m| reaches the stall.
  double first = std::numeric_limits<double>::infinity();
  for (const AffineTorque& n : nodes) {
    if (n.b == 0.0) {
      continue;
    }
    for (double level : {stall, -stall}) {
      const double m = (level - n.a) / n.b;
      if (m >= 0.0) {
        first = std::min(first, m);
      }
    }
  }
  if (!std::isfinite(first)) {
    rep.unbounded = true;
    rep.capacity = std::numeric_limits<double>::infinity();
    rep.bisection = rep.capacity;
    return rep;
  }
  rep.capacity = first;

  // Bisection oracle on the max-over-grid torque.
  double lo = 0.0;
  double hi = 1.0;
  while (max_abs_torque(nodes, hi) < stall) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    (max_abs_torque(nodes, mid) < stall ? lo : hi) = mid;
  }
  rep.bisection = 0.5 * (lo + hi);
  return rep;
}

GearTrainParams fit_gear_offset(const RobotParams& params, double target_capacity, double stall,
                                const SurfaceGrid& grid) {
  if (!(target_capacity > 0.0)) {
    throw ParameterError("fit_gear_offset: target capacity must be positive");
  }
  // D(l_Gy) = c0 + c1 l_Gy. |u| grows like l_Gy/|D|, so capacity falls monotonically
  // as l_Gy moves from 0 toward the root of D (or without bound if D never vanishes).
  const GearTrainParams& g = params.gear;
  const double c0 = g.h_w * g.l_gx - g.cap_h_w * g.r_avg;
  const double c1 = g.r_avg * std::tan(g.varphi) + g.h_w * std::tan(g.psi);
  double hi = 1.0;
  if (c1 != 0.0 && -c0 / c1 > 0.0) {
    hi = -c0 / c1 * (1.0 - 1e-9);
  }
  const auto capacity_at = [&](double l_gy) {
    RobotParams p = params;
    p.gear.l_gy = l_gy;
    return payload_capacity(p, stall, grid).capacity;
  };
  double lo = hi * 1e-9;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (capacity_at(mid) > target_capacity ? lo : hi) = mid;
  }
  GearTrainParams out = g;
  out.l_gy = 0.5 * (lo + hi);
  out.provenance = "fitted";
  return out;
}

}  // namespace armtraj
