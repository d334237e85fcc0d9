#pragma once

#include "armtraj/params.hpp"
#include "armtraj/types.hpp"

#include <vector>

namespace armtraj {

/// Unknown ordering of the reaction system: (A_x, A_y, u_phi0, B_x, B_y, B_z).
struct ReactionSolution {
  double ax = 0.0;
  double ay = 0.0;
  double u_phi0 = 0.0;
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;
  double max_residual = 0.0;

  Vec6 as_vector() const;
};

struct ReactionSystem {
  Mat6 k = Mat6::Zero();
  Vec6 load = Vec6::Zero();
};

/// Mass-weighted horizontal moment sums over base frame, links, rod and grasp.
struct MassMoments {
  double total = 0.0;  // sum m
  double mx = 0.0;     // sum m x
  double my = 0.0;     // sum m y
};

MassMoments mass_moments(const JointState& state, const RobotParams& params);

ReactionSystem assemble_system(const JointState& state, const RobotParams& params);

/// Solves K R = q. Throws ParameterError when the gear geometry makes K singular.
ReactionSolution solve_reactions(const JointState& state, const RobotParams& params);

/// R_avg g (l_Gx sum m y - l_Gy sum m x) / (G_p D).
double closed_form_u_phi0(const JointState& state, const RobotParams& params);

struct SurfaceGrid {
  int n_theta1 = 41;
  int n_theta2 = 41;
  double theta1_min = -kPi / 2.0;
  double theta1_max = kPi / 2.0;
  double theta2_min = -kPi / 2.0;
  double theta2_max = kPi / 2.0;
  double r = -1.0;  // negative selects the full stroke r_ext
  double phi = 0.0;
  bool max_over_phi = false;
  int n_phi = 72;

  double theta1_at(int i) const;
  double theta2_at(int j) const;
};

struct TorqueSurface {
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> u_phi0;  // |u_phi0|, row-major over (theta1, theta2)
  double stall = 0.0;

  double at(std::size_t i, std::size_t j) const { return u_phi0[i * theta2.size() + j]; }
  double max() const;
};

TorqueSurface torque_surface(const RobotParams& params, const SurfaceGrid& grid);

struct CapacityReport {
  double capacity = 0.0;  // kg
  bool unbounded = false;
  double max_slope = 0.0;  // N m per kg of payload, largest over the grid
  double bisection = 0.0;  // independent bisection estimate, kg
};

/// Smallest payload at which max-over-grid |u_phi0| reaches `stall`.
CapacityReport payload_capacity(const RobotParams& params, double stall, const SurfaceGrid& grid,
                                double bisection_tol = 1e-4);

/// Fits l_Gy so that the payload capacity equals `target_capacity` with the
/// remaining gear geometry held fixed. Returns the fitted gear parameters.
GearTrainParams fit_gear_offset(const RobotParams& params, double target_capacity, double stall,
                                const SurfaceGrid& grid);

}  // namespace armtraj
