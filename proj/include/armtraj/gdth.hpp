#pragma once

#include "armtraj/kinematics.hpp"
#include "armtraj/params.hpp"
#include "armtraj/types.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace armtraj {

struct GdthTarget {
  Vec3 ee_target = Vec3::Zero();
  std::optional<double> z1_target;  // link-1 height; absent means no link-1 term
  double m_obj = 0.0;
};

struct OperationalInertia {
  Mat3 lambda = Mat3::Zero();
  double min_eig = 0.0;  // of J M^-1 J^T
  bool degenerate = false;
};

/// Lambda = (J M^-1 J^T)^-1. Directions whose eigenvalue falls below
/// rel_tol * largest are dropped (pseudo-inverse) and the result is flagged.
OperationalInertia operational_inertia(const Mat34& jv, const Mat4& m, double rel_tol = 1e-8);

struct SpatialWeights {
  Vec3 ee = Vec3::Ones();     // beta_x, beta_y, beta_z
  Vec3 link1 = Vec3::Ones();  // beta_x1, beta_y1, beta_z1
  bool degenerate_ee = false;
  bool degenerate_link1 = false;
};

/// beta = 1 / (|Lambda_ii| + epsilon_lambda) for the grasp point and the link-1 CM.
/// `params` must already carry the payload.
SpatialWeights weight_calculation(const JointState& state, const RobotParams& params);

struct ErrorTerms {
  Vec3 ee = Vec3::Zero();
  double z1 = 0.0;
};

ErrorTerms error_terms(const JointState& state, const GdthTarget& target,
                       const RobotParams& params);

/// J = H + 1/2 e_EE^T R_EE e_EE + 1/2 e_1^T R_1 e_1, with e_1 = (0, 0, e_z1).
double cost(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
            const RobotParams& params, const Vec4& rest);

/// The weighted error part of J alone.
double error_cost(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
                  const RobotParams& params);

/// dJ/dq with the weights held fixed. The error terms go through the analytic
/// Jacobians; the kinetic term uses dM/dq.
Vec4 cost_gradient(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
                   const RobotParams& params, const Vec4& rest);

Vec4 error_cost_gradient(const JointState& state, const GdthTarget& target,
                         const SpatialWeights& w, const RobotParams& params);

/// (G_r, G_theta1, G_theta2, u_phi0). `params` must already carry the payload.
Vec4 initial_torque(const JointState& state, const RobotParams& params);

struct InitialVelocity {
  Vec4 v0 = Vec4::Zero();
  std::array<bool, kNumJoints> stalled{};
};

/// v0_j = v_NL sgn(d_j) (1 - |tau0_j| / stall_j), radial channel scaled by mu.
InitialVelocity initial_velocity(const Vec4& direction, const Vec4& tau0,
                                 const RobotParams& params);

/// Per-joint no-load limits: omega_NL for angles, v_NL * mu for the radial channel.
Vec4 velocity_limits(const RobotParams& params);
Vec4 clamp_controls(const Vec4& qdot, const RobotParams& params);

struct TraceRow {
  int iteration = 0;
  Vec4 q = Vec4::Zero();
  Vec4 qdot = Vec4::Zero();
  double cost = 0.0;
  double ee_error = 0.0;
  std::array<bool, kNumJoints> frozen{};
};

struct GdthResult {
  Vec4 q_star = Vec4::Zero();   // resolved joint target
  Vec4 q_final = Vec4::Zero();  // where the horizon pass stopped
  Vec4 horizons = Vec4::Zero();
  int iterations = 0;           // horizon-pass iterations
  int resolve_iterations = 0;   // target-resolution iterations
  int rollbacks = 0;
  double ee_error = 0.0;        // |e_EE| at q_star, m
  bool converged = false;
  std::array<bool, kNumJoints> frozen{};
  std::array<bool, kNumJoints> stall_warning{};
  std::vector<TraceRow> trace;
};

struct RunOptions {
  bool keep_trace = true;
  int trace_stride = 1;
};

/// Gradient-descent time-horizon estimator. The payload in `target` overrides
/// params.mass.m_obj; the spring rest pose is initial.q.
GdthResult run(const GdthTarget& target, const JointState& initial, const GdthConfig& config,
               const RobotParams& params, const RunOptions& options = {});

void write_trace_csv(const GdthResult& result, std::ostream& out);

}  // namespace armtraj
