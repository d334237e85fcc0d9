#pragma once

#include "armtraj/params.hpp"
#include "armtraj/types.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace armtraj {

struct EnergyBreakdown {
  double kinetic = 0.0;
  double gravitational = 0.0;
  double elastic = 0.0;
  double dissipation_rate = 0.0;  // 2R = sum b_i qdot_i^2
};

struct PotentialEnergy {
  double gravitational = 0.0;
  double elastic = 0.0;
};

/// Rotational inertias seen by the (theta1, theta1+theta2, phi) rate channels.
struct RotationalInertias {
  double theta1 = 0.0;
  double theta12 = 0.0;  // link 2 plus actuator rod
  double azimuth = 0.0;
};

RotationalInertias rotational_inertias(const JointState& state, const RobotParams& params);

double kinetic_energy(const JointState& state, const RobotParams& params);
PotentialEnergy potential_energy(const JointState& state, const RobotParams& params,
                                 const Vec4& rest);
EnergyBreakdown energy_breakdown(const JointState& state, const RobotParams& params,
                                 const Vec4& rest);

Mat4 mass_matrix(const JointState& state, const RobotParams& params);

/// Partial derivatives dM/dq_i by central differences, h = 1e-6 * max(1, |q_i|).
std::array<Mat4, 4> mass_matrix_derivatives(const JointState& state, const RobotParams& params);

/// Christoffel-symbol Coriolis matrix; Mdot - 2C is skew-symmetric.
Mat4 coriolis_matrix(const JointState& state, const RobotParams& params);

/// Mdot = sum_i dM/dq_i * qdot_i.
Mat4 mass_matrix_rate(const JointState& state, const RobotParams& params);

/// dV_g/dq. The azimuthal entry is identically zero.
Vec4 gravity_gradient(const JointState& state, const RobotParams& params);

Vec4 elastic_gradient(const Vec4& q, const RobotParams& params, const Vec4& rest);

/// U = M qddot + C qdot + G + K (q - q0) + B qdot.
Vec4 inverse_dynamics(const JointState& state, const Vec4& qddot, const RobotParams& params,
                      const Vec4& rest);

/// Solves the manipulator equation for qddot given applied forces U.
Vec4 forward_dynamics(const JointState& state, const Vec4& u, const RobotParams& params,
                      const Vec4& rest);

/// H = 1/2 qdot^T M qdot + g sum m z + sum 1/2 kappa (q - q0)^2.
double rbd_hamiltonian(const JointState& state, const RobotParams& params, const Vec4& rest);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time, JointState state)
      : std::runtime_error(what), time_(time), state_(std::move(state)) {}
  double time() const { return time_; }
  const JointState& state() const { return state_; }

 private:
  double time_;
  JointState state_;
};

struct TrajectorySample {
  double t = 0.0;
  JointState state;
  Vec4 u = Vec4::Zero();
};

using ControlLaw = std::function<Vec4(double t, const JointState& state)>;

/// Explicit Euler on qddot = M^-1 (U - C qdot - G - K(q - q0) - B qdot).
/// Returns the sample at t = 0 and after every step up to `horizon`.
std::vector<TrajectorySample> forward_integrate(const JointState& initial, const ControlLaw& control,
                                                double dt, double horizon,
                                                const RobotParams& params, const Vec4& rest);

}  // namespace armtraj
