#pragma once

#include "armtraj/params.hpp"
#include "armtraj/types.hpp"

namespace armtraj {

/// Principal-axis orientation of a CAD inertia report, radians.
struct CadOrientation {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
};

/// Throws ParameterError unless entries are positive and satisfy the triangle inequalities.
void validate_tensor(const DiagInertia& t, const std::string& name);

Mat3 to_matrix(const DiagInertia& t);

/// e^T diag(t) e for a unit axis.
double polar_inertia(const DiagInertia& t, const Vec3& axis);

/// Solid cylinder of radius `rod_radius` and length `r`, about its centre.
DiagInertia actuator_tensor(double r, double rod_radius, double rho);

/// Closed form of the rod tensor projected on e_theta12.
double actuator_polar_inertia(const JointState& state, double rod_radius, double rho);

/// J_eq = sum_i (I_xx,i cos^2 phi + I_yy,i sin^2 phi) + rod terms.
double equivalent_azimuthal_inertia(const JointState& state, const InertiaSet& tensors,
                                    double rod_radius, double rho);

/// Rod contribution to J_eq: (pi/12) R^2 r^3 rho + (pi/4) R^4 r rho.
double actuator_azimuthal_inertia(double r, double rod_radius, double rho);

/// R0 = Rz * Ry * Rx.
Mat3 composite_rotation(const CadOrientation& orient);

/// R0^T I R0.
Mat3 cad_to_dynamic(const Mat3& tensor, const CadOrientation& orient);
Mat3 cad_to_dynamic(const DiagInertia& tensor, const CadOrientation& orient);

enum class ParallelAxisMode {
  kFull,          // I + m (|d|^2 E - d d^T)
  kDiagonalOnly,  // shift diagonal entries only
};

Mat3 parallel_axis(const Mat3& tensor, double mass, const Vec3& offset,
                   ParallelAxisMode mode = ParallelAxisMode::kFull);

/// Returns the symmetric matrix whose lower triangle is taken from `lower`.
Mat3 symmetrize_lower(const Mat3& lower);

}  // namespace armtraj
