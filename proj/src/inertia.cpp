#include "armtraj/inertia.hpp"

#include <cmath>

namespace armtraj {

void validate_tensor(const DiagInertia& t, const std::string& name) {
  if (!(t.ixx > 0.0 && t.iyy > 0.0 && t.izz > 0.0)) {
    throw ParameterError(name + ": diagonal inertia entries must be positive");
  }
  // Rounded CAD values can sit exactly on the bound.
  const double slack = 1e-12 * (t.ixx + t.iyy + t.izz);
  if (t.ixx + t.iyy < t.izz - slack || t.iyy + t.izz < t.ixx - slack ||
      t.ixx + t.izz < t.iyy - slack) {
    throw ParameterError(name + ": inertia violates the triangle inequality");
  }
}

Mat3 to_matrix(const DiagInertia& t) { return Vec3{t.ixx, t.iyy, t.izz}.asDiagonal(); }

double polar_inertia(const DiagInertia& t, const Vec3& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw std::logic_error("polar_inertia: axis must be a unit vector");
  }
  return t.ixx * axis.x() * axis.x() + t.iyy * axis.y() * axis.y() + t.izz * axis.z() * axis.z();
}

DiagInertia actuator_tensor(double r, double rod_radius, double rho) {
  if (r < 0.0 || rod_radius < 0.0 || rho < 0.0) {
    throw ParameterError("actuator_tensor: extension, radius and density must be nonnegative");
  }
  const double r2 = rod_radius * rod_radius;
  const double transverse = kPi / 12.0 * r2 * r * rho * (3.0 * r2 + r * r);
  const double axial = kPi / 2.0 * r2 * r2 * r * rho;
  return {transverse, transverse, axial};
}

double actuator_polar_inertia(const JointState& state, double rod_radius, double rho) {
  const double r = state.r();
  const double big_r2 = rod_radius * rod_radius;
  const double s2 = std::pow(std::sin(state.theta12()), 2);
  return kPi / 12.0 * big_r2 * r * rho *
         (3.0 * big_r2 * s2 - r * r * s2 + 3.0 * big_r2 + r * r);
}

double actuator_azimuthal_inertia(double r, double rod_radius, double rho) {
  const double big_r2 = rod_radius * rod_radius;
  return kPi / 12.0 * big_r2 * r * r * r * rho + kPi / 4.0 * big_r2 * big_r2 * r * rho;
}

double equivalent_azimuthal_inertia(const JointState& state, const InertiaSet& tensors,
                                    double rod_radius, double rho) {
  const double c2 = std::pow(std::cos(state.phi()), 2);
  const double s2 = 1.0 - c2;
  double sum = 0.0;
  for (const DiagInertia* t : {&tensors.base, &tensors.link1, &tensors.link2}) {
    sum += t->ixx * c2 + t->iyy * s2;
  }
  return sum + actuator_azimuthal_inertia(state.r(), rod_radius, rho);
}

Mat3 composite_rotation(const CadOrientation& o) {
  const Mat3 rx = Eigen::AngleAxisd(o.rx, Vec3::UnitX()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(o.ry, Vec3::UnitY()).toRotationMatrix();
  const Mat3 rz = Eigen::AngleAxisd(o.rz, Vec3::UnitZ()).toRotationMatrix();
  return rz * ry * rx;
}

Mat3 cad_to_dynamic(const Mat3& tensor, const CadOrientation& orient) {
  const Mat3 r0 = composite_rotation(orient);
  return r0.transpose() * tensor * r0;
}

Mat3 cad_to_dynamic(const DiagInertia& tensor, const CadOrientation& orient) {
  return cad_to_dynamic(to_matrix(tensor), orient);
}

Mat3 parallel_axis(const Mat3& tensor, double mass, const Vec3& d, ParallelAxisMode mode) {
  if (mass < 0.0) {
    throw ParameterError("parallel_axis: mass must be nonnegative");
  }
  if (mode == ParallelAxisMode::kDiagonalOnly) {
    Mat3 out = tensor;
    out(0, 0) += mass * (d.y() * d.y() + d.z() * d.z());
    out(1, 1) += mass * (d.x() * d.x() + d.z() * d.z());
    out(2, 2) += mass * (d.x() * d.x() + d.y() * d.y());
    return out;
  }
  return tensor + mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
}

Mat3 symmetrize_lower(const Mat3& lower) {
  Mat3 out = lower.triangularView<Eigen::Lower>();
  out.triangularView<Eigen::StrictlyUpper>() = lower.transpose().triangularView<Eigen::StrictlyUpper>();
  return out;
}

}  // namespace armtraj
