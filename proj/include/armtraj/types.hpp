#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace armtraj {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Generalized coordinate indices, q = (r, theta1, theta2, phi).
enum Joint : int { kRadial = 0, kTheta1 = 1, kTheta2 = 2, kAzimuth = 3 };
inline constexpr int kNumJoints = 4;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised for any invalid physical or algorithmic parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Generalized coordinates and their rates.
struct JointState {
  Vec4 q = Vec4::Zero();
  Vec4 qdot = Vec4::Zero();

  double r() const { return q[kRadial]; }
  double theta1() const { return q[kTheta1]; }
  double theta2() const { return q[kTheta2]; }
  double phi() const { return q[kAzimuth]; }
  double theta12() const { return q[kTheta1] + q[kTheta2]; }

  static JointState at(const Vec4& q, const Vec4& qdot = Vec4::Zero()) {
    return JointState{q, qdot};
  }
};

}  // namespace armtraj
