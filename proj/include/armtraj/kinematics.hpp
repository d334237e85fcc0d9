#pragma once

#include "armtraj/params.hpp"
#include "armtraj/types.hpp"

namespace armtraj {

struct UnitVectors {
  Vec3 e_r0;
  Vec3 e_r1;
  Vec3 e_r2;
  Vec3 e_theta1;
  Vec3 e_theta12;
  Vec3 e_phi;
};

struct BodyPositions {
  Vec3 s0;     // base frame mount
  Vec3 s1;     // link 1 CM
  Vec3 s2;     // link 2 CM
  Vec3 s_act;  // actuator rod
  Vec3 s_obj;  // grasp point (claw + payload)
};

enum class Body { kBase, kLink1, kLink2, kActuator, kGrasp };
inline constexpr std::array<Body, 5> kAllBodies{Body::kBase, Body::kLink1, Body::kLink2,
                                                Body::kActuator, Body::kGrasp};

struct VelocityJacobians {
  Mat34 base;
  Mat34 link1;
  Mat34 link2;
  Mat34 actuator;
  Mat34 grasp;

  const Mat34& of(Body b) const;
};

UnitVectors unit_vectors(const JointState& state, const GeometryParams& geom);
BodyPositions body_positions(const JointState& state, const GeometryParams& geom);
const Vec3& position_of(const BodyPositions& p, Body b);
VelocityJacobians velocity_jacobians(const JointState& state, const GeometryParams& geom);

/// Grasp-point position; the effective length is l2 + r + r' + delta_r.
Vec3 forward_kinematics(const JointState& state, const GeometryParams& geom);

Vec3 ee_error(const JointState& state, const Vec3& target, const GeometryParams& geom);

/// Ratio (l0 cos(vartheta) + lbar1) / (l0 cos(vartheta) + l1) used to refer a link-1
/// tip height to its centre of mass.
double link1_height_scale(const GeometryParams& geom);

/// Vertical error of the link-1 CM. With `scaled` the desired height is taken as a
/// link-1 tip height and multiplied by link1_height_scale; otherwise it is used raw.
double link1_z_error(const JointState& state, double z_des, const GeometryParams& geom,
                     bool scaled = true);

struct ReachAnnulus {
  double lower;
  double upper;
};

/// Conservative bounds on the distance from the mount circle to a reachable point.
ReachAnnulus reach_annulus(const GeometryParams& geom);

/// Distance from `target` to the circle traced by the link-1 mount point.
double distance_from_mount_circle(const Vec3& target, const GeometryParams& geom);

bool is_reachable(const Vec3& target, const GeometryParams& geom);

}  // namespace armtraj
