#include "armtraj/kinematics.hpp"

#include <cmath>

namespace armtraj {

namespace {

Vec3 radial(double polar, double phi) {
  return {std::cos(phi) * std::sin(polar), std::sin(phi) * std::sin(polar), std::cos(polar)};
}

Vec3 polar_dir(double polar, double phi) {
  return {std::cos(polar) * std::cos(phi), std::cos(polar) * std::sin(phi), -std::sin(polar)};
}

// Every body sits at s0 + a*e_r1 + c*e_r2 with c possibly depending on r.
struct ChainOffsets {
  double a;
  double c;
  double dc_dr;
};

ChainOffsets offsets_of(Body b, double r, const GeometryParams& g) {
  switch (b) {
    case Body::kBase:
      return {0.0, 0.0, 0.0};
    case Body::kLink1:
      return {g.lbar1, 0.0, 0.0};
    case Body::kLink2:
      return {g.l1, g.lbar2, 0.0};
    case Body::kActuator:
      return {g.l1, g.l2 + r, 1.0};
    case Body::kGrasp:
      return {g.l1, g.effective_length(r), 1.0};
  }
  return {0.0, 0.0, 0.0};
}

Mat34 jacobian_of(Body b, const JointState& s, const UnitVectors& u, const GeometryParams& g) {
  Mat34 j = Mat34::Zero();
  if (b == Body::kBase) {
    j.col(kAzimuth) = g.l0 * std::sin(g.vartheta) * u.e_phi;
    return j;
  }
  const ChainOffsets o = offsets_of(b, s.r(), g);
  j.col(kRadial) = o.dc_dr * u.e_r2;
  j.col(kTheta1) = o.a * u.e_theta1 + o.c * u.e_theta12;
  j.col(kTheta2) = o.c * u.e_theta12;
  const double lever =
      g.l0 * std::sin(g.vartheta) + o.a * std::sin(s.theta1()) + o.c * std::sin(s.theta12());
  j.col(kAzimuth) = lever * u.e_phi;
  return j;
}

}  // namespace

const Mat34& VelocityJacobians::of(Body b) const {
  switch (b) {
    case Body::kBase:
      return base;
    case Body::kLink1:
      return link1;
    case Body::kLink2:
      return link2;
    case Body::kActuator:
      return actuator;
    case Body::kGrasp:
      break;
  }
  return grasp;
}

UnitVectors unit_vectors(const JointState& state, const GeometryParams& geom) {
  const double phi = state.phi();
  return UnitVectors{
      radial(geom.vartheta, phi),
      radial(state.theta1(), phi),
      radial(state.theta12(), phi),
      polar_dir(state.theta1(), phi),
      polar_dir(state.theta12(), phi),
      Vec3{-std::sin(phi), std::cos(phi), 0.0},
  };
}

BodyPositions body_positions(const JointState& state, const GeometryParams& geom) {
  const UnitVectors u = unit_vectors(state, geom);
  const Vec3 s0 = geom.l0 * u.e_r0;
  const Vec3 elbow = s0 + geom.l1 * u.e_r1;
  return BodyPositions{
      s0,
      s0 + geom.lbar1 * u.e_r1,
      elbow + geom.lbar2 * u.e_r2,
      elbow + (geom.l2 + state.r()) * u.e_r2,
      elbow + geom.effective_length(state.r()) * u.e_r2,
  };
}

const Vec3& position_of(const BodyPositions& p, Body b) {
  switch (b) {
    case Body::kBase:
      return p.s0;
    case Body::kLink1:
      return p.s1;
    case Body::kLink2:
      return p.s2;
    case Body::kActuator:
      return p.s_act;
    case Body::kGrasp:
      break;
  }
  return p.s_obj;
}

VelocityJacobians velocity_jacobians(const JointState& state, const GeometryParams& geom) {
  const UnitVectors u = unit_vectors(state, geom);
  return VelocityJacobians{
      jacobian_of(Body::kBase, state, u, geom),     jacobian_of(Body::kLink1, state, u, geom),
      jacobian_of(Body::kLink2, state, u, geom),    jacobian_of(Body::kActuator, state, u, geom),
      jacobian_of(Body::kGrasp, state, u, geom),
  };
}

Vec3 forward_kinematics(const JointState& state, const GeometryParams& geom) {
  return body_positions(state, geom).s_obj;
}

Vec3 ee_error(const JointState& state, const Vec3& target, const GeometryParams& geom) {
  return forward_kinematics(state, geom) - target;
}

double link1_height_scale(const GeometryParams& geom) {
  const double base = geom.l0 * std::cos(geom.vartheta);
  const double denom = base + geom.l1;
  if (!(denom > 0.0)) {
    throw ParameterError("link1_z_error: l0*cos(vartheta) + l1 must be positive");
  }
  return (base + geom.lbar1) / denom;
}

double link1_z_error(const JointState& state, double z_des, const GeometryParams& geom,
                     bool scaled) {
  const double scale = link1_height_scale(geom);
  const double z1 = body_positions(state, geom).s1.z();
  return z1 - (scaled ? scale : 1.0) * z_des;
}

ReachAnnulus reach_annulus(const GeometryParams& geom) {
  const double shortest = geom.effective_length(0.0);
  const double longest = geom.effective_length(geom.r_ext);
  // Folded-chain gap, widened by the base-frame extent l0 (no self-collision model).
  double gap = 0.0;
  if (geom.l1 > longest) {
    gap = geom.l1 - longest;
  } else if (shortest > geom.l1) {
    gap = shortest - geom.l1;
  }
  return {gap + geom.l0, geom.l1 + longest};
}

double distance_from_mount_circle(const Vec3& target, const GeometryParams& geom) {
  const double rho = std::hypot(target.x(), target.y());
  const double mount_rho = geom.l0 * std::sin(geom.vartheta);
  const double mount_z = geom.l0 * std::cos(geom.vartheta);
  return std::hypot(rho - mount_rho, target.z() - mount_z);
}

bool is_reachable(const Vec3& target, const GeometryParams& geom) {
  const ReachAnnulus a = reach_annulus(geom);
  const double d = distance_from_mount_circle(target, geom);
  return d >= a.lower && d <= a.upper;
}

}  // namespace armtraj
