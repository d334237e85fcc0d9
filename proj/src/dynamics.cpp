#include "armtraj/dynamics.hpp"

#include "armtraj/inertia.hpp"
#include "armtraj/kinematics.hpp"

#include <cmath>
#include <sstream>

namespace armtraj {

namespace {

struct BodyMass {
  Body body;
  double mass;
};

std::array<BodyMass, 5> body_masses(const MassParams& m) {
  return {{{Body::kBase, m.m_bf},
           {Body::kLink1, m.m1},
           {Body::kLink2, m.m2},
           {Body::kActuator, m.m_act},
           {Body::kGrasp, m.grasp_mass()}}};
}

const Vec4 kTheta1Channel{0.0, 1.0, 0.0, 0.0};
const Vec4 kTheta12Channel{0.0, 1.0, 1.0, 0.0};
const Vec4 kAzimuthChannel{0.0, 0.0, 0.0, 1.0};

}  // namespace

RotationalInertias rotational_inertias(const JointState& state, const RobotParams& params) {
  const UnitVectors u = unit_vectors(state, params.geometry);
  const GeometryParams& g = params.geometry;
  const double rho = params.mass.rho_act;
  return RotationalInertias{
      polar_inertia(params.inertia.link1, u.e_theta1),
      polar_inertia(params.inertia.link2, u.e_theta12) +
          actuator_polar_inertia(state, g.rod_radius, rho),
      equivalent_azimuthal_inertia(state, params.inertia, g.rod_radius, rho),
  };
}

double kinetic_energy(const JointState& state, const RobotParams& params) {
  const VelocityJacobians jac = velocity_jacobians(state, params.geometry);
  double t = 0.0;
  for (const BodyMass& bm : body_masses(params.mass)) {
    t += 0.5 * bm.mass * (jac.of(bm.body) * state.qdot).squaredNorm();
  }
  const RotationalInertias rot = rotational_inertias(state, params);
  const double w1 = state.qdot[kTheta1];
  const double w12 = state.qdot[kTheta1] + state.qdot[kTheta2];
  const double wphi = state.qdot[kAzimuth];
  t += 0.5 * (rot.theta1 * w1 * w1 + rot.theta12 * w12 * w12 + rot.azimuth * wphi * wphi);
  return t;
}

PotentialEnergy potential_energy(const JointState& state, const RobotParams& params,
                                 const Vec4& rest) {
  const BodyPositions p = body_positions(state, params.geometry);
  const MassParams& m = params.mass;
  // The base frame is fixed in height and drops out of every gradient.
  const double vg = params.gravity * (m.m1 * p.s1.z() + m.m2 * p.s2.z() +
                                      m.m_act * p.s_act.z() + m.grasp_mass() * p.s_obj.z());
  const Vec4 dq = state.q - rest;
  const double ve = 0.5 * (params.derived.stiffness.array() * dq.array().square()).sum();
  return {vg, ve};
}

EnergyBreakdown energy_breakdown(const JointState& state, const RobotParams& params,
                                 const Vec4& rest) {
  const PotentialEnergy v = potential_energy(state, params, rest);
  const double diss = (params.derived.damping.array() * state.qdot.array().square()).sum();
  return {kinetic_energy(state, params), v.gravitational, v.elastic, diss};
}

Mat4 mass_matrix(const JointState& state, const RobotParams& params) {
  const VelocityJacobians jac = velocity_jacobians(state, params.geometry);
  Mat4 m = Mat4::Zero();
  for (const BodyMass& bm : body_masses(params.mass)) {
    const Mat34& j = jac.of(bm.body);
    m.noalias() += bm.mass * j.transpose() * j;
  }
  const RotationalInertias rot = rotational_inertias(state, params);
  m.noalias() += rot.theta1 * kTheta1Channel * kTheta1Channel.transpose();
  m.noalias() += rot.theta12 * kTheta12Channel * kTheta12Channel.transpose();
  m.noalias() += rot.azimuth * kAzimuthChannel * kAzimuthChannel.transpose();
  return 0.5 * (m + m.transpose());
}

std::array<Mat4, 4> mass_matrix_derivatives(const JointState& state, const RobotParams& params) {
  std::array<Mat4, 4> d;
  for (int i = 0; i < kNumJoints; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(state.q[i]));
    JointState plus = state;
    JointState minus = state;
    plus.q[i] += h;
    minus.q[i] -= h;
    d[i] = (mass_matrix(plus, params) - mass_matrix(minus, params)) / (2.0 * h);
  }
  return d;
}

Mat4 coriolis_matrix(const JointState& state, const RobotParams& params) {
  const std::array<Mat4, 4> dm = mass_matrix_derivatives(state, params);
  Mat4 c = Mat4::Zero();
  for (int k = 0; k < kNumJoints; ++k) {
    for (int j = 0; j < kNumJoints; ++j) {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i) {
        s += 0.5 * (dm[i](k, j) + dm[j](k, i) - dm[k](i, j)) * state.qdot[i];
      }
      c(k, j) = s;
    }
  }
  return c;
}

Mat4 mass_matrix_rate(const JointState& state, const RobotParams& params) {
  const std::array<Mat4, 4> dm = mass_matrix_derivatives(state, params);
  Mat4 out = Mat4::Zero();
  for (int i = 0; i < kNumJoints; ++i) {
    out += dm[i] * state.qdot[i];
  }
  return out;
}

Vec4 gravity_gradient(const JointState& state, const RobotParams& params) {
  const GeometryParams& g = params.geometry;
  const MassParams& m = params.mass;
  const double grav = params.gravity;
  const double s1 = std::sin(state.theta1());
  const double s12 = std::sin(state.theta12());
  const double c12 = std::cos(state.theta12());
  const double tip = m.grasp_mass();
  const double leff = g.effective_length(state.r());
  const double lrod = g.l2 + state.r();

  Vec4 out;
  out[kRadial] = grav * c12 * (tip + m.m_act);
  out[kTheta2] = -grav * (m.m_act * s12 * lrod + g.lbar2 * m.m2 * s12 + tip * s12 * leff);
  out[kTheta1] = out[kTheta2] - grav * g.l1 * s1 * (tip + m.m_act + m.m2) -
                 grav * g.lbar1 * m.m1 * s1;
  out[kAzimuth] = 0.0;
  return out;
}

Vec4 elastic_gradient(const Vec4& q, const RobotParams& params, const Vec4& rest) {
  return params.derived.stiffness.cwiseProduct(q - rest);
}

Vec4 inverse_dynamics(const JointState& state, const Vec4& qddot, const RobotParams& params,
                      const Vec4& rest) {
  return mass_matrix(state, params) * qddot + coriolis_matrix(state, params) * state.qdot +
         gravity_gradient(state, params) + elastic_gradient(state.q, params, rest) +
         params.derived.damping.cwiseProduct(state.qdot);
}

Vec4 forward_dynamics(const JointState& state, const Vec4& u, const RobotParams& params,
                      const Vec4& rest) {
  const Mat4 m = mass_matrix(state, params);
  const Vec4 rhs = u - coriolis_matrix(state, params) * state.qdot -
                   gravity_gradient(state, params) - elastic_gradient(state.q, params, rest) -
                   params.derived.damping.cwiseProduct(state.qdot);
  Eigen::LLT<Mat4> llt(m);
  if (llt.info() != Eigen::Success) {
    throw IntegrationError("mass matrix is not positive definite", 0.0, state);
  }
  return llt.solve(rhs);
}

double rbd_hamiltonian(const JointState& state, const RobotParams& params, const Vec4& rest) {
  const PotentialEnergy v = potential_energy(state, params, rest);
  return 0.5 * state.qdot.dot(mass_matrix(state, params) * state.qdot) + v.gravitational +
         v.elastic;
}

std::vector<TrajectorySample> forward_integrate(const JointState& initial, const ControlLaw& control,
                                                double dt, double horizon,
                                                const RobotParams& params, const Vec4& rest) {
  if (!(dt > 0.0)) {
    throw ParameterError("forward_integrate: dt must be positive");
  }
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);

  JointState s = initial;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vec4 u = control(t, s);
    out.push_back({t, s, u});
    if (k >= steps) {
      break;
    }
    Vec4 qddot;
    try {
      qddot = forward_dynamics(s, u, params, rest);
    } catch (const IntegrationError&) {
      std::ostringstream msg;
      msg << "forward_integrate: singular mass matrix at t=" << t << " q=" << s.q.transpose();
      throw IntegrationError(msg.str(), t, s);
    }
    if (!qddot.allFinite()) {
      throw IntegrationError("forward_integrate: non-finite acceleration", t, s);
    }
    const Vec4 qdot = s.qdot;
    s.q += dt * qdot;
    s.qdot += dt * qddot;
  }
  return out;
}

}  // namespace armtraj
