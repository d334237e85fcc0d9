#include "armtraj/gdth.hpp"

#include "armtraj/dynamics.hpp"
#include "armtraj/structural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace armtraj {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Keeps the rod inside its stroke; a clamped joint loses its rate.
void project(Vec4& q, Vec4& qdot, const GeometryParams& g) {
  if (q[kRadial] < 0.0) {
    q[kRadial] = 0.0;
    qdot[kRadial] = std::max(qdot[kRadial], 0.0);
  } else if (q[kRadial] > g.r_ext) {
    q[kRadial] = g.r_ext;
    qdot[kRadial] = std::min(qdot[kRadial], 0.0);
  }
}

}  // namespace

OperationalInertia operational_inertia(const Mat34& jv, const Mat4& m, double rel_tol) {
  Eigen::LLT<Mat4> llt(m);
  if (llt.info() != Eigen::Success) {
    throw ParameterError("operational_inertia: mass matrix is not positive definite");
  }
  const Mat3 inv_lambda = jv * llt.solve(jv.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (inv_lambda + inv_lambda.transpose()));
  const Vec3 vals = eig.eigenvalues();
  OperationalInertia out;
  out.min_eig = vals.minCoeff();
  const double floor = rel_tol * std::max(vals.maxCoeff(), 0.0);
  out.degenerate = !(out.min_eig > floor);
  // Pseudo-inverse: directions the point cannot move along carry no weight.
  Vec3 inv_vals;
  for (int i = 0; i < 3; ++i) {
    inv_vals[i] = vals[i] > floor ? 1.0 / vals[i] : 0.0;
  }
  out.lambda = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

SpatialWeights weight_calculation(const JointState& state, const RobotParams& params) {
  const Mat4 m = mass_matrix(state, params);
  const VelocityJacobians jac = velocity_jacobians(state, params.geometry);
  const OperationalInertia ee = operational_inertia(jac.grasp, m);
  const OperationalInertia l1 = operational_inertia(jac.link1, m);
  const double eps = params.gdth.epsilon_lambda;
  SpatialWeights w;
  for (int i = 0; i < 3; ++i) {
    w.ee[i] = 1.0 / (std::abs(ee.lambda(i, i)) + eps);
    w.link1[i] = 1.0 / (std::abs(l1.lambda(i, i)) + eps);
  }
  w.degenerate_ee = ee.degenerate;
  w.degenerate_link1 = l1.degenerate;
  return w;
}

ErrorTerms error_terms(const JointState& state, const GdthTarget& target,
                       const RobotParams& params) {
  ErrorTerms e;
  e.ee = ee_error(state, target.ee_target, params.geometry);
  if (target.z1_target) {
    e.z1 = link1_z_error(state, *target.z1_target, params.geometry, params.gdth.scaled_z1);
  }
  return e;
}

double error_cost(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
                  const RobotParams& params) {
  const ErrorTerms e = error_terms(state, target, params);
  return 0.5 * e.ee.dot(w.ee.cwiseProduct(e.ee)) + 0.5 * w.link1.z() * e.z1 * e.z1;
}

double cost(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
            const RobotParams& params, const Vec4& rest) {
  return rbd_hamiltonian(state, params, rest) + error_cost(state, target, w, params);
}

Vec4 error_cost_gradient(const JointState& state, const GdthTarget& target,
                         const SpatialWeights& w, const RobotParams& params) {
  const ErrorTerms e = error_terms(state, target, params);
  const VelocityJacobians jac = velocity_jacobians(state, params.geometry);
  Vec4 g = jac.grasp.transpose() * w.ee.cwiseProduct(e.ee);
  if (target.z1_target) {
    g += w.link1.z() * e.z1 * jac.link1.row(2).transpose();
  }
  return g;
}

Vec4 cost_gradient(const JointState& state, const GdthTarget& target, const SpatialWeights& w,
                   const RobotParams& params, const Vec4& rest) {
  Vec4 g = gravity_gradient(state, params) + elastic_gradient(state.q, params, rest) +
           error_cost_gradient(state, target, w, params);
  if (!state.qdot.isZero(0.0)) {
    const std::array<Mat4, 4> dm = mass_matrix_derivatives(state, params);
    for (int i = 0; i < kNumJoints; ++i) {
      g[i] += 0.5 * state.qdot.dot(dm[i] * state.qdot);
    }
  }
  return g;
}

Vec4 initial_torque(const JointState& state, const RobotParams& params) {
  Vec4 tau = gravity_gradient(state, params);
  tau[kAzimuth] = closed_form_u_phi0(state, params);
  return tau;
}

Vec4 velocity_limits(const RobotParams& params) {
  const double mu = mass_ratio(params.mass.m0, params.mass.m_obj);
  const double w = params.actuators.omega_nl;
  return {params.actuators.v_nl * mu, w, w, w};
}

InitialVelocity initial_velocity(const Vec4& direction, const Vec4& tau0,
                                 const RobotParams& params) {
  const Vec4 limit = velocity_limits(params);
  InitialVelocity out;
  for (int j = 0; j < kNumJoints; ++j) {
    const double headroom = 1.0 - std::abs(tau0[j]) / params.derived.effective_stall[j];
    if (headroom < 0.0) {
      out.stalled[j] = true;
      continue;
    }
    out.v0[j] = limit[j] * sgn(direction[j]) * headroom;
  }
  return out;
}

Vec4 clamp_controls(const Vec4& qdot, const RobotParams& params) {
  const Vec4 limit = velocity_limits(params);
  return qdot.cwiseMax(-limit).cwiseMin(limit);
}

namespace {

struct Descent {
  const GdthTarget& target;
  const GdthConfig& cfg;
  const RobotParams& p;
  const Vec4& rest;

  Vec4 gradient(const JointState& s) const {
    const SpatialWeights w = weight_calculation(s, p);
    return cfg.potential_in_descent ? cost_gradient(s, target, w, p, rest)
                                    : error_cost_gradient(s, target, w, p);
  }

  bool resolved(const JointState& s) const {
    const ErrorTerms e = error_terms(s, target, p);
    return e.ee.norm() <= cfg.resolve_tolerance && std::abs(e.z1) <= cfg.resolve_tolerance;
  }
};

// Same update as the horizon pass but started from rest, restarting a joint's
// velocity and momentum whenever its gradient component changes sign. The limit
// point is the joint target used for freezing.
Vec4 resolve_target(const Descent& d, const JointState& initial, int& iterations) {
  const GdthConfig& cfg = d.cfg;
  const Vec4 beta = cfg.momentum_beta;
  JointState s = JointState::at(initial.q);
  Vec4 n = Vec4::Zero();
  Vec4 prev_g = Vec4::Zero();

  Vec4 best_q = s.q;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const SpatialWeights w0 = weight_calculation(s, d.p);

  iterations = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    iterations = k;
    const Vec4 x_minus = s.q + s.qdot * cfg.dt;
    const Vec4 g = d.gradient(JointState::at(x_minus, s.qdot));
    n = beta.cwiseProduct(n) + (Vec4::Ones() - beta).cwiseProduct(g);
    const Vec4 x_plus = x_minus - cfg.alpha0.cwiseProduct(n);
    Vec4 qdot = clamp_controls((x_plus - s.q) / cfg.dt, d.p);
    for (int j = 0; j < kNumJoints; ++j) {
      if (prev_g[j] * g[j] < 0.0) {
        qdot[j] = 0.0;
        n[j] = 0.0;
      }
    }
    prev_g = g;
    Vec4 q = s.q + qdot * cfg.dt;
    project(q, qdot, d.p.geometry);
    s = JointState::at(q, qdot);

    if (d.resolved(s)) {
      return s.q;
    }
    const double c = error_cost(s, d.target, w0, d.p);
    if (c < best * (1.0 - 1e-9)) {
      best = c;
      best_q = s.q;
      since_best = 0;
    } else if (++since_best > 4000) {
      break;
    }
  }
  return best_q;
}

}  // namespace

GdthResult run(const GdthTarget& target, const JointState& initial, const GdthConfig& config,
               const RobotParams& params, const RunOptions& options) {
  if (target.m_obj < 0.0) {
    throw ParameterError("gdth run: payload mass must be nonnegative");
  }
  RobotParams p = params;
  p.gdth = config;
  p = p.with_payload(target.m_obj);
  const GdthConfig& cfg = p.gdth;
  const Vec4 rest = initial.q;
  const Vec4 tol = cfg.joint_tolerances();
  const Descent descent{target, cfg, p, rest};

  GdthResult res;
  res.q_star = resolve_target(descent, initial, res.resolve_iterations);
  res.ee_error = ee_error(JointState::at(res.q_star), target.ee_target, p.geometry).norm();
  res.converged = res.ee_error <= cfg.ee_tolerance;

  // Horizon pass.
  JointState s = initial;
  const Vec4 tau0 = initial_torque(s, p);
  const InitialVelocity v0 = initial_velocity(res.q_star - s.q, tau0, p);
  res.stall_warning = v0.stalled;
  s.qdot = v0.v0;

  std::array<bool, kNumJoints>& frozen = res.frozen;
  for (int j = 0; j < kNumJoints; ++j) {
    if (std::abs(res.q_star[j] - s.q[j]) <= tol[j]) {
      frozen[j] = true;
      s.qdot[j] = 0.0;
    }
  }
  const auto all_frozen = [&] {
    return std::all_of(frozen.begin(), frozen.end(), [](bool f) { return f; });
  };
  const auto record = [&](int it) {
    if (!options.keep_trace || it % std::max(1, options.trace_stride) != 0) {
      return;
    }
    const SpatialWeights w = weight_calculation(s, p);
    res.trace.push_back({it, s.q, s.qdot, cost(s, target, w, p, rest),
                         ee_error(s, target.ee_target, p.geometry).norm(), frozen});
  };
  record(0);

  Vec4 alpha = cfg.alpha0;
  Vec4 n = Vec4::Zero();
  const Vec4 beta = cfg.momentum_beta;
  int i = 0;
  while (!all_frozen() && i < cfg.max_iter) {
    ++i;
    const double t = i * cfg.dt;
    const Vec4 x_minus = s.q + s.qdot * cfg.dt;
    const Vec4 g = descent.gradient(JointState::at(x_minus, s.qdot));
    n = beta.cwiseProduct(n) + (Vec4::Ones() - beta).cwiseProduct(g);
    const Vec4 x_plus = x_minus - alpha.cwiseProduct(n);
    Vec4 qdot = clamp_controls((x_plus - s.q) / cfg.dt, p);
    for (int j = 0; j < kNumJoints; ++j) {
      if (frozen[j]) {
        qdot[j] = 0.0;
        n[j] = 0.0;
      }
    }
    Vec4 q = s.q + qdot * cfg.dt;
    project(q, qdot, p.geometry);

    for (int j = 0; j < kNumJoints; ++j) {
      if (frozen[j]) {
        continue;
      }
      const double before = res.q_star[j] - s.q[j];
      const double after = res.q_star[j] - q[j];
      if (std::abs(after) <= tol[j]) {
        frozen[j] = true;
        res.horizons[j] = t;
        qdot[j] = 0.0;
      } else if (sgn(after) != sgn(before)) {
        q[j] = s.q[j];
        qdot[j] = 0.0;
        n[j] = 0.0;
        alpha[j] /= 1.0 + cfg.eta * t;
        ++res.rollbacks;
      }
    }
    s = JointState::at(q, qdot);
    record(i);

    if (!all_frozen() && descent.resolved(s)) {
      // End effector already on target through a different joint split; the
      // remaining joints stop here.
      for (int j = 0; j < kNumJoints; ++j) {
        if (!frozen[j]) {
          frozen[j] = true;
          res.horizons[j] = t;
        }
      }
    }
  }
  for (int j = 0; j < kNumJoints; ++j) {
    if (!frozen[j]) {
      res.horizons[j] = i * cfg.dt;
    }
  }
  res.iterations = i;
  res.q_final = s.q;
  return res;
}

void write_trace_csv(const GdthResult& result, std::ostream& out) {
  out << "iteration,r,theta1,theta2,phi,r_dot,theta1_dot,theta2_dot,phi_dot,cost,ee_error,"
         "frozen_r,frozen_theta1,frozen_theta2,frozen_phi\n";
  out.precision(10);
  for (const TraceRow& row : result.trace) {
    out << row.iteration;
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << row.q[j];
    }
    for (int j = 0; j < kNumJoints; ++j) {
      out << ',' << row.qdot[j];
    }
    out << ',' << row.cost << ',' << row.ee_error;
    for (bool f : row.frozen) {
      out << ',' << (f ? 1 : 0);
    }
    out << '\n';
  }
}

}  // namespace armtraj
