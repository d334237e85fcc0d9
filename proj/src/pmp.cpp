#include "armtraj/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace armtraj {

Mat4 boundary_matrix(double tf) {
  Mat4 a;
  a << tf * tf / 2.0, tf, 1.0, 0.0,
       tf * tf * tf / 6.0, tf * tf / 2.0, tf, 1.0,
       0.0, 0.0, 1.0, 0.0,
       0.0, 0.0, 0.0, 1.0;
  return a;
}

CubicCoefficients solve_boundary(const BoundaryConditions& bc) {
  if (!(bc.tf > 0.0) || !std::isfinite(bc.tf)) {
    throw ParameterError("solve_boundary: tf must be positive");
  }
  // The last two rows pin c3 and c4; the 2x2 block left over has
  // determinant -tf^4/12, which never vanishes for tf > 0.
  const double tf = bc.tf;
  const double dv = bc.vf - bc.v0;
  const double dq = bc.qf - bc.q0 - bc.v0 * tf;
  CubicCoefficients c;
  c.c3 = bc.v0;
  c.c4 = bc.q0;
  c.c1 = 12.0 * (tf * dv / 2.0 - dq) / (tf * tf * tf);
  c.c2 = (dv - c.c1 * tf * tf / 2.0) / tf;
  return c;
}

PmpSample eval(const CubicCoefficients& c, double tf, double t) {
  if (t < 0.0) {
    throw ParameterError("pmp eval: negative time");
  }
  if (t > tf) {
    const PmpSample end = eval(c, tf, tf);
    return {end.q, end.qdot, 0.0};
  }
  const double t2 = t * t;
  return {c.c1 * t2 * t / 6.0 + c.c2 * t2 / 2.0 + c.c3 * t + c.c4,
          c.c1 * t2 / 2.0 + c.c2 * t + c.c3, c.c1 * t + c.c2};
}

PmpTrajectory PmpTrajectory::rest_to_rest(const Vec4& q0, const Vec4& qf, const Vec4& tf) {
  std::array<BoundaryConditions, kNumJoints> bcs;
  for (int j = 0; j < kNumJoints; ++j) {
    bcs[j] = {q0[j], qf[j], 0.0, 0.0, tf[j]};
  }
  return solve(bcs);
}

PmpTrajectory PmpTrajectory::solve(const std::array<BoundaryConditions, kNumJoints>& bcs) {
  PmpTrajectory out;
  for (int j = 0; j < kNumJoints; ++j) {
    out.coeffs[j] = solve_boundary(bcs[j]);
    out.tf[j] = bcs[j].tf;
  }
  return out;
}

PmpSample PmpTrajectory::eval(int joint, double t) const {
  return armtraj::eval(coeffs.at(joint), tf[joint], t);
}

void PmpTrajectory::eval_all(double t, Vec4& q, Vec4& qdot, Vec4& qddot) const {
  for (int j = 0; j < kNumJoints; ++j) {
    const PmpSample s = eval(j, t);
    q[j] = s.q;
    qdot[j] = s.qdot;
    qddot[j] = s.qddot;
  }
}

double acceleration_cost(const CubicCoefficients& c, double tf) {
  // integral of (c1 t + c2)^2 / 2
  return 0.5 * (c.c1 * c.c1 * tf * tf * tf / 3.0 + c.c1 * c.c2 * tf * tf + c.c2 * c.c2 * tf);
}

namespace {

double perturbed_cost(const CubicCoefficients& c, double tf, double eps, int nodes) {
  // Composite Simpson on (c1 t + c2 + eps * d2/dt2[t^2 (t - tf)^2])^2 / 2.
  const int n = nodes % 2 == 0 ? nodes : nodes + 1;
  const double h = tf / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = k * h;
    const double bump = 12.0 * t * t - 12.0 * tf * t + 2.0 * tf * tf;
    const double a = c.c1 * t + c.c2 + eps * bump;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * 0.5 * a * a;
  }
  return sum * h / 3.0;
}

}  // namespace

OptimalityReport verify_optimality(const CubicCoefficients& c, double tf, int n_perturbations,
                                   int quadrature_nodes) {
  if (!(tf > 0.0)) {
    throw ParameterError("verify_optimality: tf must be positive");
  }
  OptimalityReport rep;
  rep.nominal_cost = perturbed_cost(c, tf, 0.0, quadrature_nodes);
  rep.perturbations = n_perturbations;
  rep.all_increase = true;
  rep.min_increase = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_perturbations; ++k) {
    // Spread magnitudes over [-1, 1], skipping zero.
    const double frac = (k + 1.0) / n_perturbations;
    const double eps = (k % 2 == 0 ? 1.0 : -1.0) * frac;
    const double inc = perturbed_cost(c, tf, eps, quadrature_nodes) - rep.nominal_cost;
    rep.min_increase = std::min(rep.min_increase, inc);
    if (!(inc > 0.0)) {
      rep.all_increase = false;
    }
  }
  // Costate structure: lambda_q constant means q''' = c1 everywhere; u = c1 t + c2.
  const PmpSample a = eval(c, tf, 0.0);
  const PmpSample b = eval(c, tf, 0.5 * tf);
  const PmpSample e = eval(c, tf, tf);
  const double scale = std::max({1.0, std::abs(c.c1) * tf, std::abs(c.c2)});
  rep.control_affine = std::abs((e.qddot - b.qddot) - (b.qddot - a.qddot)) <= 1e-9 * scale;
  rep.costate_constant =
      std::abs((b.qddot - a.qddot) / (0.5 * tf) - c.c1) <= 1e-9 * std::max(1.0, std::abs(c.c1));
  return rep;
}

}  // namespace armtraj
