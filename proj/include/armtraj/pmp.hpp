#pragma once

#include "armtraj/types.hpp"

#include <array>

namespace armtraj {

struct BoundaryConditions {
  double q0 = 0.0;
  double qf = 0.0;
  double v0 = 0.0;
  double vf = 0.0;
  double tf = 1.0;
};

/// q(t) = c1 t^3/6 + c2 t^2/2 + c3 t + c4.
struct CubicCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

struct PmpSample {
  double q = 0.0;
  double qdot = 0.0;
  double qddot = 0.0;
};

/// Solves the 4x4 boundary system with rows
/// [tf^2/2, tf, 1, 0] = vf, [tf^3/6, tf^2/2, tf, 1] = qf, [0,0,1,0] = v0, [0,0,0,1] = q0.
CubicCoefficients solve_boundary(const BoundaryConditions& bc);

/// The boundary matrix itself, for residual checks.
Mat4 boundary_matrix(double tf);

/// Evaluates one joint. Past tf the joint holds (qf, vf, 0); t < 0 throws ParameterError.
PmpSample eval(const CubicCoefficients& c, double tf, double t);

struct PmpTrajectory {
  std::array<CubicCoefficients, kNumJoints> coeffs{};
  Vec4 tf = Vec4::Ones();

  static PmpTrajectory rest_to_rest(const Vec4& q0, const Vec4& qf, const Vec4& tf);
  static PmpTrajectory solve(const std::array<BoundaryConditions, kNumJoints>& bcs);

  PmpSample eval(int joint, double t) const;
  /// Position, rate and acceleration of every joint at t.
  void eval_all(double t, Vec4& q, Vec4& qdot, Vec4& qddot) const;
  double duration() const { return tf.maxCoeff(); }
};

/// Integral of qddot^2 / 2 over [0, tf] (exact for the cubic family).
double acceleration_cost(const CubicCoefficients& c, double tf);

struct OptimalityReport {
  double nominal_cost = 0.0;
  double min_increase = 0.0;  // smallest cost increase over the perturbation family
  int perturbations = 0;
  bool all_increase = false;
  bool costate_constant = false;  // third derivative of q is constant
  bool control_affine = false;    // qddot is affine in t
};

/// Adds eps * t^2 (t - tf)^2 perturbations for eps spread over [-1, 1] and compares
/// the quadrature cost of each against the nominal cubic.
OptimalityReport verify_optimality(const CubicCoefficients& c, double tf, int n_perturbations,
                                   int quadrature_nodes = 2000);

}  // namespace armtraj
