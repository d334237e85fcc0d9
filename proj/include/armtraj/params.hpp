#pragma once

#include "armtraj/types.hpp"

#include <array>
#include <filesystem>
#include <string>

namespace armtraj {

struct GeometryParams {
  double l0 = 0.130;          // base length, m
  double vartheta = 0.1756;   // mount angle, rad
  double l1 = 0.305;          // link 1 length, m
  double l2 = 0.180;          // link 2 length, m
  double lbar1 = 0.152;       // link 1 CM offset, m
  double lbar2 = 0.052;       // link 2 CM offset, m
  double delta_r = 0.103;     // claw-to-grasp offset, m
  double r_prime = 0.0508;    // rod CM offset r', m
  double rod_radius = 0.0095; // m
  double rod_cm = 0.0508;     // r-bar; carried for completeness, no equation uses it
  double r_ext = 0.1016;      // actuator stroke, m
  Vec4 strokes{0.1016, kPi / 2.0, kPi / 6.0, kPi / 2.0};  // (dr, dth1, dth2, dphi)

  /// Length from the elbow to the grasp point at extension r.
  double effective_length(double r) const { return l2 + r + r_prime + delta_r; }
};

struct MassParams {
  double m_bf = 3.53790071;
  double m0 = 0.5;  // claw
  double m1 = 2.015;
  double m2 = 0.170649;
  double m_act = 0.228;
  double rho_act = 7850.0;
  double m_obj = 0.0;

  /// Point mass carried at the grasp point (claw plus payload).
  double grasp_mass() const { return m0 + m_obj; }
};

struct ActuatorRatings {
  Vec4 rated{200.0, 53.0, 53.0, 53.0};
  double tau_stall = 68.64655;
  double v_nl = 0.004;     // m/s, scaled by the mass ratio at use
  double omega_nl = 6.3;   // rad/s
  Vec4 efficiencies{1.0, 0.95, 0.85, 0.85};
  Vec4 gear_ratios{1.0, 2.0, 2.0, 4.0};
  double radial_stall_force = 200.0;  // linear actuator, no gearbox
};

struct GdthConfig {
  Vec4 alpha0{3e-8, 1e-3, 1e-3, 1e-3};
  double eta = 0.01;
  Vec4 momentum_beta{0.025, 0.025, 0.025, 0.025};
  double epsilon_lambda = 1e-3;
  double dt = 0.01;
  double tol_r = 0.00635;         // 0.25 in
  double tol_theta = 0.03490658503988659;  // 2 deg
  int max_iter = 40000;
  double ee_tolerance = 0.0254;   // 1 in; a run is reported converged below this EE error
  double resolve_tolerance = 0.00635;  // EE error at which target resolution stops
  bool scaled_z1 = true;
  bool potential_in_descent = false;

  Vec4 joint_tolerances() const { return {tol_r, tol_theta, tol_theta, tol_theta}; }
};

struct GearTrainParams {
  double r_avg = 0.03;
  double g_p = 4.0;
  double h_w = 0.05;
  double cap_h_w = 0.10;
  double l_gx = 0.04;
  double l_gy = 0.02;
  double psi = 0.3490658503988659;  // 20 deg
  double varphi = 0.0;
  std::string provenance = "unverified";

  /// Denominator factor of the closed-form azimuthal holding torque (without G_p).
  double torque_denominator() const;
};

struct DiagInertia {
  double ixx = 0.0;
  double iyy = 0.0;
  double izz = 0.0;
};

struct InertiaSet {
  DiagInertia base{0.0270, 0.0396, 0.0310};
  DiagInertia link1{0.021, 0.024, 0.005};
  DiagInertia link2{2.53e-4, 2.52e-4, 4.40e-5};
};

/// Quantities computed from the raw parameters at load time.
struct DerivedParams {
  Vec4 stiffness = Vec4::Zero();
  Vec4 damping = Vec4::Zero();
  Vec4 damping_inertia = Vec4::Zero();
  Vec4 effective_stall = Vec4::Zero();
};

struct RobotParams {
  GeometryParams geometry;
  MassParams mass;
  ActuatorRatings actuators;
  GdthConfig gdth;
  GearTrainParams gear;
  InertiaSet inertia;
  double gravity = 9.81;
  Vec4 home_pose{0.0, 0.3, 1.2, 0.0};
  DerivedParams derived;

  /// Same parameters with a different payload; derived values are recomputed.
  RobotParams with_payload(double m_obj) const;
};

// --- scalar helpers -------------------------------------------------------

double virtual_stiffness(double rated, double stroke);
double virtual_damping(double mass_scale, double rated, double stroke);
double effective_stall(double tau_stall, double eta, double ratio);
double mass_ratio(double m_claw, double m_obj);

/// Checks every invariant and fills `derived`. Throws ParameterError naming the field.
void finalize(RobotParams& params);

/// Nominal hardware constants with derived values populated.
RobotParams default_params();

RobotParams load_config(const std::filesystem::path& path);
RobotParams parse_config(const std::string& json_text);
std::string dump_config(const RobotParams& params);

/// Parses an angle written either as a number (radians) or a string such as "2deg".
double parse_angle(const std::string& text);

}  // namespace armtraj
