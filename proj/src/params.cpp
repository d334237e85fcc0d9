#include "armtraj/params.hpp"

#include "armtraj/dynamics.hpp"
#include "armtraj/inertia.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace armtraj {

using nlohmann::json;

namespace {

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(field + " must be positive (got " + std::to_string(v) + ")");
  }
}

void require_nonnegative(double v, const std::string& field) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ParameterError(field + " must be nonnegative (got " + std::to_string(v) + ")");
  }
}

double angle_value(const json& j, const std::string& field) {
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    return parse_angle(j.get<std::string>());
  }
  throw ParameterError(field + ": expected a number or an angle string");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(section + "." + key + ": " + e.what());
  }
}

void read_angle(const json& obj, const char* key, double& out, const std::string& section) {
  if (obj.contains(key)) {
    out = angle_value(obj.at(key), section + "." + key);
  }
}

void read_vec4(const json& obj, const char* key, Vec4& out, const std::string& section,
               bool angles = false) {
  if (!obj.contains(key)) {
    return;
  }
  const json& arr = obj.at(key);
  const std::string field = section + "." + key;
  if (!arr.is_array() || arr.size() != 4) {
    throw ParameterError(field + ": expected an array of 4 values");
  }
  for (int i = 0; i < 4; ++i) {
    out[i] = angles ? angle_value(arr[i], field) : arr[i].get<double>();
  }
}

void read_tensor(const json& obj, const char* key, DiagInertia& out) {
  if (!obj.contains(key)) {
    return;
  }
  const json& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 3) {
    throw ParameterError(std::string("inertia.") + key + ": expected [Ixx, Iyy, Izz]");
  }
  out = {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

json vec_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json tensor_json(const DiagInertia& t) { return json::array({t.ixx, t.iyy, t.izz}); }

}  // namespace

double GearTrainParams::torque_denominator() const {
  return h_w * l_gx - cap_h_w * r_avg + r_avg * l_gy * std::tan(varphi) +
         h_w * l_gy * std::tan(psi);
}

RobotParams RobotParams::with_payload(double m_obj) const {
  RobotParams out = *this;
  out.mass.m_obj = m_obj;
  finalize(out);
  return out;
}

double virtual_stiffness(double rated, double stroke) {
  require_positive(stroke, "stroke");
  require_nonnegative(rated, "rated load");
  return rated / stroke;
}

double virtual_damping(double mass_scale, double rated, double stroke) {
  require_nonnegative(mass_scale, "damping mass scale");
  return 2.0 * std::sqrt(mass_scale * virtual_stiffness(rated, stroke));
}

double effective_stall(double tau_stall, double eta, double ratio) {
  require_nonnegative(tau_stall, "tau_stall");
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ParameterError("efficiency must lie in (0, 1]");
  }
  require_positive(ratio, "gear ratio");
  return tau_stall * eta * ratio;
}

double mass_ratio(double m_claw, double m_obj) {
  require_nonnegative(m_claw, "mass.m0");
  require_nonnegative(m_obj, "mass.m_obj");
  if (m_claw + m_obj <= 0.0) {
    throw ParameterError("mass ratio undefined for zero claw and payload mass");
  }
  return m_claw / (m_claw + m_obj);
}

void finalize(RobotParams& p) {
  const GeometryParams& g = p.geometry;
  require_positive(g.l0, "geometry.l0");
  require_positive(g.l1, "geometry.l1");
  require_positive(g.l2, "geometry.l2");
  require_nonnegative(g.lbar1, "geometry.lbar1");
  require_nonnegative(g.lbar2, "geometry.lbar2");
  require_nonnegative(g.delta_r, "geometry.delta_r");
  require_nonnegative(g.r_prime, "geometry.r_prime");
  require_positive(g.rod_radius, "geometry.rod_radius");
  require_positive(g.r_ext, "geometry.r_ext");
  for (int i = 0; i < kNumJoints; ++i) {
    require_positive(g.strokes[i], "geometry.strokes[" + std::to_string(i) + "]");
  }
  if (!(g.vartheta >= 0.0 && g.vartheta < kPi / 2.0)) {
    throw ParameterError("geometry.vartheta must lie in [0, pi/2)");
  }
  if (g.lbar1 > g.l1 || g.lbar2 > g.l2) {
    throw ParameterError("geometry.lbar1/lbar2 must not exceed the link length");
  }

  const MassParams& m = p.mass;
  require_nonnegative(m.m_bf, "mass.m_bf");
  require_nonnegative(m.m0, "mass.m0");
  require_positive(m.m1, "mass.m1");
  require_positive(m.m2, "mass.m2");
  require_nonnegative(m.m_act, "mass.m_act");
  require_nonnegative(m.rho_act, "mass.rho_act");
  require_nonnegative(m.m_obj, "mass.m_obj");
  require_nonnegative(p.gravity, "gravity");

  validate_tensor(p.inertia.base, "inertia.base");
  validate_tensor(p.inertia.link1, "inertia.link1");
  validate_tensor(p.inertia.link2, "inertia.link2");

  const ActuatorRatings& a = p.actuators;
  require_positive(a.tau_stall, "actuators.tau_stall");
  for (int i = kTheta1; i < kNumJoints; ++i) {
    if (!(a.gear_ratios[i] >= 1.0)) {
      throw ParameterError("actuators.gear_ratios[" + std::to_string(i) + "] must be >= 1");
    }
  }
  require_positive(a.v_nl, "actuators.v_nl");
  require_positive(a.omega_nl, "actuators.omega_nl");
  require_positive(a.radial_stall_force, "actuators.radial_stall_force");

  const GdthConfig& c = p.gdth;
  require_positive(c.dt, "gdth.dt");
  require_positive(c.eta, "gdth.eta");
  require_positive(c.epsilon_lambda, "gdth.epsilon_lambda");
  require_positive(c.tol_r, "gdth.tol_r");
  require_positive(c.tol_theta, "gdth.tol_theta");
  require_positive(c.ee_tolerance, "gdth.ee_tolerance");
  require_positive(c.resolve_tolerance, "gdth.resolve_tolerance");
  if (c.max_iter <= 0) {
    throw ParameterError("gdth.max_iter must be positive");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    require_positive(c.alpha0[i], "gdth.alpha0[" + std::to_string(i) + "]");
    if (!(c.momentum_beta[i] >= 0.0 && c.momentum_beta[i] < 1.0)) {
      throw ParameterError("gdth.momentum_beta must lie in [0, 1)");
    }
  }

  const GearTrainParams& gt = p.gear;
  require_positive(gt.r_avg, "gear.r_avg");
  if (!(gt.g_p >= 1.0)) {
    throw ParameterError("gear.g_p must be >= 1");
  }
  if (gt.cap_h_w == 0.0) {
    throw ParameterError("gear.cap_h_w must be nonzero (reaction system is singular)");
  }
  if (std::abs(gt.torque_denominator()) < 1e-12) {
    throw ParameterError("gear: torque denominator vanishes for this geometry");
  }

  DerivedParams& d = p.derived;
  d.effective_stall[kRadial] = a.radial_stall_force;
  for (int i = kTheta1; i < kNumJoints; ++i) {
    d.effective_stall[i] = effective_stall(a.tau_stall, a.efficiencies[i], a.gear_ratios[i]);
  }
  const Mat4 mh = mass_matrix(JointState::at(p.home_pose), p);
  for (int i = 0; i < kNumJoints; ++i) {
    d.stiffness[i] = virtual_stiffness(a.rated[i], g.strokes[i]);
    d.damping_inertia[i] = mh(i, i);
    d.damping[i] = virtual_damping(mh(i, i), a.rated[i], g.strokes[i]);
  }
}

RobotParams default_params() {
  RobotParams p;
  finalize(p);
  return p;
}

RobotParams parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) {
    throw ParameterError("config: top level must be an object");
  }

  RobotParams p;
  if (root.contains("geometry")) {
    const json& s = root["geometry"];
    const std::string n = "geometry";
    read(s, "l0", p.geometry.l0, n);
    read_angle(s, "vartheta", p.geometry.vartheta, n);
    read(s, "l1", p.geometry.l1, n);
    read(s, "l2", p.geometry.l2, n);
    read(s, "lbar1", p.geometry.lbar1, n);
    read(s, "lbar2", p.geometry.lbar2, n);
    read(s, "delta_r", p.geometry.delta_r, n);
    read(s, "r_prime", p.geometry.r_prime, n);
    read(s, "rod_radius", p.geometry.rod_radius, n);
    read(s, "rod_cm", p.geometry.rod_cm, n);
    read(s, "r_ext", p.geometry.r_ext, n);
    if (s.contains("strokes")) {
      // Radial stroke is a length; the others may carry a "deg" suffix.
      const json& arr = s["strokes"];
      if (!arr.is_array() || arr.size() != 4) {
        throw ParameterError("geometry.strokes: expected an array of 4 values");
      }
      p.geometry.strokes[0] = arr[0].get<double>();
      for (int i = 1; i < 4; ++i) {
        p.geometry.strokes[i] = angle_value(arr[i], "geometry.strokes");
      }
    }
  }
  if (root.contains("mass")) {
    const json& s = root["mass"];
    const std::string n = "mass";
    read(s, "m_bf", p.mass.m_bf, n);
    read(s, "m0", p.mass.m0, n);
    read(s, "m1", p.mass.m1, n);
    read(s, "m2", p.mass.m2, n);
    read(s, "m_act", p.mass.m_act, n);
    read(s, "rho_act", p.mass.rho_act, n);
    read(s, "m_obj", p.mass.m_obj, n);
  }
  if (root.contains("actuators")) {
    const json& s = root["actuators"];
    const std::string n = "actuators";
    read_vec4(s, "rated", p.actuators.rated, n);
    read(s, "tau_stall", p.actuators.tau_stall, n);
    read(s, "v_nl", p.actuators.v_nl, n);
    read(s, "omega_nl", p.actuators.omega_nl, n);
    read_vec4(s, "efficiencies", p.actuators.efficiencies, n);
    read_vec4(s, "gear_ratios", p.actuators.gear_ratios, n);
    read(s, "radial_stall_force", p.actuators.radial_stall_force, n);
  }
  if (root.contains("gdth")) {
    const json& s = root["gdth"];
    const std::string n = "gdth";
    read_vec4(s, "alpha0", p.gdth.alpha0, n);
    read(s, "eta", p.gdth.eta, n);
    read_vec4(s, "momentum_beta", p.gdth.momentum_beta, n);
    read(s, "epsilon_lambda", p.gdth.epsilon_lambda, n);
    read(s, "dt", p.gdth.dt, n);
    read(s, "tol_r", p.gdth.tol_r, n);
    read_angle(s, "tol_theta", p.gdth.tol_theta, n);
    read(s, "max_iter", p.gdth.max_iter, n);
    read(s, "ee_tolerance", p.gdth.ee_tolerance, n);
    read(s, "resolve_tolerance", p.gdth.resolve_tolerance, n);
    read(s, "scaled_z1", p.gdth.scaled_z1, n);
    read(s, "potential_in_descent", p.gdth.potential_in_descent, n);
  }
  if (root.contains("gear")) {
    const json& s = root["gear"];
    const std::string n = "gear";
    read(s, "r_avg", p.gear.r_avg, n);
    read(s, "g_p", p.gear.g_p, n);
    read(s, "h_w", p.gear.h_w, n);
    read(s, "cap_h_w", p.gear.cap_h_w, n);
    read(s, "l_gx", p.gear.l_gx, n);
    read(s, "l_gy", p.gear.l_gy, n);
    read_angle(s, "psi", p.gear.psi, n);
    read_angle(s, "varphi", p.gear.varphi, n);
    read(s, "provenance", p.gear.provenance, n);
  }
  if (root.contains("inertia")) {
    const json& s = root["inertia"];
    read_tensor(s, "base", p.inertia.base);
    read_tensor(s, "link1", p.inertia.link1);
    read_tensor(s, "link2", p.inertia.link2);
  }
  read(root, "gravity", p.gravity, "config");
  read_vec4(root, "home_pose", p.home_pose, "config", true);

  finalize(p);
  return p;
}

RobotParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParameterError("config: cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RobotParams& p) {
  const GeometryParams& g = p.geometry;
  const MassParams& m = p.mass;
  const ActuatorRatings& a = p.actuators;
  const GdthConfig& c = p.gdth;
  const GearTrainParams& gt = p.gear;
  json root = {
      {"geometry",
       {{"l0", g.l0}, {"vartheta", g.vartheta}, {"l1", g.l1}, {"l2", g.l2},
        {"lbar1", g.lbar1}, {"lbar2", g.lbar2}, {"delta_r", g.delta_r},
        {"r_prime", g.r_prime}, {"rod_radius", g.rod_radius}, {"rod_cm", g.rod_cm},
        {"r_ext", g.r_ext}, {"strokes", vec_json(g.strokes)}}},
      {"mass",
       {{"m_bf", m.m_bf}, {"m0", m.m0}, {"m1", m.m1}, {"m2", m.m2}, {"m_act", m.m_act},
        {"rho_act", m.rho_act}, {"m_obj", m.m_obj}}},
      {"actuators",
       {{"rated", vec_json(a.rated)}, {"tau_stall", a.tau_stall}, {"v_nl", a.v_nl},
        {"omega_nl", a.omega_nl}, {"efficiencies", vec_json(a.efficiencies)},
        {"gear_ratios", vec_json(a.gear_ratios)},
        {"radial_stall_force", a.radial_stall_force}}},
      {"gdth",
       {{"alpha0", vec_json(c.alpha0)}, {"eta", c.eta},
        {"momentum_beta", vec_json(c.momentum_beta)}, {"epsilon_lambda", c.epsilon_lambda},
        {"dt", c.dt}, {"tol_r", c.tol_r}, {"tol_theta", c.tol_theta},
        {"max_iter", c.max_iter}, {"ee_tolerance", c.ee_tolerance},
        {"resolve_tolerance", c.resolve_tolerance},
        {"scaled_z1", c.scaled_z1}, {"potential_in_descent", c.potential_in_descent}}},
      {"gear",
       {{"r_avg", gt.r_avg}, {"g_p", gt.g_p}, {"h_w", gt.h_w}, {"cap_h_w", gt.cap_h_w},
        {"l_gx", gt.l_gx}, {"l_gy", gt.l_gy}, {"psi", gt.psi}, {"varphi", gt.varphi},
        {"provenance", gt.provenance}}},
      {"inertia",
       {{"base", tensor_json(p.inertia.base)}, {"link1", tensor_json(p.inertia.link1)},
        {"link2", tensor_json(p.inertia.link2)}}},
      {"gravity", p.gravity},
      {"home_pose", vec_json(p.home_pose)},
  };
  return root.dump(2);
}

double parse_angle(const std::string& text) {
  std::string s = text;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  double scale = 1.0;
  for (const auto& [suffix, factor] :
       {std::pair<const char*, double>{"deg", kPi / 180.0}, {"rad", 1.0}}) {
    const std::string suf = suffix;
    if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0) {
      s.erase(s.size() - suf.size());
      scale = factor;
      break;
    }
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParameterError("cannot parse angle '" + text + "'");
  }
  while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) {
    ++used;
  }
  if (used != s.size()) {
    throw ParameterError("cannot parse angle '" + text + "'");
  }
  return value * scale;
}

}  // namespace armtraj
