#include "armtraj/dynamics.hpp"
#include "armtraj/gdth.hpp"
#include "armtraj/kinematics.hpp"
#include "armtraj/params.hpp"
#include "armtraj/pmp.hpp"
#include "armtraj/scenario.hpp"
#include "armtraj/structural.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace armtraj;

namespace {

py::dict gdth_dict(const GdthResult& r) {
  py::dict d;
  d["q_star"] = r.q_star;
  d["q_final"] = r.q_final;
  d["horizons"] = r.horizons;
  d["iterations"] = r.iterations;
  d["resolve_iterations"] = r.resolve_iterations;
  d["rollbacks"] = r.rollbacks;
  d["ee_error"] = r.ee_error;
  d["converged"] = r.converged;
  d["stall_warning"] = r.stall_warning;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Planner core for a 4-DOF spherical manipulator";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_RuntimeError);

  py::class_<RobotParams>(m, "RobotParams")
      .def("with_payload", &RobotParams::with_payload, py::arg("m_obj"))
      .def_property_readonly("m_obj", [](const RobotParams& p) { return p.mass.m_obj; })
      .def_property_readonly("home_pose", [](const RobotParams& p) { return p.home_pose; })
      .def_property_readonly("stiffness", [](const RobotParams& p) { return p.derived.stiffness; })
      .def_property_readonly("damping", [](const RobotParams& p) { return p.derived.damping; })
      .def_property_readonly("effective_stall",
                             [](const RobotParams& p) { return p.derived.effective_stall; })
      .def_property_readonly("gear_provenance", [](const RobotParams& p) { return p.gear.provenance; })
      .def("to_json", &dump_config);

  m.def("default_params", &default_params);
  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("effective_stall", py::overload_cast<double, double, double>(&effective_stall),
        py::arg("tau_stall"), py::arg("efficiency"), py::arg("ratio"));

  m.def(
      "forward_kinematics",
      [](const Vec4& q, const RobotParams& p) { return forward_kinematics(JointState::at(q), p.geometry); },
      py::arg("q"), py::arg("params"));
  m.def(
      "mass_matrix", [](const Vec4& q, const RobotParams& p) { return mass_matrix(JointState::at(q), p); },
      py::arg("q"), py::arg("params"));
  m.def(
      "gravity_gradient",
      [](const Vec4& q, const RobotParams& p) { return gravity_gradient(JointState::at(q), p); },
      py::arg("q"), py::arg("params"));
  m.def(
      "inverse_dynamics",
      [](const Vec4& q, const Vec4& qd, const Vec4& qdd, const RobotParams& p, const Vec4& rest) {
        return inverse_dynamics(JointState::at(q, qd), qdd, p, rest);
      },
      py::arg("q"), py::arg("qdot"), py::arg("qddot"), py::arg("params"), py::arg("rest"));

  m.def(
      "solve_boundary",
      [](double q0, double qf, double v0, double vf, double tf) {
        const CubicCoefficients c = solve_boundary({q0, qf, v0, vf, tf});
        return py::make_tuple(c.c1, c.c2, c.c3, c.c4);
      },
      py::arg("q0"), py::arg("qf"), py::arg("v0") = 0.0, py::arg("vf") = 0.0, py::arg("tf"));
  m.def(
      "acceleration_cost",
      [](double q0, double qf, double v0, double vf, double tf) {
        return acceleration_cost(solve_boundary({q0, qf, v0, vf, tf}), tf);
      },
      py::arg("q0"), py::arg("qf"), py::arg("v0") = 0.0, py::arg("vf") = 0.0, py::arg("tf"));

  m.def(
      "gdth_run",
      [](const Vec3& ee_target, const Vec4& q0, const RobotParams& p, std::optional<double> z1,
         double m_obj) {
        return gdth_dict(run({ee_target, z1, m_obj}, JointState::at(q0), p.gdth, p, {false, 1}));
      },
      py::arg("ee_target"), py::arg("q0"), py::arg("params"), py::arg("z1_target") = py::none(),
      py::arg("m_obj") = 0.0);

  m.def(
      "u_phi0",
      [](const Vec4& q, const RobotParams& p) { return solve_reactions(JointState::at(q), p).u_phi0; },
      py::arg("q"), py::arg("params"));
  m.def(
      "u_phi0_closed_form",
      [](const Vec4& q, const RobotParams& p) { return closed_form_u_phi0(JointState::at(q), p); },
      py::arg("q"), py::arg("params"));
  m.def(
      "payload_capacity",
      [](const RobotParams& p, int n1, int n2) {
        SurfaceGrid g;
        g.n_theta1 = n1;
        g.n_theta2 = n2;
        const CapacityReport r = payload_capacity(p, p.derived.effective_stall[kAzimuth], g);
        py::dict d;
        d["capacity"] = r.capacity;
        d["unbounded"] = r.unbounded;
        d["bisection"] = r.bisection;
        d["max_slope"] = r.max_slope;
        return d;
      },
      py::arg("params"), py::arg("n_theta1") = 41, py::arg("n_theta2") = 41);

  m.def(
      "run_scenario",
      [](const std::string& path) {
        const RunReport rep = run_scenario(load_scenario(path));
        py::list out;
        for (const SegmentReport& s : rep.segments) {
          py::dict d = gdth_dict(s.gdth);
          d["index"] = s.index;
          d["m_obj"] = s.m_obj;
          d["t_offset"] = s.t_offset;
          d["duration"] = s.pmp.duration();
          d["q_start"] = s.q_start;
          d["q_end"] = s.q_end;
          d["peak_abs_u"] = s.peak_abs_u;
          d["stall"] = s.stall;
          d["samples"] = s.samples.size();
          out.append(d);
        }
        return out;
      },
      py::arg("path"));
}
