#include "armtraj/params.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace armtraj;

TEST(Params, EffectiveStallTable) {
  EXPECT_NEAR(effective_stall(68.64655, 0.95, 2.0), 130.4, 0.05);
  EXPECT_NEAR(effective_stall(68.64655, 0.85, 2.0), 116.7, 0.05);
  EXPECT_NEAR(effective_stall(68.64655, 0.85, 4.0), 233.4, 0.05);
  EXPECT_THROW(effective_stall(68.0, 1.2, 2.0), ParameterError);
  EXPECT_THROW(effective_stall(68.0, 0.9, 0.0), ParameterError);
}

TEST(Params, DefaultsCarryDerivedValues) {
  const RobotParams p = default_params();
  EXPECT_DOUBLE_EQ(p.derived.effective_stall[kRadial], 200.0);
  EXPECT_NEAR(p.derived.effective_stall[kAzimuth], 233.4, 0.05);
  EXPECT_NEAR(p.derived.stiffness[kRadial], 200.0 / 0.1016, 1e-9);
  EXPECT_NEAR(p.derived.stiffness[kTheta2], 53.0 / (kPi / 6.0), 1e-9);
  for (int j = 0; j < kNumJoints; ++j) {
    const double crit = 2.0 * std::sqrt(p.derived.damping_inertia[j] * p.derived.stiffness[j]);
    EXPECT_NEAR(p.derived.damping[j], crit, 1e-12);
  }
}

TEST(Params, VirtualSpringDamper) {
  EXPECT_NEAR(virtual_stiffness(53.0, kPi / 2.0), 33.740847935, 1e-8);
  EXPECT_NEAR(virtual_damping(2.0, 8.0, 1.0), 8.0, 1e-12);
  EXPECT_THROW(virtual_stiffness(53.0, 0.0), ParameterError);
}

TEST(Params, MassRatio) {
  EXPECT_DOUBLE_EQ(mass_ratio(0.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(mass_ratio(0.5, 4.5), 0.1);
  EXPECT_THROW(mass_ratio(0.0, 0.0), ParameterError);
}

TEST(Params, PayloadRecomputesDamping) {
  const RobotParams p = default_params();
  const RobotParams q = p.with_payload(4.0);
  EXPECT_DOUBLE_EQ(q.mass.m_obj, 4.0);
  EXPECT_GT(q.derived.damping[kRadial], p.derived.damping[kRadial]);
  EXPECT_EQ(q.derived.stiffness, p.derived.stiffness);
}

TEST(Params, ParseAngle) {
  EXPECT_NEAR(parse_angle("2deg"), 2.0 * kPi / 180.0, 1e-15);
  EXPECT_NEAR(parse_angle("0.5 rad"), 0.5, 1e-15);
  EXPECT_NEAR(parse_angle("0.25"), 0.25, 1e-15);
  EXPECT_THROW(parse_angle("two degrees"), ParameterError);
  EXPECT_THROW(parse_angle(""), ParameterError);
}

TEST(Params, DumpParseRoundTrip) {
  RobotParams p = default_params();
  p.geometry.l1 = 0.31;
  p.gear.l_gy = 0.05;
  p.gear.provenance = "fitted";
  finalize(p);
  const RobotParams q = parse_config(dump_config(p));
  EXPECT_DOUBLE_EQ(q.geometry.l1, 0.31);
  EXPECT_DOUBLE_EQ(q.gear.l_gy, 0.05);
  EXPECT_EQ(q.gear.provenance, "fitted");
  EXPECT_EQ(q.derived.damping, p.derived.damping);
}

TEST(Params, PartialConfigKeepsDefaults) {
  const RobotParams p = parse_config(R"({"geometry": {"l2": 0.2}, "gdth": {"tol_theta": "3deg"}})");
  EXPECT_DOUBLE_EQ(p.geometry.l2, 0.2);
  EXPECT_DOUBLE_EQ(p.geometry.l1, default_params().geometry.l1);
  EXPECT_NEAR(p.gdth.tol_theta, 3.0 * kPi / 180.0, 1e-15);
}

TEST(Params, InvalidValuesNameTheField) {
  try {
    parse_config(R"({"geometry": {"l1": -0.3}})");
    FAIL() << "negative length accepted";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("geometry.l1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config(R"({"geometry": {"vartheta": 2.0}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"geometry": {"lbar1": 0.5}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"mass": {"m1": 0}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"gdth": {"momentum_beta": [1, 0, 0, 0]}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"inertia": {"link1": [1.0, 0.1, 0.1]}})"), ParameterError);
  EXPECT_THROW(parse_config("{not json"), ParameterError);
}

TEST(Params, LoadMissingFileThrows) {
  EXPECT_THROW(load_config("/nonexistent/robot.json"), ParameterError);
}
