#include <gtest/gtest.h>

#include "cvp/io.hpp"
#include "support.hpp"

using namespace cvp;
using namespace cvp::testing;

TEST(Json, MalformedInputReportsPosition) {
  try {
    io::parse("{\n  \"f\": 2,\n  \"points\": [ {\"w\": 1, }\n}\n", "bad.json");
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Validation);
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Json, ConfigWithVectorsAndMatrices) {
  auto j = io::parse(R"({"f": 2, "n": 1, "beta": 0.3,
    "points": [{"w": 0.5, "v": [0, 0, 1]},
               {"w": 0.5, "re": [[0.35, 0], [0, -0.2]], "im": [[0, 0], [0, 0]]}]})");
  DiscreteConfig c = io::config_from_json(j);
  ASSERT_EQ(c.points.size(), 2u);
  ASSERT_TRUE(c.beta.has_value());
  EXPECT_LT(max_abs_diff(c.points[0].p, pauli_embed({0, 0, 1}, 0.3)), 1e-15);
  EXPECT_NEAR(c.points[1].p(0, 0).real(), 0.35, 1e-15);
}

TEST(Json, ConfigValidation) {
  EXPECT_CVP_ERROR(io::config_from_json(io::parse(R"({"f": 2, "points": [{"w": -1, "v": [0, 0, 1]}]})")),
                   Errc::Validation);
  EXPECT_CVP_ERROR(io::config_from_json(io::parse(R"({"f": 2, "points": [{"w": 1, "re": [[1, 0, 0]]}]})")),
                   Errc::Validation);
  EXPECT_CVP_ERROR(io::config_from_json(io::parse(R"({"points": []})")), Errc::Validation);
}

TEST(Json, ConfigRoundTripIsExact) {
  Rng g(91);
  DiscreteConfig c = random_config(g, 4, 2, 5);
  DiscreteConfig back = io::config_from_json(io::parse(io::config_to_json(c).dump()));
  ASSERT_EQ(back.points.size(), c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    EXPECT_EQ(back.points[i].w, c.points[i].w);
    EXPECT_EQ(back.points[i].p, c.points[i].p);
  }
}

TEST(Json, FermionAndMeasureRoundTrip) {
  Rng g(92);
  FermionSystem s = reconstruct(random_config(g, 3, 1, 3));
  FermionSystem s2 = io::fermion_from_json(io::parse(io::fermion_to_json(s).dump()));
  ASSERT_EQ(s2.sites.size(), s.sites.size());
  for (int l = 0; l < s.f; ++l)
    for (std::size_t x = 0; x < s.sites.size(); ++x) EXPECT_EQ(s2.waves[l][x], s.waves[l][x]);
  NegDefMeasure nu = dirac_cylinder(2.0, 1.0, {2, 2, 4});
  NegDefMeasure nu2 = io::negdef_from_json(io::parse(io::negdef_to_json(nu).dump()));
  ASSERT_EQ(nu2.support.size(), nu.support.size());
  EXPECT_EQ(nu2.khat_radius, nu.khat_radius);
  for (std::size_t k = 0; k < nu.support.size(); ++k) {
    EXPECT_EQ(nu2.support[k].p, nu.support[k].p);
    EXPECT_EQ(nu2.support[k].w, nu.support[k].w);
  }
}

TEST(Json, ProblemFile) {
  auto pf = io::problem_from_json(io::parse(R"({"objective": "T_plus_nuS", "nu": 0.5,
      "constraints": ["C2"], "m": 3, "f": 2, "n": 1, "options": {"restarts": 2, "seed": 4}})"));
  EXPECT_FALSE(pf.sphere);
  EXPECT_EQ(pf.general.objective, Objective::TPlusNuS);
  EXPECT_EQ(pf.general.nu, 0.5);
  EXPECT_TRUE(pf.general.c2);
  EXPECT_FALSE(pf.general.c1);
  EXPECT_EQ(pf.general.m, 3);
  EXPECT_EQ(pf.general.options.restarts, 2);
  EXPECT_EQ(pf.general.options.seed, 4u);
  EXPECT_CVP_ERROR(io::problem_from_json(io::parse(R"({"objective": "T_plus_nuS"})")), Errc::Validation);
  EXPECT_CVP_ERROR(io::problem_from_json(io::parse(R"({"objective": "X"})")), Errc::Validation);
}
