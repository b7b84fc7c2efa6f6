#include <gtest/gtest.h>

#include "cvp/catalogue.hpp"
#include "support.hpp"

using namespace cvp;
using namespace cvp::testing;

namespace {

void expect_verified(const ExampleCase& ec) {
  for (auto& line : verify_example(ec, evaluate_example(ec)))
    EXPECT_TRUE(line.ok) << ec.name << " " << line.key << ": got " << line.got << " expected " << line.expected
                         << " err " << line.err << " tol " << line.tol;
}

}  // namespace

TEST(Catalogue, NamesAreComplete) {
  EXPECT_EQ(example_names().size(), 9u);
  for (auto& nm : example_names()) EXPECT_EQ(make_example(nm, {{"N", 16}}).name, nm);
  EXPECT_CVP_ERROR(make_example("no_such_example"), Errc::UnknownExample);
}

TEST(Catalogue, TwoPoint) {
  expect_verified(make_example("two_point", {{"beta", 0.3}}));
  auto ec = make_example("two_point", {{"beta", 0.3}});
  EXPECT_NEAR(evaluate_example(ec).at("S"), 0.25 * 0.91 * 0.91, 1e-14);
  // a timelike pair picks up the cross term
  auto close = make_example("two_point", {{"beta", 0.3}, {"angle", 0.4}});
  expect_verified(close);
  EXPECT_GT(evaluate_example(close).at("S"), 0.25 * 0.91 * 0.91);
}

TEST(Catalogue, IllPosedFamily) {
  for (double k : {1.0, 10.0, 100.0}) {
    auto ec = make_example("illposed", {{"k", k}});
    expect_verified(ec);
    EXPECT_LT(evaluate_example(ec).at("T_plus_nuS"), 0.0);
  }
  auto above = make_example("illposed", {{"k", 10.0}, {"nu", -1.9}});
  expect_verified(above);
  EXPECT_GT(evaluate_example(above).at("T_plus_nuS"), 0.0);
}

TEST(Catalogue, DivergentTau) {
  for (double tau : {1.0, 10.0, 1000.0}) expect_verified(make_example("divergent_tau", {{"tau", tau}}));
}

TEST(Catalogue, IdentityViolation) {
  for (double tau : {2.0, 5.0}) {
    auto ec = make_example("identity_violation", {{"tau", tau}});
    expect_verified(ec);
    EXPECT_NEAR(evaluate_example(ec).at("S"), 72.0 * (1 + tau * tau) / (tau * tau), 1e-10 * 72.0);
  }
}

TEST(Catalogue, DiracSphere2d) {
  auto ec = make_example("dirac_sphere_2d", {{"tau", 3.0}, {"N", 4000}});
  auto got = evaluate_example(ec);
  EXPECT_NEAR(got.at("S"), 4.0 - 4.0 / 27.0, 1e-2);
  expect_verified(ec);
}

TEST(Catalogue, DiracSphere2dQuadratureIsExact) {
  for (double tau : {1.5, 2.0, 3.0, 7.0}) {
    double t2 = tau * tau;
    EXPECT_NEAR(dirac_sphere_2d_quadrature(tau), 4.0 - 4.0 / (3.0 * t2), 1e-10) << tau;
    EXPECT_NEAR(dirac_sphere_2d_quadrature(tau, 128), dirac_sphere_2d_quadrature(tau), 1e-12);
  }
}

TEST(Catalogue, DiracSphere3dSmallTau) {
  expect_verified(make_example("dirac_sphere_3d", {{"tau", 2.0}, {"N", 1024}}));
}

TEST(Catalogue, DiracSphere3dDecay) {
  auto ec = make_example("dirac_sphere_3d", {{"tau", 50.0}, {"N", 64}});
  auto got = evaluate_example(ec);
  EXPECT_NEAR(got.at("S_tau_asymptotic"), 512.0 / (15.0 * M_PI), 0.05 * 512.0 / (15.0 * M_PI));
  // S goes to zero while T grows without bound
  double s_small = dirac_sphere_3d_quadrature(20.0), s_large = dirac_sphere_3d_quadrature(200.0);
  EXPECT_LT(s_large, 0.2 * s_small);
}

TEST(Catalogue, DiscontinuousMoments) {
  for (double tau : {2.0, 3.0, 8.0}) {
    auto ec = make_example("discontinuous_moments", {{"tau", tau}});
    expect_verified(ec);
    auto& m = std::get<ScalarMeasure>(ec.output);
    EXPECT_LE(m.moment(1) * m.moment(1), m.moment(0) * m.moment(2));
  }
}

TEST(Catalogue, BubblingConstraintsAndPoles) {
  for (auto [eps, kappa] : {std::pair{0.1, 1.0}, std::pair{0.05, 2.0}}) {
    auto ec = make_example("bubbling", {{"eps", eps}, {"kappa", kappa}});
    auto got = evaluate_example(ec);
    double d = 1.0 - 2.0 * eps;
    EXPECT_NEAR(got.at("S"), 3.0 / (d * d), 0.01 * 3.0 / (d * d));
    EXPECT_LT(got.at("c2"), 1e-9);
    EXPECT_NEAR(got.at("pole_m0"), eps, 1e-12);
    // pole pairs are spacelike or on the boundary, never timelike
    auto& c = std::get<DiscreteConfig>(ec.output);
    const CMatrix& south = c.points.front().p;
    const CMatrix& north = c.points.back().p;
    EXPECT_NE(classify(south, north, 1), CausalClass::Timelike);
    for (std::size_t j = 1; j + 1 < c.points.size(); j += 17)
      EXPECT_NE(classify(north, c.points[j].p, 1), CausalClass::Timelike);
  }
}

TEST(Catalogue, BubblingClosedFormsFromTheChainStructure) {
  // pole-circle chains are nilpotent, so only pole-pole and circle-circle pairs enter T
  for (auto [eps, kappa] : {std::pair{0.1, 1.0}, std::pair{0.05, 2.0}}) {
    auto ec = make_example("bubbling", {{"eps", eps}, {"kappa", kappa}, {"N", 512}});
    auto got = evaluate_example(ec);
    double d = 1.0 - 2.0 * eps;
    double derived = 6.0 / (d * d) + 16.0 * std::pow(kappa, 4) / std::pow(d, 4);
    EXPECT_NEAR(got.at("T"), derived, 1e-3 * derived);
    // Frobenius-normalized rays: the pole point has norm sqrt(2) * kappa / (sqrt(eps) d)
    EXPECT_NEAR(got.at("pole_m2"), 2.0 * kappa * kappa / (d * d), 1e-12);
  }
}

TEST(Catalogue, CylinderTraceAndQuadrature) {
  auto ec = make_example("dirac_cylinder", {{"tau", 2.0}, {"L", 1.0}});
  auto& nu = std::get<NegDefMeasure>(ec.output);
  EXPECT_NEAR(local_density(nu), 1.0, 1e-10);
  EXPECT_TRUE(local_bound_check(nu).holds());
}

TEST(Catalogue, VerifyReportsFailures) {
  auto ec = make_example("divergent_tau", {{"tau", 2.0}});
  auto got = evaluate_example(ec);
  got["S"] = 17.0;
  auto lines = verify_example(ec, got);
  bool any_bad = false;
  for (auto& l : lines) any_bad = any_bad || !l.ok;
  EXPECT_TRUE(any_bad);
}
