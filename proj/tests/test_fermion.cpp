#include <gtest/gtest.h>

#include "cvp/catalogue.hpp"
#include "cvp/fermion.hpp"
#include "support.hpp"

using namespace cvp;
using namespace cvp::testing;

namespace {

FermionSystem random_system(Rng& g, int n, int f, int sites) {
  std::normal_distribution<double> nd;
  FermionSystem s;
  s.space.n = n;
  s.f = f;
  double tot = 0.0;
  for (int x = 0; x < sites; ++x) {
    double w = unif(g, 0.1, 1.0);
    tot += w;
    s.sites.push_back({w, "s" + std::to_string(x)});
  }
  for (auto& st : s.sites) st.w /= tot;
  s.waves.assign(f, Wave(sites, CVec(2 * n)));
  for (auto& psi : s.waves)
    for (auto& v : psi)
      for (auto& z : v) z = cplx(nd(g), nd(g));
  return s;
}

Wave constant_wave(const FermionSystem& s, int a) {
  CVec e(s.space.dim(), 0.0);
  e[a] = 1.0;
  return Wave(s.sites.size(), e);
}

}  // namespace

TEST(Inner, SignatureOnBasisVectors) {
  Rng g(61);
  FermionSystem s = random_system(g, 2, 3, 4);
  EXPECT_NEAR(std::abs(inner(s, constant_wave(s, 0), constant_wave(s, 0)) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inner(s, constant_wave(s, 2), constant_wave(s, 2)) + 1.0), 0.0, 1e-15);
}

TEST(Inner, Sesquilinear) {
  Rng g(62);
  FermionSystem s = random_system(g, 2, 3, 5);
  const Wave &a = s.waves[0], &b = s.waves[1], &c = s.waves[2];
  cplx al(0.3, -1.2), be(-0.7, 0.4);
  Wave mix = a;
  for (std::size_t x = 0; x < mix.size(); ++x)
    for (int k = 0; k < s.space.dim(); ++k) mix[x][k] = al * a[x][k] + be * b[x][k];
  cplx lhs = inner(s, c, mix), rhs = al * inner(s, c, a) + be * inner(s, c, b);
  EXPECT_LT(std::abs(lhs - rhs), 1e-12);
  cplx lhs2 = inner(s, mix, c), rhs2 = std::conj(al) * inner(s, a, c) + std::conj(be) * inner(s, b, c);
  EXPECT_LT(std::abs(lhs2 - rhs2), 1e-12);
  EXPECT_LT(std::abs(inner(s, a, b) - std::conj(inner(s, b, a))), 1e-12);
}

TEST(LocalCorrelation, HandExample) {
  FermionSystem s;
  s.space.n = 1;
  s.f = 2;
  s.sites = {{1.0, "x"}};
  s.waves = {Wave{CVec{1.0, 0.0}}, Wave{CVec{0.0, 1.0}}};
  EXPECT_LT(max_abs_diff(local_correlation(s, 0), CMatrix::diag({-1.0, 1.0})), 1e-15);
  for (auto& psi : s.waves) psi[0] = CVec{0.0, 0.0};
  EXPECT_EQ(local_correlation(s, 0), CMatrix(2));
}

TEST(LocalCorrelation, SignatureBound) {
  Rng g(63);
  for (int trial = 0; trial < 50; ++trial) {
    FermionSystem s = random_system(g, 2, 6, 3);
    for (std::size_t x = 0; x < s.sites.size(); ++x) {
      CMatrix F = local_correlation(s, x);
      ASSERT_TRUE(is_hermitian(F, 1e-12));
      auto ic = inertia(herm_eigen(F).values, 1e-9 * frob_norm(F));
      EXPECT_LE(ic.negative, 2);
      EXPECT_LE(ic.positive, 2);
    }
  }
}

TEST(LocalCorrelation, GaugeInvariance) {
  // U = exp(i S H) with S H Hermitian in the indefinite product is S-unitary;
  // a boost mixing e_0 and e_n is the simplest such map
  Rng g(64);
  FermionSystem s = random_system(g, 1, 3, 4);
  FermionSystem t = s;
  for (std::size_t x = 0; x < s.sites.size(); ++x) {
    double r = unif(g, -1.5, 1.5), ph = unif(g, 0.0, 6.0);
    cplx e = std::polar(1.0, ph);
    for (auto& psi : t.waves) {
      CVec v = psi[x];
      psi[x][0] = e * (std::cosh(r) * v[0] + std::sinh(r) * v[1]);
      psi[x][1] = e * (std::sinh(r) * v[0] + std::cosh(r) * v[1]);
    }
    EXPECT_LT(max_abs_diff(local_correlation(s, x), local_correlation(t, x)), 1e-10);
  }
}

TEST(Kernel, ChainSpectrumMatchesCorrelationProduct) {
  Rng g(65);
  for (int trial = 0; trial < 50; ++trial) {
    int n = pick(g, 1, 2), f = pick(g, 2 * n, 6);
    FermionSystem s = random_system(g, n, f, 2);
    Spectrum chain = eigenvalues(closed_chain(kernel_P(s, 0, 1), kernel_P(s, 1, 0)));
    Spectrum corr = eigenvalues(local_correlation(s, 0) * local_correlation(s, 1));
    EXPECT_LT(multiset_distance(chain.values, corr.top(2 * n)), 1e-9);
  }
}

TEST(Kernel, SingleWaveHasRankOne) {
  Rng g(66);
  FermionSystem s = random_system(g, 2, 1, 3);
  Spectrum sp = eigenvalues(kernel_P(s, 0, 1));
  int rank = 0;
  for (auto& x : sp.values) rank += std::abs(x) > 1e-9;
  EXPECT_LE(rank, 1);
  auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(to_eigen(kernel_P(s, 0, 1))).singularValues();
  EXPECT_GT(sv(0), 1e-6);
  EXPECT_LT(sv(1), 1e-12 * sv(0));
}

TEST(Kernel, SymmetricInIndefiniteProduct) {
  Rng g(67);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    int n = pick(g, 1, 2);
    FermionSystem s = random_system(g, n, pick(g, 1, 5), 2);
    CVec u(2 * n), v(2 * n);
    for (auto& z : u) z = cplx(nd(g), nd(g));
    for (auto& z : v) z = cplx(nd(g), nd(g));
    auto apply = [](const CMatrix& m, const CVec& x) {
      CVec y(x.size(), 0.0);
      for (int a = 0; a < m.rows(); ++a)
        for (int b = 0; b < m.cols(); ++b) y[a] += m(a, b) * x[b];
      return y;
    };
    cplx lhs = s.space.bracket(u, apply(kernel_P(s, 0, 1), v));
    cplx rhs = s.space.bracket(apply(kernel_P(s, 1, 0), u), v);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(Reconstruct, RoundTripOnRandomConfigs) {
  Rng g(68);
  for (int trial = 0; trial < 60; ++trial) {
    int n = pick(g, 1, 2), f = pick(g, 2 * n, 8);
    DiscreteConfig c = random_config(g, f, n, pick(g, 1, 6));
    FermionSystem s = reconstruct(c);
    validate(s);
    for (std::size_t x = 0; x < c.points.size(); ++x)
      EXPECT_LT(max_abs_diff(local_correlation(s, x), c.points[x].p), 1e-9);
    // trace relation with the internally consistent sign
    double sum_tr = weighted_sum(c).trace().real();
    EXPECT_NEAR(operator_trace(s), sum_tr, 1e-9 * (1.0 + std::abs(sum_tr)));
    CMatrix minus_sum = weighted_sum(c) * -1.0;
    EXPECT_LT(max_abs_diff(gram_matrix(s), minus_sum), 1e-9);
  }
}

TEST(Reconstruct, IdentityConstraintGivesNegativeGram) {
  auto c = std::get<DiscreteConfig>(make_example("divergent_tau", {{"tau", 2.0}}).output);
  FermionSystem s = reconstruct(c);
  for (std::size_t x = 0; x < c.points.size(); ++x)
    EXPECT_LT(max_abs_diff(local_correlation(s, x), c.points[x].p), 1e-9);
  EXPECT_LT(max_abs_diff(gram_matrix(s), CMatrix::identity(2) * -1.0), 1e-9);
}

TEST(Reconstruct, SinglePointByHand) {
  const double beta = 0.25;
  DiscreteConfig c;
  c.f = 3;
  c.points = {{1.0, CMatrix::diag({1.0, -beta, 0.0})}};
  FermionSystem s = reconstruct(c);
  // slot 0 carries the negative eigenvalue, slot 1 the positive one
  EXPECT_NEAR(std::abs(s.waves[1][0][0]), std::sqrt(beta), 1e-14);
  EXPECT_NEAR(std::abs(s.waves[0][0][1]), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.waves[0][0][0]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.waves[1][0][1]), 0.0, 1e-14);
  for (auto& z : s.waves[2][0]) EXPECT_EQ(std::abs(z), 0.0);
}

TEST(Reconstruct, ZeroPointGivesZeroWaves) {
  DiscreteConfig c;
  c.points = {{0.5, CMatrix(2)}, {0.5, CMatrix::diag({1.0, -0.5})}};
  FermionSystem s = reconstruct(c);
  for (auto& psi : s.waves)
    for (auto& z : psi[0]) EXPECT_EQ(z, cplx(0.0));
}

TEST(Reconstruct, RejectsSignatureViolation) {
  DiscreteConfig c;
  c.f = 3;
  c.points = {{1.0, CMatrix::diag({1.0, 1.0, 0.0})}};
  EXPECT_CVP_ERROR(reconstruct(c), Errc::InvalidPoint);
}

TEST(Gram, OrthogonalConstantWavesAreDiagonal) {
  FermionSystem s;
  s.space.n = 2;
  s.f = 3;
  s.sites = {{0.5, "a"}, {0.5, "b"}};
  for (int l = 0; l < 3; ++l) s.waves.push_back(constant_wave(s, l));
  CMatrix gm = gram_matrix(s);
  EXPECT_LT(max_abs_diff(gm, CMatrix::diag({1.0, 1.0, -1.0})), 1e-15);
}

TEST(Gram, EqualsMinusIntegratedCorrelation) {
  Rng g(69);
  for (int trial = 0; trial < 30; ++trial) {
    FermionSystem s = random_system(g, pick(g, 1, 2), pick(g, 1, 6), pick(g, 1, 5));
    DiscreteConfig c = correlations(s);
    EXPECT_LT(max_abs_diff(gram_matrix(s), weighted_sum(c) * -1.0), 1e-12);
  }
}

TEST(Positivity, MinusPIsPositive) {
  // <phi|P phi> = -sum_l |<psi_l|phi>|^2
  Rng g(70);
  for (int trial = 0; trial < 30; ++trial) {
    FermionSystem s = random_system(g, pick(g, 1, 2), pick(g, 1, 4), pick(g, 1, 4));
    Wave phi = s.waves[0];
    std::normal_distribution<double> nd;
    for (auto& v : phi)
      for (auto& z : v) z = cplx(nd(g), nd(g));
    Wave pphi = apply_P(s, phi);
    cplx q = inner(s, phi, pphi);
    EXPECT_LT(std::abs(q.imag()), 1e-10 * (1.0 + std::abs(q)));
    EXPECT_LE(q.real(), 1e-10);
  }
}
