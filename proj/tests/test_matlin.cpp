#include <gtest/gtest.h>

#include "cvp/matlin.hpp"
#include "support.hpp"

using namespace cvp;
using namespace cvp::testing;

namespace {

std::vector<double> real_parts(const Spectrum& s) {
  std::vector<double> out;
  for (auto& x : s.values) out.push_back(x.real());
  std::sort(out.begin(), out.end());
  return out;
}

cplx det(const CMatrix& a) { return to_eigen(a).determinant(); }

}  // namespace

TEST(HermEigen, DiagonalInputIsSortedAscending) {
  const double beta = 0.3;
  HermEigen he = herm_eigen(CMatrix::diag({1.0, -beta}));
  ASSERT_EQ(he.values.size(), 2u);
  EXPECT_DOUBLE_EQ(he.values[0], -beta);
  EXPECT_DOUBLE_EQ(he.values[1], 1.0);
  // a permutation matrix up to phases
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double m = std::abs(he.vectors(i, j));
      EXPECT_TRUE(std::abs(m) < 1e-14 || std::abs(m - 1.0) < 1e-14);
    }
}

TEST(HermEigen, PauliProjector) {
  CMatrix p = 0.5 * (CMatrix::identity(2) + pauli(3));
  HermEigen he = herm_eigen(p);
  EXPECT_NEAR(he.values[0], 0.0, 1e-15);
  EXPECT_NEAR(he.values[1], 1.0, 1e-15);
}

TEST(HermEigen, RoundTripOnRandomMatrices) {
  Rng g(11);
  for (int trial = 0; trial < 200; ++trial) {
    int d = pick(g, 1, 8);
    CMatrix a = random_hermitian(g, d);
    HermEigen he = herm_eigen(a);
    CMatrix back = he.vectors * CMatrix::diag(he.values) * he.vectors.adjoint();
    EXPECT_LT(max_abs_diff(back, a), 1e-12);
    EXPECT_LT(max_abs_diff(he.vectors.adjoint() * he.vectors, CMatrix::identity(d)), 1e-12);
    EXPECT_TRUE(std::is_sorted(he.values.begin(), he.values.end()));
  }
}

TEST(HermEigen, RejectsNonHermitian) {
  CMatrix a = CMatrix::from_rows({{1.0, 2.0}, {0.0, 1.0}});
  try {
    herm_eigen(a);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotHermitian);
  }
}

TEST(Eigenvalues, IdentityIsDoubleOne) {
  Spectrum s = eigenvalues(CMatrix::identity(2));
  ASSERT_EQ(s.size(), 2u);
  for (auto& x : s.values) EXPECT_LT(std::abs(x - 1.0), 1e-12);
}

TEST(Eigenvalues, ZeroMatrixHasExactZeros) {
  Spectrum s = eigenvalues(CMatrix(4));
  ASSERT_EQ(s.size(), 4u);
  for (auto& x : s.values) EXPECT_EQ(x, cplx(0.0));
  EXPECT_EQ(spectral_weight(s), 0.0);
  EXPECT_EQ(spectral_weight_sq(s), 0.0);
}

TEST(Eigenvalues, DiracSphereChainPair) {
  // p = 1 + tau a.sigma, q = 1 + tau b.sigma, c = a.b
  Rng g(5);
  for (double tau : {1.5, 2.0, 3.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      Vec3 a = random_unit(g), b = random_unit(g);
      auto emb = [tau](const Vec3& v) {
        return CMatrix::identity(2) + tau * (v[0] * pauli(1) + v[1] * pauli(2) + v[2] * pauli(3));
      };
      double c = dot(a, b);
      cplx root = std::sqrt(cplx(tau * tau * (1.0 + c) * (2.0 - tau * tau * (1.0 - c))));
      std::vector<cplx> expect{1.0 + tau * tau * c + root, 1.0 + tau * tau * c - root};
      Spectrum s = eigenvalues(emb(a) * emb(b));
      EXPECT_LT(multiset_distance(s.values, expect), 1e-9) << "tau " << tau << " c " << c;
    }
  }
}

TEST(Eigenvalues, CompanionMatrixOracle) {
  Rng g(7);
  for (int trial = 0; trial < 500; ++trial) {
    int d = pick(g, 1, 8);
    CMatrix a = random_matrix(g, d, d);
    Spectrum s = eigenvalues(a);
    auto oracle = companion_roots(faddeev_leverrier(a).coeffs);
    EXPECT_LT(multiset_distance(s.values, oracle), 1e-9);
    EXPECT_LT(multiset_distance(s.values, eigen_oracle(a)), 1e-9);
  }
}

TEST(Eigenvalues, TraceAndDeterminantInvariants) {
  Rng g(8);
  for (int trial = 0; trial < 300; ++trial) {
    int d = pick(g, 1, 10);
    CMatrix a = random_matrix(g, d, d);
    Spectrum s = eigenvalues(a);
    cplx sum = 0.0, prod = 1.0;
    for (auto& x : s.values) sum += x, prod *= x;
    cplx tr = a.trace();
    EXPECT_LE(std::abs(tr - sum), 1e-9 * (1.0 + std::abs(tr)));
    cplx dt = det(a);
    EXPECT_LE(std::abs(dt - prod), 1e-9 * (1.0 + std::abs(dt)));
  }
}

TEST(Eigenvalues, ProductsCommuteUpToZeros) {
  // rectangular factors padded to a square: AB and BA share nonzero eigenvalues
  Rng g(9);
  for (int trial = 0; trial < 200; ++trial) {
    int f = pick(g, 2, 6), k = pick(g, 1, f);
    CMatrix a = random_matrix(g, f, k), b = random_matrix(g, k, f);
    CMatrix sa(f), sb(f);
    for (int i = 0; i < f; ++i)
      for (int j = 0; j < k; ++j) sa(i, j) = a(i, j), sb(j, i) = b(j, i);
    Spectrum ab = eigenvalues(sa * sb), ba = eigenvalues(sb * sa);
    Spectrum small = eigenvalues(b * a);
    auto top_ab = ab.top(k), top_ba = ba.top(k);
    EXPECT_LT(multiset_distance(top_ab, small.values), 1e-9);
    EXPECT_LT(multiset_distance(top_ba, small.values), 1e-9);
  }
}

TEST(Eigenvalues, HermitianInputGivesRealValues) {
  Rng g(10);
  for (int trial = 0; trial < 200; ++trial) {
    int d = pick(g, 1, 8);
    CMatrix a = random_hermitian(g, d);
    Spectrum s = eigenvalues(a);
    double scale = 1.0 + s.max_abs();
    for (auto& x : s.values) EXPECT_LE(std::abs(x.imag()), 1e-9 * scale);
    auto re = real_parts(s);
    auto he = herm_eigen(a).values;
    for (int i = 0; i < d; ++i) EXPECT_NEAR(re[i], he[i], 1e-9 * scale);
  }
}

TEST(Eigenvalues, DegenerateChainsKeepMultiplicity) {
  // exactly degenerate real pair, as produced by equal-modulus chains
  CMatrix a = CMatrix::diag({2.0, 2.0, 0.0, 0.0});
  Rng g(3);
  CMatrix u = random_unitary(g, 4);
  Spectrum s = eigenvalues(u * a * u.adjoint());
  EXPECT_LT(multiset_distance(s.values, {2.0, 2.0, 0.0, 0.0}), 1e-7);
  EXPECT_EQ(s.values[2], cplx(0.0));
  EXPECT_EQ(s.values[3], cplx(0.0));
}

TEST(Eigenvalues, RealPolynomialGivesConjugatePairs) {
  CMatrix rot = CMatrix::from_rows({{0.0, -2.0}, {2.0, 0.0}});
  Spectrum s = eigenvalues(rot);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.values[0], std::conj(s.values[1]));
  EXPECT_NEAR(std::abs(s.values[0]), 2.0, 1e-14);
}

TEST(SpectralWeight, PointWithEigenvaluesOneAndMinusBeta) {
  for (double beta : {0.0, 0.2, 0.7}) {
    CMatrix p = pauli_embed({0.6, 0.0, 0.8}, beta);
    EXPECT_NEAR(spectral_weight(p), 1.0 + beta, 1e-12);
    EXPECT_NEAR(spectral_weight(p * p), 1.0 + beta * beta, 1e-12);
    EXPECT_NEAR(frob_norm(p), std::sqrt(1.0 + beta * beta), 1e-12);
  }
}

TEST(SpectralWeight, DivergentSeriesDiagonalChain) {
  CMatrix a11 = CMatrix::diag({16.0, 0.0});
  EXPECT_DOUBLE_EQ(spectral_weight(a11), 16.0);
  double w = spectral_weight(a11);
  EXPECT_DOUBLE_EQ(0.5 * w * w, 128.0);
}

TEST(FrobNorm, IdentityAndHermitianSpectrum) {
  for (int f = 1; f <= 8; ++f) EXPECT_NEAR(frob_norm(CMatrix::identity(f)), std::sqrt(double(f)), 1e-15);
  Rng g(12);
  for (int trial = 0; trial < 100; ++trial) {
    CMatrix a = random_hermitian(g, pick(g, 1, 8));
    double s = 0.0;
    for (double x : herm_eigen(a).values) s += x * x;
    EXPECT_NEAR(frob_norm(a), std::sqrt(s), 1e-12 * (1.0 + std::sqrt(s)));
    EXPECT_NEAR(frob_norm(a) * frob_norm(a), spectral_weight_sq(a), 1e-9 * (1.0 + s));
  }
}

TEST(CMatrix, DimensionLimits) {
  EXPECT_THROW(CMatrix(17), Error);
  EXPECT_NO_THROW(CMatrix(16));
  EXPECT_THROW(CMatrix(2) * CMatrix(3), Error);
}

TEST(CharPoly, AdjugateMatchesInverseTimesDeterminant) {
  Rng g(13);
  for (int trial = 0; trial < 50; ++trial) {
    int d = pick(g, 1, 6);
    CMatrix a = random_matrix(g, d, d);
    CharPoly cp = faddeev_leverrier(a, true);
    cplx z(0.3, -0.7);
    CMatrix shifted = CMatrix::identity(d) * z - a;
    Eigen::MatrixXcd e = to_eigen(shifted);
    Eigen::MatrixXcd adj = e.determinant() * e.inverse();
    EXPECT_LT(max_abs_diff(adjugate_shift(cp, z), from_eigen(adj)), 1e-9 * (1.0 + adj.norm()));
  }
}

TEST(Eigenvalues, HighMultiplicityIsResolvedToRounding) {
  for (int d = 2; d <= 16; ++d)
    for (auto& x : eigenvalues(CMatrix::identity(d) * 0.7).values) EXPECT_LT(std::abs(x - 0.7), 1e-12) << d;
  Rng g(12);
  for (int trial = 0; trial < 50; ++trial) {
    int d = pick(g, 4, 8);
    CMatrix u = random_unitary(g, d);
    std::vector<double> diag(d, 1.5);
    diag[d - 1] = -0.5;
    Spectrum s = eigenvalues(u * CMatrix::diag(diag) * u.adjoint());
    for (int i = 0; i + 1 < d; ++i) EXPECT_LT(std::abs(s.values[i] - 1.5), 1e-9);
    EXPECT_LT(std::abs(s.values[d - 1] + 0.5), 1e-9);
  }
}
