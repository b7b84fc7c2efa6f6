#pragma once

// Random inputs shared by the test binaries.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cvp/measure.hpp"
#include "cvp/spectral.hpp"

#define EXPECT_CVP_ERROR(expr, errc)                                      \
  do {                                                                    \
    try {                                                                 \
      (void)(expr);                                                       \
      ADD_FAILURE() << "no exception from " #expr;                        \
    } catch (const ::cvp::Error& e_) {                                    \
      EXPECT_EQ(e_.code(), errc) << e_.what();                            \
    }                                                                     \
  } while (0)

namespace cvp::testing {

using Rng = std::mt19937_64;

inline double unif(Rng& g, double a = 0.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

inline int pick(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline CMatrix random_matrix(Rng& g, int r, int c) {
  std::normal_distribution<double> nd;
  CMatrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(g), nd(g));
  return m;
}

inline CMatrix random_hermitian(Rng& g, int d) {
  CMatrix m = random_matrix(g, d, d);
  return 0.5 * (m + m.adjoint());
}

// Haar-ish unitary from the QR factor of a Gaussian matrix.
inline CMatrix random_unitary(Rng& g, int d) {
  Eigen::MatrixXcd z = to_eigen(random_matrix(g, d, d));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  return from_eigen(q);
}

inline Vec3 random_unit(Rng& g) {
  std::normal_distribution<double> nd;
  Vec3 v{nd(g), nd(g), nd(g)};
  double r = std::sqrt(dot(v, v));
  return {v[0] / r, v[1] / r, v[2] / r};
}

// U diag(nu) U^* with at most n negative and n positive eigenvalues.
// Each slot is zeroed with probability p_zero.
inline CMatrix random_point(Rng& g, int f, int n, double p_zero = 0.15) {
  std::vector<double> ev(f, 0.0);
  for (int k = 0; k < 2 * n; ++k) {
    if (unif(g) < p_zero) continue;
    double mag = unif(g, 0.2, 2.0);
    ev[k] = k < n ? -mag : mag;
  }
  CMatrix u = random_unitary(g, f);
  CMatrix p = u * CMatrix::diag(ev) * u.adjoint();
  return 0.5 * (p + p.adjoint());
}

inline DiscreteConfig random_config(Rng& g, int f, int n, int m, double p_zero = 0.15) {
  DiscreteConfig c;
  c.f = f;
  c.n = n;
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = unif(g, 0.1, 1.0));
  for (int i = 0; i < m; ++i) c.points.push_back({w[i] / s, random_point(g, f, n, p_zero)});
  return c;
}

inline DiscreteConfig random_sphere_config(Rng& g, int m, double beta) {
  DiscreteConfig c;
  c.beta = beta;
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = unif(g, 0.1, 1.0));
  for (int i = 0; i < m; ++i) c.points.push_back({w[i] / s, pauli_embed(random_unit(g), beta)});
  return c;
}

// Largest distance after greedily pairing each value of a with its
// nearest unused value of b. Both multisets must have equal size.
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<char> used(b.size(), 0);
  for (auto& x : a) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(x - b[j]) < bd) bd = std::abs(x - b[j]), best = j;
    used[best] = 1;
    worst = std::max(worst, bd / (1.0 + std::abs(x)));
  }
  return worst;
}

// Roots of the monic polynomial sum c_k z^k from its companion matrix.
inline std::vector<cplx> companion_roots(const std::vector<cplx>& c) {
  const int d = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) m(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) m(i, d - 1) = -c[i] / c[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + d};
}

inline std::vector<cplx> eigen_oracle(const CMatrix& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(a), false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + a.rows()};
}

inline DiscreteConfig conjugated(const DiscreteConfig& c, const CMatrix& u) {
  DiscreteConfig out = c;
  for (auto& pt : out.points) pt.p = u * pt.p * u.adjoint();
  return out;
}

}  // namespace cvp::testing
