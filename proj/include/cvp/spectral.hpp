#pragma once

// The f = 2 sphere picture: points are Pauli embeddings of unit vectors,
// the Lagrangian depends only on the angle between them and the action is
// diagonalized by Legendre polynomials.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cvp/matlin.hpp"
#include "cvp/parallel.hpp"

namespace cvp {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline CMatrix pauli_embed(const Vec3& v, double beta) {
  CMatrix p = CMatrix::identity(2) * (0.5 * (1.0 - beta));
  const double s = 0.5 * (1.0 + beta);
  for (int k = 0; k < 3; ++k) p += pauli(k + 1) * (s * v[k]);
  return p;
}

inline double causal_threshold(double beta) {
  return (1.0 - 6.0 * beta + beta * beta) / ((1.0 + beta) * (1.0 + beta));
}

inline double lagrangian_profile(double c, double beta) {
  double b1 = 1.0 + beta;
  double k = c + causal_threshold(beta);
  return k > 0.0 ? b1 * b1 * b1 * b1 / 8.0 * (1.0 + c) * k : 0.0;
}

// one-sided derivative in c, taken from the right at the kink
inline double lagrangian_profile_dc(double c, double beta) {
  double b1 = 1.0 + beta;
  double k = c + causal_threshold(beta);
  return k >= 0.0 ? b1 * b1 * b1 * b1 / 8.0 * (1.0 + c + k) : 0.0;
}

inline double legendre_p(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < l; ++k) {
    double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

struct Quadrature {
  std::vector<double> x, w;
};

// Gauss-Legendre nodes on [a, b] by Newton iteration on P_m.
inline Quadrature gauss_legendre(int m, double a = -1.0, double b = 1.0) {
  if (m < 1) throw Error(Errc::InvalidArgument, "need at least one node");
  Quadrature q;
  q.x.resize(m);
  q.w.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 1; k < m; ++k) {
        double p2 = ((2.0 * k + 1.0) * z * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.x[i] = -z;
    q.x[m - 1 - i] = z;
    q.w[i] = q.w[m - 1 - i] = w;
  }
  const double h = 0.5 * (b - a), c = 0.5 * (b + a);
  for (int i = 0; i < m; ++i) {
    q.x[i] = c + h * q.x[i];
    q.w[i] *= h;
  }
  return q;
}

inline constexpr int kMaxL = 200;

// Support of the profile in c = cos(theta).
inline double profile_lower_limit(double beta) { return std::max(-1.0, -causal_threshold(beta)); }

inline double lambda_l(int l, double beta) {
  if (l < 0 || l > kMaxL) throw Error(Errc::InvalidArgument, "l out of range [0, 200]");
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in [0, 1)");
  const double lo = profile_lower_limit(beta);
  // integrand is a polynomial of degree l + 2 on the support
  Quadrature q = gauss_legendre(l / 2 + 3, lo, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    s += q.w[i] * lagrangian_profile(q.x[i], beta) * legendre_p(l, q.x[i]);
  return 0.5 * s;
}

inline std::vector<double> lambda_table(double beta, int l_max) {
  std::vector<double> out;
  for (int l = 0; l <= l_max; ++l) out.push_back(lambda_l(l, beta));
  return out;
}

inline double theta_max(double beta) { return 2.0 * (1.0 - beta) / (1.0 + beta); }

// Degree whose Bessel profile turns negative once inside [0, theta_max].
inline int l_of_beta(double beta) {
  double x = 5.5 / theta_max(beta);
  double l_asy = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * x * x));
  return 1 + static_cast<int>(std::floor(l_asy));
}

struct NegativeEigen {
  int l = 0;
  double lambda = 0.0;
};

inline NegativeEigen find_negative(double beta, int l_max = 20) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in (0, 1)");
  std::vector<int> ls;
  for (int l = 0; l <= std::min(l_max, kMaxL); ++l) ls.push_back(l);
  int lb = l_of_beta(beta);
  if (lb <= kMaxL && lb > l_max) ls.push_back(lb);
  NegativeEigen best{-1, std::numeric_limits<double>::infinity()};
  for (int l : ls) {
    double v = lambda_l(l, beta);
    if (v < best.lambda) best = {l, v};
  }
  if (!(best.lambda < 0.0)) throw Error(Errc::NoNegativeFound, "no negative eigenvalue in the scanned range");
  return best;
}

// 0F1(; b; z) by its power series, stopping once terms fall below 1e-16
// relative to the running sum. For large negative z the series cancels
// badly and the Bessel identity 0F1(; b; -x) = G(b) x^((1-b)/2) J_{b-1}(2 sqrt x)
// is used instead.
inline double hyp0f1(double b, double z) {
  if (z < -4.0) {
    double x = -z;
    return std::tgamma(b) * std::pow(x, 0.5 * (1.0 - b)) * std::cyl_bessel_j(b - 1.0, 2.0 * std::sqrt(x));
  }
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 2000; ++k) {
    term *= z / ((b + k) * (k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-16 * std::abs(sum) && k > 2) break;
  }
  return sum;
}

inline double bessel_j0(double x) { return hyp0f1(1.0, -0.25 * x * x); }

// Closed form of (1/2) int_0^theta_max L_asy(theta) J_0(sqrt(l(l+1)) theta) theta dtheta
// with L_asy the small-angle profile (1+b)^4/8 (1 - t^2/4) (theta_max^2 - t^2)_+.
inline double lambda_asymptotic(int l, double beta) {
  if (l < 1) throw Error(Errc::InvalidArgument, "asymptotic form needs l >= 1");
  const double lam = l * (l + 1.0);
  const double om = 1.0 - beta, op = 1.0 + beta;
  const double x = om * om / (op * op) * lam;
  const double f3 = hyp0f1(3.0, -x), f4 = hyp0f1(4.0, -x);
  const double om4 = om * om * om * om;
  return om4 / 4.0 * f3 - om4 * om * om / (2.0 * op * op) * (0.5 * f3 - f4 / 3.0);
}

// Fibonacci lattice on S^2.
inline std::vector<Vec3> fibonacci_sphere(int n) {
  std::vector<Vec3> pts(n);
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * i + 1.0) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double ph = ga * i;
    pts[i] = {r * std::cos(ph), r * std::sin(ph), z};
  }
  return pts;
}

// Discretized integral operator (L psi)(x) = int L(x.y) psi(y) dmu(y)
// with equal weights 1/N on a Fibonacci grid.
inline Eigen::MatrixXd operator_matrix(double beta, int n_grid) {
  if (n_grid < 1 || n_grid > 4096) throw Error(Errc::InvalidArgument, "grid size must lie in [1, 4096]");
  auto pts = fibonacci_sphere(n_grid);
  Eigen::MatrixXd k(n_grid, n_grid);
  parallel_for(static_cast<std::size_t>(n_grid), [&](std::size_t i) {
    for (int j = 0; j < n_grid; ++j) k(i, j) = lagrangian_profile(dot(pts[i], pts[j]), beta) / n_grid;
  });
  return k;
}

inline Eigen::VectorXd operator_spectrum(double beta, int n_grid) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(operator_matrix(beta, n_grid), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// A measure that agrees with the uniform one on all harmonics of degree
// at most 2: constant density a, extra density (1-a)/2 on |z| > 1/2 and
// two circles at z = +-1/2 carrying (3/8)(1-a) each. Returned as a
// weighted point set that integrates polynomials of low degree exactly.
struct SpherePointSet {
  std::vector<Vec3> v;
  std::vector<double> w;
};

inline SpherePointSet distributional_measure(double a, int n_z = 6, int n_phi = 8) {
  if (!(a >= 0.0 && a <= 1.0)) throw Error(Errc::InvalidArgument, "a must lie in [0, 1]");
  SpherePointSet s;
  auto add_band = [&](double z0, double z1, double density) {
    if (density == 0.0) return;
    Quadrature q = gauss_legendre(n_z, z0, z1);
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      double r = std::sqrt(1.0 - q.x[i] * q.x[i]);
      for (int k = 0; k < n_phi; ++k) {
        double ph = 2.0 * M_PI * k / n_phi;
        s.v.push_back({r * std::cos(ph), r * std::sin(ph), q.x[i]});
        // normalized area measure dz dphi / (4 pi)
        s.w.push_back(density * q.w[i] / (2.0 * n_phi));
      }
    }
  };
  add_band(-1.0, -0.5, a + 0.5 * (1.0 - a));
  add_band(-0.5, 0.5, a);
  add_band(0.5, 1.0, a + 0.5 * (1.0 - a));
  const double cw = 3.0 / 8.0 * (1.0 - a);
  if (cw > 0.0)
    for (double z0 : {-0.5, 0.5}) {
      double r = std::sqrt(1.0 - z0 * z0);
      for (int k = 0; k < n_phi; ++k) {
        double ph = 2.0 * M_PI * k / n_phi;
        s.v.push_back({r * std::cos(ph), r * std::sin(ph), z0});
        s.w.push_back(cw / n_phi);
      }
    }
  return s;
}

struct DistributionalCheck {
  double mass = 0.0;
  double res_z = 0.0;       // rho(z)
  double res_3z2 = 0.0;     // rho(3z^2 - 1)
  double res_3x2 = 0.0;     // rho(3x^2 - 1)
  double action = 0.0;      // at beta = 0
};

inline DistributionalCheck distributional_minimizer_check(double a) {
  SpherePointSet s = distributional_measure(a);
  DistributionalCheck c;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    const Vec3& v = s.v[i];
    c.mass += s.w[i];
    c.res_z += s.w[i] * v[2];
    c.res_3z2 += s.w[i] * (3.0 * v[2] * v[2] - 1.0);
    c.res_3x2 += s.w[i] * (3.0 * v[0] * v[0] - 1.0);
  }
  for (std::size_t i = 0; i < s.v.size(); ++i)
    for (std::size_t j = 0; j < s.v.size(); ++j)
      c.action += s.w[i] * s.w[j] * lagrangian_profile(dot(s.v[i], s.v[j]), 0.0);
  return c;
}

}  // namespace cvp
