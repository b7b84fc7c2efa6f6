#pragma once

// Homogeneous systems in momentum space. A negative definite measure is
// a finite list of momenta with 2n x 2n operator weights; its Fourier
// transform P(xi) plays the role of the fermionic kernel.

#include <algorithm>
#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "cvp/causal.hpp"
#include "cvp/measure.hpp"
#include "cvp/parallel.hpp"
#include "cvp/spectral.hpp"

namespace cvp {

using Vec4 = std::array<double, 4>;

// <p, xi> with signature (+, -, -, -)
inline double minkowski(const Vec4& p, const Vec4& xi) {
  return p[0] * xi[0] - p[1] * xi[1] - p[2] * xi[2] - p[3] * xi[3];
}

struct MomentumWeight {
  Vec4 p{};
  CMatrix w;
};

struct NegDefMeasure {
  int n = 1;
  double khat_radius = 0.0;
  std::vector<MomentumWeight> support;
};

using HomKernel = std::function<CMatrix(const Vec4&)>;

inline constexpr double kTolPositive = 1e-10;

// Smallest eigenvalue of the Hermitian form v -> <v| B v> = v^* S B v,
// after checking that S B is Hermitian.
inline double positivity_margin(const CMatrix& b, int n) {
  CMatrix sb = signature_matrix(n) * b;
  double scale = std::max(1.0, frob_norm(b));
  if (!is_hermitian(sb, kTolPositive * scale)) return -std::numeric_limits<double>::infinity();
  CMatrix h = 0.5 * (sb + sb.adjoint());
  return herm_eigen(h).values.front();
}

inline void check_negative_definite(const NegDefMeasure& nu) {
  if (nu.n < 1 || 2 * nu.n > kMaxDim) throw Error(Errc::InvalidArgument, "n out of range");
  for (auto& mw : nu.support) {
    if (mw.w.rows() != 2 * nu.n || mw.w.cols() != 2 * nu.n)
      throw Error(Errc::DimMismatch, "weight must be 2n x 2n");
    double r = std::sqrt(mw.p[0] * mw.p[0] + mw.p[1] * mw.p[1] + mw.p[2] * mw.p[2] + mw.p[3] * mw.p[3]);
    if (r > nu.khat_radius * (1.0 + 1e-12)) throw Error(Errc::InvalidArgument, "momentum outside the declared bounded set");
    double scale = std::max(1.0, frob_norm(mw.w));
    if (positivity_margin(mw.w * -1.0, nu.n) < -kTolPositive * scale)
      throw Error(Errc::NotPositive, "weight is not negative definite");
  }
}

inline CMatrix kernel_xi(const NegDefMeasure& nu, const Vec4& xi) {
  CMatrix P(2 * nu.n);
  for (auto& mw : nu.support) P += mw.w * std::polar(1.0, minkowski(mw.p, xi));
  return P;
}

inline HomKernel kernel_of(const NegDefMeasure& nu) {
  return [nu](const Vec4& xi) { return kernel_xi(nu, xi); };
}

inline double local_density(const NegDefMeasure& nu) { return kernel_xi(nu, {0, 0, 0, 0}).trace().real(); }

struct LatticeDomain {
  std::vector<Vec4> xi;
  std::vector<double> w;
};

// Product quadrature in (t, r) for spherically symmetric kernels, which
// are sampled along xi = (t, 0, 0, r) with radial weight 4 pi r^2.
struct RadialDomain {
  double t_max = 1.0;
  int t_panels = 40;
  std::vector<double> r_breaks{0.0, 1.0};  // panel boundaries in r
  int nodes = 6;                            // Gauss-Legendre nodes per panel
  bool t_even = true;                       // integrand even in t: use [0, t_max] twice
};

using HomDomain = std::variant<LatticeDomain, RadialDomain>;

namespace detail {

inline Quadrature panel_rule(const std::vector<double>& breaks, int nodes) {
  Quadrature all;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    Quadrature q = gauss_legendre(nodes, breaks[k], breaks[k + 1]);
    all.x.insert(all.x.end(), q.x.begin(), q.x.end());
    all.w.insert(all.w.end(), q.w.begin(), q.w.end());
  }
  return all;
}

}  // namespace detail

inline Functionals hom_functionals(const HomKernel& kernel, int n, const HomDomain& domain) {
  std::vector<Vec4> pts;
  std::vector<double> wts;
  if (auto* lat = std::get_if<LatticeDomain>(&domain)) {
    if (lat->xi.size() != lat->w.size()) throw Error(Errc::DimMismatch, "lattice points and weights differ in length");
    pts = lat->xi;
    wts = lat->w;
  } else {
    const auto& rad = std::get<RadialDomain>(domain);
    std::vector<double> tb;
    double t0 = rad.t_even ? 0.0 : -rad.t_max;
    for (int k = 0; k <= rad.t_panels; ++k) tb.push_back(t0 + (rad.t_max - t0) * k / rad.t_panels);
    Quadrature qt = detail::panel_rule(tb, rad.nodes);
    Quadrature qr = detail::panel_rule(rad.r_breaks, rad.nodes);
    const double tf = rad.t_even ? 2.0 : 1.0;
    for (std::size_t i = 0; i < qt.x.size(); ++i)
      for (std::size_t j = 0; j < qr.x.size(); ++j) {
        pts.push_back({qt.x[i], 0.0, 0.0, qr.x[j]});
        wts.push_back(tf * qt.w[i] * qr.w[j] * 4.0 * M_PI * qr.x[j] * qr.x[j]);
      }
  }
  const std::size_t m = pts.size();
  std::vector<double> s(m), t(m);
  parallel_for(m, [&](std::size_t i) {
    const Vec4& xi = pts[i];
    CMatrix a = kernel(xi) * kernel({-xi[0], -xi[1], -xi[2], -xi[3]});
    ChainWeights cw = chain_weights(a, n, false);
    s[i] = wts[i] * cw.lagrangian;
    t[i] = wts[i] * cw.abs_sum * cw.abs_sum;
  });
  return {tree_sum(s), tree_sum(t)};
}

inline Functionals hom_functionals(const NegDefMeasure& nu, const HomDomain& domain) {
  return hom_functionals(kernel_of(nu), nu.n, domain);
}

// ---- Dirac matrices, Dirac representation: gamma^0 = diag(1, 1, -1, -1) --

inline CMatrix dirac_gamma(int mu) {
  CMatrix g(4);
  if (mu == 0) return signature_matrix(2);
  CMatrix s = pauli(mu);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g(i, 2 + j) = s(i, j);
      g(2 + i, j) = -s(i, j);
    }
  return g;
}

struct CylinderGrid {
  int omega_nodes = 8;
  int theta_nodes = 8;
  int phi_nodes = 16;
};

// Product quadrature of the cylinder measure
// d nu = (1/16 pi) Theta(L - |omega|)/L delta(|p|^2 - 1) [-sqrt(tau^2+1) g0 + tau p.g + 1] d^4p.
inline NegDefMeasure dirac_cylinder(double tau, double L, const CylinderGrid& grid = {}) {
  if (!(tau > 0.0) || !(L > 0.0)) throw Error(Errc::InvalidArgument, "tau and L must be positive");
  NegDefMeasure nu;
  nu.n = 2;
  nu.khat_radius = std::sqrt(L * L + 1.0);
  const double k = std::sqrt(tau * tau + 1.0);
  CMatrix base = CMatrix::identity(4) - dirac_gamma(0) * k;
  std::array<CMatrix, 3> g{dirac_gamma(1), dirac_gamma(2), dirac_gamma(3)};
  Quadrature qo = gauss_legendre(grid.omega_nodes, -L, L);
  Quadrature qc = gauss_legendre(grid.theta_nodes, -1.0, 1.0);
  const double wphi = 2.0 * M_PI / grid.phi_nodes;
  for (std::size_t a = 0; a < qo.x.size(); ++a)
    for (std::size_t b = 0; b < qc.x.size(); ++b)
      for (int c = 0; c < grid.phi_nodes; ++c) {
        double ph = wphi * (c + 0.5);
        double st = std::sqrt(1.0 - qc.x[b] * qc.x[b]);
        Vec3 pv{st * std::cos(ph), st * std::sin(ph), qc.x[b]};
        // the radial delta contributes 1/2; angular weights sum to 4 pi
        double w = qo.w[a] * qc.w[b] * wphi / (32.0 * M_PI * L);
        CMatrix m = base;
        for (int i = 0; i < 3; ++i) m += g[i] * (tau * pv[i]);
        nu.support.push_back({{qo.x[a], pv[0], pv[1], pv[2]}, m * w});
      }
  return nu;
}

// Closed-form Fourier transform of the cylinder measure.
inline HomKernel dirac_cylinder_kernel(double tau, double L) {
  const double k = std::sqrt(tau * tau + 1.0);
  CMatrix base = CMatrix::identity(4) - dirac_gamma(0) * k;
  std::array<CMatrix, 3> g{dirac_gamma(1), dirac_gamma(2), dirac_gamma(3)};
  return [=](const Vec4& xi) {
    using namespace std::complex_literals;
    double lt = L * xi[0];
    double s = std::abs(lt) < 1e-8 ? 1.0 - lt * lt / 6.0 : std::sin(lt) / lt;
    double r = std::sqrt(xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3]);
    double a, c;  // sin r / r and (cos r - sin r / r) / r^2
    if (r < 1e-4) {
      a = 1.0 - r * r / 6.0;
      c = -1.0 / 3.0 + r * r / 30.0;
    } else {
      a = std::sin(r) / r;
      c = (std::cos(r) - a) / (r * r);
    }
    CMatrix P = base * a;
    for (int i = 0; i < 3; ++i) P += g[i] * (1i * tau * xi[i + 1] * c);
    return P * (0.25 * s);
  };
}

// First zero of alpha^2 - beta^2 in the closed-form chain, where the two
// distinct eigenvalues of A(xi) meet and turn complex.
namespace detail {

// a^2 - tau^2 b^2 for the radial profiles a = sin r / r, b = (cos r - a) / r;
// the chain is timelike exactly where this is positive.
inline double cylinder_gap(double tau, double r) {
  double a = std::sin(r) / r;
  double b = tau * (std::cos(r) - a) / r;
  return a * a - b * b;
}

}  // namespace detail

// Radii in (0, r_cut) where the causal type changes. Besides the ball
// r < ~3/tau, thin timelike shells of width ~2/tau sit around every zero
// of cos r - sin r / r.
inline std::vector<double> dirac_cylinder_edges(double tau, double r_cut) {
  std::vector<double> out;
  const double h = std::min(0.01, 0.25 / std::max(tau, 1.0));
  double lo = 1e-6, glo = detail::cylinder_gap(tau, lo);
  for (double hi = lo + h; hi < r_cut; lo = hi, hi += h) {
    double ghi = detail::cylinder_gap(tau, hi);
    if ((glo > 0.0) != (ghi > 0.0)) {
      double x0 = lo, x1 = hi;
      for (int it = 0; it < 100 && x1 - x0 > 1e-15 * x1; ++it) {
        double mid = 0.5 * (x0 + x1);
        ((detail::cylinder_gap(tau, mid) > 0.0) == (glo > 0.0) ? x0 : x1) = mid;
      }
      out.push_back(0.5 * (x0 + x1));
    }
    glo = ghi;
  }
  return out;
}

inline double dirac_cylinder_rmax(double tau) {
  auto e = dirac_cylinder_edges(tau, 10.0);
  return e.empty() ? 10.0 : e.front();
}

// Panels of unit length in r, split at every edge of the causal regions so
// that each Gauss panel sees a smooth integrand.
inline RadialDomain dirac_cylinder_domain(double tau, double L, double r_cut = 400.0) {
  RadialDomain d;
  d.t_max = 40.0 / L;
  d.t_panels = 60;
  d.nodes = 6;
  auto edges = dirac_cylinder_edges(tau, r_cut);
  std::vector<double> br{0.0};
  for (double r = 1.0; r < r_cut; r += 1.0) br.push_back(r);
  br.insert(br.end(), edges.begin(), edges.end());
  if (!edges.empty())
    for (int k = 1; k < 4; ++k) br.push_back(edges.front() * k / 4.0);
  br.push_back(r_cut);
  std::sort(br.begin(), br.end());
  d.r_breaks.clear();
  for (double r : br)
    if (d.r_breaks.empty() || r > d.r_breaks.back() + 1e-12) d.r_breaks.push_back(r);
  return d;
}

// ---- near diagonalization of positive operators ------------------------

struct NearDiag {
  CMatrix U;                // S-unitary
  std::vector<double> nu;   // ordered: nu_1..nu_n <= 0 <= nu_n+1..nu_2n
  CMatrix dB;               // U B U^-1 + diag(nu)
  double rho = 1.0;         // Jordan chain rescaling used
};

inline NearDiag near_diagonalize(const CMatrix& B, double eps, int n) {
  const int d = 2 * n;
  if (B.rows() != d || B.cols() != d) throw Error(Errc::DimMismatch, "B must be 2n x 2n");
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "eps must be positive");
  const double scale = std::max(1.0, frob_norm(B));
  if (positivity_margin(B, n) < -kTolPositive * scale) throw Error(Errc::NotPositive, "B is not positive");
  const CMatrix S = signature_matrix(n);
  const Eigen::MatrixXcd Se = to_eigen(S);
  const Eigen::MatrixXcd Be = to_eigen(B);
  const double tol = 1e-10 * scale;

  // S B = G^* G; nonzero eigenvalues of B are those of the Hermitian G S G^*
  CMatrix H = 0.5 * (S * B + (S * B).adjoint());
  HermEigen he = herm_eigen(H);
  std::vector<int> keep;
  for (int k = 0; k < d; ++k)
    if (he.values[k] > tol) keep.push_back(k);
  const int r = static_cast<int>(keep.size());
  Eigen::MatrixXcd G(r, d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = std::sqrt(he.values[keep[i]]) * std::conj(he.vectors(j, keep[i]));

  struct Col {
    Eigen::VectorXcd v;
    double norm;  // <v|v> = +1 or -1
    double nu;
  };
  std::vector<Col> cols;
  Eigen::MatrixXcd found(d, 0);
  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G * Se * G.adjoint());
    for (int k = 0; k < r; ++k) {
      double mu = es.eigenvalues()(k);
      if (std::abs(mu) <= tol) continue;
      Eigen::VectorXcd u = Se * G.adjoint() * es.eigenvectors().col(k);
      u /= std::sqrt(std::abs(mu));
      cols.push_back({u, mu > 0 ? 1.0 : -1.0, -mu});
    }
  }
  Eigen::MatrixXcd Fe(d, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) Fe.col(k) = cols[k].v;

  // S-orthogonal complement of the eigenvectors: invariant, B nilpotent there
  Eigen::MatrixXcd Pi = Eigen::MatrixXcd::Identity(d, d);
  for (auto& c : cols) Pi -= c.norm * c.v * (c.v.adjoint() * Se);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svp(Pi, Eigen::ComputeFullU);
  int m = 0;
  for (int k = 0; k < d; ++k)
    if (svp.singularValues()(k) > 1e-8) ++m;
  if (m != d - static_cast<int>(cols.size())) throw Error(Errc::NoConvergence, "degenerate eigenvector split");
  Eigen::MatrixXcd Q = svp.matrixU().leftCols(m);  // orthonormal basis of the complement
  Eigen::MatrixXcd Nw = Q.adjoint() * Be * Q;      // B on the complement, in Q coordinates
  Eigen::MatrixXcd J = Q.adjoint() * Se * Q;       // Gram form on the complement

  Eigen::MatrixXcd X(m, 0), Y(m, 0);
  int chains = 0;
  if (m > 0) {
    double nn = Nw.norm();
    if (nn > tol) {
      if ((Nw * Nw).norm() > 1e-8 * std::max(1.0, nn * nn))
        throw Error(Errc::NotSupported, "Jordan chains longer than two are not handled");
      Eigen::JacobiSVD<Eigen::MatrixXcd> svn(Nw, Eigen::ComputeFullV);
      for (int k = 0; k < m; ++k)
        if (svn.singularValues()(k) > tol) ++chains;
      X = svn.matrixV().leftCols(chains);
      Y = Nw * X;
      // make <Y_i|X_j> = delta_ij, then make the X neutral
      Eigen::MatrixXcd M = Y.adjoint() * J * X;
      M = 0.5 * (M + M.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(M);
      if (em.eigenvalues().minCoeff() <= 0.0) throw Error(Errc::NotPositive, "chain pairing is not positive");
      Eigen::MatrixXcd isq = em.eigenvectors() *
                             em.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                             em.eigenvectors().adjoint();
      X = X * isq;
      Y = Nw * X;
      Eigen::MatrixXcd K = X.adjoint() * J * X;
      X = X - 0.5 * Y * K;
    }
  }

  // remaining kernel: S-orthogonal to the chain pairs, B vanishes there
  Eigen::MatrixXcd Z(m, 0);
  if (m > 2 * chains) {
    Eigen::MatrixXcd C(m, 2 * chains);
    C << X, Y;
    Eigen::MatrixXcd Pk = Eigen::MatrixXcd::Identity(m, m);
    if (chains > 0) {
      Eigen::MatrixXcd gram = C.adjoint() * J * C;
      Pk -= C * gram.inverse() * C.adjoint() * J;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svk(Pk, Eigen::ComputeFullU);
    Eigen::MatrixXcd R = svk.matrixU().leftCols(m - 2 * chains);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ez(R.adjoint() * J * R);
    Z = R * ez.eigenvectors();
    for (int k = 0; k < Z.cols(); ++k) Z.col(k) /= std::sqrt(std::abs(ez.eigenvalues()(k)));
  }

  auto assemble = [&](double rho) {
    std::vector<Col> all = cols;
    for (int c = 0; c < chains; ++c) {
      Eigen::VectorXcd f1 = Q * Y.col(c) * std::sqrt(rho);
      Eigen::VectorXcd f2 = Q * X.col(c) / std::sqrt(rho);
      all.push_back({(f1 + f2) / std::sqrt(2.0), 1.0, 0.0});
      all.push_back({(f1 - f2) / std::sqrt(2.0), -1.0, 0.0});
    }
    for (int k = 0; k < Z.cols(); ++k) {
      Eigen::VectorXcd z = Q * Z.col(k);
      double s = (z.adjoint() * Se * z)(0).real();
      all.push_back({z, s > 0 ? 1.0 : -1.0, 0.0});
    }
    std::vector<Col> plus, minus;
    for (auto& c : all) (c.norm > 0 ? plus : minus).push_back(c);
    if (static_cast<int>(plus.size()) != n || static_cast<int>(minus.size()) != n)
      throw Error(Errc::NoConvergence, "basis does not have signature (n, n)");
    std::stable_sort(plus.begin(), plus.end(), [](const Col& a, const Col& b) { return a.nu < b.nu; });
    std::stable_sort(minus.begin(), minus.end(), [](const Col& a, const Col& b) { return a.nu < b.nu; });
    Eigen::MatrixXcd F(d, d);
    NearDiag out;
    out.rho = rho;
    for (int k = 0; k < n; ++k) {
      F.col(k) = plus[k].v;
      F.col(n + k) = minus[k].v;
      out.nu.push_back(plus[k].nu);
    }
    for (int k = 0; k < n; ++k) out.nu.push_back(minus[k].nu);
    Eigen::MatrixXcd Ue = Se * F.adjoint() * Se;  // F^-1 for an S-unitary F
    out.U = from_eigen(Ue);
    Eigen::MatrixXcd D = Ue * Be * F;
    for (int k = 0; k < d; ++k) D(k, k) += out.nu[k];
    out.dB = from_eigen(D);
    return out;
  };

  auto sup = [](const CMatrix& a) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k]));
    return m;
  };
  double rho = 1.0;
  NearDiag best = assemble(rho);
  for (int it = 0; it < 80 && sup(best.dB) >= eps; ++it) {
    if (chains == 0) break;
    rho *= 4.0;
    best = assemble(rho);
  }
  if (sup(best.dB) >= eps) throw Error(Errc::NoConvergence, "could not reach the requested accuracy");
  return best;
}

struct LocalBound {
  double lhs = 0.0;  // L[A(0)]
  double rhs = 0.0;  // |P(0)|^2 Tr(P(0))^2 / (8 n^5)
  double slack() const { return lhs - rhs; }
  bool holds(double tol = 1e-10) const { return slack() >= -tol; }
};

inline LocalBound local_bound_check(const CMatrix& P0, int n) {
  LocalBound b;
  ChainWeights cw = chain_weights(P0 * P0, n, false);
  b.lhs = cw.lagrangian;
  double wp = spectral_weight(eigenvalues(P0));
  double tr = P0.trace().real();
  b.rhs = wp * wp * tr * tr / (8.0 * std::pow(static_cast<double>(n), 5));
  return b;
}

inline LocalBound local_bound_check(const NegDefMeasure& nu) {
  return local_bound_check(kernel_xi(nu, {0, 0, 0, 0}), nu.n);
}

}  // namespace cvp
