#pragma once

// Wave functions on a discrete space-time with values in an indefinite
// inner product space of signature (n, n), and the passage between a
// fermion system and its local correlation matrices.

#include <cmath>
#include <string>
#include <vector>

#include "cvp/measure.hpp"

namespace cvp {

using CVec = std::vector<cplx>;

struct IndefiniteSpace {
  int n = 1;
  int dim() const { return 2 * n; }
  double sign(int a) const { return a < n ? 1.0 : -1.0; }
  // <u|v> = u^* S v with S = diag(1^n, -1^n)
  cplx bracket(const CVec& u, const CVec& v) const {
    cplx s = 0.0;
    for (int a = 0; a < dim(); ++a) s += std::conj(u[a]) * sign(a) * v[a];
    return s;
  }
};

struct Site {
  double w = 0.0;
  std::string label;
};

// waves[l][x] is psi_l(x), a vector of length 2n.
struct FermionSystem {
  IndefiniteSpace space;
  std::vector<Site> sites;
  int f = 0;
  std::vector<std::vector<CVec>> waves;
};

using Wave = std::vector<CVec>;  // one vector per site

inline void validate(const FermionSystem& s) {
  if (s.space.n < 1) throw Error(Errc::InvalidArgument, "n must be positive");
  if (s.f < 1 || s.f > kMaxDim) throw Error(Errc::InvalidArgument, "f must lie in [1, 16]");
  if (static_cast<int>(s.waves.size()) != s.f) throw Error(Errc::DimMismatch, "expected f wave functions");
  for (auto& psi : s.waves) {
    if (psi.size() != s.sites.size()) throw Error(Errc::DimMismatch, "wave function has wrong number of sites");
    for (auto& v : psi)
      if (static_cast<int>(v.size()) != s.space.dim()) throw Error(Errc::DimMismatch, "spinor has wrong dimension");
  }
}

// <psi|phi> = sum_x w_x <psi(x)|phi(x)>
inline cplx inner(const FermionSystem& s, const Wave& psi, const Wave& phi) {
  cplx t = 0.0;
  for (std::size_t x = 0; x < s.sites.size(); ++x) t += s.sites[x].w * s.space.bracket(psi[x], phi[x]);
  return t;
}

// (F_x)_jk = -<psi_j(x)|psi_k(x)>
inline CMatrix local_correlation(const FermionSystem& s, std::size_t x) {
  CMatrix F(s.f);
  for (int j = 0; j < s.f; ++j)
    for (int k = 0; k < s.f; ++k) F(j, k) = -s.space.bracket(s.waves[j][x], s.waves[k][x]);
  return F;
}

// P(x,y) = -sum_l |psi_l(x)> <psi_l(y)| as a 2n x 2n matrix.
inline CMatrix kernel_P(const FermionSystem& s, std::size_t x, std::size_t y) {
  const int d = s.space.dim();
  CMatrix P(d);
  for (int l = 0; l < s.f; ++l)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        P(a, b) -= s.waves[l][x][a] * std::conj(s.waves[l][y][b]) * s.space.sign(b);
  return P;
}

// (P phi)(x) = sum_y w_y P(x,y) phi(y)
inline Wave apply_P(const FermionSystem& s, const Wave& phi) {
  std::vector<cplx> c(s.f);
  for (int l = 0; l < s.f; ++l) c[l] = inner(s, s.waves[l], phi);
  Wave out(s.sites.size(), CVec(s.space.dim(), 0.0));
  for (std::size_t x = 0; x < s.sites.size(); ++x)
    for (int l = 0; l < s.f; ++l)
      for (int a = 0; a < s.space.dim(); ++a) out[x][a] -= s.waves[l][x][a] * c[l];
  return out;
}

// gram_jk = <psi_j|psi_k>
inline CMatrix gram_matrix(const FermionSystem& s) {
  CMatrix g(s.f);
  for (int j = 0; j < s.f; ++j)
    for (int k = 0; k < s.f; ++k) g(j, k) = inner(s, s.waves[j], s.waves[k]);
  return g;
}

// Trace of P as an operator on the wave functions: -sum_l <psi_l|psi_l>,
// which equals sum_x w_x Tr F_x.
inline double operator_trace(const FermionSystem& s) { return -gram_matrix(s).trace().real(); }

// Builds wave functions whose local correlation matrices are the points
// of the configuration: F = U D U^*, and psi_l(x)^a = (rho U^*)_{a l}
// with rho = diag(sqrt|nu|) in the ordering negatives, positives, zeros.
inline FermionSystem reconstruct(const DiscreteConfig& c) {
  FermionSystem s;
  s.space.n = c.n;
  s.f = c.f;
  s.waves.assign(c.f, Wave(c.points.size()));
  const int d = 2 * c.n;
  for (std::size_t x = 0; x < c.points.size(); ++x) {
    const CMatrix& F = c.points[x].p;
    if (F.rows() != c.f) throw Error(Errc::InvalidPoint, "point has wrong dimension");
    if (!is_hermitian(F)) throw Error(Errc::InvalidPoint, "point is not Hermitian");
    HermEigen he = herm_eigen(F);
    const double tol = 1e-9 * frob_norm(F);
    std::vector<int> neg, pos;
    for (int k = 0; k < c.f; ++k) {
      if (he.values[k] < -tol) neg.push_back(k);
      else if (he.values[k] > tol) pos.push_back(k);
    }
    if (static_cast<int>(neg.size()) > c.n || static_cast<int>(pos.size()) > c.n)
      throw Error(Errc::InvalidPoint, "point has more than n positive or negative eigenvalues");
    // slot a in [0, n) holds a negative eigenvalue, [n, 2n) a positive one
    std::vector<int> slot(d, -1);
    for (std::size_t i = 0; i < neg.size(); ++i) slot[i] = neg[i];
    for (std::size_t i = 0; i < pos.size(); ++i) slot[c.n + i] = pos[i];
    s.sites.push_back({c.points[x].w, "x" + std::to_string(x)});
    for (int l = 0; l < c.f; ++l) {
      CVec v(d, 0.0);
      for (int a = 0; a < d; ++a) {
        if (slot[a] < 0) continue;
        double rho = std::sqrt(std::abs(he.values[slot[a]]));
        v[a] = rho * std::conj(he.vectors(l, slot[a]));
      }
      s.waves[l][x] = std::move(v);
    }
  }
  return s;
}

inline DiscreteConfig correlations(const FermionSystem& s, std::optional<double> beta = std::nullopt) {
  DiscreteConfig c;
  c.f = s.f;
  c.n = s.space.n;
  c.beta = beta;
  for (std::size_t x = 0; x < s.sites.size(); ++x) c.points.push_back({s.sites[x].w, local_correlation(s, x)});
  return c;
}

}  // namespace cvp
