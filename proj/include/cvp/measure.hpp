#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "cvp/causal.hpp"
#include "cvp/parallel.hpp"

namespace cvp {

struct WeightedPoint {
  double w = 0.0;
  CMatrix p;
};

// A normalized discrete measure on Hermitian f x f matrices of rank at
// most 2n with at most n positive and n negative eigenvalues. When beta is
// set the points are understood to come from the two-dimensional Pauli
// embedding and the simple Lagrangian is used.
struct DiscreteConfig {
  int f = 2;
  int n = 1;
  std::optional<double> beta;
  std::vector<WeightedPoint> points;

  double total_weight() const {
    std::vector<double> w;
    for (auto& pt : points) w.push_back(pt.w);
    return tree_sum(w);
  }
};

struct InertiaCount {
  int negative = 0;
  int positive = 0;
};

inline InertiaCount inertia(const std::vector<double>& ev, double tol) {
  InertiaCount c;
  for (double x : ev) {
    if (x < -tol) ++c.negative;
    else if (x > tol) ++c.positive;
  }
  return c;
}

inline void validate_point(const CMatrix& p, int f, int n) {
  if (p.rows() != f || p.cols() != f) throw Error(Errc::DimMismatch, "point has wrong dimension");
  if (!is_hermitian(p)) throw Error(Errc::NotHermitian, "point is not Hermitian");
  HermEigen he = herm_eigen(p);
  InertiaCount c = inertia(he.values, 1e-9 * frob_norm(p));
  if (c.negative > n || c.positive > n)
    throw Error(Errc::InvalidPoint, "point has more than n positive or negative eigenvalues");
}

inline void validate(const DiscreteConfig& c) {
  if (c.n < 1 || c.f < 2 * c.n || c.f > kMaxDim) throw Error(Errc::InvalidArgument, "need 1 <= n and 2n <= f <= 16");
  if (c.beta && !(*c.beta >= 0.0 && *c.beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in [0, 1)");
  for (auto& pt : c.points) {
    if (!(pt.w >= 0.0) || !std::isfinite(pt.w)) throw Error(Errc::InvalidArgument, "weights must be nonnegative");
    validate_point(pt.p, c.f, c.n);
  }
}

// Eigenvalues nu_1..nu_2n ordered as negatives ascending (padded with
// zeros towards the middle), then positives ascending.
inline std::vector<double> ordered_eigenvalues(const CMatrix& p, int n) {
  HermEigen he = herm_eigen(p);
  double tol = 1e-9 * frob_norm(p);
  std::vector<double> neg, pos;
  for (double x : he.values) {
    if (x < -tol) neg.push_back(x);
    else if (x > tol) pos.push_back(x);
  }
  if (static_cast<int>(neg.size()) > n || static_cast<int>(pos.size()) > n)
    throw Error(Errc::InvalidPoint, "point has more than n positive or negative eigenvalues");
  std::vector<double> out(neg);
  out.resize(n, 0.0);
  std::vector<double> tail(n - pos.size(), 0.0);
  tail.insert(tail.end(), pos.begin(), pos.end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

struct Functionals {
  double S = 0.0;
  double T = 0.0;
};

// Double sum over point pairs. L[pq] and |pq| only depend on the spectrum,
// which is the same for pq and qp, so each unordered pair is evaluated once.
inline Functionals functionals(const DiscreteConfig& c) {
  const std::size_t m = c.points.size();
  std::vector<double> rs(m), rt(m);
  parallel_for(m, [&](std::size_t i) {
    const auto& pi = c.points[i];
    double s = 0.0, t = 0.0;
    for (std::size_t j = i; j < m; ++j) {
      const auto& pj = c.points[j];
      double ww = pi.w * pj.w * (j == i ? 1.0 : 2.0);
      if (ww == 0.0) continue;
      ChainWeights cw = chain_weights(pi.p * pj.p, c.n, false);
      s += ww * cw.lagrangian;
      t += ww * cw.abs_sum * cw.abs_sum;
    }
    rs[i] = s;
    rt[i] = t;
  });
  return {tree_sum(rs), tree_sum(rt)};
}

inline double action_S(const DiscreteConfig& c) { return functionals(c).S; }
inline double functional_T(const DiscreteConfig& c) { return functionals(c).T; }

struct ConstraintReport {
  double c1 = 0.0;  // |sum w Tr p - f|
  double c2 = 0.0;  // ||sum w p - I||_F
  std::optional<double> c3;  // max |nu_j - c_j| over points
  double weight_defect = 0.0;  // |sum w - 1|

  bool satisfied(double tol = 1e-9) const {
    return c1 <= tol && c2 <= tol && (!c3 || *c3 <= tol);
  }
};

inline CMatrix weighted_sum(const DiscreteConfig& c) {
  CMatrix s(c.f);
  for (auto& pt : c.points) s += pt.p * pt.w;
  return s;
}

inline ConstraintReport check_constraints(const DiscreteConfig& c,
                                          const std::optional<std::vector<double>>& c3 = std::nullopt) {
  ConstraintReport r;
  CMatrix s = weighted_sum(c);
  r.c1 = std::abs(s.trace().real() - c.f);
  r.c2 = frob_norm(s - CMatrix::identity(c.f));
  r.weight_defect = std::abs(c.total_weight() - 1.0);
  if (c3) {
    if (static_cast<int>(c3->size()) != 2 * c.n) throw Error(Errc::DimMismatch, "C3 needs 2n eigenvalues");
    double worst = 0.0;
    for (auto& pt : c.points) {
      auto nu = ordered_eigenvalues(pt.p, c.n);
      for (int j = 0; j < 2 * c.n; ++j) worst = std::max(worst, std::abs(nu[j] - (*c3)[j]));
    }
    r.c3 = worst;
  }
  return r;
}

// ---- moment measures ----------------------------------------------------

enum class RayNorm { Frobenius, Operator };

inline double ray_norm(const CMatrix& p, RayNorm kind) {
  if (kind == RayNorm::Frobenius) return frob_norm(p);
  HermEigen he = herm_eigen(p);
  return std::max(std::abs(he.values.front()), std::abs(he.values.back()));
}

// Sign representative of the line through q: the first nonzero diagonal
// entry is made positive; for a zero diagonal the first nonzero
// off-diagonal entry (row-major) decides by its real, then imaginary part.
inline int canonical_sign(const CMatrix& q, double tol = 1e-12) {
  for (int i = 0; i < q.rows(); ++i) {
    double d = q(i, i).real();
    if (std::abs(d) > tol) return d > 0 ? 1 : -1;
  }
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) {
      if (i == j) continue;
      cplx x = q(i, j);
      if (std::abs(x.real()) > tol) return x.real() > 0 ? 1 : -1;
      if (std::abs(x.imag()) > tol) return x.imag() > 0 ? 1 : -1;
    }
  return 1;
}

struct RayMoments {
  CMatrix dir;  // canonical unit direction; the mirror -dir is implied
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
};

struct MomentData {
  int f = 2;
  int n = 1;
  std::optional<double> beta;
  RayNorm norm = RayNorm::Frobenius;
  std::vector<RayMoments> rays;
  double zero_mass = 0.0;

  // moments at the direction s*rays[k].dir, s = +1 or -1
  double m0(std::size_t k) const { return rays[k].a0; }
  double m1(std::size_t k, int s) const { return s * rays[k].a1; }
  double m2(std::size_t k) const { return rays[k].a2; }
  double total_mass() const {
    double t = zero_mass;
    for (auto& r : rays) t += 2.0 * r.a0;
    return t;
  }
};

inline constexpr double kRayMergeTol = 1e-9;

inline MomentData moments(const DiscreteConfig& c, RayNorm norm = RayNorm::Frobenius) {
  MomentData md;
  md.f = c.f;
  md.n = c.n;
  md.beta = c.beta;
  md.norm = norm;
  for (auto& pt : c.points) {
    double r = ray_norm(pt.p, norm);
    if (r <= 1e-14) {
      md.zero_mass += pt.w;
      continue;
    }
    CMatrix q = pt.p * (1.0 / r);
    int s = canonical_sign(q);
    if (s < 0) q *= -1.0;
    RayMoments* hit = nullptr;
    for (auto& ray : md.rays)
      if (frob_norm(ray.dir - q) <= kRayMergeTol) {
        hit = &ray;
        break;
      }
    if (!hit) {
      md.rays.push_back({q, 0.0, 0.0, 0.0});
      hit = &md.rays.back();
    }
    hit->a0 += 0.5 * pt.w;
    hit->a1 += 0.5 * s * pt.w * r;
    hit->a2 += 0.5 * pt.w * r * r;
  }
  std::sort(md.rays.begin(), md.rays.end(), [](const RayMoments& a, const RayMoments& b) {
    for (std::size_t k = 0; k < a.dir.size(); ++k) {
      cplx x = a.dir.data()[k], y = b.dir.data()[k];
      if (x.real() != y.real()) return x.real() < y.real();
      if (x.imag() != y.imag()) return x.imag() < y.imag();
    }
    return false;
  });
  return md;
}

// Both functionals evaluated on the moment measure m2, directions and
// their mirrors expanded: S = sum m2(p) m2(q) L[p q].
inline Functionals functionals_from_moments(const MomentData& md) {
  std::vector<CMatrix> dirs;
  std::vector<double> mass;
  for (auto& r : md.rays) {
    dirs.push_back(r.dir);
    mass.push_back(r.a2);
    dirs.push_back(r.dir * -1.0);
    mass.push_back(r.a2);
  }
  const std::size_t m = dirs.size();
  std::vector<double> rs(m), rt(m);
  parallel_for(m, [&](std::size_t i) {
    double s = 0.0, t = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ChainWeights cw = chain_weights(dirs[i] * dirs[j], md.n, false);
      s += mass[i] * mass[j] * cw.lagrangian;
      t += mass[i] * mass[j] * cw.abs_sum * cw.abs_sum;
    }
    rs[i] = s;
    rt[i] = t;
  });
  return {tree_sum(rs), tree_sum(rt)};
}

inline double action_from_moments(const MomentData& md) { return functionals_from_moments(md).S; }
inline double T_from_moments(const MomentData& md) { return functionals_from_moments(md).T; }

// Replaces every ray class by the single point (a1/a0) dir with weight
// 2 a0; mass at the origin stays there.
inline DiscreteConfig project_moments(const MomentData& md) {
  DiscreteConfig out;
  out.f = md.f;
  out.n = md.n;
  out.beta = md.beta;
  double zero = md.zero_mass;
  for (auto& r : md.rays) {
    if (r.a0 <= 0.0) continue;
    double fq = r.a1 / r.a0;
    if (fq == 0.0) {
      zero += 2.0 * r.a0;
      continue;
    }
    out.points.push_back({2.0 * r.a0, r.dir * fq});
  }
  if (zero > 0.0) out.points.push_back({zero, CMatrix(md.f)});
  return out;
}

struct MomentCheck {
  double worst_slack = 0.0;  // min over sets of (m0 m2 - m1^2) / max(m0 m2, tiny)
  std::size_t sets_checked = 0;
  std::size_t violations = 0;
};

inline MomentCheck moment_inequalities(const MomentData& md, std::size_t unions = 1000,
                                       std::uint64_t seed = 1, double tol = 1e-12) {
  MomentCheck out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  auto record = [&](double m0, double m1, double m2) {
    double scale = std::max(m0 * m2, 1e-300);
    double slack = (m0 * m2 - m1 * m1) / scale;
    if (m0 * m2 == 0.0 && m1 == 0.0) slack = 0.0;
    out.worst_slack = std::min(out.worst_slack, slack);
    if (slack < -tol) ++out.violations;
    ++out.sets_checked;
  };
  for (std::size_t k = 0; k < md.rays.size(); ++k) record(md.m0(k), md.m1(k, 1), md.m2(k));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  for (std::size_t u = 0; u < unions && !md.rays.empty(); ++u) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < md.rays.size(); ++k) {
      int state = pick(rng);  // 0 none, 1 +dir, 2 -dir, 3 both
      if (state == 1 || state == 3) m0 += md.m0(k), m1 += md.m1(k, 1), m2 += md.m2(k);
      if (state == 2 || state == 3) m0 += md.m0(k), m1 += md.m1(k, -1), m2 += md.m2(k);
    }
    record(m0, m1, m2);
  }
  if (out.sets_checked == 0) out.worst_slack = 0.0;
  return out;
}

}  // namespace cvp
