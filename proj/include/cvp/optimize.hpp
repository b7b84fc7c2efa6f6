#pragma once

// Minimization of the action over discrete configurations: equal-weight
// points on the sphere for f = 2, and general points parametrized by
// frames and eigenvalues p = W diag(c) W^* with penalties for the trace
// and identity constraints.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "cvp/measure.hpp"
#include "cvp/parallel.hpp"
#include "cvp/spectral.hpp"

namespace cvp {

struct OptimOptions {
  int max_iters = 2000;
  int restarts = 8;
  std::uint64_t seed = 1;
  double step = 0.5;
  double gtol = 1e-9;
  int anneal_steps = 200;
  double anneal_t0 = 1e-2;
  double anneal_cool = 0.97;
};

struct TraceRow {
  int restart = 0;
  int outer = 0;
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct OptimResult {
  DiscreteConfig config;
  std::vector<Vec3> sphere;  // filled by minimize_sphere
  double value = 0.0;
  std::vector<TraceRow> trace;
  ConstraintReport residuals;
  int best_restart = 0;
  bool converged = false;
};

namespace detail {

inline std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(sq);
}

// normal draws by Box-Muller, so sequences do not depend on the standard
// library's distribution implementation
inline double gauss(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Vec3 random_unit(std::mt19937_64& rng) {
  for (;;) {
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    double r = std::sqrt(dot(v, v));
    if (r > 1e-12) return {v[0] / r, v[1] / r, v[2] / r};
  }
}

// the winning run: lowest value, ties to the lower restart index
template <class Run>
std::size_t pick_best(const std::vector<Run>& runs) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].value < runs[best].value) best = r;
  return best;
}

}  // namespace detail

// ---- sphere configurations ------------------------------------------------

inline double sphere_objective(const std::vector<Vec3>& v, double beta) {
  const std::size_t m = v.size();
  if (m == 0) return 0.0;
  const double w = 1.0 / m;
  std::vector<double> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += lagrangian_profile(dot(v[i], v[j]), beta);
    rows[i] = w * w * s;
  }
  return tree_sum(rows);
}

// Gradient in R^(3m); the vectors need not be normalized.
inline std::vector<Vec3> sphere_gradient(const std::vector<Vec3>& v, double beta) {
  const std::size_t m = v.size();
  std::vector<Vec3> g(m, Vec3{0, 0, 0});
  if (m == 0) return g;
  const double w = 1.0 / m;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double d = 2.0 * w * w * lagrangian_profile_dc(dot(v[i], v[j]), beta);
      for (int k = 0; k < 3; ++k) g[i][k] += d * v[j][k];
    }
  return g;
}

inline DiscreteConfig sphere_config(const std::vector<Vec3>& v, double beta) {
  DiscreteConfig c;
  c.beta = beta;
  for (auto& x : v) c.points.push_back({1.0 / v.size(), pauli_embed(x, beta)});
  return c;
}

namespace detail {

struct SphereRun {
  std::vector<Vec3> v;
  double value = 0.0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

inline SphereRun sphere_descent(std::vector<Vec3> v, double beta, const OptimOptions& o, int restart) {
  SphereRun run;
  const std::size_t m = v.size();
  double f = sphere_objective(v, beta);
  double eta = o.step;
  for (int it = 0; it < o.max_iters; ++it) {
    auto g = sphere_gradient(v, beta);
    double gn2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = dot(g[i], v[i]);
      for (int k = 0; k < 3; ++k) g[i][k] -= r * v[i][k];
      gn2 += dot(g[i], g[i]);
    }
    double gn = std::sqrt(gn2);
    run.trace.push_back({restart, 0, it, f, gn, eta});
    if (gn <= o.gtol) {
      run.converged = true;
      break;
    }
    bool moved = false;
    while (eta > 1e-16) {
      std::vector<Vec3> nv(m);
      for (std::size_t i = 0; i < m; ++i) {
        Vec3 x{v[i][0] - eta * g[i][0], v[i][1] - eta * g[i][1], v[i][2] - eta * g[i][2]};
        double r = std::sqrt(dot(x, x));
        nv[i] = {x[0] / r, x[1] / r, x[2] / r};
      }
      double nf = sphere_objective(nv, beta);
      if (nf <= f - 1e-4 * eta * gn2) {
        v = std::move(nv);
        f = nf;
        moved = true;
        eta *= 2.0;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) {
      // no descent along the (one-sided) gradient: stationary up to rounding
      run.converged = true;
      break;
    }
  }
  run.v = std::move(v);
  run.value = f;
  return run;
}

}  // namespace detail

inline OptimResult minimize_sphere(int m, double beta, const OptimOptions& o = {}) {
  if (m < 1) throw Error(Errc::InvalidArgument, "need at least one point");
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in [0, 1)");
  if (o.restarts < 1) throw Error(Errc::InvalidArgument, "need at least one restart");
  std::vector<detail::SphereRun> runs(o.restarts);
  parallel_for(static_cast<std::size_t>(o.restarts), [&](std::size_t r) {
    auto rng = detail::restart_rng(o.seed, static_cast<int>(r));
    std::vector<Vec3> v(m);
    for (auto& x : v) x = detail::random_unit(rng);
    runs[r] = detail::sphere_descent(std::move(v), beta, o, static_cast<int>(r));
  });
  bool any = false;
  for (auto& r : runs) any = any || r.converged;
  if (!any) throw Error(Errc::NonConvergence, "no restart reached the stationarity tolerance");
  std::size_t best = detail::pick_best(runs);
  OptimResult res;
  res.sphere = runs[best].v;
  res.config = sphere_config(res.sphere, beta);
  res.value = runs[best].value;
  res.best_restart = static_cast<int>(best);
  res.converged = runs[best].converged;
  for (auto& r : runs) res.trace.insert(res.trace.end(), r.trace.begin(), r.trace.end());
  res.residuals = check_constraints(res.config);
  return res;
}

// ---- general configurations -----------------------------------------------

enum class Objective { S, TPlusNuS, SWithTCap };

struct OptimProblem {
  Objective objective = Objective::S;
  double nu = 0.0;   // for TPlusNuS
  double cap = 0.0;  // for SWithTCap
  bool c1 = false;
  bool c2 = false;
  std::optional<std::vector<double>> c3;  // fixed eigenvalues, negatives first
  int m = 2;
  int f = 2;
  int n = 1;
  std::optional<double> beta;
  OptimOptions options;
  std::optional<DiscreteConfig> start;
};

inline double illposed_threshold(int n) { return -2.0 * n / (2.0 * n - 1.0); }

// Gradient of one pair term with respect to both points. For the chain
// A = p q with simple nonzero eigenvalues, d lambda = tr(adj(lambda - A) dA) / chi'(lambda).
// L = Q - W^2 / 2n and T = W^2 with Q = sum |lambda|^2 and W = sum |lambda|.
struct PairGrad {
  double L = 0.0, T = 0.0;
  CMatrix dL_dp, dL_dq, dT_dp, dT_dq;  // Hermitian
};

namespace detail {

inline CMatrix herm_part(const CMatrix& x) { return 0.5 * (x + x.adjoint()); }

inline bool pair_grad_analytic(const CMatrix& p, const CMatrix& q, int n, PairGrad& out) {
  CMatrix a = p * q;
  CharPoly cp = faddeev_leverrier(a, true);
  Spectrum sp;
  sp.values = poly_roots(deflated_coeffs(cp, frob_norm(a)));
  sort_by_modulus(sp.values);
  const std::size_t k = 2 * static_cast<std::size_t>(n);
  auto top = sp.top(k);
  const double scale = 1.0 + sp.max_abs();
  double Q = 0.0, W = 0.0;
  for (auto& x : top) {
    Q += std::norm(x);
    W += std::abs(x);
  }
  const int d = a.rows();
  CMatrix GQ(d), GW(d);
  for (std::size_t i = 0; i < k; ++i) {
    cplx lam = top[i];
    if (std::abs(lam) <= 1e-12 * scale) continue;
    cplx dchi = 1.0;
    std::size_t self = sp.values.size();
    for (std::size_t j = 0; j < sp.values.size(); ++j)
      if (sp.values[j] == lam && self == sp.values.size()) self = j;
    for (std::size_t j = 0; j < sp.values.size(); ++j) {
      if (j == self) continue;
      cplx diff = lam - sp.values[j];
      if (std::abs(diff) <= 1e-6 * scale) return false;  // not simple
      dchi *= diff;
    }
    CMatrix P = adjugate_shift(cp, lam) * (1.0 / dchi);
    GQ += P * (2.0 * std::conj(lam));
    GW += P * (std::conj(lam) / std::abs(lam));
  }
  CMatrix GL = GQ - GW * (W / n);
  CMatrix GT = GW * (2.0 * W);
  out.L = Q - W * W / (2.0 * n);
  out.T = W * W;
  // dA = dp q gives tr(q G dp); dA = p dq gives tr(G p dq)
  out.dL_dp = herm_part(q * GL);
  out.dL_dq = herm_part(GL * p);
  out.dT_dp = herm_part(q * GT);
  out.dT_dq = herm_part(GT * p);
  return true;
}

// Central differences over a Hermitian basis, used where the chain has a
// repeated nonzero eigenvalue.
inline void pair_grad_fd(const CMatrix& p, const CMatrix& q, int n, PairGrad& out) {
  auto eval = [n](const CMatrix& a, const CMatrix& b) {
    ChainWeights cw = chain_weights(a * b, n, false);
    return std::pair<double, double>{cw.lagrangian, cw.abs_sum * cw.abs_sum};
  };
  auto base = eval(p, q);
  out.L = base.first;
  out.T = base.second;
  const int d = p.rows();
  auto grad = [&](bool wrt_p, CMatrix& gl, CMatrix& gt) {
    gl = CMatrix(d);
    gt = CMatrix(d);
    const CMatrix& x = wrt_p ? p : q;
    const double h = 1e-6 * (1.0 + frob_norm(x));
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        for (int part = 0; part < (i == j ? 1 : 2); ++part) {
          CMatrix e(d);
          cplx z = part == 0 ? cplx(1.0) : cplx(0.0, 1.0);
          e(i, j) += z;
          if (i != j) e(j, i) += std::conj(z);
          auto fp = wrt_p ? eval(p + e * h, q) : eval(p, q + e * h);
          auto fm = wrt_p ? eval(p - e * h, q) : eval(p, q - e * h);
          double dl = (fp.first - fm.first) / (2.0 * h), dt = (fp.second - fm.second) / (2.0 * h);
          // tr(G e) for Hermitian G: G_ii on the diagonal, 2 Re(conj(z) G_ij) off it
          if (i == j) {
            gl(i, i) += dl;
            gt(i, i) += dt;
          } else {
            gl(i, j) += 0.5 * dl * z;
            gl(j, i) += 0.5 * dl * std::conj(z);
            gt(i, j) += 0.5 * dt * z;
            gt(j, i) += 0.5 * dt * std::conj(z);
          }
        }
  };
  grad(true, out.dL_dp, out.dT_dp);
  grad(false, out.dL_dq, out.dT_dq);
}

}  // namespace detail

inline PairGrad pair_gradient(const CMatrix& p, const CMatrix& q, int n) {
  PairGrad g;
  if (!detail::pair_grad_analytic(p, q, n, g)) detail::pair_grad_fd(p, q, n, g);
  return g;
}

// A point of the frame parametrization.
struct FramePoint {
  CMatrix W;               // f x 2n, orthonormal columns
  std::vector<double> c;   // 2n eigenvalues, negatives first
  CMatrix matrix() const {
    CMatrix C = CMatrix::diag(c);
    return W * C * W.adjoint();
  }
};

namespace detail {

inline void orthonormalize(CMatrix& W) {
  for (int j = 0; j < W.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k) {
        cplx r = 0.0;
        for (int i = 0; i < W.rows(); ++i) r += std::conj(W(i, k)) * W(i, j);
        for (int i = 0; i < W.rows(); ++i) W(i, j) -= r * W(i, k);
      }
    double nr = 0.0;
    for (int i = 0; i < W.rows(); ++i) nr += std::norm(W(i, j));
    nr = std::sqrt(nr);
    if (nr < 1e-14) throw Error(Errc::NoConvergence, "frame lost rank");
    for (int i = 0; i < W.rows(); ++i) W(i, j) /= nr;
  }
}

inline CMatrix random_frame(int f, int k, std::mt19937_64& rng) {
  CMatrix W(f, k);
  for (int i = 0; i < f; ++i)
    for (int j = 0; j < k; ++j) W(i, j) = cplx(gauss(rng), gauss(rng));
  orthonormalize(W);
  return W;
}

inline FramePoint frame_from_matrix(const CMatrix& p, int n) {
  HermEigen he = herm_eigen(p);
  const int f = p.rows();
  const double tol = 1e-9 * frob_norm(p);
  std::vector<int> neg, pos, zero;
  for (int k = 0; k < f; ++k) {
    if (he.values[k] < -tol) neg.push_back(k);
    else if (he.values[k] > tol) pos.push_back(k);
    else zero.push_back(k);
  }
  if (static_cast<int>(neg.size()) > n || static_cast<int>(pos.size()) > n)
    throw Error(Errc::InvalidPoint, "point has more than n positive or negative eigenvalues");
  std::vector<int> cols(neg);
  std::size_t z = 0;
  while (static_cast<int>(cols.size()) < n) cols.push_back(zero[z++]);
  std::vector<int> tail;
  while (static_cast<int>(tail.size() + pos.size()) < static_cast<std::size_t>(n)) tail.push_back(zero[z++]);
  tail.insert(tail.end(), pos.begin(), pos.end());
  cols.insert(cols.end(), tail.begin(), tail.end());
  FramePoint fp;
  fp.W = CMatrix(f, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    for (int i = 0; i < f; ++i) fp.W(i, j) = he.vectors(i, cols[j]);
    fp.c.push_back(std::abs(he.values[cols[j]]) <= tol ? 0.0 : he.values[cols[j]]);
  }
  return fp;
}

struct GeneralState {
  std::vector<FramePoint> pts;
};

// Quadratic penalty mu |r|^2 plus multiplier terms <lambda, r> for the
// residuals r2 = sum w p - I and r1 = sum w Tr p - f.
struct Penalty {
  double mu = 0.0;
  CMatrix lam2;
  double lam1 = 0.0;
};

struct Evaluation {
  double objective = 0.0;  // S or T + nu S, without penalty
  double S = 0.0, T = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  std::vector<CMatrix> grad_p;  // Hermitian gradient of total per point
};

inline Evaluation evaluate_general(const OptimProblem& pr, const GeneralState& st, const Penalty& pen, bool want_grad) {
  const std::size_t m = st.pts.size();
  const double w = 1.0 / m;
  std::vector<CMatrix> p(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = st.pts[i].matrix();
  const double aL = pr.objective == Objective::TPlusNuS ? pr.nu : 1.0;
  const double aT = pr.objective == Objective::TPlusNuS ? 1.0 : 0.0;
  std::vector<double> rs(m), rt(m);
  // contributions of pair (i, j >= i) to both gradients, stored by the row i
  std::vector<std::vector<CMatrix>> gi(m), gj(m);
  parallel_for(m, [&](std::size_t i) {
    double s = 0.0, t = 0.0;
    if (want_grad) {
      gi[i].assign(m - i, CMatrix(pr.f));
      gj[i].assign(m - i, CMatrix(pr.f));
    }
    for (std::size_t j = i; j < m; ++j) {
      double mult = j == i ? 1.0 : 2.0;
      if (want_grad) {
        PairGrad g = pair_gradient(p[i], p[j], pr.n);
        s += mult * w * w * g.L;
        t += mult * w * w * g.T;
        // d/dp of sum_xy over ordered pairs: each unordered pair appears twice
        double c = 2.0 * w * w;
        if (j == i) {
          gi[i][0] = (g.dL_dp + g.dL_dq) * (0.5 * c * aL) + (g.dT_dp + g.dT_dq) * (0.5 * c * aT);
        } else {
          gi[i][j - i] = g.dL_dp * (c * aL) + g.dT_dp * (c * aT);
          gj[i][j - i] = g.dL_dq * (c * aL) + g.dT_dq * (c * aT);
        }
      } else {
        ChainWeights cw = chain_weights(p[i] * p[j], pr.n, false);
        s += mult * w * w * cw.lagrangian;
        t += mult * w * w * cw.abs_sum * cw.abs_sum;
      }
    }
    rs[i] = s;
    rt[i] = t;
  });
  Evaluation ev;
  ev.S = tree_sum(rs);
  ev.T = tree_sum(rt);
  ev.objective = pr.objective == Objective::TPlusNuS ? ev.T + pr.nu * ev.S : ev.S;
  CMatrix sum(pr.f);
  for (auto& x : p) sum += x * w;
  CMatrix r2 = sum - CMatrix::identity(pr.f);
  double r1 = sum.trace().real() - pr.f;
  const double mu = pen.mu;
  const bool has_lam2 = pen.lam2.rows() == pr.f;
  if (pr.c2) {
    ev.penalty += mu * std::pow(frob_norm(r2), 2);
    if (has_lam2) ev.penalty += (pen.lam2 * r2).trace().real();
  }
  if (pr.c1) ev.penalty += mu * r1 * r1 + pen.lam1 * r1;
  ev.total = ev.objective + ev.penalty;
  if (want_grad) {
    ev.grad_p.assign(m, CMatrix(pr.f));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) {
        ev.grad_p[i] += gi[i][j - i];
        if (j != i) ev.grad_p[j] += gj[i][j - i];
      }
    for (std::size_t i = 0; i < m; ++i) {
      if (pr.c2) {
        ev.grad_p[i] += r2 * (2.0 * mu * w);
        if (has_lam2) ev.grad_p[i] += pen.lam2 * w;
      }
      if (pr.c1) ev.grad_p[i] += CMatrix::identity(pr.f) * (w * (2.0 * mu * r1 + pen.lam1));
    }
  }
  return ev;
}

// Parameter gradient: frames get the Stiefel tangent part of 2 H W C,
// eigenvalues get diag(W^* H W), clamped at the sign boundaries.
struct ParamGrad {
  std::vector<CMatrix> dW;
  std::vector<std::vector<double>> dc;
  double norm2 = 0.0;
};

inline ParamGrad param_gradient(const OptimProblem& pr, const GeneralState& st, const Evaluation& ev) {
  ParamGrad g;
  const int k = 2 * pr.n;
  for (std::size_t i = 0; i < st.pts.size(); ++i) {
    const FramePoint& fp = st.pts[i];
    const CMatrix& H = ev.grad_p[i];
    CMatrix HW = H * fp.W;
    CMatrix G = HW * CMatrix::diag(fp.c) * 2.0;
    CMatrix sym = herm_part(fp.W.adjoint() * G);
    CMatrix Z = G - fp.W * sym;
    for (std::size_t t = 0; t < Z.size(); ++t) g.norm2 += std::norm(Z.data()[t]);
    g.dW.push_back(Z);
    std::vector<double> dc(k, 0.0);
    if (!pr.c3) {
      CMatrix WHW = fp.W.adjoint() * HW;
      for (int a = 0; a < k; ++a) {
        double v = WHW(a, a).real();
        // c_a <= 0 for a < n and c_a >= 0 otherwise; drop pushes across zero
        bool at_zero = fp.c[a] == 0.0;
        if (at_zero && ((a < pr.n && v < 0.0) || (a >= pr.n && v > 0.0))) v = 0.0;
        dc[a] = v;
        g.norm2 += v * v;
      }
    }
    g.dc.push_back(dc);
  }
  return g;
}

inline GeneralState step_state(const OptimProblem& pr, const GeneralState& st, const ParamGrad& g, double eta) {
  GeneralState out = st;
  for (std::size_t i = 0; i < st.pts.size(); ++i) {
    out.pts[i].W = st.pts[i].W - g.dW[i] * eta;
    orthonormalize(out.pts[i].W);
    if (!pr.c3)
      for (int a = 0; a < 2 * pr.n; ++a) {
        double v = st.pts[i].c[a] - eta * g.dc[i][a];
        out.pts[i].c[a] = a < pr.n ? std::min(v, 0.0) : std::max(v, 0.0);
      }
  }
  return out;
}

inline DiscreteConfig state_config(const OptimProblem& pr, const GeneralState& st) {
  DiscreteConfig c;
  c.f = pr.f;
  c.n = pr.n;
  c.beta = pr.beta;
  for (auto& fp : st.pts) c.points.push_back({1.0 / st.pts.size(), fp.matrix()});
  return c;
}

inline constexpr double kDivergence = -1e12;

struct GeneralRun {
  GeneralState state;
  double value = 0.0;
  double residual = 0.0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

// Gradient descent with Armijo backtracking at a fixed penalty weight.
inline bool descend(const OptimProblem& pr, GeneralState& st, const Penalty& pen, int restart, int outer,
                    std::vector<TraceRow>& trace) {
  const OptimOptions& o = pr.options;
  Evaluation ev = evaluate_general(pr, st, pen, true);
  double eta = o.step;
  const bool capped = pr.objective == Objective::SWithTCap;
  for (int it = 0; it < o.max_iters; ++it) {
    if (ev.objective < kDivergence) throw Error(Errc::IllPosed, "objective decreases without bound");
    ParamGrad g = param_gradient(pr, st, ev);
    double gn = std::sqrt(g.norm2);
    trace.push_back({restart, outer, it, ev.total, gn, eta});
    if (gn <= o.gtol * (1.0 + std::abs(ev.total))) return true;
    bool moved = false;
    while (eta > 1e-16) {
      double e = eta;
      GeneralState cand = step_state(pr, st, g, e);
      Evaluation ce = evaluate_general(pr, cand, pen, false);
      if (capped && ce.T > pr.cap) {
        // pull the step back to the cap boundary
        double lo = 0.0, hi = e;
        for (int b = 0; b < 30; ++b) {
          double mid = 0.5 * (lo + hi);
          GeneralState s2 = step_state(pr, st, g, mid);
          (evaluate_general(pr, s2, pen, false).T <= pr.cap ? lo : hi) = mid;
        }
        e = lo;
        if (e <= 0.0) {
          eta *= 0.5;
          continue;
        }
        cand = step_state(pr, st, g, e);
        ce = evaluate_general(pr, cand, pen, false);
      }
      if (ce.total <= ev.total - 1e-4 * e * g.norm2) {
        st = std::move(cand);
        ev = evaluate_general(pr, st, pen, true);
        eta = 2.0 * e;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) return true;
  }
  return false;
}

// Metropolis walk on frames and eigenvalues; returns the best state seen.
inline void anneal(const OptimProblem& pr, GeneralState& st, const Penalty& pen, std::mt19937_64& rng) {
  const OptimOptions& o = pr.options;
  double cur = evaluate_general(pr, st, pen, false).total;
  GeneralState best = st;
  double best_v = cur;
  double temp = o.anneal_t0 * (1.0 + std::abs(cur));
  const double sigma = 0.1;
  for (int s = 0; s < o.anneal_steps; ++s, temp *= o.anneal_cool) {
    GeneralState cand = st;
    std::size_t i = rng() % st.pts.size();
    FramePoint& fp = cand.pts[i];
    for (std::size_t t = 0; t < fp.W.size(); ++t) fp.W.data()[t] += sigma * cplx(gauss(rng), gauss(rng));
    orthonormalize(fp.W);
    if (!pr.c3)
      for (int a = 0; a < 2 * pr.n; ++a) {
        double v = fp.c[a] + sigma * gauss(rng);
        fp.c[a] = a < pr.n ? std::min(v, 0.0) : std::max(v, 0.0);
      }
    Evaluation ce = evaluate_general(pr, cand, pen, false);
    if (pr.objective == Objective::SWithTCap && ce.T > pr.cap) continue;
    double u = uniform(rng);
    if (ce.total <= cur || u < std::exp(-(ce.total - cur) / temp)) {
      st = std::move(cand);
      cur = ce.total;
      if (cur < best_v) best = st, best_v = cur;
    }
  }
  st = std::move(best);
}

inline double constraint_residual(const OptimProblem& pr, const DiscreteConfig& c) {
  ConstraintReport r = check_constraints(c);
  double res = 0.0;
  if (pr.c1) res = std::max(res, r.c1);
  if (pr.c2) res = std::max(res, r.c2);
  return res;
}

}  // namespace detail

inline constexpr double kPenaltyStart = 10.0;
inline constexpr int kPenaltyRounds = 5;
inline constexpr double kFinalResidual = 1e-6;

inline OptimResult minimize_general(const OptimProblem& pr) {
  const OptimOptions& o = pr.options;
  if (pr.n < 1 || pr.f < 2 * pr.n || pr.f > kMaxDim) throw Error(Errc::InvalidArgument, "need 1 <= n and 2n <= f <= 16");
  if (pr.m < 1 || o.restarts < 1) throw Error(Errc::InvalidArgument, "need m >= 1 and at least one restart");
  if (pr.objective == Objective::TPlusNuS && !(pr.nu > illposed_threshold(pr.n)))
    throw Error(Errc::IllPosed, "nu <= -2n/(2n-1): T + nu S is unbounded below");
  if (pr.c3) {
    const auto& c3 = *pr.c3;
    if (static_cast<int>(c3.size()) != 2 * pr.n) throw Error(Errc::DimMismatch, "C3 needs 2n eigenvalues");
    for (int a = 0; a < 2 * pr.n; ++a)
      if ((a < pr.n && c3[a] > 0.0) || (a >= pr.n && c3[a] < 0.0))
        throw Error(Errc::Infeasible, "C3 lists negatives first, then nonnegatives");
    double tr = 0.0;
    for (double x : c3) tr += x;
    if ((pr.c1 || pr.c2) && std::abs(tr - pr.f) > 1e-9)
      throw Error(Errc::Infeasible, "C3 fixes the trace of each point away from f");
  }
  if (pr.start) {
    if (pr.start->f != pr.f || pr.start->n != pr.n || static_cast<int>(pr.start->points.size()) != pr.m)
      throw Error(Errc::DimMismatch, "start configuration does not match the problem");
    validate(*pr.start);
  }

  std::vector<detail::GeneralRun> runs(o.restarts);
  parallel_for(static_cast<std::size_t>(o.restarts), [&](std::size_t r) {
    auto rng = detail::restart_rng(o.seed, static_cast<int>(r));
    detail::GeneralRun& run = runs[r];
    detail::GeneralState st;
    for (int x = 0; x < pr.m; ++x) {
      FramePoint fp;
      if (r == 0 && pr.start) {
        fp = detail::frame_from_matrix(pr.start->points[x].p, pr.n);
      } else {
        fp.W = detail::random_frame(pr.f, 2 * pr.n, rng);
        for (int a = 0; a < 2 * pr.n; ++a)
          fp.c.push_back(a < pr.n ? -0.5 * detail::uniform(rng) : 0.5 + 1.5 * detail::uniform(rng));
      }
      if (pr.c3) fp.c = *pr.c3;
      st.pts.push_back(fp);
    }
    if (pr.objective == Objective::SWithTCap &&
        detail::evaluate_general(pr, st, {}, false).T > pr.cap) {
      if (r == 0 && pr.start) throw Error(Errc::Infeasible, "start configuration violates T <= C");
      // shrink the eigenvalues towards zero until the cap holds
      for (int t = 0; t < 60 && detail::evaluate_general(pr, st, {}, false).T > pr.cap; ++t)
        for (auto& fp : st.pts)
          for (auto& x : fp.c) x *= 0.8;
    }
    const bool penalized = pr.c1 || pr.c2;
    const int rounds = penalized ? kPenaltyRounds : 1;
    detail::Penalty pen;
    pen.mu = kPenaltyStart;
    pen.lam2 = CMatrix(pr.f);
    bool ok = false;
    for (int k = 0; k < rounds; ++k, pen.mu *= 10.0) {
      ok = detail::descend(pr, st, pen, static_cast<int>(r), k, run.trace);
      if (pr.n >= 2 && o.anneal_steps > 0 && k == 0) {
        detail::anneal(pr, st, pen, rng);
        ok = detail::descend(pr, st, pen, static_cast<int>(r), k, run.trace);
      }
      // first-order multiplier update
      CMatrix sum(pr.f);
      for (auto& fp : st.pts) sum += fp.matrix() * (1.0 / st.pts.size());
      CMatrix r2 = sum - CMatrix::identity(pr.f);
      if (pr.c2) pen.lam2 += r2 * (2.0 * pen.mu);
      if (pr.c1) pen.lam1 += 2.0 * pen.mu * (sum.trace().real() - pr.f);
    }
    DiscreteConfig c = detail::state_config(pr, st);
    run.residual = detail::constraint_residual(pr, c);
    Functionals fs = functionals(c);
    run.value = pr.objective == Objective::TPlusNuS ? fs.T + pr.nu * fs.S : fs.S;
    run.converged = ok && run.residual <= kFinalResidual;
    run.state = std::move(st);
  });

  bool any = false;
  for (auto& r : runs) any = any || r.residual <= kFinalResidual;
  if (!any) throw Error(Errc::NonConvergence, "constraint residual stayed above 1e-6 in every restart");
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r)
    if (runs[r].residual <= kFinalResidual && (runs[best].residual > kFinalResidual || runs[r].value < runs[best].value))
      best = r;
  OptimResult res;
  res.config = detail::state_config(pr, runs[best].state);
  res.value = runs[best].value;
  res.best_restart = static_cast<int>(best);
  res.converged = runs[best].converged;
  for (auto& r : runs) res.trace.insert(res.trace.end(), r.trace.begin(), r.trace.end());
  res.residuals = check_constraints(res.config, pr.c3);
  return res;
}

// T + nu S along the ill-posed family for growing k.
inline std::vector<double> illposed_family_values(double nu, const std::vector<double>& ks) {
  std::vector<double> out;
  for (double k : ks) {
    DiscreteConfig c;
    c.points = {{0.25, CMatrix::diag({k + 4, 0})},
                {0.25, CMatrix::diag({0, k + 4})},
                {0.25, CMatrix::diag({-k, 0})},
                {0.25, CMatrix::diag({0, -k})}};
    Functionals fs = functionals(c);
    out.push_back(fs.T + nu * fs.S);
  }
  return out;
}

}  // namespace cvp
