#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvp/matlin.hpp"

namespace cvp {

enum class CausalClass { Spacelike, Timelike, Lightlike };

inline const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::Timelike: return "timelike";
    case CausalClass::Lightlike: return "lightlike";
  }
  return "?";
}

inline CMatrix closed_chain(const CMatrix& p, const CMatrix& q) {
  if (!p.square() || !q.square() || p.rows() != q.rows())
    throw Error(Errc::DimMismatch, "closed chain of matrices with different dimensions");
  return p * q;
}

inline double tol_rank(const CMatrix& a) { return 1e-9 * frob_norm(a); }

// Everything the functionals need from one closed chain.
struct ChainWeights {
  std::vector<cplx> top;  // the 2n eigenvalues of largest modulus
  double abs_sum = 0.0;   // |A|
  double sq_sum = 0.0;    // |A^2|
  double lagrangian = 0.0;
};

inline double lagrangian_from_moduli(const std::vector<double>& m) {
  // (1/4n) sum_ij (|l_i| - |l_j|)^2, written as the pairwise form so
  // the result is never negative
  const std::size_t k = m.size();
  if (k == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double d = m[i] - m[j];
      s += d * d;
    }
  return s / static_cast<double>(k);
}

inline ChainWeights chain_weights(const Spectrum& sp, int n, double rank_tol, bool check_rank = true) {
  if (n < 1) throw Error(Errc::InvalidArgument, "n must be positive");
  const std::size_t k = 2 * static_cast<std::size_t>(n);
  if (check_rank) {
    std::size_t above = 0;
    for (auto& x : sp.values)
      if (std::abs(x) > rank_tol) ++above;
    if (above > k) throw Error(Errc::RankTooHigh, "closed chain has more than 2n nonzero eigenvalues");
  }
  ChainWeights w;
  w.top = sp.top(k);
  std::vector<double> mod(k);
  for (std::size_t i = 0; i < k; ++i) {
    mod[i] = std::abs(w.top[i]);
    w.abs_sum += mod[i];
    w.sq_sum += mod[i] * mod[i];
  }
  w.lagrangian = lagrangian_from_moduli(mod);
  return w;
}

inline ChainWeights chain_weights(const CMatrix& a, int n, bool check_rank = true) {
  return chain_weights(eigenvalues(a), n, tol_rank(a), check_rank);
}

inline double lagrangian_general(const CMatrix& a, int n) { return chain_weights(a, n).lagrangian; }

inline double lagrangian_simple(const CMatrix& a) {
  ChainWeights w = chain_weights(a, 1);
  double d = std::abs(w.top[0]) - std::abs(w.top[1]);
  return 0.5 * d * d;
}

inline double tol_causal(const std::vector<cplx>& top) {
  double m = 0.0;
  for (auto& x : top) m = std::max(m, std::abs(x));
  return 1e-8 * (1.0 + m);
}

// Spacelike is tested first, so a degenerate real pair counts as spacelike.
inline CausalClass classify_spectrum(const std::vector<cplx>& top) {
  const double tol = tol_causal(top);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (auto& x : top) {
    lo = std::min(lo, std::abs(x));
    hi = std::max(hi, std::abs(x));
  }
  bool same_modulus = top.empty() || hi - lo <= tol;
  if (same_modulus && top.size() % 2 == 0) {
    std::vector<char> used(top.size(), 0);
    bool paired = true;
    for (std::size_t i = 0; i < top.size() && paired; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      int best = -1;
      double bd = 0.0;
      for (std::size_t j = 0; j < top.size(); ++j) {
        if (used[j]) continue;
        double dd = std::abs(top[j] - std::conj(top[i]));
        if (best < 0 || dd < bd) best = static_cast<int>(j), bd = dd;
      }
      if (best < 0 || bd > tol) paired = false;
      else used[best] = 1;
    }
    if (paired) return CausalClass::Spacelike;
  }
  bool all_real = std::all_of(top.begin(), top.end(), [&](cplx x) { return std::abs(x.imag()) <= tol; });
  return all_real ? CausalClass::Timelike : CausalClass::Lightlike;
}

inline CausalClass classify(const CMatrix& p, const CMatrix& q, int n) {
  CMatrix a = closed_chain(p, q);
  return classify_spectrum(eigenvalues(a).top(2 * static_cast<std::size_t>(n)));
}

}  // namespace cvp
