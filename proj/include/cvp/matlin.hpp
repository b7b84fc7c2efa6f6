#pragma once

// Small dense complex matrices (dimension at most 16) and the spectral
// tools the causal functionals are built on. General (non-Hermitian)
// spectra come from the characteristic polynomial: Faddeev-LeVerrier for
// the coefficients, Aberth-Ehrlich for the roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/container/small_vector.hpp>

#include "cvp/error.hpp"

namespace cvp {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 16;
inline constexpr double kTolHerm = 1e-10;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0 || rows > kMaxDim || cols > kMaxDim)
      throw Error(Errc::DimMismatch, "matrix dimension out of range");
  }
  explicit CMatrix(int dim) : CMatrix(dim, dim) {}

  static CMatrix identity(int d) {
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMatrix diag(const std::vector<double>& v) {
    CMatrix m(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(int(i), int(i)) = v[i];
    return m;
  }
  static CMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows.begin()->size()) : 0;
    CMatrix m(r, c);
    int i = 0;
    for (auto& row : rows) {
      if (static_cast<int>(row.size()) != c) throw Error(Errc::DimMismatch, "ragged rows");
      int j = 0;
      for (auto& x : row) m(i, j++) = x;
      ++i;
    }
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  int dim() const { return r_; }
  bool square() const { return r_ == c_; }

  cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }
  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }
  std::size_t size() const { return a_.size(); }

  CMatrix adjoint() const {
    CMatrix m(c_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
    return t;
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator-(CMatrix a) { return a *= -1.0; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, double s) { return a *= cplx(s); }
  friend CMatrix operator*(double s, CMatrix a) { return a *= cplx(s); }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.c_ != b.r_) throw Error(Errc::DimMismatch, "product dimension mismatch");
    CMatrix m(a.r_, b.c_);
    for (int i = 0; i < a.r_; ++i)
      for (int k = 0; k < a.c_; ++k) {
        const cplx aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.c_; ++j) m(i, j) += aik * b(k, j);
      }
    return m;
  }

  bool operator==(const CMatrix& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }

 private:
  void check_same(const CMatrix& o) const {
    if (r_ != o.r_ || c_ != o.c_) throw Error(Errc::DimMismatch, "shape mismatch");
  }
  int r_ = 0;
  int c_ = 0;
  boost::container::small_vector<cplx, 16> a_;
};

inline double frob_norm(const CMatrix& a) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a.data()[k]);
  return std::sqrt(s);
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::DimMismatch, "shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline bool is_hermitian(const CMatrix& a, double tol = kTolHerm) {
  if (!a.square()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
  return true;
}

inline Eigen::MatrixXcd to_eigen(const CMatrix& a) {
  Eigen::MatrixXcd m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

inline CMatrix from_eigen(const Eigen::MatrixXcd& m) {
  CMatrix a(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

struct HermEigen {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // orthonormal columns, vectors(:, k) belongs to values[k]
};

inline HermEigen herm_eigen(const CMatrix& a) {
  if (!is_hermitian(a)) throw Error(Errc::NotHermitian, "herm_eigen needs a Hermitian matrix");
  Eigen::MatrixXcd m = to_eigen(a);
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw Error(Errc::NoConvergence, "Hermitian eigensolver failed");
  HermEigen out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  out.vectors = from_eigen(es.eigenvectors());
  return out;
}

// Characteristic polynomial det(z I - A) = sum_k coeffs[k] z^k with
// coeffs[d] = 1. The recursion matrices M_1..M_d are kept because
// adj(z I - A) = sum_k M_k z^(d-k).
struct CharPoly {
  std::vector<cplx> coeffs;
  std::vector<CMatrix> m;
};

inline CharPoly faddeev_leverrier(const CMatrix& a, bool keep_matrices = false) {
  if (!a.square()) throw Error(Errc::DimMismatch, "characteristic polynomial needs a square matrix");
  const int d = a.rows();
  CharPoly cp;
  cp.coeffs.assign(d + 1, 0.0);
  cp.coeffs[d] = 1.0;
  if (d == 0) return cp;
  CMatrix mk = CMatrix::identity(d);
  for (int k = 1; k <= d; ++k) {
    if (k > 1) {
      mk = a * mk;
      for (int i = 0; i < d; ++i) mk(i, i) += cp.coeffs[d - k + 1];
    }
    if (keep_matrices) cp.m.push_back(mk);
    cplx tr = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) tr += a(i, j) * mk(j, i);
    cp.coeffs[d - k] = -tr / static_cast<double>(k);
  }
  return cp;
}

inline CMatrix adjugate_shift(const CharPoly& cp, cplx z) {
  const int d = static_cast<int>(cp.m.size());
  if (d == 0) throw Error(Errc::InvalidArgument, "characteristic polynomial kept no matrices");
  CMatrix out = cp.m[0];
  for (int k = 1; k < d; ++k) {
    out *= z;
    out += cp.m[k];
  }
  return out;
}

namespace detail {

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct HornerOut {
  cplx p, dp;
  double bound;  // sum |c_k| |z|^k
};

inline HornerOut horner(const std::vector<cplx>& c, cplx z) {
  const int d = static_cast<int>(c.size()) - 1;
  cplx p = c[d], dp = 0.0;
  double az = std::abs(z), b = std::abs(c[d]);
  for (int k = d - 1; k >= 0; --k) {
    dp = dp * z + p;
    p = p * z + c[k];
    b = b * az + std::abs(c[k]);
  }
  return {p, dp, b};
}

inline std::vector<cplx> quadratic_roots(cplx b, cplx c) {
  // z^2 + b z + c
  cplx disc = std::sqrt(b * b - 4.0 * c);
  cplx q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
  if (q == 0.0) return {0.0, 0.0};
  return {q, c / q};
}

// Roots of the monic polynomial sum c_k z^k whose root scale is O(1).
inline std::vector<cplx> aberth(const std::vector<cplx>& c, int max_iter = 500) {
  const int d = static_cast<int>(c.size()) - 1;
  if (d == 1) return {-c[0]};
  if (d == 2) return quadratic_roots(c[1], c[0]);

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  double r0 = std::pow(std::max(std::abs(c[0]), 1e-30), 1.0 / d);
  r0 = std::clamp(r0, 0.1, 2.0);
  std::vector<cplx> z(d);
  for (int j = 0; j < d; ++j) {
    double ang = 2.0 * M_PI * j / d + 0.4;
    z[j] = r0 * (1.0 + jitter(rng)) * std::polar(1.0, ang + jitter(rng));
  }

  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<char> done(d, 0);
  int settled_sweeps = 0;
  for (int it = 0; it < max_iter; ++it) {
    bool all = true;
    for (int i = 0; i < d; ++i) {
      HornerOut h = horner(c, z[i]);
      if (std::abs(h.p) <= 8.0 * d * eps * h.bound) {
        done[i] = 1;
        continue;
      }
      done[i] = 0;
      all = false;
      cplx ratio;
      if (h.dp == 0.0) {
        ratio = cplx(1e-3, 1e-3) * (1.0 + std::abs(z[i]));
      } else {
        ratio = h.p / h.dp;
      }
      cplx sum = 0.0;
      for (int j = 0; j < d; ++j)
        if (j != i) {
          cplx diff = z[i] - z[j];
          if (diff != 0.0) sum += 1.0 / diff;
        }
      cplx w = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
      z[i] -= w;
    }
    if (all && ++settled_sweeps >= 2) return z;
  }
  for (int i = 0; i < d; ++i)
    if (!done[i]) throw Error(Errc::NoConvergence, "Aberth iteration did not converge");
  return z;
}

// Taylor coefficients t_0..t_k of sum c_i z^i at z, with error bounds
// built from |c_i| and |z|.
inline void taylor_at(const std::vector<cplx>& c, cplx z, int k, std::vector<cplx>& t, std::vector<double>& b) {
  const int d = static_cast<int>(c.size()) - 1;
  t = c;
  b.resize(c.size());
  for (int i = 0; i <= d; ++i) b[i] = std::abs(c[i]);
  const double az = std::abs(z);
  for (int j = 0; j <= std::min(k, d - 1); ++j)
    for (int i = d - 1; i >= j; --i) {
      t[i] += t[i + 1] * z;
      b[i] += b[i + 1] * az;
    }
}

// Polishes z as a simple root of the (k-1)-th derivative, then checks
// that the first k Taylor coefficients sit at rounding level.
inline bool is_multiple_root(const std::vector<cplx>& c, cplx& z, int k) {
  const int d = static_cast<int>(c.size()) - 1;
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<cplx> t;
  std::vector<double> b;
  for (int it = 0; it < 8; ++it) {
    taylor_at(c, z, k, t, b);
    if (t[k] == 0.0) break;
    cplx step = t[k - 1] / (static_cast<double>(k) * t[k]);
    z -= step;
    if (std::abs(step) <= eps * (1.0 + std::abs(z))) break;
  }
  taylor_at(c, z, k, t, b);
  for (int j = 0; j < k; ++j)
    if (std::abs(t[j]) > 32.0 * d * eps * b[j]) return false;
  return true;
}

// Aberth leaves a k-fold root scattered at radius ~eps^(1/k); groups that
// pass the multiplicity test are replaced by their centroid.
inline void merge_multiple_roots(const std::vector<cplx>& c, std::vector<cplx>& z, double radius) {
  const int d = static_cast<int>(z.size());
  std::vector<char> taken(d, 0);
  for (int i = 0; i < d; ++i) {
    if (taken[i]) continue;
    std::vector<std::pair<double, int>> near;
    for (int j = 0; j < d; ++j)
      if (!taken[j] && j != i && std::abs(z[j] - z[i]) <= radius * (1.0 + std::abs(z[i])))
        near.push_back({std::abs(z[j] - z[i]), j});
    if (near.empty()) continue;
    std::sort(near.begin(), near.end());
    for (int k = static_cast<int>(near.size()) + 1; k >= 2; --k) {
      cplx centre = z[i];
      for (int m = 0; m + 1 < k; ++m) centre += z[near[m].second];
      centre /= static_cast<double>(k);
      if (!is_multiple_root(c, centre, k) || std::abs(centre - z[i]) > radius * (1.0 + std::abs(z[i]))) continue;
      taken[i] = 1;
      z[i] = centre;
      for (int m = 0; m + 1 < k; ++m) taken[near[m].second] = 1, z[near[m].second] = centre;
      break;
    }
  }
}

}  // namespace detail

struct RootOptions {
  double cluster_tol = 1e-7;
  double real_tol = 1e-9;
  double multiple_radius = 0.2;
  int max_iter = 500;
};

// Roots of sum_k c[k] z^k (c[d] = 1), with multiplicities repeated.
inline std::vector<cplx> poly_roots(std::vector<cplx> c, const RootOptions& opt = {}) {
  const int d = static_cast<int>(c.size()) - 1;
  if (d < 0) throw Error(Errc::InvalidArgument, "empty polynomial");
  if (c[d] != 1.0) {
    if (c[d] == 0.0) throw Error(Errc::InvalidArgument, "leading coefficient is zero");
    for (auto& x : c) x /= c[d];
  }
  std::vector<cplx> roots;
  int zeros = 0;
  while (zeros < d && c[zeros] == 0.0) ++zeros;
  roots.assign(zeros, 0.0);
  std::vector<cplx> red(c.begin() + zeros, c.end());
  const int m = d - zeros;
  if (m == 0) return roots;

  double s = 0.0;
  for (int k = 0; k < m; ++k) s = std::max(s, std::pow(std::abs(red[k]), 1.0 / (m - k)));
  std::vector<cplx> b(m + 1);
  for (int k = 0; k <= m; ++k) b[k] = red[k] / std::pow(s, m - k);

  bool real_poly = true;
  for (int k = 0; k < m; ++k)
    if (std::abs(b[k].imag()) > 1e-12 * detail::binom(m, k)) real_poly = false;
  if (real_poly)
    for (auto& x : b) x = x.real();

  std::vector<cplx> mu = detail::aberth(b, opt.max_iter);
  detail::merge_multiple_roots(b, mu, opt.multiple_radius);

  if (real_poly) {
    std::vector<int> up, lo;
    for (int i = 0; i < m; ++i) {
      double t = opt.real_tol * (1.0 + std::abs(mu[i]));
      if (mu[i].imag() > t) up.push_back(i);
      else if (mu[i].imag() < -t) lo.push_back(i);
      else mu[i] = mu[i].real();
    }
    std::vector<char> used(lo.size(), 0);
    for (int i : up) {
      int best = -1;
      double bd = 0.0;
      for (std::size_t j = 0; j < lo.size(); ++j) {
        if (used[j]) continue;
        double dd = std::abs(mu[i] - std::conj(mu[lo[j]]));
        if (best < 0 || dd < bd) best = static_cast<int>(j), bd = dd;
      }
      if (best < 0) continue;
      used[best] = 1;
      cplx avg = 0.5 * (mu[i] + std::conj(mu[lo[best]]));
      mu[i] = avg;
      mu[lo[best]] = std::conj(avg);
    }
  }

  // single-linkage clusters, each replaced by its mean
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double t = opt.cluster_tol * (1.0 + std::max(std::abs(mu[i]), std::abs(mu[j])));
      if (std::abs(mu[i] - mu[j]) <= t) parent[find(i)] = find(j);
    }
  std::vector<cplx> sum(m, 0.0);
  std::vector<int> cnt(m, 0);
  for (int i = 0; i < m; ++i) {
    sum[find(i)] += mu[i];
    cnt[find(i)]++;
  }
  for (int i = 0; i < m; ++i) {
    int r = find(i);
    if (cnt[r] > 1) {
      cplx mean = sum[r] / static_cast<double>(cnt[r]);
      if (real_poly && std::abs(mean.imag()) <= opt.real_tol * (1.0 + std::abs(mean))) mean = mean.real();
      mu[i] = mean;
    }
  }
  for (auto& x : mu) roots.push_back(x * s);
  return roots;
}

// Eigenvalues with multiplicity, largest modulus first.
struct Spectrum {
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  double max_abs() const { return values.empty() ? 0.0 : std::abs(values.front()); }
  // the k values of largest modulus (zero-padded)
  std::vector<cplx> top(std::size_t k) const {
    std::vector<cplx> out(values.begin(), values.begin() + std::min(k, values.size()));
    out.resize(k, 0.0);
    return out;
  }
};

inline void sort_by_modulus(std::vector<cplx>& v) {
  std::stable_sort(v.begin(), v.end(), [](cplx a, cplx b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

// Coefficients whose size is at rounding level relative to frob_norm(A)
// are treated as exact zeros, so rank-deficient matrices report exact
// zero eigenvalues instead of a ring of spurious small roots.
inline std::vector<cplx> deflated_coeffs(const CharPoly& cp, double scale) {
  std::vector<cplx> c = cp.coeffs;
  const int d = static_cast<int>(c.size()) - 1;
  if (scale == 0.0) {
    for (int k = 0; k < d; ++k) c[k] = 0.0;
    return c;
  }
  for (int k = 0; k < d; ++k) {
    double ref = 1e-11 * detail::binom(d, k) * std::pow(scale, d - k);
    if (std::abs(c[k]) > ref) break;
    c[k] = 0.0;
  }
  return c;
}

inline Spectrum eigenvalues(const CMatrix& a, const RootOptions& opt = {}) {
  if (!a.square()) throw Error(Errc::DimMismatch, "eigenvalues need a square matrix");
  Spectrum sp;
  if (a.rows() == 0) return sp;
  CharPoly cp = faddeev_leverrier(a);
  sp.values = poly_roots(deflated_coeffs(cp, frob_norm(a)), opt);
  sort_by_modulus(sp.values);
  return sp;
}

inline double spectral_weight(const Spectrum& s) {
  double t = 0.0;
  for (auto& x : s.values) t += std::abs(x);
  return t;
}

inline double spectral_weight_sq(const Spectrum& s) {
  double t = 0.0;
  for (auto& x : s.values) t += std::norm(x);
  return t;
}

inline double spectral_weight(const CMatrix& a) { return spectral_weight(eigenvalues(a)); }
inline double spectral_weight_sq(const CMatrix& a) { return spectral_weight_sq(eigenvalues(a)); }

// Pauli matrices sigma_1..3 and the 2x2 identity.
inline CMatrix pauli(int k) {
  using namespace std::complex_literals;
  switch (k) {
    case 0: return CMatrix::identity(2);
    case 1: return CMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    case 2: return CMatrix::from_rows({{0.0, -1i}, {1i, 0.0}});
    case 3: return CMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  }
  throw Error(Errc::InvalidArgument, "pauli index out of range");
}

inline CMatrix signature_matrix(int n) {
  CMatrix s(2 * n);
  for (int i = 0; i < 2 * n; ++i) s(i, i) = i < n ? 1.0 : -1.0;
  return s;
}

}  // namespace cvp
