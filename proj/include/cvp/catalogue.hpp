#pragma once

// Worked examples as generators with their closed-form values. Each case
// carries its expected quantities and a tolerance per quantity so that
// evaluate() and verify() can be run uniformly from tests and the CLI.

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cvp/homogeneous.hpp"
#include "cvp/measure.hpp"
#include "cvp/spectral.hpp"

namespace cvp {

// Finite signed measure on the real line.
struct ScalarMeasure {
  std::vector<double> x, w;
  double moment(int k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
    return s;
  }
};

using ExampleOutput = std::variant<DiscreteConfig, NegDefMeasure, ScalarMeasure>;
using Params = std::map<std::string, double>;

struct Expectation {
  double value = 0.0;
  double tol = 1e-10;
  bool relative = false;
};

struct ExampleCase {
  std::string name;
  Params params;
  ExampleOutput output;
  std::map<std::string, Expectation> expected;
};

inline const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"two_point",       "illposed",          "divergent_tau",
                                              "identity_violation", "dirac_sphere_2d", "dirac_sphere_3d",
                                              "discontinuous_moments", "bubbling",    "dirac_cylinder"};
  return names;
}

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline CMatrix sigma_combo(double c0, double c1, double c2, double c3) {
  return CMatrix::identity(2) * c0 + pauli(1) * c1 + pauli(2) * c2 + pauli(3) * c3;
}

// Euclidean Dirac matrices of R^4: block-diag(sigma, -sigma) and the
// off-diagonal identity.
inline CMatrix euclid_gamma(int i) {
  CMatrix g(4);
  if (i == 4) {
    g(0, 2) = g(1, 3) = g(2, 0) = g(3, 1) = 1.0;
    return g;
  }
  CMatrix s = pauli(i);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      g(a, b) = s(a, b);
      g(2 + a, 2 + b) = -s(a, b);
    }
  return g;
}

inline double dirac_theta_max(double tau) { return std::acos(1.0 - 2.0 / (tau * tau)); }

// Profile of the Dirac sphere in c = cos(theta), without the cutoff.
inline double dirac_sphere_profile(double c, double tau) {
  return 2.0 * tau * tau * (1.0 + c) * (2.0 - tau * tau * (1.0 - c));
}

}  // namespace detail

// (1/2) int_0^theta_max L(cos t) sin t dt, by Gauss-Legendre in theta.
inline double dirac_sphere_2d_quadrature(double tau, int nodes = 64) {
  Quadrature q = gauss_legendre(nodes, 0.0, detail::dirac_theta_max(tau));
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    s += q.w[i] * detail::dirac_sphere_profile(std::cos(q.x[i]), tau) * std::sin(q.x[i]);
  return 0.5 * s;
}

// (2/pi) int_0^theta_max L(cos t) sin^2 t dt with the doubled profile of
// the four-dimensional case.
inline double dirac_sphere_3d_quadrature(double tau, int nodes = 64) {
  Quadrature q = gauss_legendre(nodes, 0.0, detail::dirac_theta_max(tau));
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    double st = std::sin(q.x[i]);
    s += q.w[i] * 2.0 * detail::dirac_sphere_profile(std::cos(q.x[i]), tau) * st * st;
  }
  return 2.0 / M_PI * s;
}

inline ExampleCase make_example(const std::string& name, const Params& params = {}) {
  using detail::param;
  ExampleCase ec;
  ec.name = name;
  ec.params = params;

  if (name == "two_point") {
    double beta = param(params, "beta", 0.0), angle = param(params, "angle", M_PI);
    if (!(beta >= 0.0 && beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in [0, 1)");
    ec.params = {{"beta", beta}, {"angle", angle}};
    DiscreteConfig c;
    c.beta = beta;
    c.points.push_back({0.5, pauli_embed({0.0, 0.0, 1.0}, beta)});
    c.points.push_back({0.5, pauli_embed({std::sin(angle), 0.0, std::cos(angle)}, beta)});
    ec.output = c;
    double b2 = 1.0 - beta * beta;
    ec.expected["S"] = {0.5 * (0.5 * b2 * b2 + lagrangian_profile(std::cos(angle), beta)), 1e-10};
    return ec;
  }

  if (name == "illposed") {
    double k = param(params, "k", 10.0);
    const int n = 1;
    double nu = param(params, "nu", -2.0 * n / (2.0 * n - 1.0) - 0.1);
    if (!(k >= 0.0)) throw Error(Errc::InvalidArgument, "k must be nonnegative");
    ec.params = {{"k", k}, {"nu", nu}};
    DiscreteConfig c;
    c.points = {{0.25, CMatrix::diag({k + 4, 0})},
                {0.25, CMatrix::diag({0, k + 4})},
                {0.25, CMatrix::diag({-k, 0})},
                {0.25, CMatrix::diag({0, -k})}};
    ec.output = c;
    // all chains are diagonal of rank one: sum |A|^2 = 2 ((k+4)^2 + k^2)^2
    double a2 = (k + 4) * (k + 4) + k * k;
    double sum_a2 = 2.0 * a2 * a2;
    double bracket = 1.0 + nu * (2.0 * n - 1.0) / (2.0 * n);
    ec.expected["T_plus_nuS"] = {bracket * sum_a2 / 16.0, 1e-10, true};
    ec.expected["bracket"] = {bracket, 1e-15};
    ec.expected["c2"] = {0.0, 1e-10};
    return ec;
  }

  if (name == "divergent_tau") {
    double tau = param(params, "tau", 1.0);
    ec.params = {{"tau", tau}};
    DiscreteConfig c;
    CMatrix x = pauli(1) * tau;
    c.points = {{0.25, CMatrix::diag({4, 0})}, {0.25, CMatrix::diag({0, 4})}, {0.25, x}, {0.25, x * -1.0}};
    ec.output = c;
    ec.expected["S"] = {16.0, 1e-10};
    ec.expected["c2"] = {0.0, 1e-10};
    return ec;
  }

  if (name == "identity_violation") {
    double tau = param(params, "tau", 2.0);
    if (!(tau > 1.0)) throw Error(Errc::InvalidArgument, "tau must exceed 1");
    ec.params = {{"tau", tau}};
    double q = std::sqrt(1.0 + tau * tau);
    DiscreteConfig c;
    c.points = {{1.0 / 3, detail::sigma_combo(3.0, 0.0, 0.0, 3.0 * q / tau)},
                {1.0 / 3, detail::sigma_combo(0.0, 0.0, 1.5 * q, -1.5 * q / tau)},
                {1.0 / 3, detail::sigma_combo(0.0, 0.0, -1.5 * q, -1.5 * q / tau)}};
    ec.output = c;
    ec.expected["S"] = {72.0 * (1.0 + tau * tau) / (tau * tau), 1e-10, true};
    ec.expected["c2"] = {0.0, 1e-10};
    return ec;
  }

  if (name == "dirac_sphere_2d") {
    double tau = param(params, "tau", 2.0);
    int N = static_cast<int>(param(params, "N", 4000));
    if (!(tau > 1.0)) throw Error(Errc::InvalidArgument, "tau must exceed 1");
    if (N < 1) throw Error(Errc::InvalidArgument, "N must be positive");
    ec.params = {{"tau", tau}, {"N", N}};
    DiscreteConfig c;
    for (const Vec3& v : fibonacci_sphere(N))
      c.points.push_back({1.0 / N, detail::sigma_combo(1.0, tau * v[0], tau * v[1], tau * v[2])});
    ec.output = c;
    double t2 = tau * tau;
    ec.expected["S"] = {4.0 - 4.0 / (3.0 * t2), 1e-2, true};
    ec.expected["T"] = {4.0 * t2 * (t2 - 2.0) + 12.0 - 8.0 / (3.0 * t2), 1e-2, true};
    ec.expected["S_quadrature"] = {4.0 - 4.0 / (3.0 * t2), 1e-10};
    ec.expected["c2"] = {0.0, 1e-2};
    return ec;
  }

  if (name == "dirac_sphere_3d") {
    double tau = param(params, "tau", 2.0);
    int N = static_cast<int>(param(params, "N", 1024));
    if (!(tau > 1.0)) throw Error(Errc::InvalidArgument, "tau must exceed 1");
    // hyperspherical angle chi by Gauss-Legendre with the sin^2 density,
    // the remaining S^2 by a Fibonacci lattice
    int n_chi = std::max(4, static_cast<int>(std::lround(std::cbrt(static_cast<double>(N)))));
    int n_s2 = std::max(1, N / n_chi);
    ec.params = {{"tau", tau}, {"N", n_chi * n_s2}};
    Quadrature qc = gauss_legendre(n_chi, 0.0, M_PI);
    auto s2 = fibonacci_sphere(n_s2);
    std::array<CMatrix, 4> g{detail::euclid_gamma(1), detail::euclid_gamma(2), detail::euclid_gamma(3),
                             detail::euclid_gamma(4)};
    DiscreteConfig c;
    c.f = 4;
    c.n = 2;
    for (std::size_t i = 0; i < qc.x.size(); ++i) {
      double sc = std::sin(qc.x[i]), cc = std::cos(qc.x[i]);
      double w = qc.w[i] * sc * sc * 2.0 / M_PI / n_s2;
      for (const Vec3& v : s2) {
        std::array<double, 4> x{sc * v[0], sc * v[1], sc * v[2], cc};
        CMatrix p = CMatrix::identity(4);
        for (int a = 0; a < 4; ++a) p += g[a] * (tau * x[a]);
        c.points.push_back({w, p});
      }
    }
    ec.output = c;
    double sq = dirac_sphere_3d_quadrature(tau);
    // the product grid only resolves the causal cone for moderate tau
    if (tau <= 5.0) ec.expected["S"] = {sq, 5e-2, true};
    if (tau >= 20.0) ec.expected["S_tau_asymptotic"] = {512.0 / (15.0 * M_PI), 5e-2, true};
    return ec;
  }

  if (name == "discontinuous_moments") {
    double tau = param(params, "tau", 2.0);
    if (!(tau > 1.0)) throw Error(Errc::InvalidArgument, "tau must exceed 1");
    ec.params = {{"tau", tau}};
    ScalarMeasure m;
    m.x = {0.0, 1.0, tau};
    m.w = {3.0 / tau, (tau - 4.0) / (tau - 1.0), 3.0 / (tau * tau - tau)};
    ec.output = m;
    ec.expected["moment0"] = {1.0, 1e-12};
    ec.expected["moment1"] = {1.0, 1e-12};
    ec.expected["moment2"] = {4.0, 1e-12};
    return ec;
  }

  if (name == "bubbling") {
    double eps = param(params, "eps", 0.1), kappa = param(params, "kappa", 1.0);
    int N = static_cast<int>(param(params, "N", 256));
    if (!(eps > 0.0 && eps < 0.5)) throw Error(Errc::InvalidArgument, "eps must lie in (0, 1/2)");
    if (!(kappa >= 0.0) || N < 1) throw Error(Errc::InvalidArgument, "need kappa >= 0 and N >= 1");
    ec.params = {{"eps", eps}, {"kappa", kappa}, {"N", N}};
    const double d = 1.0 - 2.0 * eps;
    const double pole = kappa / std::sqrt(eps) / d;
    DiscreteConfig c;
    c.points.push_back({eps, pauli(3) * -pole});
    for (int j = 0; j < N; ++j) {
      // midpoint of the j-th cell of (eps, 1 - eps], angle nu x with nu = 2 pi / d
      double x = eps + (j + 0.5) * d / N;
      double a = 2.0 * M_PI * x / d;
      c.points.push_back({d / N, detail::sigma_combo(1.0 / d, std::cos(a) / d, std::sin(a) / d, 0.0)});
    }
    c.points.push_back({eps, pauli(3) * pole});
    ec.output = c;
    ec.expected["S"] = {3.0 / (d * d), 1e-2, true};
    ec.expected["T"] = {6.0 / (d * d) + 16.0 * kappa * kappa / (d * d * d) + 16.0 * std::pow(kappa, 4) / std::pow(d, 4),
                        2e-2, true};
    ec.expected["c2"] = {0.0, 1e-9};
    ec.expected["pole_m0"] = {eps, 1e-12};
    ec.expected["pole_m2"] = {kappa * kappa, 2e-2, true};
    return ec;
  }

  if (name == "dirac_cylinder") {
    double tau = param(params, "tau", 2.0), L = param(params, "L", 1.0);
    ec.params = {{"tau", tau}, {"L", L}};
    ec.output = dirac_cylinder(tau, L);
    double t2 = tau * tau;
    ec.expected["T"] = {std::pow(M_PI, 3) * (3 * t2 * t2 + 10 * t2 + 15) / (90.0 * L), 5e-3, true};
    if (tau >= 20.0) ec.expected["S_L_tau_asymptotic"] = {3.0 * M_PI * M_PI / 5.0, 5e-2, true};
    ec.expected["trace_P0"] = {1.0, 1e-10};
    return ec;
  }

  throw Error(Errc::UnknownExample, "unknown example '" + name + "'");
}

// Index of the ray through +-sigma^3 in the moment data, or -1.
inline int find_ray(const MomentData& md, const CMatrix& dir) {
  CMatrix u = dir * (1.0 / frob_norm(dir));
  for (std::size_t k = 0; k < md.rays.size(); ++k) {
    CMatrix r = md.rays[k].dir * (1.0 / frob_norm(md.rays[k].dir));
    if (frob_norm(r - u) < 1e-9 || frob_norm(r + u) < 1e-9) return static_cast<int>(k);
  }
  return -1;
}

// Re-evaluates every expected quantity from the generator output.
inline std::map<std::string, double> evaluate_example(const ExampleCase& ec) {
  std::map<std::string, double> got;
  const std::string& nm = ec.name;
  if (auto* c = std::get_if<DiscreteConfig>(&ec.output)) {
    Functionals fs = functionals(*c);
    got["S"] = fs.S;
    got["T"] = fs.T;
    got["c2"] = check_constraints(*c).c2;
    if (nm == "illposed") {
      double nu = ec.params.at("nu");
      got["T_plus_nuS"] = fs.T + nu * fs.S;
      got["bracket"] = 1.0 + nu * (2.0 * c->n - 1.0) / (2.0 * c->n);
    }
    if (nm == "dirac_sphere_2d") got["S_quadrature"] = dirac_sphere_2d_quadrature(ec.params.at("tau"));
    if (nm == "dirac_sphere_3d") {
      double tau = ec.params.at("tau");
      got["S_tau_asymptotic"] = tau * dirac_sphere_3d_quadrature(tau);
    }
    if (nm == "bubbling") {
      MomentData md = moments(*c);
      int k = find_ray(md, pauli(3));
      got["pole_m0"] = k < 0 ? 0.0 : md.m0(k);
      got["pole_m2"] = k < 0 ? 0.0 : md.m2(k);
    }
  } else if (auto* nu = std::get_if<NegDefMeasure>(&ec.output)) {
    double tau = ec.params.at("tau"), L = ec.params.at("L");
    Functionals fs = hom_functionals(dirac_cylinder_kernel(tau, L), 2, dirac_cylinder_domain(tau, L));
    got["T"] = fs.T;
    got["S"] = fs.S;
    got["S_L_tau_asymptotic"] = fs.S * L * tau;
    got["trace_P0"] = local_density(*nu);
  } else if (auto* m = std::get_if<ScalarMeasure>(&ec.output)) {
    for (int k = 0; k < 3; ++k) got["moment" + std::to_string(k)] = m->moment(k);
  }
  return got;
}

struct VerifyLine {
  std::string key;
  double expected = 0.0, got = 0.0, err = 0.0, tol = 0.0;
  bool ok = false;
};

inline std::vector<VerifyLine> verify_example(const ExampleCase& ec, const std::map<std::string, double>& got) {
  std::vector<VerifyLine> out;
  for (auto& [key, ex] : ec.expected) {
    VerifyLine v;
    v.key = key;
    v.expected = ex.value;
    v.tol = ex.tol;
    auto it = got.find(key);
    v.got = it == got.end() ? std::nan("") : it->second;
    v.err = std::abs(v.got - ex.value);
    if (ex.relative) v.err /= std::max(std::abs(ex.value), 1e-300);
    v.ok = v.err <= ex.tol;
    out.push_back(v);
  }
  return out;
}

}  // namespace cvp
