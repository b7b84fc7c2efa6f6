#pragma once

// JSON schemas for configurations, fermion systems, negative definite
// measures, optimization problems and results. Needs nlohmann/json.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cvp/catalogue.hpp"
#include "cvp/fermion.hpp"
#include "cvp/homogeneous.hpp"
#include "cvp/measure.hpp"
#include "cvp/optimize.hpp"

namespace cvp::io {

using json = nlohmann::json;

inline std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path);
  if (!in) throw Error(Errc::Validation, "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Parses JSON and reports failures with line and column.
inline json parse(const std::string& text, const std::string& origin = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw Error(Errc::Validation,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" + e.what() + ")");
  }
}

inline json load(const std::string& path) { return parse(read_text(path), path == "-" ? "<stdin>" : path); }

namespace detail {

inline const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::Validation, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double num(const json& j, const char* what) {
  if (!j.is_number()) throw Error(Errc::Validation, std::string(what) + " must be a number");
  return j.get<double>();
}

inline int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw Error(Errc::Validation, std::string(what) + " must be an integer");
  return j.get<int>();
}

inline std::vector<double> num_array(const json& j, const char* what) {
  if (!j.is_array()) throw Error(Errc::Validation, std::string(what) + " must be an array");
  std::vector<double> out;
  for (auto& x : j) out.push_back(num(x, what));
  return out;
}

}  // namespace detail

// {"re": [[...]], "im": [[...]]}; "im" may be omitted.
inline CMatrix matrix_from_json(const json& j, int rows, int cols) {
  const json& re = detail::need(j, "re");
  if (!re.is_array() || static_cast<int>(re.size()) != rows)
    throw Error(Errc::Validation, "matrix must have " + std::to_string(rows) + " rows");
  const bool has_im = j.contains("im");
  if (has_im && (!j["im"].is_array() || j["im"].size() != re.size()))
    throw Error(Errc::Validation, "'im' must match the shape of 're'");
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    auto r = detail::num_array(re[i], "matrix entry");
    if (static_cast<int>(r.size()) != cols) throw Error(Errc::Validation, "matrix must have " + std::to_string(cols) + " columns");
    std::vector<double> im(cols, 0.0);
    if (has_im) {
      im = detail::num_array(j["im"][i], "matrix entry");
      if (static_cast<int>(im.size()) != cols) throw Error(Errc::Validation, "'im' must match the shape of 're'");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = cplx(r[c], im[c]);
  }
  return m;
}

inline json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array(), s = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      r.push_back(m(i, c).real());
      s.push_back(m(i, c).imag());
    }
    re.push_back(r);
    im.push_back(s);
  }
  return {{"re", re}, {"im", im}};
}

// {"f", "n", "beta"?, "points": [{"w", "v": [x, y, z]} | {"w", "re", "im"}]}
inline DiscreteConfig config_from_json(const json& j) {
  DiscreteConfig c;
  c.f = j.contains("f") ? detail::integer(j["f"], "f") : 2;
  c.n = j.contains("n") ? detail::integer(j["n"], "n") : 1;
  if (j.contains("beta")) c.beta = detail::num(j["beta"], "beta");
  if (c.n < 1 || c.f < 2 * c.n || c.f > kMaxDim) throw Error(Errc::Validation, "need 1 <= n and 2n <= f <= 16");
  const json& pts = detail::need(j, "points");
  if (!pts.is_array() || pts.empty()) throw Error(Errc::Validation, "'points' must be a non-empty array");
  for (auto& pt : pts) {
    double w = detail::num(detail::need(pt, "w"), "w");
    if (!(w > 0.0)) throw Error(Errc::Validation, "weights must be positive");
    if (pt.contains("v")) {
      if (c.f != 2) throw Error(Errc::Validation, "sphere points need f = 2");
      auto v = detail::num_array(pt["v"], "v");
      if (v.size() != 3) throw Error(Errc::Validation, "'v' needs three components");
      double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      if (std::abs(r - 1.0) > 1e-9) throw Error(Errc::Validation, "'v' must be a unit vector");
      c.points.push_back({w, pauli_embed({v[0], v[1], v[2]}, c.beta.value_or(0.0))});
    } else {
      c.points.push_back({w, matrix_from_json(pt, c.f, c.f)});
    }
  }
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }
  return c;
}

inline json config_to_json(const DiscreteConfig& c) {
  json j{{"f", c.f}, {"n", c.n}};
  if (c.beta) j["beta"] = *c.beta;
  json pts = json::array();
  for (auto& pt : c.points) {
    json p = matrix_to_json(pt.p);
    p["w"] = pt.w;
    pts.push_back(p);
  }
  j["points"] = pts;
  return j;
}

inline json vec_to_json(const CVec& v) {
  json re = json::array(), im = json::array();
  for (auto& x : v) re.push_back(x.real()), im.push_back(x.imag());
  return {{"re", re}, {"im", im}};
}

inline CVec vec_from_json(const json& j, int d) {
  auto re = detail::num_array(detail::need(j, "re"), "re");
  std::vector<double> im(re.size(), 0.0);
  if (j.contains("im")) im = detail::num_array(j["im"], "im");
  if (static_cast<int>(re.size()) != d || im.size() != re.size())
    throw Error(Errc::Validation, "spinor must have 2n components");
  CVec v(d);
  for (int a = 0; a < d; ++a) v[a] = cplx(re[a], im[a]);
  return v;
}

// {"n", "f", "sites": [{"w", "label"?}], "waves": [[spinor per site] per wave function]}
inline FermionSystem fermion_from_json(const json& j) {
  FermionSystem s;
  s.space.n = detail::integer(detail::need(j, "n"), "n");
  s.f = detail::integer(detail::need(j, "f"), "f");
  if (s.space.n < 1 || 2 * s.space.n > kMaxDim) throw Error(Errc::Validation, "n out of range");
  for (auto& site : detail::need(j, "sites")) {
    double w = detail::num(detail::need(site, "w"), "w");
    if (!(w > 0.0)) throw Error(Errc::Validation, "weights must be positive");
    s.sites.push_back({w, site.value("label", "x" + std::to_string(s.sites.size()))});
  }
  for (auto& psi : detail::need(j, "waves")) {
    Wave wv;
    for (auto& v : psi) wv.push_back(vec_from_json(v, s.space.dim()));
    s.waves.push_back(std::move(wv));
  }
  try {
    validate(s);
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }
  return s;
}

inline json fermion_to_json(const FermionSystem& s) {
  json sites = json::array();
  for (auto& x : s.sites) sites.push_back({{"w", x.w}, {"label", x.label}});
  json waves = json::array();
  for (auto& psi : s.waves) {
    json a = json::array();
    for (auto& v : psi) a.push_back(vec_to_json(v));
    waves.push_back(a);
  }
  return {{"n", s.space.n}, {"f", s.f}, {"sites", sites}, {"waves", waves}};
}

// {"n", "khat_radius", "support": [{"p": [4 reals], "re", "im"}]}
inline NegDefMeasure negdef_from_json(const json& j) {
  NegDefMeasure nu;
  nu.n = detail::integer(detail::need(j, "n"), "n");
  nu.khat_radius = detail::num(detail::need(j, "khat_radius"), "khat_radius");
  if (nu.n < 1 || 2 * nu.n > kMaxDim) throw Error(Errc::Validation, "n out of range");
  for (auto& s : detail::need(j, "support")) {
    auto p = detail::num_array(detail::need(s, "p"), "p");
    if (p.size() != 4) throw Error(Errc::Validation, "'p' needs four components");
    nu.support.push_back({{p[0], p[1], p[2], p[3]}, matrix_from_json(s, 2 * nu.n, 2 * nu.n)});
  }
  try {
    check_negative_definite(nu);
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }
  return nu;
}

inline json negdef_to_json(const NegDefMeasure& nu) {
  json sup = json::array();
  for (auto& s : nu.support) {
    json e = matrix_to_json(s.w);
    e["p"] = {s.p[0], s.p[1], s.p[2], s.p[3]};
    sup.push_back(e);
  }
  return {{"n", nu.n}, {"khat_radius", nu.khat_radius}, {"support", sup}};
}

inline json scalar_measure_to_json(const ScalarMeasure& m) { return {{"x", m.x}, {"w", m.w}}; }

inline json example_output_to_json(const ExampleOutput& out) {
  if (auto* c = std::get_if<DiscreteConfig>(&out)) return config_to_json(*c);
  if (auto* nu = std::get_if<NegDefMeasure>(&out)) return negdef_to_json(*nu);
  return scalar_measure_to_json(std::get<ScalarMeasure>(out));
}

inline OptimOptions options_from_json(const json& j, OptimOptions o = {}) {
  if (!j.is_object()) return o;
  if (j.contains("max_iters")) o.max_iters = detail::integer(j["max_iters"], "max_iters");
  if (j.contains("restarts")) o.restarts = detail::integer(j["restarts"], "restarts");
  if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("step")) o.step = detail::num(j["step"], "step");
  if (j.contains("gtol")) o.gtol = detail::num(j["gtol"], "gtol");
  if (j.contains("anneal_steps")) o.anneal_steps = detail::integer(j["anneal_steps"], "anneal_steps");
  if (j.contains("anneal_t0")) o.anneal_t0 = detail::num(j["anneal_t0"], "anneal_t0");
  if (j.contains("anneal_cool")) o.anneal_cool = detail::num(j["anneal_cool"], "anneal_cool");
  return o;
}

// A problem file either asks for the sphere minimizer
// {"objective": "sphere", "m", "beta"} or describes a general problem.
struct ProblemFile {
  bool sphere = false;
  int m = 1;
  double beta = 0.0;
  OptimProblem general;
  OptimOptions options;
};

inline ProblemFile problem_from_json(const json& j) {
  ProblemFile pf;
  std::string obj = j.value("objective", std::string("S"));
  pf.options = options_from_json(j.value("options", json::object()));
  if (obj == "sphere") {
    pf.sphere = true;
    pf.m = detail::integer(detail::need(j, "m"), "m");
    pf.beta = j.contains("beta") ? detail::num(j["beta"], "beta") : 0.0;
    return pf;
  }
  OptimProblem& p = pf.general;
  if (obj == "S") p.objective = Objective::S;
  else if (obj == "T_plus_nuS") p.objective = Objective::TPlusNuS, p.nu = detail::num(detail::need(j, "nu"), "nu");
  else if (obj == "S_with_T_cap") p.objective = Objective::SWithTCap, p.cap = detail::num(detail::need(j, "cap"), "cap");
  else throw Error(Errc::Validation, "unknown objective '" + obj + "'");
  for (auto& c : j.value("constraints", json::array())) {
    std::string s = c.get<std::string>();
    if (s == "C1") p.c1 = true;
    else if (s == "C2") p.c2 = true;
    else throw Error(Errc::Validation, "unknown constraint '" + s + "'");
  }
  if (j.contains("c3")) p.c3 = detail::num_array(j["c3"], "c3");
  p.m = detail::integer(detail::need(j, "m"), "m");
  p.f = j.contains("f") ? detail::integer(j["f"], "f") : 2;
  p.n = j.contains("n") ? detail::integer(j["n"], "n") : 1;
  if (j.contains("beta")) p.beta = detail::num(j["beta"], "beta");
  if (j.contains("start")) p.start = config_from_json(j["start"]);
  p.options = pf.options;
  return pf;
}

inline json residuals_to_json(const ConstraintReport& r) {
  json j{{"c1", r.c1}, {"c2", r.c2}, {"weight_defect", r.weight_defect}};
  if (r.c3) j["c3"] = *r.c3;
  return j;
}

inline json result_to_json(const OptimResult& r) {
  json j{{"value", r.value},
         {"converged", r.converged},
         {"best_restart", r.best_restart},
         {"residuals", residuals_to_json(r.residuals)},
         {"config", config_to_json(r.config)}};
  if (!r.sphere.empty()) {
    json v = json::array();
    for (auto& x : r.sphere) v.push_back({x[0], x[1], x[2]});
    j["sphere"] = v;
  }
  return j;
}

inline json moments_to_json(const MomentData& md) {
  json rays = json::array();
  for (auto& r : md.rays) {
    json e = matrix_to_json(r.dir);
    e["m0"] = r.a0;
    e["m1"] = r.a1;
    e["m2"] = r.a2;
    rays.push_back(e);
  }
  return {{"f", md.f},
          {"n", md.n},
          {"norm", md.norm == RayNorm::Frobenius ? "frobenius" : "operator"},
          {"zero_mass", md.zero_mass},
          {"total_mass", md.total_mass()},
          {"rays", rays}};
}

}  // namespace cvp::io
