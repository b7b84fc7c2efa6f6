// Command-line front end: action, minimize, spectrum, example, moments,
// fermion, homogeneous. Exit codes: 0 success, 2 validation error,
// 3 tolerance or convergence failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cvp/catalogue.hpp"
#include "cvp/io.hpp"
#include "cvp/optimize.hpp"

using namespace cvp;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitTolerance = 3;

struct ToleranceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Output {
  std::string format;  // empty: csv for spectrum, json otherwise
  std::string path;  // empty: stdout

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw Error(Errc::Validation, "cannot write '" + path + "'");
    out << text;
  }
};

// Flat key/value report in either format.
std::string report(const std::vector<std::pair<std::string, double>>& rows, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    os << "quantity,value\n";
    for (auto& [k, v] : rows) os << k << ',' << fmt(v) << '\n';
  } else {
    json j = json::object();
    for (auto& [k, v] : rows) j[k] = v;
    os << j.dump(2) << '\n';
  }
  return os.str();
}

int cmd_action(const std::string& path, const Output& out) {
  DiscreteConfig c = io::config_from_json(io::load(path));
  Functionals fs = functionals(c);
  ConstraintReport r = check_constraints(c);
  std::map<std::string, int> census{{"spacelike", 0}, {"timelike", 0}, {"lightlike", 0}};
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j)
      ++census[to_string(classify(c.points[i].p, c.points[j].p, c.n))];
  std::vector<std::pair<std::string, double>> rows{{"S", fs.S}, {"T", fs.T}, {"c1", r.c1}, {"c2", r.c2},
                                                   {"weight_defect", r.weight_defect}};
  for (auto& [k, v] : census) rows.push_back({"pairs_" + k, v});
  out.write(report(rows, out.format));
  return 0;
}

int cmd_minimize(const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> restarts,
                 const std::string& trace_path, const Output& out) {
  io::ProblemFile pf = io::problem_from_json(io::load(path));
  OptimOptions o = pf.options;
  if (seed) o.seed = *seed;
  if (restarts) o.restarts = *restarts;
  OptimResult res;
  if (pf.sphere) {
    res = minimize_sphere(pf.m, pf.beta, o);
  } else {
    pf.general.options = o;
    res = minimize_general(pf.general);
  }
  if (out.format == "csv") {
    out.write(report({{"value", res.value}, {"converged", res.converged ? 1.0 : 0.0},
                      {"c1", res.residuals.c1}, {"c2", res.residuals.c2}},
                     "csv"));
  } else {
    out.write(io::result_to_json(res).dump(2) + "\n");
  }
  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    if (!t) throw Error(Errc::Validation, "cannot write '" + trace_path + "'");
    t << "restart,outer,iter,value,grad_norm,step\n";
    for (auto& row : res.trace)
      t << row.restart << ',' << row.outer << ',' << row.iter << ',' << fmt(row.value) << ',' << fmt(row.grad_norm)
        << ',' << fmt(row.step) << '\n';
  }
  return 0;
}

int cmd_spectrum(double bmin, double bmax, int steps, int lmax, bool find_neg, const Output& out) {
  if (steps < 1) throw Error(Errc::Validation, "--beta-steps must be positive");
  if (bmax < bmin) throw Error(Errc::Validation, "--beta-max must not be below --beta-min");
  std::ostringstream os;
  json arr = json::array();
  if (out.format == "csv") os << "beta,l,lambda" << (find_neg ? ",l_star,lambda_star" : "") << '\n';
  for (int s = 0; s < steps; ++s) {
    double beta = steps == 1 ? bmin : bmin + (bmax - bmin) * s / (steps - 1);
    auto tab = lambda_table(beta, lmax);
    std::optional<NegativeEigen> neg;
    if (find_neg && beta > 0.0) {
      try {
        neg = find_negative(beta, lmax);
      } catch (const Error& e) {
        if (e.code() != Errc::NoNegativeFound) throw;
      }
    }
    for (int l = 0; l <= lmax; ++l) {
      if (out.format == "csv") {
        os << fmt(beta) << ',' << l << ',' << fmt(tab[l]);
        if (find_neg) os << ',' << (neg ? std::to_string(neg->l) : "") << ',' << (neg ? fmt(neg->lambda) : "");
        os << '\n';
      } else {
        json row{{"beta", beta}, {"l", l}, {"lambda", tab[l]}};
        if (find_neg && neg) row["l_star"] = neg->l, row["lambda_star"] = neg->lambda;
        arr.push_back(row);
      }
    }
  }
  out.write(out.format == "csv" ? os.str() : arr.dump(2) + "\n");
  return 0;
}

int cmd_example(const std::string& name, const Params& params, bool verify, bool dump, const Output& out) {
  ExampleCase ec = make_example(name, params);
  if (dump) {
    out.write(io::example_output_to_json(ec.output).dump(2) + "\n");
    return 0;
  }
  auto got = evaluate_example(ec);
  auto lines = verify_example(ec, got);
  bool ok = true;
  std::ostringstream os;
  if (out.format == "csv") {
    os << "quantity,value,expected,error,tolerance,ok\n";
    for (auto& [k, v] : got) {
      auto it = std::find_if(lines.begin(), lines.end(), [&](const VerifyLine& l) { return l.key == k; });
      os << k << ',' << fmt(v);
      if (it != lines.end()) os << ',' << fmt(it->expected) << ',' << fmt(it->err) << ',' << fmt(it->tol) << ',' << it->ok;
      else os << ",,,,";
      os << '\n';
    }
  } else {
    json j{{"example", name}, {"params", ec.params}, {"values", got}};
    json checks = json::array();
    for (auto& l : lines)
      checks.push_back({{"quantity", l.key}, {"expected", l.expected}, {"value", l.got}, {"error", l.err},
                        {"tolerance", l.tol}, {"ok", l.ok}});
    j["checks"] = checks;
    os << j.dump(2) << '\n';
  }
  for (auto& l : lines) ok = ok && l.ok;
  out.write(os.str());
  if (verify && !ok) throw ToleranceFailure("example values outside tolerance");
  return 0;
}

int cmd_moments(const std::string& path, const std::string& norm, const Output& out) {
  DiscreteConfig c = io::config_from_json(io::load(path));
  RayNorm rn = norm == "operator" ? RayNorm::Operator : RayNorm::Frobenius;
  MomentData md = moments(c, rn);
  MomentCheck mc = moment_inequalities(md);
  json j = io::moments_to_json(md);
  j["inequality"] = {{"sets_checked", mc.sets_checked}, {"violations", mc.violations}, {"worst_slack", mc.worst_slack}};
  j["S_from_moments"] = action_from_moments(md);
  j["T_from_moments"] = T_from_moments(md);
  if (out.format == "csv") {
    std::ostringstream os;
    os << "ray,m0,m1,m2\n";
    for (std::size_t k = 0; k < md.rays.size(); ++k)
      os << k << ',' << fmt(md.rays[k].a0) << ',' << fmt(md.rays[k].a1) << ',' << fmt(md.rays[k].a2) << '\n';
    out.write(os.str());
  } else {
    out.write(j.dump(2) + "\n");
  }
  return 0;
}

double roundtrip_residual(const DiscreteConfig& c, const FermionSystem& s) {
  double worst = 0.0;
  for (std::size_t x = 0; x < c.points.size(); ++x)
    worst = std::max(worst, max_abs_diff(local_correlation(s, x), c.points[x].p));
  return worst;
}

int cmd_fermion(const std::string& mode, const std::string& path, const Output& out) {
  json in = io::load(path);
  if (mode == "reconstruct") {
    DiscreteConfig c = io::config_from_json(in);
    FermionSystem s = reconstruct(c);
    json j = io::fermion_to_json(s);
    j["roundtrip_residual"] = roundtrip_residual(c, s);
    out.write(j.dump(2) + "\n");
  } else if (mode == "correlate") {
    FermionSystem s = io::fermion_from_json(in);
    DiscreteConfig c = correlations(s);
    FermionSystem back = reconstruct(c);
    json j = io::config_to_json(c);
    j["roundtrip_residual"] = roundtrip_residual(c, back);
    j["operator_trace"] = operator_trace(s);
    out.write(j.dump(2) + "\n");
  } else {
    throw Error(Errc::Validation, "fermion mode must be 'reconstruct' or 'correlate'");
  }
  return 0;
}

// "radial:t_max=..,t_panels=..,r_max=..,r_panels=..,nodes=.." or
// "lattice:n=..,h=.." (4-D grid of n^4 points, spacing h, centered).
HomDomain parse_domain(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(Errc::Validation, "domain entries are key=value");
      try {
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(Errc::Validation, "bad number in domain spec '" + item + "'");
      }
    }
  }
  auto get = [&](const char* k, double d) { return kv.count(k) ? kv[k] : d; };
  if (kind == "radial") {
    RadialDomain d;
    d.t_max = get("t_max", 20.0);
    d.t_panels = static_cast<int>(get("t_panels", 40));
    d.nodes = static_cast<int>(get("nodes", 6));
    double rmax = get("r_max", 20.0);
    int rp = static_cast<int>(get("r_panels", 40));
    d.r_breaks.clear();
    for (int k = 0; k <= rp; ++k) d.r_breaks.push_back(rmax * k / rp);
    return d;
  }
  if (kind == "lattice") {
    int n = static_cast<int>(get("n", 8));
    double h = get("h", 0.5);
    if (n < 1 || n > 64 || !(h > 0.0)) throw Error(Errc::Validation, "lattice needs 1 <= n <= 64 and h > 0");
    LatticeDomain d;
    const double off = 0.5 * (n - 1);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) {
            d.xi.push_back({(a - off) * h, (b - off) * h, (c - off) * h, (e - off) * h});
            d.w.push_back(h * h * h * h);
          }
    return d;
  }
  throw Error(Errc::Validation, "domain must be 'radial:...' or 'lattice:...'");
}

int cmd_homogeneous(const std::string& path, const std::string& domain, const Output& out) {
  NegDefMeasure nu = io::negdef_from_json(io::load(path));
  Functionals fs = hom_functionals(nu, parse_domain(domain));
  LocalBound lb = local_bound_check(nu);
  out.write(report({{"S", fs.S},
                    {"T", fs.T},
                    {"trace_P0", local_density(nu)},
                    {"local_bound_lhs", lb.lhs},
                    {"local_bound_rhs", lb.rhs},
                    {"local_bound_holds", lb.holds() ? 1.0 : 0.0}},
                   out.format));
  return 0;
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::NoConvergence:
    case Errc::NonConvergence:
    case Errc::NoNegativeFound:
      return kExitTolerance;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal variational principles: functionals, minimizers, spectra and worked examples"};
  app.require_subcommand(1);
  app.fallthrough();
  int nthreads = 0;
  Output out;
  app.add_option("--threads", nthreads, "worker threads (default: CAL_THREADS or 1)");
  app.add_option("--format", out.format, "output format (default: csv for spectrum, json otherwise)")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", out.path, "output file (default: stdout)");

  std::string path;
  auto* action = app.add_subcommand("action", "S, T, constraint residuals and causal census of a configuration");
  action->add_option("config", path, "configuration JSON, '-' for stdin")->required();

  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::string trace_path;
  auto* minimize = app.add_subcommand("minimize", "minimize a problem; CSV trace columns: restart,outer,iter,value,grad_norm,step");
  minimize->add_option("problem", path, "problem JSON, '-' for stdin")->required();
  minimize->add_option("--seed", seed, "random seed");
  minimize->add_option("--restarts", restarts, "number of restarts");
  minimize->add_option("--trace", trace_path, "iteration log CSV");

  double bmin = 0.0, bmax = 0.0;
  int bsteps = 1, lmax = 20;
  bool find_neg = false;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues lambda_l(beta); CSV columns: beta,l,lambda[,l_star,lambda_star]");
  spectrum->add_option("--beta-min", bmin);
  spectrum->add_option("--beta-max", bmax);
  spectrum->add_option("--beta-steps", bsteps);
  spectrum->add_option("--l-max", lmax)->check(CLI::Range(0, kMaxL));
  spectrum->add_flag("--find-negative", find_neg, "add the most negative eigenvalue per beta");

  std::string ex_name;
  bool verify = false, dump = false;
  std::map<std::string, double> ex_opts;
  auto* example = app.add_subcommand("example", "generate a worked example and compare with its closed forms");
  example->add_option("name", ex_name)->required();
  for (const char* k : {"beta", "angle", "k", "nu", "tau", "N", "eps", "kappa", "L"})
    example->add_option_function<double>(std::string("--") + k, [&ex_opts, k](double v) { ex_opts[k] = v; });
  example->add_flag("--verify", verify, "exit 3 when a value is outside its tolerance");
  example->add_flag("--json", dump, "dump the generator output");

  std::string norm = "frobenius";
  auto* mom = app.add_subcommand("moments", "moment measures and their inequality check");
  mom->add_option("config", path)->required();
  mom->add_option("--norm", norm)->check(CLI::IsMember({"frobenius", "operator"}));

  std::string fmode;
  auto* ferm = app.add_subcommand("fermion", "reconstruct wave functions or compute local correlations");
  ferm->add_option("mode", fmode, "reconstruct | correlate")->required();
  ferm->add_option("file", path)->required();

  std::string domain = "radial";
  auto* hom = app.add_subcommand("homogeneous", "functionals of a negative definite measure");
  hom->add_option("measure", path)->required();
  hom->add_option("--domain", domain, "radial:t_max=..,t_panels=..,r_max=..,r_panels=..,nodes=.. | lattice:n=..,h=..");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  if (out.format.empty()) out.format = *spectrum ? "csv" : "json";
  set_threads(nthreads > 0 ? nthreads : threads_from_env(1));
  try {
    if (*action) return cmd_action(path, out);
    if (*minimize) return cmd_minimize(path, seed, restarts, trace_path, out);
    if (*spectrum) return cmd_spectrum(bmin, bmax, bsteps, lmax, find_neg, out);
    if (*example) return cmd_example(ex_name, ex_opts, verify, dump, out);
    if (*mom) return cmd_moments(path, norm, out);
    if (*ferm) return cmd_fermion(fmode, path, out);
    if (*hom) return cmd_homogeneous(path, domain, out);
  } catch (const ToleranceFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTolerance;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
