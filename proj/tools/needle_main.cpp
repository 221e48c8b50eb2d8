#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "needle/acceptance.hpp"
#include "needle/curvature.hpp"
#include "needle/density.hpp"
#include "needle/errors.hpp"
#include "needle/io.hpp"
#include "needle/parallel.hpp"
#include "needle/perimeter.hpp"
#include "needle/spectral.hpp"
#include "needle/transport.hpp"
#include "needle/uncertainty.hpp"

using namespace needle;

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

// What a subcommand produced: JSON objects in order, whether every check held,
// and a JSON description of the input for the witness bundle.
struct Output {
  std::vector<std::string> items;
  bool holds = true;
  std::string input = "null";
  std::string text;  // plain output replacing the JSON (coeffs, suite)
};

struct Run {
  RunConfig cfg;
  bool tol_given = false;
  std::size_t jobs = 1;
};

std::string number_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_number(v[i]);
  return s + "]";
}

std::string function_json(const SignedFunction1D& f) {
  return "{\"nodes\":" + number_list(f.nodes()) + ",\"values\":" + number_list(f.values()) + "}";
}

std::string density_json(const WeightedInterval& w) {
  std::ostringstream o;
  write_density_json(o, w);
  return o.str();
}

void add_report(Output& out, const Run& run, InequalityReport r) {
  if (run.tol_given) {
    r.tol = run.cfg.tol;
    r.finalize();
  }
  out.holds = out.holds && r.holds;
  out.items.push_back(report_json(r));
}

void add_chain(Output& out, const ChainReport& c) {
  out.holds = out.holds && c.holds;
  out.items.push_back(chain_json(c));
}

// Built-in densities by name, otherwise a JSON or CSV file.
WeightedInterval make_density(const RunConfig& c) {
  const double D = c.D.value_or(1.0);
  const std::string& d = c.density;
  if (d.empty() || d == "lebesgue") return lebesgue(0.0, D);
  if (d == "sin2") return {0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 2.0}};
  if (d == "sin") return {0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 1.0}};
  if (d == "gauss") return {0.0, D, GaussLogDensity{1.0, 0.5 * D, 1.0}};
  if (d == "linear") return {0.0, D, PowerDensity{1.0, 0.0, 1.0}};
  if (d == "exp-10") return {0.0, D, ExpDensity{1.0, -10.0}};
  return read_density_file(d);
}

// --input file, otherwise the --fn generator on [a,b].
SignedFunction1D make_function(const RunConfig& c, double a, double b) {
  if (!c.inputs.empty()) return read_function_file(c.inputs.front());
  const double L = b - a;
  const double f = c.freq;
  const std::string fn = c.fn.empty() ? "sin" : c.fn;
  if (fn == "sin") {
    const auto n = static_cast<std::size_t>(std::max(2001.0, 256.0 * f + 1.0));
    return SignedFunction1D::sample([=](double x) { return std::sin(2.0 * pi * f * (x - a) / L); }, a, b, n);
  }
  if (fn == "cos-mode") {
    const auto n = static_cast<std::size_t>(std::max(2001.0, 256.0 * f + 1.0));
    return SignedFunction1D::sample([=](double x) { return std::cos(pi * f * (x - a) / L); }, a, b, n);
  }
  if (fn == "step-mollified") {
    return SignedFunction1D::sample([=](double x) { return -std::tanh(((x - a) / L - 0.5) / 1e-3); }, a, b, 4001);
  }
  if (fn == "pwl-random") {
    if (a != 0.0 || b != 1.0) throw DomainError("pwl-random lives on [0,1]");
    return random_pwl(c.seed).f;
  }
  throw DomainError("unknown --fn \"" + fn + "\" (sin, cos-mode, step-mollified, pwl-random)");
}

// Generated functions are brought to zero mean under h by an exponential tilt.
SignedFunction1D weighted_function(const RunConfig& c, const WeightedInterval& w) {
  auto f = make_function(c, w.a(), w.b());
  if (c.inputs.empty() && !w.is_constant()) f = tilt_corrected(f, &w);
  return f;
}

EigenBasis make_basis(const RunConfig& c, std::size_t min_modes) {
  const std::size_t grid = c.grid ? c.grid : 2000;
  if (!c.inputs.empty()) {
    std::ifstream in(c.inputs.front());
    if (!in) throw ParseError("cannot open " + c.inputs.front());
    auto spec = read_problem_json(in);
    if (c.grid) spec.problem.grid_n = c.grid;
    return {spec.problem, std::max(c.modes ? c.modes : spec.modes, min_modes)};
  }
  return {{make_density(c), grid}, std::max(c.modes ? c.modes : std::size_t{21}, min_modes)};
}

std::vector<std::size_t> sweep(const RunConfig& c, std::size_t first, std::size_t last) {
  if (c.index) return {c.index};
  std::vector<std::size_t> ks;
  for (std::size_t k = first; k <= last; ++k) ks.push_back(k);
  return ks;
}

ModeCoefficients parse_coeffs(const std::string& s) {
  ModeCoefficients out;
  std::stringstream ss(s.empty() ? "2:1,3:0.5" : s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("--coeffs expects k:a pairs, got \"" + item + "\"");
    try {
      out.emplace_back(std::stoul(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ParseError("--coeffs: malformed pair \"" + item + "\"");
    }
  }
  if (out.empty()) throw ParseError("--coeffs is empty");
  return out;
}

Output cmd_coeffs(const Run& run) {
  const auto& c = run.cfg;
  const double D = c.D.value_or(1.0);
  const std::map<std::string, std::function<double()>> table = {
      {"c_kd", [&] { return c_kd(c.K, D); }},
      {"c_knd", [&] { return c_knd(c.K, c.N, D); }},
      {"sigma", [&] { return sigma_coeff(c.t, c.K, c.N, c.theta).value(); }},
      {"tau", [&] { return tau_coeff(c.t, {c.K, Dimension(c.N)}, c.theta).value(); }},
      {"diameter", [&] { return max_diameter(c.K, c.N - 1.0).value(); }},
      {"heat", [&] { return heat_contraction_coeff(c.t, c.K, c.N); }},
      {"s_kappa", [&] { return s_kappa(c.K, c.theta); }},
  };
  Output out;
  std::ostringstream json;
  json << "{\"schema\":" << kReportSchema << ",\"K\":" << json_number(c.K) << ",\"N\":" << json_number(c.N)
       << ",\"D\":" << json_number(D) << ",\"t\":" << json_number(c.t) << ",\"theta\":" << json_number(c.theta);
  if (!c.what.empty() && c.what != "all") {
    const auto it = table.find(c.what);
    if (it == table.end()) throw DomainError("unknown --what \"" + c.what + "\"");
    const double v = it->second();
    out.text = json_number(v) + "\n";
    json << ",\"" << c.what << "\":" << json_number(v) << "}";
  } else {
    for (const auto& [name, f] : table) {
      std::string v;
      try {
        v = json_number(f());
      } catch (const Error& e) {
        v = json_string(e.what());
      }
      out.text += name + " " + v + "\n";
      json << ",\"" << name << "\":" << v;
    }
    json << "}";
  }
  out.items.push_back(json.str());
  return out;
}

std::string certificate_json(const std::string& check, const CertificateResult& c) {
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"check\":" << json_string(check)
    << ",\"passed\":" << (c.passed ? "true" : "false") << ",\"worst_slack\":" << json_number(c.worst_slack)
    << ",\"witness\":";
  if (c.witness) {
    o << "{\"x0\":" << json_number(c.witness->x0) << ",\"x1\":" << json_number(c.witness->x1)
      << ",\"t\":" << json_number(c.witness->t) << "}";
  } else {
    o << "null";
  }
  o << ",\"grid\":" << json_string(c.grid_spec) << ",\"reason\":" << json_string(c.reason)
    << ",\"evaluated\":" << c.evaluated << ",\"skipped\":" << c.skipped << "}";
  return o.str();
}

Output cmd_check_density(const Run& run) {
  const auto& c = run.cfg;
  const auto w = make_density(c);
  const std::size_t grid = c.grid ? c.grid : 64;
  const std::string what = c.what.empty() ? "cd" : c.what;
  CertificateResult r;
  if (what == "cd") {
    r = check_cd_density(w, c.K, c.N, grid);
  } else if (what == "mcp") {
    r = check_mcp_density(w, c.K, c.N, grid);
  } else if (what == "ratio") {
    r = ratio_bounds_check(w, c.K, c.N, grid);
  } else {
    throw DomainError("check-density --what must be cd, mcp or ratio");
  }
  Output out;
  out.items.push_back(certificate_json("check_density_" + what, r));
  out.holds = r.passed;
  out.input = density_json(w);
  return out;
}

Output cmd_w1(const Run& run) {
  const auto& c = run.cfg;
  Output out;
  if (c.density.empty()) {
    const auto f = make_function(c, 0.0, c.D.value_or(1.0));
    const auto pos = positive_part(f);
    const auto neg = negative_part(f);
    auto r = w1_diam_bound(pos, neg, f.b() - f.a());
    r.add("single_ray", single_ray_test(f).single_ray ? 1.0 : 0.0);
    add_report(out, run, r);
    out.input = function_json(f);
  } else {
    const auto w = make_density(c);
    const auto f = weighted_function(c, w);
    auto r = w1_diam_bound(positive_part(f, &w), negative_part(f, &w), w.length());
    r.add("single_ray", single_ray_test(f, &w).single_ray ? 1.0 : 0.0);
    add_report(out, run, r);
    out.input = "{\"function\":" + function_json(f) + ",\"density\":" + density_json(w) + "}";
  }
  return out;
}

Output cmd_perimeter(const Run& run) {
  const auto& c = run.cfg;
  const auto w = make_density(c);
  const auto f = make_function(c, w.a(), w.b());
  const auto nd = nodal_decompose(f);
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"check\":\"perimeter\",\"zeros\":" << number_list(nd.zeros)
    << ",\"boundary\":" << number_list(nd.boundary) << ",\"components\":[";
  for (std::size_t i = 0; i < nd.merged_intervals.size(); ++i) {
    o << (i ? "," : "") << "[" << json_number(nd.merged_intervals[i].first) << ","
      << json_number(nd.merged_intervals[i].second) << "]";
  }
  o << "],\"counting_perimeter\":" << json_number(counting_perimeter(nd))
    << ",\"weighted_perimeter\":" << json_number(weighted_perimeter(nd, w))
    << ",\"zero_plateau\":" << (nd.zero_plateau ? "true" : "false") << "}";
  Output out;
  out.items.push_back(o.str());
  return out;
}

Output cmd_verify(const Run& run) {
  const auto& c = run.cfg;
  Output out;
  if (c.mode == "basic") {
    const auto f = make_function(c, 0.0, c.D.value_or(1.0));
    auto r = verify_basic(f);
    if (c.fn == "pwl-random") r.seed = c.seed;
    add_report(out, run, r);
    out.input = function_json(f);
    return out;
  }
  const auto w = make_density(c);
  const auto f = weighted_function(c, w);
  add_report(out, run, c.mode == "cd" ? verify_cd(f, w, c.K) : verify_mcp(f, w, c.K, c.N));
  out.input = "{\"function\":" + function_json(f) + ",\"density\":" + density_json(w) + "}";
  return out;
}

Output cmd_sharpness(const Run& run) {
  Output out;
  for (const auto& r : sharpness_sweep(run.cfg.n_max, run.jobs)) add_report(out, run, r);
  return out;
}

Output cmd_product_demo(const Run& run) {
  const auto& c = run.cfg;
  const auto g = make_function(c, 0.0, 1.0);
  const auto d = product_demo(g, c.grid ? c.grid : 32);
  Output out;
  add_report(out, run, d.indeterminacy);
  add_report(out, run, d.perineq);
  out.input = function_json(g);
  return out;
}

Output cmd_eigen(const Run& run) {
  const auto& c = run.cfg;
  const auto b = make_basis(c, 1);
  std::ostringstream header;
  write_eigen_header_json(header, b);
  Output out;
  out.items.push_back(header.str());
  if (!c.out.empty()) {
    std::ofstream csv(c.out + ".csv");
    if (!csv) throw ParseError("cannot write " + c.out + ".csv");
    write_eigen_csv(csv, b);
  }
  return out;
}

Output cmd_nodal_bound(const Run& run) {
  const auto& c = run.cfg;
  const auto ks = sweep(c, 1, 20);
  const auto b = make_basis(c, *std::max_element(ks.begin(), ks.end()) + 1);
  Output out;
  for (std::size_t k : ks) {
    auto r = c.mode == "cd" ? nodal_bound_cd(b, b[k], c.K) : nodal_bound_mcp(b, b[k], c.K, c.N);
    r.add("index", static_cast<double>(k));
    add_report(out, run, r);
  }
  out.input = density_json(b.space());
  return out;
}

Output cmd_heat_upper(const Run& run) {
  const auto& c = run.cfg;
  auto ks = sweep(c, 1, 20);
  const auto b = make_basis(c, *std::max_element(ks.begin(), ks.end()) + 1);
  Output out;
  for (std::size_t k : ks) {
    if (!c.index && !(b[k].lambda > 2.0)) continue;
    auto r = w1_heat_upper(b, b[k], c.K, c.N);
    r.add("index", static_cast<double>(k));
    add_report(out, run, r);
  }
  out.input = density_json(b.space());
  return out;
}

Output cmd_combo(const Run& run) {
  const auto& c = run.cfg;
  const auto coeffs = parse_coeffs(c.coeffs);
  std::size_t kmax = 0;
  for (const auto& [k, a] : coeffs) kmax = std::max(kmax, k);
  const auto b = make_basis(c, kmax + 1);
  double lmin = kInf;
  for (const auto& [k, a] : coeffs) {
    if (a != 0.0) lmin = std::min(lmin, b[k].lambda);
  }
  Output out;
  if (c.mode == "nodal") {
    add_report(out, run, combo_nodal_bound(b, coeffs, lmin, c.K, c.N));
  } else {
    add_chain(out, combo_heat_chain(b, coeffs, lmin, c.K, c.N));
  }
  out.input = "{\"coeffs\":" + json_string(c.coeffs) + ",\"density\":" + density_json(b.space()) + "}";
  return out;
}

Output cmd_main5(const Run& run) {
  const auto& c = run.cfg;
  const auto ks = sweep(c, 1, 20);
  const auto b = make_basis(c, *std::max_element(ks.begin(), ks.end()) + 1);
  Output out;
  for (std::size_t k : ks) add_chain(out, main5_chain(b, b[k], c.K, c.N, c.c_ext));
  out.input = density_json(b.space());
  return out;
}

Output cmd_suite(const Run& run) {
  const auto results = run_acceptance(run.jobs);
  std::ostringstream text;
  print_acceptance(text, results);
  Output out;
  out.text = text.str();
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"check\":\"suite\",\"criteria\":[";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    o << (i ? "," : "") << "{\"id\":" << r.id << ",\"title\":" << json_string(r.title)
      << ",\"pass\":" << (r.pass ? "true" : "false") << ",\"detail\":" << json_string(r.detail) << "}";
    out.holds = out.holds && r.pass;
  }
  o << "]}";
  out.items.push_back(o.str());
  return out;
}

std::string assemble(const Run& run, const Output& out) {
  if (out.items.size() == 1) return out.items.front();
  std::string s = "{\"schema\":" + std::to_string(kReportSchema) + ",\"command\":" + json_string(run.cfg.command) +
                  ",\"holds\":" + (out.holds ? "true" : "false") + ",\"results\":[";
  for (std::size_t i = 0; i < out.items.size(); ++i) s += (i ? "," : "") + out.items[i];
  return s + "]}";
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f || !(f << body << '\n')) throw ParseError("cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-transport uncertainty checks on weighted intervals"};
  app.require_subcommand(1);
  Run run;
  RunConfig& c = run.cfg;
  std::string n_text = "2";
  std::optional<std::size_t> jobs;

  auto common = [&](CLI::App* s) {
    s->add_option("--K", c.K, "curvature lower bound");
    s->add_option("--N", n_text, "dimension bound (number or inf)");
    s->add_option("--D", c.D, "interval length / diameter");
    s->add_option("--grid", c.grid, "grid size (certificate, eigen or product grid)");
    s->add_option("--modes", c.modes, "number of eigenpairs");
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--tol", c.tol, "relative tolerance on holds")->check(CLI::PositiveNumber);
    s->add_option("--out", c.out, "output path (reports) or prefix (eigen)");
    s->add_option("--jobs", jobs, "worker threads (default $NEEDLE_UNCERTAINTY_JOBS)");
    s->add_option("--fn", c.fn, "generator: sin, cos-mode, step-mollified, pwl-random");
    s->add_option("--freq", c.freq, "generator frequency");
    s->add_option("--what", c.what, "quantity or certificate kind");
    s->add_option("--density", c.density, "lebesgue, sin2, sin, gauss, linear, exp-10 or a .json/.csv file");
    s->add_option("--input", c.inputs, "function or problem file");
    s->add_option("--k", c.index, "eigenpair index (default: sweep)");
    s->add_option("--coeffs", c.coeffs, "combination as k:a,k:a");
    s->add_option("--c-ext", c.c_ext, "eigenfunction sup-norm constant");
    s->add_option("--t", c.t, "time parameter");
    s->add_option("--theta", c.theta, "distance parameter");
    s->add_option("--n-max", c.n_max, "largest frequency in the sharpness sweep");
    return s;
  };

  std::map<std::string, std::function<Output(const Run&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<Output(const Run&)> fn) {
    handlers[name] = std::move(fn);
    return common(app.add_subcommand(name, help));
  };
  auto with_mode = [&](CLI::App* s, std::vector<std::string> modes) {
    s->add_option("mode", c.mode, "variant")->required()->check(CLI::IsMember(modes));
  };

  sub("coeffs", "curvature coefficients (--what c_kd|c_knd|sigma|tau|diameter|heat|s_kappa|all)", cmd_coeffs);
  sub("check-density", "grid certificate of a density (--what cd|mcp|ratio)", cmd_check_density);
  sub("w1", "W1 between the positive and negative parts of a function", cmd_w1);
  sub("perimeter", "nodal decomposition and perimeter of {f > 0}", cmd_perimeter);
  with_mode(sub("verify", "indeterminacy estimate: basic, cd or mcp", cmd_verify), {"basic", "cd", "mcp"});
  sub("sharpness", "sin(2 pi n x) sweep", cmd_sharpness);
  sub("product-demo", "product-space demo on [0,1]^2", cmd_product_demo);
  sub("eigen", "Neumann eigenpairs (CSV to <out>.csv)", cmd_eigen);
  with_mode(sub("nodal-bound", "nodal set lower bound for eigenfunctions", cmd_nodal_bound), {"cd", "mcp"});
  sub("heat-upper", "heat-flow W1 upper bound for eigenfunctions", cmd_heat_upper);
  with_mode(sub("combo", "linear combinations of eigenfunctions", cmd_combo), {"nodal", "heat"});
  sub("main5-chain", "sup-norm chain and the implied nodal bound", cmd_main5);
  sub("suite", "full acceptance battery", cmd_suite);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (n_text == "inf") {
      c.N = kInf;
    } else {
      std::size_t pos = 0;
      c.N = std::stod(n_text, &pos);
      if (pos != n_text.size()) throw ParseError("--N: not a number");
    }
  } catch (const std::exception&) {
    std::cerr << "error: --N expects a number or inf\n";
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  c.command = chosen->get_name();
  run.tol_given = chosen->count("--tol") > 0;
  run.jobs = resolve_jobs(jobs);

  try {
    const Output out = handlers.at(c.command)(run);
    const std::string body = assemble(run, out);
    if (!out.text.empty()) std::cout << out.text;
    if (c.out.empty() || c.command == "eigen") {
      if (out.text.empty()) std::cout << body << '\n';
      if (c.command == "eigen" && !c.out.empty()) write_file(c.out + ".json", body);
    } else {
      write_file(c.out, body);
    }
    if (!out.holds) {
      const std::string path = (c.out.empty() ? std::string("needle") : c.out) + ".witness.json";
      write_file(path, "{\"schema\":" + std::to_string(kReportSchema) + ",\"config\":" + config_json(c) +
                           ",\"input\":" + out.input + ",\"result\":" + body + "}");
      std::cerr << "violation: witness bundle written to " << path << '\n';
      return kExitViolation;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
