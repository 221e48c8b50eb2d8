#include "needle/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "needle/errors.hpp"

namespace needle {

using nlohmann::json;

std::string json_number(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_string(const std::string& s) { return json(s).dump(); }

namespace {

std::string quoted(const std::string& s) { return json_string(s); }

void report_body(std::ostringstream& o, const InequalityReport& r) {
  o << "\"check\":" << quoted(r.check);
  o << ",\"sense\":" << (r.sense == Sense::kLowerBound ? "\"lower\"" : "\"upper\"");
  o << ",\"lhs\":" << json_number(r.lhs);
  o << ",\"rhs\":" << json_number(r.rhs);
  o << ",\"ratio\":" << json_number(r.ratio);
  o << ",\"holds\":" << (r.holds ? "true" : "false");
  o << ",\"constant_used\":" << json_number(r.constant_used);
  o << ",\"tol\":" << json_number(r.tol);
  o << ",\"metadata\":{";
  for (std::size_t i = 0; i < r.metadata.size(); ++i) {
    o << (i ? "," : "") << quoted(r.metadata[i].first) << ':' << json_number(r.metadata[i].second);
  }
  o << "},\"notes\":{";
  for (std::size_t i = 0; i < r.notes.size(); ++i) {
    o << (i ? "," : "") << quoted(r.notes[i].first) << ':' << quoted(r.notes[i].second);
  }
  o << "},\"seed\":";
  if (r.seed) {
    o << *r.seed;
  } else {
    o << "null";
  }
}

double number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError(std::string("expected a number for ") + what);
}

double param(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  return number(p.at(key), key);
}

json parse(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::vector<double> number_array(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(number(x, what));
  return v;
}

std::pair<double, double> interval(const json& j) {
  if (!j.contains("interval")) throw ParseError("missing \"interval\"");
  const auto v = number_array(j.at("interval"), "interval");
  if (v.size() != 2) throw ParseError("\"interval\" must hold two numbers");
  return {v[0], v[1]};
}

WeightedInterval density_from(const json& j) {
  if (!j.is_object()) throw ParseError("density: expected an object");
  const auto [a, b] = interval(j);
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ParseError("density: missing \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  const json p = j.value("params", json::object());
  if (kind == "grid") {
    if (!j.contains("values")) throw ParseError("density: grid needs \"values\"");
    return {a, b, GridDensity{number_array(j.at("values"), "values")}};
  }
  if (kind == "constant") return {a, b, ConstantDensity{param(p, "c", 1.0)}};
  if (kind == "power") return {a, b, PowerDensity{param(p, "c", 1.0), param(p, "shift", 0.0), param(p, "p", 1.0)}};
  if (kind == "sinpow") {
    return {a, b, SinPowDensity{param(p, "c", 1.0), param(p, "omega", 1.0), param(p, "phase", 0.0), param(p, "p", 1.0)}};
  }
  if (kind == "gauss") return {a, b, GaussLogDensity{param(p, "c", 1.0), param(p, "mu", 0.0), param(p, "kappa", 1.0)}};
  if (kind == "exp") return {a, b, ExpDensity{param(p, "c", 1.0), param(p, "rate", 0.0)}};
  throw ParseError("density: unknown kind \"" + kind + "\"");
}

// Rows of two comma-separated numbers; a first line that does not parse is a header.
std::vector<std::pair<double, double>> two_columns(std::istream& in, const char* what) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    double x = 0.0;
    double y = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      try {
        std::size_t p1 = 0;
        std::size_t p2 = 0;
        const std::string s1 = line.substr(0, comma);
        const std::string s2 = line.substr(comma + 1);
        x = std::stod(s1, &p1);
        y = std::stod(s2, &p2);
        ok = s1.find_first_not_of(" \t", p1) == std::string::npos && s2.find_first_not_of(" \t", p2) == std::string::npos;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;
      throw ParseError(std::string(what) + ": malformed row at line " + std::to_string(lineno));
    }
    rows.emplace_back(x, y);
  }
  if (rows.size() < 2) throw ParseError(std::string(what) + ": need at least two rows");
  return rows;
}

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError(std::string(what) + ": truncated input");
  T v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<T>(buf[k]) << (8 * k);
  return v;
}

std::ifstream open(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::strlen(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

std::string report_json(const InequalityReport& r) {
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ',';
  report_body(o, r);
  o << '}';
  return o.str();
}

std::string chain_json(const ChainReport& r) {
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"check\":" << quoted(r.check)
    << ",\"holds\":" << (r.holds ? "true" : "false") << ",\"links\":[";
  for (std::size_t i = 0; i < r.links.size(); ++i) {
    o << (i ? ",{" : "{");
    report_body(o, r.links[i]);
    o << '}';
  }
  o << "],\"metadata\":{";
  for (std::size_t i = 0; i < r.metadata.size(); ++i) {
    o << (i ? "," : "") << quoted(r.metadata[i].first) << ':' << json_number(r.metadata[i].second);
  }
  o << "}}";
  return o.str();
}

WeightedInterval read_density_json(std::istream& in) { return density_from(parse(in, "density")); }

WeightedInterval read_density_csv(std::istream& in) {
  const auto rows = two_columns(in, "density csv");
  const double a = rows.front().first;
  const double b = rows.back().first;
  const double dx = (b - a) / static_cast<double>(rows.size() - 1);
  std::vector<double> v;
  v.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expect = a + static_cast<double>(i) * dx;
    if (std::abs(rows[i].first - expect) > 1e-9 * std::max(1.0, std::abs(b - a))) {
      throw ParseError("density csv: x must be uniformly spaced (row " + std::to_string(i + 1) + ")");
    }
    v.push_back(rows[i].second);
  }
  return {a, b, GridDensity{std::move(v)}};
}

WeightedInterval read_density_file(const std::string& path) {
  auto in = open(path);
  if (ends_with(path, ".csv")) return read_density_csv(in);
  return read_density_json(in);
}

void write_density_json(std::ostream& out, const WeightedInterval& w) {
  std::ostringstream o;
  o << "{\"interval\":[" << json_number(w.a()) << ',' << json_number(w.b()) << "],";
  auto params = [&o](std::initializer_list<std::pair<const char*, double>> kv) {
    o << "\"params\":{";
    bool first = true;
    for (const auto& [k, v] : kv) {
      o << (first ? "" : ",") << '"' << k << "\":" << json_number(v);
      first = false;
    }
    o << '}';
  };
  const auto& d = w.density();
  if (const auto* c = std::get_if<ConstantDensity>(&d)) {
    o << "\"kind\":\"constant\",";
    params({{"c", c->c}});
  } else if (const auto* p = std::get_if<PowerDensity>(&d)) {
    o << "\"kind\":\"power\",";
    params({{"c", p->c}, {"shift", p->shift}, {"p", p->p}});
  } else if (const auto* s = std::get_if<SinPowDensity>(&d)) {
    o << "\"kind\":\"sinpow\",";
    params({{"c", s->c}, {"omega", s->omega}, {"phase", s->phase}, {"p", s->p}});
  } else if (const auto* g = std::get_if<GaussLogDensity>(&d)) {
    o << "\"kind\":\"gauss\",";
    params({{"c", g->c}, {"mu", g->mu}, {"kappa", g->kappa}});
  } else if (const auto* e = std::get_if<ExpDensity>(&d)) {
    o << "\"kind\":\"exp\",";
    params({{"c", e->c}, {"rate", e->rate}});
  } else if (const auto* gd = std::get_if<GridDensity>(&d)) {
    o << "\"kind\":\"grid\",\"values\":[";
    for (std::size_t i = 0; i < gd->values.size(); ++i) o << (i ? "," : "") << json_number(gd->values[i]);
    o << ']';
  } else {
    throw DomainError("write_density_json: custom densities have no serial form");
  }
  o << '}';
  out << o.str();
}

SignedFunction1D read_function_json(std::istream& in) {
  const json j = parse(in, "function");
  if (!j.is_object() || !j.contains("values")) throw ParseError("function: missing \"values\"");
  auto values = number_array(j.at("values"), "values");
  if (j.contains("nodes")) {
    auto nodes = number_array(j.at("nodes"), "nodes");
    if (nodes.size() != values.size()) throw ParseError("function: nodes and values differ in length");
    return {std::move(nodes), std::move(values)};
  }
  const auto [a, b] = interval(j);
  return SignedFunction1D::uniform(a, b, std::move(values));
}

SignedFunction1D read_function_csv(std::istream& in) {
  const auto rows = two_columns(in, "function csv");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [u, v] : rows) {
    x.push_back(u);
    y.push_back(v);
  }
  return {std::move(x), std::move(y)};
}

SignedFunction1D read_function_file(const std::string& path) {
  auto in = open(path);
  if (ends_with(path, ".csv")) return read_function_csv(in);
  return read_function_json(in);
}

void write_function_csv(std::ostream& out, const SignedFunction1D& f) {
  out << "x,f\n";
  for (std::size_t i = 0; i < f.nodes().size(); ++i) {
    out << json_number(f.nodes()[i]) << ',' << json_number(f.values()[i]) << '\n';
  }
}

CellGrid read_grid_json(std::istream& in) {
  const json j = parse(in, "grid");
  if (!j.is_object() || !j.contains("nx") || !j.contains("ny") || !j.contains("values")) {
    throw ParseError("grid: need \"nx\", \"ny\" and \"values\"");
  }
  CellGrid g{j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(), number_array(j.at("values"), "values")};
  if (g.values.size() != g.nx * g.ny) throw ParseError("grid: values must have nx*ny entries");
  return g;
}

CellGrid read_grid_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NGRD", 4) != 0) throw ParseError("grid: bad magic");
  if (get_le<std::uint32_t>(in, "grid") != 1) throw ParseError("grid: unsupported version");
  CellGrid g;
  g.nx = get_le<std::uint32_t>(in, "grid");
  g.ny = get_le<std::uint32_t>(in, "grid");
  g.values.resize(g.nx * g.ny);
  for (double& v : g.values) {
    const auto bits = get_le<std::uint64_t>(in, "grid");
    std::memcpy(&v, &bits, sizeof v);
  }
  return g;
}

void write_grid_binary(std::ostream& out, const CellGrid& g) {
  out.write("NGRD", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny));
  for (double v : g.values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof v);
    put_le<std::uint64_t>(out, bits);
  }
}

FiniteMetricSpace read_matrix_json(std::istream& in, bool check_triangle) {
  const json j = parse(in, "matrix");
  if (!j.is_object() || !j.contains("n") || !j.contains("dist")) throw ParseError("matrix: need \"n\" and \"dist\"");
  const auto n = j.at("n").get<std::size_t>();
  std::vector<double> d;
  const json& rows = j.at("dist");
  if (!rows.is_array()) throw ParseError("matrix: \"dist\" must be an array");
  if (!rows.empty() && rows.front().is_array()) {
    if (rows.size() != n) throw ParseError("matrix: expected n rows");
    for (const auto& row : rows) {
      const auto r = number_array(row, "dist row");
      if (r.size() != n) throw ParseError("matrix: expected n columns");
      d.insert(d.end(), r.begin(), r.end());
    }
  } else {
    d = number_array(rows, "dist");
    if (d.size() != n * n) throw ParseError("matrix: expected n*n entries");
  }
  return {n, std::move(d), check_triangle};
}

ProblemSpec read_problem_json(std::istream& in) {
  const json j = parse(in, "problem");
  if (!j.is_object() || !j.contains("density")) throw ParseError("problem: missing \"density\"");
  ProblemSpec s{{density_from(j.at("density")), j.value("grid_n", std::size_t{2000})}, j.value("modes", std::size_t{10})};
  return s;
}

void write_eigen_header_json(std::ostream& out, const EigenBasis& basis) {
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"grid_n\":" << basis.grid_n() << ",\"modes\":" << basis.size()
    << ",\"lambda\":[";
  for (std::size_t k = 0; k < basis.size(); ++k) o << (k ? "," : "") << json_number(basis[k].lambda);
  o << "],\"residual\":[";
  for (std::size_t k = 0; k < basis.size(); ++k) o << (k ? "," : "") << json_number(basis[k].residual);
  o << "]}";
  out << o.str();
}

std::string config_json(const RunConfig& c) {
  std::ostringstream o;
  o << "{\"schema\":" << kReportSchema << ",\"command\":" << quoted(c.command) << ",\"mode\":" << quoted(c.mode)
    << ",\"inputs\":" << json(c.inputs).dump() << ",\"K\":" << json_number(c.K) << ",\"N\":" << json_number(c.N)
    << ",\"D\":" << (c.D ? json_number(*c.D) : "null") << ",\"grid\":" << c.grid << ",\"modes\":" << c.modes
    << ",\"seed\":" << c.seed << ",\"tol\":" << json_number(c.tol) << ",\"out\":" << quoted(c.out)
    << ",\"jobs\":" << c.jobs << ",\"fn\":" << quoted(c.fn) << ",\"freq\":" << json_number(c.freq)
    << ",\"what\":" << quoted(c.what) << ",\"density\":" << quoted(c.density) << ",\"index\":" << c.index
    << ",\"coeffs\":" << quoted(c.coeffs) << ",\"c_ext\":" << json_number(c.c_ext) << ",\"t\":" << json_number(c.t)
    << ",\"theta\":" << json_number(c.theta) << ",\"n_max\":" << c.n_max << '}';
  return o.str();
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: expected an object");
  RunConfig c;
  try {
    c.command = j.value("command", "");
    c.mode = j.value("mode", "");
    c.inputs = j.value("inputs", std::vector<std::string>{});
    if (j.contains("K")) c.K = number(j.at("K"), "K");
    if (j.contains("N")) c.N = number(j.at("N"), "N");
    if (j.contains("D") && !j.at("D").is_null()) c.D = number(j.at("D"), "D");
    c.grid = j.value("grid", std::size_t{0});
    c.modes = j.value("modes", std::size_t{0});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("tol")) c.tol = number(j.at("tol"), "tol");
    c.out = j.value("out", "");
    c.jobs = j.value("jobs", std::size_t{0});
    c.fn = j.value("fn", "");
    if (j.contains("freq")) c.freq = number(j.at("freq"), "freq");
    c.what = j.value("what", "");
    c.density = j.value("density", "");
    c.index = j.value("index", std::size_t{0});
    c.coeffs = j.value("coeffs", "");
    if (j.contains("c_ext")) c.c_ext = number(j.at("c_ext"), "c_ext");
    if (j.contains("t")) c.t = number(j.at("t"), "t");
    if (j.contains("theta")) c.theta = number(j.at("theta"), "theta");
    c.n_max = j.value("n_max", std::size_t{64});
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!(c.tol > 0.0)) throw ParseError("config: tol must be positive");
  return c;
}

}  // namespace needle
