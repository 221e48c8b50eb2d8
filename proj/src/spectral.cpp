#include "needle/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "needle/curvature.hpp"
#include "needle/discrete_ot.hpp"
#include "needle/errors.hpp"
#include "needle/transport.hpp"

namespace needle {

EigenPair EigenPair::scaled(double s) const {
  EigenPair p = *this;
  for (double& v : p.values) v *= s;
  return p;
}

std::optional<double> ChainReport::get(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Symmetric tridiagonal matrix: diagonal d, off-diagonal e (e[i] couples i, i+1).
struct Tridiagonal {
  std::vector<double> d;
  std::vector<double> e;
};

// Number of eigenvalues strictly below x.
std::size_t sturm_count(const Tridiagonal& t, double x) {
  const std::size_t n = t.d.size();
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = t.d[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
    if (i + 1 == n) break;
    q = t.d[i + 1] - x - t.e[i] * t.e[i] / q;
  }
  return count;
}

double kth_eigenvalue(const Tridiagonal& t, std::size_t k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(t, mid) <= k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves (T - shift I) x = b by Gaussian elimination with partial pivoting.
std::vector<double> shifted_solve(const Tridiagonal& t, double shift, std::vector<double> b) {
  const std::size_t n = t.d.size();
  std::vector<double> d(n);
  std::vector<double> du(t.e);
  std::vector<double> dl(t.e);
  std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = t.d[i] - shift;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]) + (i + 1 < n ? std::abs(t.e[i]) : 0.0));
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = temp;
      const double bt = b[i];
      b[i] = b[i + 1];
      b[i + 1] = bt - fact * b[i + 1];
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  std::vector<double> x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n >= 2) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (std::size_t i = n >= 3 ? n - 2 : 0; i-- > 0;) {
    x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
  }
  return x;
}

double norm2(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

}  // namespace

EigenBasis::EigenBasis(SturmLiouvilleProblem problem, std::size_t modes) : problem_(std::move(problem)) {
  const std::size_t n = problem_.grid_n;
  if (n < 64) throw DomainError("eigensolve: grid_n must be at least 64");
  if (modes == 0 || modes > n / 4) throw DomainError("eigensolve: need 1 <= modes <= grid_n / 4");
  const WeightedInterval& w = problem_.space;
  const double dx = w.length() / static_cast<double>(n);
  centers_.resize(n);
  cell_mass_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    centers_[i] = w.a() + (static_cast<double>(i) + 0.5) * dx;
    const double h = w(centers_[i]);
    if (!(h > 0.0)) throw DomainError("eigensolve: density vanishes at an interior cell centre");
    cell_mass_[i] = h * dx;
  }
  total_mass_ = std::accumulate(cell_mass_.begin(), cell_mass_.end(), 0.0);

  std::vector<double> face(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) face[i] = w(w.a() + static_cast<double>(i + 1) * dx) / dx;
  Tridiagonal t;
  t.d.resize(n);
  t.e.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double a_ii = (i > 0 ? face[i - 1] : 0.0) + (i + 1 < n ? face[i] : 0.0);
    t.d[i] = a_ii / cell_mass_[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) t.e[i] = -face[i] / std::sqrt(cell_mass_[i] * cell_mass_[i + 1]);

  double glo = kInf;
  double ghi = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.e[i]) : 0.0);
    glo = std::min(glo, t.d[i] - r);
    ghi = std::max(ghi, t.d[i] + r);
  }
  const double pad = 1e-12 * std::max(std::abs(glo), std::abs(ghi)) + 1e-300;
  glo -= pad;
  ghi += pad;

  std::vector<std::vector<double>> vecs;
  vecs.reserve(modes);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t k = 0; k < modes; ++k) {
    // Constants are an exact null vector of the stencil.
    const double lambda = k == 0 ? 0.0 : kth_eigenvalue(t, k, glo, ghi);
    std::vector<double> v(n);
    for (double& x : v) x = 1.0 + 0.5 * u(rng);
    for (std::size_t i = 0; k == 0 && i < n; ++i) v[i] = std::sqrt(cell_mass_[i] / total_mass_);
    for (int it = 0; k > 0 && it < 4; ++it) {
      v = shifted_solve(t, lambda, std::move(v));
      for (const auto& q : vecs) {
        const double c = std::inner_product(v.begin(), v.end(), q.begin(), 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i] -= c * q[i];
      }
      const double nv = norm2(v);
      if (!(nv > 0.0) || !std::isfinite(nv)) throw Error("eigensolve: inverse iteration broke down");
      for (double& x : v) x /= nv;
    }
    if (v[0] < 0.0) {
      for (double& x : v) x = -x;
    }
    // Residual in T-space equals the dual-mass-norm residual of the weak form.
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double tv = t.d[i] * v[i];
      if (i > 0) tv += t.e[i - 1] * v[i - 1];
      if (i + 1 < n) tv += t.e[i] * v[i + 1];
      r2 += (tv - lambda * v[i]) * (tv - lambda * v[i]);
    }
    EigenPair p;
    p.index = k;
    p.lambda = lambda;
    p.residual = std::sqrt(r2) / std::max(1.0, std::abs(lambda));
    p.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.values[i] = v[i] / std::sqrt(cell_mass_[i]);
    pairs_.push_back(std::move(p));
    vecs.push_back(std::move(v));
  }
}

double EigenBasis::inner(std::span<const double> f, std::span<const double> g) const {
  if (f.size() != cell_mass_.size() || g.size() != cell_mass_.size()) throw ShapeError("inner: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i] * cell_mass_[i];
  return s;
}

double EigenBasis::integral(std::span<const double> f) const {
  if (f.size() != cell_mass_.size()) throw ShapeError("integral: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * cell_mass_[i];
  return s;
}

Norms EigenBasis::norms(std::span<const double> f) const {
  if (f.size() != cell_mass_.size()) throw ShapeError("norms: size mismatch");
  Norms r;
  double s2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    r.l1 += std::abs(f[i]) * cell_mass_[i];
    s2 += f[i] * f[i] * cell_mass_[i];
    r.linf = std::max(r.linf, std::abs(f[i]));
  }
  r.l2 = std::sqrt(s2);
  return r;
}

std::vector<double> EigenBasis::sample(const std::function<double(double)>& fn) const {
  std::vector<double> v(centers_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(centers_[i]);
  return v;
}

SignedFunction1D EigenBasis::function(std::span<const double> values) const {
  if (values.size() != centers_.size()) throw ShapeError("function: size mismatch");
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(values.size() + 2);
  y.reserve(values.size() + 2);
  x.push_back(space().a());
  y.push_back(values.front());
  x.insert(x.end(), centers_.begin(), centers_.end());
  y.insert(y.end(), values.begin(), values.end());
  x.push_back(space().b());
  y.push_back(values.back());
  return {std::move(x), std::move(y)};
}

std::vector<double> EigenBasis::project(std::span<const double> values) const {
  std::vector<double> c(pairs_.size());
  for (std::size_t k = 0; k < pairs_.size(); ++k) c[k] = inner(values, pairs_[k].values);
  return c;
}

std::vector<double> EigenBasis::synthesize(std::span<const double> coeffs) const {
  if (coeffs.size() > pairs_.size()) throw ShapeError("synthesize: more coefficients than modes");
  std::vector<double> f(centers_.size(), 0.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += coeffs[k] * pairs_[k].values[i];
  }
  return f;
}

double EigenBasis::gram_deviation() const {
  double dev = 0.0;
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    for (std::size_t k = j; k < pairs_.size(); ++k) {
      const double g = inner(pairs_[j].values, pairs_[k].values);
      dev = std::max(dev, std::abs(g - (j == k ? 1.0 : 0.0)));
    }
  }
  return dev;
}

double EigenBasis::max_mean_residual() const {
  double r = 0.0;
  for (std::size_t k = 1; k < pairs_.size(); ++k) r = std::max(r, std::abs(integral(pairs_[k].values)));
  return r;
}

HeatState heat_state(const EigenBasis& basis, std::span<const double> values) {
  HeatState s;
  s.coeffs = basis.project(values);
  s.lambdas.reserve(basis.size());
  for (const auto& p : basis.pairs()) s.lambdas.push_back(p.lambda);
  const auto back = basis.synthesize(s.coeffs);
  std::vector<double> diff(values.begin(), values.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= back[i];
  s.trunc_error = basis.norms(diff).l2;
  return s;
}

HeatState heat_evolve(const HeatState& state, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_evolve: t must be nonnegative");
  HeatState s = state;
  for (std::size_t k = 0; k < s.coeffs.size(); ++k) s.coeffs[k] *= std::exp(-s.lambdas[k] * t);
  s.time += t;
  return s;
}

std::vector<double> reconstruct(const EigenBasis& basis, const HeatState& state) {
  return basis.synthesize(state.coeffs);
}

namespace {

double exact_w1(const EigenBasis& basis, std::span<const double> values) {
  const auto f = basis.function(values);
  const auto pos = positive_part(f, &basis.space());
  const auto neg = negative_part(f, &basis.space());
  if (pos.mass() == 0.0 && neg.mass() == 0.0) return 0.0;
  return w1_line(pos, neg, kSpectralMassTol);
}

double perimeter_of(const EigenBasis& basis, std::span<const double> values) {
  return weighted_perimeter(nodal_decompose(basis.function(values)), basis.space());
}

void add_norms(InequalityReport& r, const Norms& n) {
  r.add("norm_l1", n.l1);
  r.add("norm_l2", n.l2);
  r.add("norm_linf", n.linf);
}

InequalityReport nodal_bound(const EigenBasis& basis, const EigenPair& pair, double K, double N,
                             const char* check) {
  if (!(pair.lambda > 0.0)) throw DomainError("nodal bound: eigenvalue must be positive");
  const WeightedInterval& w = basis.space();
  const bool cd = std::isinf(N);
  const auto cert = cd ? check_cd_density(w, K, N, 32) : check_mcp_density(w, K, N, 32);
  if (!cert.passed) {
    throw PreconditionError(std::string(check) + ": density certificate failed (" + cert.reason + ")");
  }
  const double D = w.length();
  const double C = cd ? c_kd(K, D) : c_knd(K, N, D);
  const Norms n = basis.norms(pair.values);
  const double m = basis.total_mass();
  const double per = perimeter_of(basis, pair.values);
  const double rhs = std::sqrt(pair.lambda) / (8.0 * C * std::sqrt(m)) * n.l1 * n.l1 / (n.l2 * n.linf);
  auto r = make_report(check, Sense::kLowerBound, per, rhs, C);
  r.add("lambda", pair.lambda);
  r.add("mode", static_cast<double>(pair.index));
  r.add("perimeter", per);
  add_norms(r, n);
  r.add("mass", m);
  r.add("K", K);
  r.add("N", N);
  r.add("D", D);
  r.add("certificate_worst_slack", cert.worst_slack);
  return r;
}

struct Synth {
  std::vector<double> f;
  std::vector<double> coeffs;
};

Synth synthesize_combo(const EigenBasis& basis, const ModeCoefficients& coeffs, double lambda_min) {
  if (coeffs.empty()) throw DomainError("combination: empty coefficient list");
  if (!(lambda_min > 0.0)) throw DomainError("combination: lambda_min must be positive");
  Synth s;
  s.coeffs.assign(basis.size(), 0.0);
  for (const auto& [k, a] : coeffs) {
    if (k >= basis.size()) throw ShapeError("combination: mode index beyond the computed basis");
    if (a != 0.0 && basis[k].lambda < lambda_min * (1.0 - 1e-12)) {
      throw PreconditionError("combination: a mode lies below lambda_min");
    }
    s.coeffs[k] += a;
  }
  s.f = basis.synthesize(s.coeffs);
  return s;
}

}  // namespace

InequalityReport nodal_bound_cd(const EigenBasis& basis, const EigenPair& pair, double K) {
  return nodal_bound(basis, pair, K, kInf, "nodal_bound_cd");
}

InequalityReport nodal_bound_mcp(const EigenBasis& basis, const EigenPair& pair, double K, double N) {
  if (!(N > 1.0) || std::isinf(N)) throw DomainError("nodal_bound_mcp: N must be finite and > 1");
  return nodal_bound(basis, pair, K, N, "nodal_bound_mcp");
}

InequalityReport w1_eig_upper(const EigenBasis& basis, const EigenPair& pair) {
  if (!(pair.lambda > 0.0)) throw DomainError("w1_eig_upper: eigenvalue must be positive");
  const Norms n = basis.norms(pair.values);
  const double m = basis.total_mass();
  const double w1 = exact_w1(basis, pair.values);
  auto r = make_report("w1_eig_upper", Sense::kUpperBound, w1, std::sqrt(m / pair.lambda) * n.l2);
  r.add("lambda", pair.lambda);
  r.add("mode", static_cast<double>(pair.index));
  r.add("W1", w1);
  add_norms(r, n);
  r.add("mass", m);
  return r;
}

InequalityReport w1_heat_upper(const EigenBasis& basis, const EigenPair& pair, double K, double N) {
  if (!(pair.lambda > 2.0)) throw DomainError("w1_heat_upper: eigenvalue must exceed 2");
  const double lambda = pair.lambda;
  const double t = std::log(lambda) / lambda;
  const double C = heat_contraction_coeff(t, K, N);
  const double D = basis.space().length();
  const Norms n = basis.norms(pair.values);
  const double w1 = exact_w1(basis, pair.values);
  const double rhs = (std::sqrt(t) * C + D * std::exp(-lambda * t)) * n.l1;
  auto r = make_report("w1_heat_upper", Sense::kUpperBound, w1, rhs, C);
  const double unit = std::sqrt(std::log(lambda) / lambda) * n.l1;
  r.add("lambda", lambda);
  r.add("mode", static_cast<double>(pair.index));
  r.add("t", t);
  r.add("C_t_K_N", C);
  r.add("W1", w1);
  add_norms(r, n);
  r.add("D", D);
  r.add("packaged_C_observed", w1 / unit);
  r.add("packaged_C_bound", rhs / unit);
  return r;
}

InequalityReport combo_nodal_bound(const EigenBasis& basis, const ModeCoefficients& coeffs, double lambda_min,
                                   double K, double N) {
  if (!(N > 1.0) || std::isinf(N)) throw DomainError("combo_nodal_bound: N must be finite and > 1");
  const Synth s = synthesize_combo(basis, coeffs, lambda_min);
  const WeightedInterval& w = basis.space();
  const auto cert = check_mcp_density(w, K, N, 32);
  if (!cert.passed) throw PreconditionError("combo_nodal_bound: MCP certificate failed (" + cert.reason + ")");
  const double D = w.length();
  const double C = c_knd(K, N, D);
  const Norms n = basis.norms(s.f);
  const double m = basis.total_mass();
  const double per = perimeter_of(basis, s.f);
  const double shape = n.l1 * n.l1 / (n.l2 * n.linf);
  const double rhs = std::sqrt(lambda_min) / (8.0 * std::sqrt(m) * C) * shape;
  auto r = make_report("combo_nodal_bound", Sense::kLowerBound, per, rhs, C);
  r.add("lambda_min", lambda_min);
  r.add("perimeter", per);
  add_norms(r, n);
  r.add("mass", m);
  r.add("K", K);
  r.add("N", N);
  r.add("D", D);
  r.add("rhs_without_8", 8.0 * rhs);
  r.add("terms", static_cast<double>(coeffs.size()));
  return r;
}

ChainReport combo_heat_chain(const EigenBasis& basis, const ModeCoefficients& coeffs, double lambda_min, double K,
                             double N) {
  if (!(K >= 0.0)) throw PreconditionError("combo_heat_chain: requires K >= 0");
  const double m = basis.total_mass();
  if (!(lambda_min >= 2.0 * std::sqrt(m))) throw PreconditionError("combo_heat_chain: requires lambda_min >= 2 sqrt(m(X))");
  const Synth s = synthesize_combo(basis, coeffs, lambda_min);
  const Norms n = basis.norms(s.f);
  if (!(n.l1 > 0.0)) throw DegenerateInputError("combo_heat_chain: zero function");
  const double t = std::log(lambda_min * n.l2 / n.l1) / lambda_min;
  if (!(t > 0.0)) throw PreconditionError("combo_heat_chain: chosen time is not positive");

  HeatState hs;
  hs.coeffs = s.coeffs;
  for (const auto& p : basis.pairs()) hs.lambdas.push_back(p.lambda);
  const HeatState ft = heat_evolve(hs, t);
  const auto fvals = reconstruct(basis, ft);
  const Norms nt = basis.norms(fvals);
  double coeff_energy = 0.0;
  for (double c : ft.coeffs) coeff_energy += c * c;

  ChainReport cr;
  cr.check = "combo_heat_chain";
  auto l1 = make_report("cauchy_schwarz", Sense::kUpperBound, nt.l1 * nt.l1, m * nt.l2 * nt.l2);
  auto l2 = make_report("spectral_decay", Sense::kUpperBound, coeff_energy,
                        std::exp(-2.0 * lambda_min * t) * n.l2 * n.l2);
  l2.add("norm_l2_sq_heat", nt.l2 * nt.l2);
  const double C = heat_contraction_coeff(t, K, N);
  const double D = basis.space().length();
  const double w1 = exact_w1(basis, s.f);
  const double bound = std::sqrt(t) * n.l1 * C + D * std::sqrt(m) * std::exp(-lambda_min * t) * n.l2;
  auto l3 = make_report("assembled_w1_bound", Sense::kUpperBound, w1, bound, C);
  l3.add("W1", w1);
  cr.links = {l1, l2, l3};
  cr.holds = std::all_of(cr.links.begin(), cr.links.end(), [](const auto& r) { return r.holds; });
  cr.metadata = {{"t", t},           {"lambda_min", lambda_min}, {"norm_l1", n.l1},
                 {"norm_l2", n.l2}, {"norm_linf", n.linf},      {"mass", m},
                 {"K", K},          {"N", N},                   {"D", D},
                 {"C_t_K_N", C},    {"W1", w1},                 {"bound", bound}};
  return cr;
}

ChainReport main5_chain(const EigenBasis& basis, const EigenPair& pair, double K, double N, double c_ext) {
  const double m = basis.total_mass();
  if (std::abs(m - 1.0) > 1e-9) throw PreconditionError("main5_chain: requires m(X) = 1");
  if (!(N > 1.0)) throw DomainError("main5_chain: N must exceed 1");
  if (!(c_ext > 0.0)) throw DomainError("main5_chain: C_ext must be positive");
  const double D = basis.space().length();
  const double lambda = pair.lambda;
  if (!(lambda >= std::max(2.0, 1.0 / D))) throw PreconditionError("main5_chain: requires lambda >= max(2, 1/D)");
  const Norms n = basis.norms(pair.values);
  const double growth = std::pow(lambda, N / 4.0);

  ChainReport cr;
  cr.check = "main5_chain";
  cr.links.push_back(make_report("linf_by_l2", Sense::kUpperBound, n.linf, c_ext * growth * n.l2, c_ext));
  cr.links.push_back(
      make_report("l2_interpolation", Sense::kUpperBound, n.l2, std::sqrt(n.linf * n.l1)));

  const auto heat = w1_heat_upper(basis, pair, K, N);
  const double c_pack = *heat.get("packaged_C_bound");
  const double ckd = c_kd(K, D);
  const double cbar = 8.0 * c_pack * ckd * c_ext * c_ext;
  const double per = perimeter_of(basis, pair.values);
  const double implied = std::pow(lambda, (1.0 - N) / 2.0) / (cbar * std::sqrt(std::log(lambda)));
  cr.links.push_back(make_report("implied_nodal_bound", Sense::kLowerBound, per, implied, cbar));
  cr.holds = std::all_of(cr.links.begin(), cr.links.end(), [](const auto& r) { return r.holds; });
  cr.metadata = {{"lambda", lambda},
                 {"mode", static_cast<double>(pair.index)},
                 {"norm_l1", n.l1},
                 {"norm_l2", n.l2},
                 {"norm_linf", n.linf},
                 {"measured_ratio", n.linf / (std::pow(lambda, N / 2.0) * n.l1)},
                 {"measured_c_ext", n.linf / (growth * n.l2)},
                 {"C_ext", c_ext},
                 {"C_pack", c_pack},
                 {"C_KD", ckd},
                 {"Cbar", cbar},
                 {"perimeter", per},
                 {"K", K},
                 {"N", N},
                 {"D", D}};
  return cr;
}

InequalityReport w2_contraction_check(const EigenBasis& basis, std::span<const double> mu,
                                      std::span<const double> nu, double t) {
  const std::size_t n = basis.grid_n();
  if (mu.size() != n || nu.size() != n) throw ShapeError("w2_contraction_check: size mismatch");
  // Modal truncation leaves ripples of order exp(-lambda_max t); those are
  // clipped and the clipped mass reported.
  double clipped = 0.0;
  auto masses = [&](std::span<const double> v, const char* what) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] < -1e-6 * peak) throw DomainError(std::string("w2_contraction_check: negative density in ") + what);
      if (v[i] < 0.0) clipped -= v[i] * basis.cell_mass()[i];
      w[i] = std::max(v[i], 0.0) * basis.cell_mass()[i];
    }
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(s > 0.0)) throw DegenerateInputError("w2_contraction_check: zero measure");
    for (double& x : w) x /= s;
    return w;
  };
  const auto space = FiniteMetricSpace::line(basis.centers());
  const auto hm = heat_state(basis, mu);
  const auto hn = heat_state(basis, nu);
  const auto mu_t = reconstruct(basis, heat_evolve(hm, t));
  const auto nu_t = reconstruct(basis, heat_evolve(hn, t));
  const auto w0 = emd_exact(DiscreteMeasure(masses(mu, "mu")), DiscreteMeasure(masses(nu, "nu")), space, 2);
  const auto wt = emd_exact(DiscreteMeasure(masses(mu_t, "H_t mu")), DiscreteMeasure(masses(nu_t, "H_t nu")), space, 2);
  auto r = make_report("w2_contraction", Sense::kUpperBound, std::sqrt(wt.cost), std::sqrt(w0.cost), 1.0, 1e-6);
  r.add("t", t);
  r.add("W2_0", std::sqrt(w0.cost));
  r.add("W2_t", std::sqrt(wt.cost));
  r.add("trunc_error_mu", hm.trunc_error);
  r.add("trunc_error_nu", hn.trunc_error);
  r.add("clipped_mass", clipped);
  return r;
}

void write_eigen_csv(std::ostream& out, const EigenBasis& basis) {
  char buf[40];
  out << "x";
  for (std::size_t k = 0; k < basis.size(); ++k) out << ",f_" << k;
  out << "\n";
  for (std::size_t i = 0; i < basis.grid_n(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", basis.centers()[i]);
    out << buf;
    for (const auto& p : basis.pairs()) {
      std::snprintf(buf, sizeof buf, "%.17g", p.values[i]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace needle
