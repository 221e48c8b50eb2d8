#include "needle/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "needle/curvature.hpp"
#include "needle/discrete_ot.hpp"
#include "needle/errors.hpp"
#include "needle/parallel.hpp"
#include "needle/transport.hpp"

namespace needle {

std::size_t resolve_jobs(std::optional<std::size_t> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv(kJobsEnv)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double signed_mass(const SignedFunction1D& f, const WeightedInterval* w) {
  return positive_part(f, w).mass() - negative_part(f, w).mass();
}

struct Parts {
  LineMeasure pos;
  LineMeasure neg;
  double w1 = 0.0;
  NodalDecomposition nd;
};

// Shared preconditions and transport side of the three 1-D checks.
Parts transport_parts(const SignedFunction1D& f, const WeightedInterval* w, double mass_tol, const char* check) {
  const std::string name(check);
  if (!(f.sup_norm() > 0.0)) throw DegenerateInputError(name + ": f vanishes identically");
  if (w != nullptr && (f.a() != w->a() || f.b() != w->b())) {
    throw DomainError(name + ": f and the weight live on different intervals");
  }
  Parts p;
  p.pos = positive_part(f, w);
  p.neg = negative_part(f, w);
  const double mp = p.pos.mass();
  const double mn = p.neg.mass();
  if (!(mp > 0.0) || !(mn > 0.0)) throw DegenerateInputError(name + ": f h has a vanishing part");
  if (std::abs(mp - mn) > mass_tol * std::max(mp, mn)) throw PreconditionError(name + ": f h does not have zero mean");
  if (!single_ray_test(f, w).single_ray) throw PreconditionError(name + ": f is not single-ray");
  p.w1 = w1_line(p.pos, p.neg, mass_tol);
  p.nd = nodal_decompose(f);
  return p;
}

InequalityReport weighted_check(const SignedFunction1D& f, const WeightedInterval& w, double K, double N,
                                double mass_tol, bool cd) {
  const char* check = cd ? "verify_cd" : "verify_mcp";
  const auto p = transport_parts(f, &w, mass_tol, check);
  const auto cert = cd ? check_cd_density(w, K, kInf, kVerifyCertificateGrid)
                       : check_mcp_density(w, K, N, kVerifyCertificateGrid);
  if (!cert.passed) {
    throw PreconditionError(std::string(check) + ": density certificate failed (" + cert.reason + ")");
  }
  const double D = w.length();
  const double C = cd ? c_kd(K, D) : c_knd(K, N, D);
  const double per = weighted_perimeter(p.nd, w);
  const double l1 = p.pos.mass() + p.neg.mass();
  const double linf = f.sup_norm();
  auto r = make_report(check, Sense::kLowerBound, p.w1 * per, l1 * l1 / (8.0 * C * linf), C);
  r.add("W1", p.w1);
  r.add("perimeter", per);
  r.add("boundary_points", static_cast<double>(p.nd.boundary.size()));
  r.add("l1_fh", l1);
  r.add("l1_pos", p.pos.mass());
  r.add("l1_neg", p.neg.mass());
  r.add("linf", linf);
  r.add("linf_pos", f.positive_sup());
  r.add("linf_neg", f.negative_sup());
  r.add("K", K);
  r.add("N", cd ? kInf : N);
  r.add("D", D);
  r.add("mass", w.mass());
  r.add("certificate_worst_slack", cert.worst_slack);
  return r;
}

}  // namespace

SignedFunction1D mean_corrected(const SignedFunction1D& f, const WeightedInterval* w) {
  // The signed mass is nonincreasing in the shift; bisect on it.
  double lo = *std::min_element(f.values().begin(), f.values().end());
  double hi = *std::max_element(f.values().begin(), f.values().end());
  if (!(hi > lo)) throw DegenerateInputError("mean_corrected: f is constant");
  const double scale = positive_part(f, w).mass() + negative_part(f, w).mass() + (hi - lo);
  double c = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    c = 0.5 * (lo + hi);
    const double m = signed_mass(f.shifted(-c), w);
    if (std::abs(m) <= 1e-15 * scale || c <= lo || c >= hi) break;
    if (m > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
  }
  return f.shifted(-c);
}

SignedFunction1D tilt_corrected(const SignedFunction1D& f, const WeightedInterval* w) {
  const double mid = 0.5 * (f.a() + f.b());
  auto tilted = [&](double beta) {
    std::vector<double> y(f.values());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::exp(beta * (f.nodes()[i] - mid));
    SignedFunction1D::Evaluator ev;
    if (f.has_evaluator()) ev = [f, beta, mid](double x) { return f(x) * std::exp(beta * (x - mid)); };
    return SignedFunction1D(f.nodes(), std::move(y), std::move(ev));
  };
  const double m0 = signed_mass(f, w);
  if (m0 == 0.0) return f;
  double lo = 0.0;
  double hi = 0.0;
  for (double L = 1.0; L <= 1024.0 && lo == hi; L *= 2.0) {
    if (std::signbit(signed_mass(tilted(L), w)) != std::signbit(m0)) {
      hi = L;
    } else if (std::signbit(signed_mass(tilted(-L), w)) != std::signbit(m0)) {
      lo = -L;
    }
  }
  if (lo == hi) throw PreconditionError("tilt_corrected: no exponential tilt balances the mean");
  // Invariant: the signed mass at lo has the sign of m(lo), opposite at hi.
  const bool lo_sign = std::signbit(signed_mass(tilted(lo), w));
  const double scale = positive_part(f, w).mass() + negative_part(f, w).mass();
  double beta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    beta = 0.5 * (lo + hi);
    const double m = signed_mass(tilted(beta), w);
    if (std::abs(m) <= 1e-15 * scale || beta <= lo || beta >= hi) break;
    if (std::signbit(m) == lo_sign) {
      lo = beta;
    } else {
      hi = beta;
    }
  }
  return tilted(beta);
}

InequalityReport verify_basic(const SignedFunction1D& f, double mass_tol) {
  const auto p = transport_parts(f, nullptr, mass_tol, "verify_basic");
  const double per = counting_perimeter(p.nd);
  const double sp = f.positive_sup();
  const double sn = f.negative_sup();
  const double m = p.pos.mass();
  auto r = make_report("verify_basic", Sense::kLowerBound, p.w1 * per, m * m / (2.0 * std::min(sp, sn)), 2.0);
  r.add("W1", p.w1);
  r.add("perimeter", per);
  r.add("l1_pos", m);
  r.add("l1_neg", p.neg.mass());
  r.add("linf", f.sup_norm());
  r.add("linf_pos", sp);
  r.add("linf_neg", sn);
  r.add("D", f.b() - f.a());
  return r;
}

InequalityReport verify_cd(const SignedFunction1D& f, const WeightedInterval& w, double K, double mass_tol) {
  return weighted_check(f, w, K, kInf, mass_tol, true);
}

InequalityReport verify_mcp(const SignedFunction1D& f, const WeightedInterval& w, double K, double N,
                            double mass_tol) {
  return weighted_check(f, w, K, N, mass_tol, false);
}

std::vector<InequalityReport> sharpness_sweep(std::size_t n_max, std::size_t jobs) {
  if (n_max == 0 || n_max > 256) throw DomainError("sharpness_sweep: need 1 <= n_max <= 256");
  return parallel_map(n_max, jobs, [](std::size_t i) {
    const double n = static_cast<double>(i + 1);
    const auto f = SignedFunction1D::sample([n](double x) { return std::sin(2.0 * std::numbers::pi * n * x); },
                                            0.0, 1.0, 256 * (i + 1) + 1);
    auto r = verify_basic(f);
    r.check = "sharpness";
    r.add("n", n);
    return r;
  });
}

RandomPwl random_pwl(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> knots(8, 32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  for (std::size_t attempt = 1; attempt <= 100000; ++attempt) {
    const int k = knots(rng);
    std::vector<double> x(static_cast<std::size_t>(k));
    x.front() = 0.0;
    x.back() = 1.0;
    for (int i = 1; i + 1 < k; ++i) x[static_cast<std::size_t>(i)] = u(rng);
    std::sort(x.begin(), x.end());
    if (std::adjacent_find(x.begin(), x.end()) != x.end()) continue;
    std::vector<double> y(x.size());
    for (double& t : y) t = v(rng);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) mean += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    for (double& t : y) t -= mean;
    SignedFunction1D f(std::move(x), std::move(y));
    if (!(f.sup_norm() > 0.0) || !single_ray_test(f).single_ray) continue;
    return {std::move(f), seed, attempt};
  }
  throw Error("random_pwl: no single-ray sample found");
}

std::vector<InequalityReport> random_basic_suite(std::size_t count, std::uint64_t seed, std::size_t jobs) {
  return parallel_map(count, jobs, [seed](std::size_t i) {
    const auto g = random_pwl(seed + i);
    auto r = verify_basic(g.f);
    r.seed = g.seed;
    r.add("knots", static_cast<double>(g.f.nodes().size()));
    r.add("attempts", static_cast<double>(g.attempts));
    return r;
  });
}

ProductDemo product_demo(const SignedFunction1D& g, std::size_t grid_n) {
  if (grid_n < 4 || grid_n > kProductDemoMaxGrid) throw DomainError("product_demo: need 4 <= grid_n <= 64");
  if (g.a() != 0.0 || g.b() != 1.0) throw DomainError("product_demo: g must live on [0,1]");
  if (!(g.sup_norm() > 0.0)) throw DegenerateInputError("product_demo: g vanishes identically");
  if (!single_ray_test(g).single_ray) throw PreconditionError("product_demo: g is not single-ray");
  const std::size_t n = grid_n;
  const double dx = 1.0 / static_cast<double>(n);
  std::vector<double> gv(n);
  for (std::size_t i = 0; i < n; ++i) gv[i] = g((static_cast<double>(i) + 0.5) * dx);

  const auto nd = nodal_decompose(g);
  std::size_t flips = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) flips += (gv[i] > 0.0) != (gv[i + 1] > 0.0) ? 1 : 0;
  if (flips != nd.boundary.size()) throw DomainError("product_demo: grid too coarse to resolve the zeros of g");

  const std::size_t cells = n * n;
  std::vector<double> coords(2 * cells);
  std::vector<double> mu(cells);
  std::vector<double> nu(cells);
  const double area = dx * dx;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p = j * n + i;
      coords[2 * p] = (static_cast<double>(i) + 0.5) * dx;
      coords[2 * p + 1] = (static_cast<double>(j) + 0.5) * dx;
      mu[p] = std::max(gv[i], 0.0) * area;
      nu[p] = std::max(-gv[i], 0.0) * area;
    }
  }
  double mm = 0.0;
  double nm = 0.0;
  for (std::size_t p = 0; p < cells; ++p) {
    mm += mu[p];
    nm += nu[p];
  }
  if (std::abs(mm - nm) > 1e-6 * std::max(mm, nm)) {
    throw PreconditionError("product_demo: g does not have zero mean on the grid");
  }
  for (double& x : nu) x *= mm / nm;

  ProductDemo out;
  out.grid_n = n;
  const auto space = FiniteMetricSpace::euclidean(coords, 2);
  out.w1_2d = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(std::move(nu)), space, 1).cost;

  CellGrid ind{n, n, std::vector<double>(cells, 0.0)};
  CellGrid ones{n, n, std::vector<double>(cells, 1.0)};
  for (std::size_t p = 0; p < cells; ++p) ind.values[p] = mu[p] > 0.0 ? 1.0 : 0.0;
  out.perimeter_2d = grid_perimeter_2d(ind, ones);
  out.needle_perimeter = needle_perimeter_integral(ind, ones);

  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += gv[i] * dx;
    out.max_needle_mean = std::max(out.max_needle_mean, std::abs(s));
  }

  double l1 = 0.0;
  double linf = 0.0;
  for (double x : gv) {
    l1 += std::abs(x) * dx;
    linf = std::max(linf, std::abs(x));
  }
  const double D = std::numbers::sqrt2;
  const double C = c_kd(0.0, D);
  out.indeterminacy = make_report("product_demo", Sense::kLowerBound, out.w1_2d * out.perimeter_2d,
                                  l1 * l1 / (8.0 * C * linf), C);
  auto& r = out.indeterminacy;
  r.add("W1_2d", out.w1_2d);
  r.add("W1_1d", w1_line(positive_part(g), negative_part(g), 1e-6));
  r.add("perimeter_2d", out.perimeter_2d);
  r.add("needle_perimeter", out.needle_perimeter);
  r.add("max_needle_mean", out.max_needle_mean);
  r.add("l1", l1);
  r.add("linf", linf);
  r.add("K", 0.0);
  r.add("D", D);
  r.add("grid_n", static_cast<double>(n));

  out.perineq = make_report("perineq", Sense::kLowerBound, out.perimeter_2d, out.needle_perimeter, 1.0, 1e-12);
  out.perineq.add("grid_n", static_cast<double>(n));
  return out;
}

}  // namespace needle
