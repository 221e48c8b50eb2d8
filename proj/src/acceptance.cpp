#include "needle/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "needle/curvature.hpp"
#include "needle/density.hpp"
#include "needle/discrete_ot.hpp"
#include "needle/parallel.hpp"
#include "needle/spectral.hpp"
#include "needle/transport.hpp"
#include "needle/uncertainty.hpp"

namespace needle {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

WeightedInterval sin2_model() { return {0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 2.0}}; }

SignedFunction1D sin_mode(double n, std::size_t samples) {
  return SignedFunction1D::sample([n](double x) { return std::sin(2.0 * pi * n * x); }, 0.0, 1.0, samples);
}

Outcome block_transport() {
  const auto f = LineMeasure::block(0.2, 0.5, 1.0);
  const auto g = LineMeasure::block(0.5, 0.8, 1.0);
  const double w = w1_line(f, g);
  const double d = direct_cost(block_rearrangement(f, 0.5, Side::kLeft), block_rearrangement(g, 0.5, Side::kRight));
  return {std::abs(w - 0.09) <= 1e-9 && std::abs(d - w) <= 1e-15,
          fmt("w1_line=%.17g direct_cost=%.17g", w, d)};
}

Outcome oracle_equivalence(std::size_t jobs) {
  const auto gaps = parallel_map(50, jobs, [](std::size_t i) {
    std::mt19937_64 rng(1000 + i);
    std::uniform_int_distribution<std::size_t> size(2, 200);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = size(rng);
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    std::sort(x.begin(), x.end());
    std::vector<double> mu(n);
    std::vector<double> nu(n);
    double sm = 0.0;
    double sn = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      mu[k] = u(rng) < 0.3 ? 0.0 : u(rng);
      nu[k] = u(rng) < 0.3 ? 0.0 : u(rng);
      sm += mu[k];
      sn += nu[k];
    }
    if (sm == 0.0) mu[0] = sm = 1.0;
    if (sn == 0.0) nu[n - 1] = sn = 1.0;
    for (double& v : mu) v /= sm;
    for (double& v : nu) v /= sn;
    const double cdf = w1_atoms(x, mu, nu);
    const double lp = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(nu), FiniteMetricSpace::line(x), 1).cost;
    return std::abs(cdf - lp) / (1.0 + lp);
  });
  const double worst = *std::max_element(gaps.begin(), gaps.end());
  return {worst <= 1e-6, fmt("50 instances, max |w1 - emd|/(1+cost) = %.3g", worst)};
}

Outcome basic_suite(std::size_t jobs) {
  const auto rows = random_basic_suite(1000, 20240101, jobs);
  double worst = kInf;
  std::size_t fails = 0;
  for (const auto& r : rows) {
    worst = std::min(worst, r.ratio);
    fails += r.holds ? 0 : 1;
  }
  const auto s = verify_basic(sin_mode(1, 4001));
  const bool sin_ok = std::abs(s.lhs - 0.159155) <= 1e-4 && std::abs(s.rhs - 0.050660) <= 1e-4;
  return {fails == 0 && worst >= 1 - 1e-8 && sin_ok,
          fmt("1000 random: min ratio %.6f, failures %zu; sin: lhs=%.6f rhs=%.6f", worst, fails, s.lhs, s.rhs)};
}

Outcome density_certification() {
  const auto cd = check_cd_density(sin2_model(), 2.0, 3.0, 64);
  const WeightedInterval ex(0.0, 1.0, ExpDensity{1.0, -10.0});
  const auto mcp = check_mcp_density(ex, 0.0, 2.0, 64);
  const double at = mcp_slack(ex, 0.0, 2.0, 0.0, 1.0, 0.5);
  const bool witness_ok = std::abs(at - (std::exp(-5.0) - 0.5)) <= 1e-12 && at < 0.0;
  return {cd.passed && cd.worst_slack >= -1e-9 && !mcp.passed && witness_ok,
          fmt("sin^2 CD(2,3) worst_slack=%.3g; exp(-10x) MCP(0,2) passed=%d, slack(0,1,0.5)=%.12g", cd.worst_slack,
              mcp.passed ? 1 : 0, at)};
}

Outcome envelope_bounds(std::size_t jobs) {
  const auto ok = parallel_map(200, jobs, [](std::size_t i) {
    std::mt19937_64 rng(5000 + i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double xbar = 0.01 + 0.98 * u(rng);
    if (i % 2 == 0) {
      // log-concave Gaussian: CD(kappa, inf)
      const double kappa = 0.5 + 4.5 * u(rng);
      const WeightedInterval w(0.0, 1.0, GaussLogDensity{1.0, u(rng), kappa});
      return envelope_bound(w, xbar, kappa, kInf).holds;
    }
    // (x - s)^p with s <= 0 is CD(0, p + 1), hence MCP(0, p + 1)
    const double p = 0.5 + 2.5 * u(rng);
    const WeightedInterval w(0.0, 1.0, PowerDensity{1.0, -0.5 * u(rng), p});
    return envelope_bound(w, xbar, 0.0, p + 1.0).holds;
  });
  const auto held = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));
  const double c1 = c_knd(0.0, 3.0, 1.0);
  const double c2 = c_kd(-1.0, 2.0);
  const bool consts = std::abs(c1 - 4.0) <= 1e-12 && std::abs(c2 - std::exp(2.0)) <= 1e-12 * std::exp(2.0);
  return {held == ok.size() && consts, fmt("%zu/200 hold; c_knd(0,3,1)=%.17g c_kd(-1,2)=%.17g", held, c1, c2)};
}

Outcome spectral_accuracy() {
  const EigenBasis flat({lebesgue(0.0, 1.0), 2000}, 11);
  double flat_err = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double ref = (k * pi) * (k * pi);
    flat_err = std::max(flat_err, std::abs(flat[k].lambda - ref) / ref);
  }
  const EigenBasis s2({sin2_model(), 2000}, 6);
  double s2_err = 0.0;
  for (std::size_t l = 1; l <= 5; ++l) {
    const double ref = static_cast<double>(l * (l + 1));
    s2_err = std::max(s2_err, std::abs(s2[l].lambda - ref) / ref);
  }
  const double gram = flat.gram_deviation();
  const double mean = std::max(flat.max_mean_residual(), s2.max_mean_residual());
  return {flat_err <= 0.01 && s2_err <= 0.01 && gram <= 1e-8 && mean <= 1e-8,
          fmt("flat max rel err %.3g; sin^2 vs l(l+1) max rel err %.3g (lambda_1=%.6f); gram %.3g; mean %.3g",
              flat_err, s2_err, s2[1].lambda, gram, mean)};
}

Outcome nodal_estimate() {
  std::size_t fails = 0;
  const EigenBasis flat({lebesgue(0.0, 1.0), 2000}, 21);
  const EigenBasis s2({sin2_model(), 2000}, 21);
  for (const EigenBasis* b : {&flat, &s2}) {
    for (std::size_t k = 1; k <= 20; ++k) fails += w1_eig_upper(*b, (*b)[k]).holds ? 0 : 1;
  }
  const auto r = w1_eig_upper(flat, flat[1].scaled(1.0 / std::sqrt(2.0)));
  const bool ex = std::abs(r.lhs - 0.2026) <= 1e-3 && std::abs(r.rhs - 0.2251) <= 1e-3 && r.holds;
  return {fails == 0 && ex, fmt("40 eigenpairs, failures %zu; flat k=1: %.6f <= %.6f", fails, r.lhs, r.rhs)};
}

Outcome nodal_cd() {
  const EigenBasis flat({lebesgue(0.0, 1.0), 2000}, 21);
  std::size_t fails = 0;
  double rmin = kInf;
  double rmax = 0.0;
  for (std::size_t k = 1; k <= 20; ++k) {
    const auto r = nodal_bound_cd(flat, flat[k], 0.0);
    const bool ok = r.holds && r.lhs >= static_cast<double>(k) * std::sqrt(2.0) / (2.0 * pi);
    fails += ok ? 0 : 1;
    rmin = std::min(rmin, r.ratio);
    rmax = std::max(rmax, r.ratio);
  }
  const EigenBasis s2({sin2_model(), 2000}, 2);
  const auto p1 = nodal_bound_cd(s2, s2[1], 2.0);
  const bool p1_ok = p1.holds && std::abs(p1.lhs - 1.0) <= 1e-9 && std::abs(p1.rhs - 0.100) <= 0.005;
  return {fails == 0 && std::abs(rmin - pi * std::sqrt(2.0)) <= 0.01 && std::abs(rmax - pi * std::sqrt(2.0)) <= 0.01 &&
              p1_ok,
          fmt("flat failures %zu, ratio in [%.4f, %.4f]; sin^2 P1: %.6f >= %.6f", fails, rmin, rmax, p1.lhs, p1.rhs)};
}

Outcome heat_upper() {
  const EigenBasis flat({lebesgue(0.0, 1.0), 2000}, 21);
  std::size_t fails = 0;
  double cmax = 0.0;
  for (std::size_t k = 2; k <= 20; ++k) {
    const auto r = w1_heat_upper(flat, flat[k], 0.0, 1.0);
    fails += r.holds ? 0 : 1;
    cmax = std::max(cmax, *r.get("packaged_C_observed"));
  }
  return {fails == 0 && cmax < 3.0, fmt("k=2..20 failures %zu; max packaged constant %.4f", fails, cmax)};
}

Outcome sharpness(std::size_t jobs) {
  const auto rows = sharpness_sweep(64, jobs);
  bool mono = true;
  double rmax = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].ratio > rows[i - 1].ratio)) mono = false;
    rmax = std::max(rmax, rows[i].ratio);
  }
  const double r8 = rows[7].ratio;
  return {mono && rmax <= 2 * pi + 1e-6 && std::abs(r8 - 15 * pi / 8) <= 1e-3,
          fmt("monotone=%d max ratio %.9f (2pi=%.9f); n=8 ratio %.6f (15pi/8=%.6f)", mono ? 1 : 0, rmax, 2 * pi, r8,
              15 * pi / 8)};
}

Outcome product(const std::function<double()>& elapsed) {
  const auto d = product_demo(sin_mode(1, 2001), 32);
  const auto step = product_demo(
      SignedFunction1D::sample([](double x) { return -std::tanh((x - 0.5) / 1e-3); }, 0.0, 1.0, 4001), 32);
  const double ref = 1.0 / (2.0 * pi);
  const bool ok = std::abs(d.w1_2d - ref) <= 0.05 * ref && d.indeterminacy.holds &&
                  std::abs(d.perimeter_2d - 1.0) <= 2.0 / 32 && d.perineq.holds &&
                  step.needle_perimeter == step.perimeter_2d && d.max_needle_mean <= 1e-8 &&
                  step.max_needle_mean <= 1e-8 && elapsed() <= 60.0;
  return {ok, fmt("W1_2d=%.6f (1/2pi=%.6f); Per=%.4f needles=%.4f; step Per=%.4f needles=%.4f; max needle mean %.3g",
                  d.w1_2d, ref, d.perimeter_2d, d.needle_perimeter, step.perimeter_2d, step.needle_perimeter,
                  std::max(d.max_needle_mean, step.max_needle_mean))};
}

Outcome chains(std::size_t jobs) {
  const EigenBasis flat({lebesgue(0.0, 1.0), 2000}, 21);
  const auto ok = parallel_map(20, jobs, [&flat](std::size_t i) {
    std::mt19937_64 rng(9000 + i);
    std::uniform_int_distribution<std::size_t> count(1, 4);
    std::uniform_int_distribution<std::size_t> mode(1, 20);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ModeCoefficients c;
    const std::size_t m = count(rng);
    while (c.size() < m) {
      const std::size_t k = mode(rng);
      if (std::none_of(c.begin(), c.end(), [k](const auto& p) { return p.first == k; })) c.emplace_back(k, coef(rng));
    }
    double lmin = kInf;
    for (const auto& [k, a] : c) lmin = std::min(lmin, flat[k].lambda);
    const auto heat = combo_heat_chain(flat, c, lmin, 0.0, 2.0);
    const auto nodal = combo_nodal_bound(flat, c, lmin, 0.0, 2.0);
    return std::make_pair(heat.holds, nodal.holds);
  });
  std::size_t heat_ok = 0;
  std::size_t nodal_ok = 0;
  for (const auto& [h, n] : ok) {
    heat_ok += h ? 1 : 0;
    nodal_ok += n ? 1 : 0;
  }
  return {heat_ok == 20 && nodal_ok == 20, fmt("heat chain %zu/20, nodal bound %zu/20", heat_ok, nodal_ok)};
}

}  // namespace

std::vector<AcceptanceResult> run_acceptance(std::size_t jobs) {
  using clock = std::chrono::steady_clock;
  std::vector<AcceptanceResult> out;
  auto run = [&](int id, const char* title, const std::function<Outcome(const std::function<double()>&)>& fn) {
    AcceptanceResult r;
    r.id = id;
    r.title = title;
    const auto t0 = clock::now();
    auto elapsed = [t0] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    try {
      const auto o = fn(elapsed);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = elapsed();
    out.push_back(std::move(r));
  };
  run(1, "block transport exactness", [](auto&) { return block_transport(); });
  run(2, "oracle equivalence", [&](auto& el) {
    auto o = oracle_equivalence(jobs);
    o.pass = o.pass && el() <= 30.0;
    return o;
  });
  run(3, "basic suite", [&](auto&) { return basic_suite(jobs); });
  run(4, "density certification", [](auto&) { return density_certification(); });
  run(5, "envelope bounds", [&](auto&) { return envelope_bounds(jobs); });
  run(6, "spectral accuracy", [](auto&) { return spectral_accuracy(); });
  run(7, "eigenfunction W1 upper bound", [](auto&) { return nodal_estimate(); });
  run(8, "nodal set lower bound (CD)", [](auto&) { return nodal_cd(); });
  run(9, "heat-flow W1 upper bound", [](auto&) { return heat_upper(); });
  run(10, "sharpness sweep", [&](auto&) { return sharpness(jobs); });
  run(11, "product demo", [](auto& el) { return product(el); });
  run(12, "linear combination chains", [&](auto&) { return chains(jobs); });
  return out;
}

void print_acceptance(std::ostream& out, const std::vector<AcceptanceResult>& results) {
  for (const auto& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << fmt(" %2d ", r.id) << r.title << ": " << r.detail
        << fmt(" (%.2f s)", r.seconds) << '\n';
  }
}

}  // namespace needle
