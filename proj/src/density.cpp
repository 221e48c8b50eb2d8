#include "needle/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <tuple>

#include "needle/curvature.hpp"
#include "needle/errors.hpp"

namespace needle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kQuadratureIntervals = 1 << 14;
constexpr int kSupSamples = 4096;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double eval_rep(const DensityRep& rep, double a, double b, double x) {
  return std::visit(
      Overloaded{
          [&](const ConstantDensity& d) { return d.c; },
          [&](const PowerDensity& d) {
            const double u = x - d.shift;
            if (u <= 0.0) return d.p == 0.0 ? d.c : 0.0;
            return d.c * std::pow(u, d.p);
          },
          [&](const SinPowDensity& d) {
            const double s = std::sin(d.omega * x + d.phase);
            return s <= 0.0 ? 0.0 : d.c * std::pow(s, d.p);
          },
          [&](const GaussLogDensity& d) {
            const double u = x - d.mu;
            return d.c * std::exp(-d.kappa * u * u / 2.0);
          },
          [&](const ExpDensity& d) { return d.c * std::exp(d.rate * x); },
          [&](const GridDensity& d) {
            const std::size_t m = d.values.size();
            const double pos = (x - a) / (b - a) * static_cast<double>(m - 1);
            if (pos <= 0.0) return d.values.front();
            if (pos >= static_cast<double>(m - 1)) return d.values.back();
            const auto i = static_cast<std::size_t>(pos);
            const double f = pos - static_cast<double>(i);
            return (1.0 - f) * d.values[i] + f * d.values[i + 1];
          },
          [&](const CustomDensity& d) { return d.fn(x); },
      },
      rep);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

std::string grid_description(std::size_t g, const char* what) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu-point uniform grid, %s", g, what);
  return buf;
}

// Strict lexicographic order on (slack, x0, x1, t) for deterministic witnesses.
bool worse(double slack, const Witness& w, double best, const std::optional<Witness>& bw) {
  if (!bw) return true;
  if (slack != best) return slack < best;
  return std::tie(w.x0, w.x1, w.t) < std::tie(bw->x0, bw->x1, bw->t);
}

void require_grid(std::size_t g) {
  if (g < 16) throw PreconditionError("certificate grids need at least 16 points");
}

}  // namespace

WeightedInterval::WeightedInterval(double a, double b, DensityRep density)
    : a_(a), b_(b), density_(std::move(density)) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
    throw DomainError("WeightedInterval needs finite a < b");
  }
  if (const auto* g = std::get_if<GridDensity>(&density_)) {
    if (g->values.size() < 3) throw DomainError("grid density needs at least 3 samples");
    double m = 0.0;
    for (std::size_t i = 0; i < g->values.size(); ++i) {
      const double v = g->values[i];
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("grid density must be finite and >= 0");
      if (i > 0) m += 0.5 * (v + g->values[i - 1]);
      max_value_ = std::max(max_value_, v);
    }
    mass_ = m * (b - a) / static_cast<double>(g->values.size() - 1);
    return;
  }
  // Composite Simpson; the closed forms are smooth on the interior.
  const int n = kQuadratureIntervals;
  const double dx = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i == n ? b : a + dx * i;
    const double v = eval_rep(density_, a_, b_, x);
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density must be finite and >= 0");
    max_value_ = std::max(max_value_, v);
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    s += wgt * v;
  }
  mass_ = s * dx / 3.0;
}

std::string WeightedInterval::kind() const {
  return std::visit(Overloaded{
                        [](const ConstantDensity&) { return std::string("constant"); },
                        [](const PowerDensity&) { return std::string("power"); },
                        [](const SinPowDensity&) { return std::string("sinpow"); },
                        [](const GaussLogDensity&) { return std::string("gauss"); },
                        [](const ExpDensity&) { return std::string("exp"); },
                        [](const GridDensity&) { return std::string("grid"); },
                        [](const CustomDensity& d) { return d.label; },
                    },
                    density_);
}

double WeightedInterval::operator()(double x) const {
  return eval_rep(density_, a_, b_, std::clamp(x, a_, b_));
}

double WeightedInterval::sup_on(double lo, double hi) const {
  lo = std::clamp(lo, a_, b_);
  hi = std::clamp(hi, a_, b_);
  if (hi < lo) std::swap(lo, hi);
  double s = std::max((*this)(lo), (*this)(hi));
  if (const auto* g = std::get_if<GridDensity>(&density_)) {
    const std::size_t m = g->values.size();
    for (std::size_t i = 0; i < m; ++i) {
      const double x = a_ + (b_ - a_) * static_cast<double>(i) / static_cast<double>(m - 1);
      if (x >= lo && x <= hi) s = std::max(s, g->values[i]);
    }
    return s;
  }
  for (int i = 1; i < kSupSamples; ++i) {
    s = std::max(s, (*this)(lo + (hi - lo) * i / kSupSamples));
  }
  return s;
}

bool WeightedInterval::is_constant() const {
  if (std::holds_alternative<ConstantDensity>(density_)) return true;
  if (const auto* g = std::get_if<GridDensity>(&density_)) {
    return std::all_of(g->values.begin(), g->values.end(),
                       [&](double v) { return v == g->values.front(); });
  }
  return false;
}

WeightedInterval lebesgue(double a, double b) { return {a, b, ConstantDensity{1.0}}; }

WeightedInterval custom_density(double a, double b, std::function<double(double)> fn,
                                std::string label) {
  return {a, b, CustomDensity{std::move(fn), std::move(label)}};
}

double cd_slack(const WeightedInterval& w, double K, double N, double x0, double x1, double t) {
  const double xt = t * x1 + (1.0 - t) * x0;
  const double floor = w.zero_floor();
  const double h0 = w(x0);
  const double h1 = w(x1);
  const double ht = w(xt);
  const double theta = std::abs(x1 - x0);
  if (std::isinf(N)) {
    // log h(xt) >= t log h(x1) + (1-t) log h(x0) + K/2 t(1-t) theta^2
    double rhs = K / 2.0 * t * (1.0 - t) * theta * theta;
    if (t > 0.0) rhs += h1 <= floor ? -kInf : t * std::log(h1);
    if (t < 1.0) rhs += h0 <= floor ? -kInf : (1.0 - t) * std::log(h0);
    if (rhs == -kInf) return kInf;
    const double lhs = ht <= floor ? -kInf : std::log(ht);
    return lhs - rhs;
  }
  const double e = 1.0 / (N - 1.0);
  auto root = [&](double h) { return h <= floor ? 0.0 : std::pow(h, e); };
  auto term = [](const ExtendedReal& s, double r) {
    if (r == 0.0) return 0.0;
    return s.is_infinite() ? kInf : s.value() * r;
  };
  const double rhs = term(sigma_coeff(t, K, N - 1.0, theta), root(h1)) +
                     term(sigma_coeff(1.0 - t, K, N - 1.0, theta), root(h0));
  return root(ht) - rhs;
}

double mcp_slack(const WeightedInterval& w, double K, double N, double x0, double x1, double t) {
  const double xt = t * x1 + (1.0 - t) * x0;
  const double h0 = w(x0);
  if (h0 <= w.zero_floor()) return w(xt);
  const ExtendedReal s = sigma_coeff(1.0 - t, K, N - 1.0, std::abs(x1 - x0));
  if (s.is_infinite()) return -kInf;
  return w(xt) - std::pow(s.value(), N - 1.0) * h0;
}

CertificateResult check_cd_density(const WeightedInterval& w, double K, double N,
                                   std::size_t grid_points) {
  require_grid(grid_points);
  if (!(N >= 1.0)) throw DomainError("check_cd_density: N must be >= 1");
  CertificateResult res;
  const auto xs = linspace(w.a(), w.b(), grid_points);

  if (N == 1.0) {
    res.grid_spec = grid_description(grid_points, "interior samples (CD(K,1): constant density)");
    if (K > 0.0) {
      res.passed = false;
      res.worst_slack = -kInf;
      res.witness = Witness{xs.front(), xs.back(), 0.5};
      res.reason = "CD(K,1) requires K <= 0";
      return res;
    }
    const double ref = w(xs[1]);
    res.worst_slack = 0.0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      const double slack = -std::abs(w(xs[i]) - ref) / std::max(1.0, std::abs(ref));
      ++res.evaluated;
      Witness wt{xs[i], xs[1], 0.0};
      if (slack < res.worst_slack) {
        res.worst_slack = slack;
        res.witness = wt;
      }
    }
    res.passed = res.worst_slack >= -kCertificateSlack;
    if (!res.passed) res.reason = "density is not constant on the interior";
    return res;
  }

  res.grid_spec = grid_description(grid_points, std::isinf(N) ? "triples (x0,x1,t), log form"
                                                              : "triples (x0,x1,t)");
  const auto ts = linspace(0.0, 1.0, grid_points);
  double best = kInf;
  std::optional<Witness> bw;
  for (double x0 : xs) {
    for (double x1 : xs) {
      for (double t : ts) {
        const double s = cd_slack(w, K, N, x0, x1, t);
        ++res.evaluated;
        const Witness wt{x0, x1, t};
        if (s < best || (s == best && worse(s, wt, best, bw))) {
          best = s;
          bw = wt;
        }
      }
    }
  }
  res.worst_slack = best;
  res.passed = best >= -kCertificateSlack;
  if (!res.passed) {
    res.witness = bw;
    res.reason = best == -kInf ? "sigma coefficient is +inf: interval longer than D_{K,N-1}"
                               : "CD density inequality violated";
  } else {
    res.witness = bw;
  }
  return res;
}

CertificateResult check_mcp_density(const WeightedInterval& w, double K, double N,
                                    std::size_t grid_points) {
  require_grid(grid_points);
  if (!(N > 1.0)) throw DomainError("check_mcp_density: N must exceed 1");
  CertificateResult res;
  res.grid_spec = grid_description(grid_points, "ordered triples (x0,x1,t), both orientations");
  const auto xs = linspace(w.a(), w.b(), grid_points);
  const auto ts = linspace(0.0, 1.0, grid_points);
  double best = kInf;
  std::optional<Witness> bw;
  for (double x0 : xs) {
    for (double x1 : xs) {
      for (double t : ts) {
        const double s = mcp_slack(w, K, N, x0, x1, t);
        ++res.evaluated;
        const Witness wt{x0, x1, t};
        if (s < best || (s == best && worse(s, wt, best, bw))) {
          best = s;
          bw = wt;
        }
      }
    }
  }
  res.worst_slack = best;
  res.witness = bw;
  res.passed = best >= -kCertificateSlack;
  if (!res.passed) {
    res.reason = best == -kInf ? "sigma coefficient is +inf: interval longer than D_{K,N-1}"
                               : "MCP density inequality violated";
  }
  return res;
}

namespace {

// s_kappa on the closed domain: the endpoint pi/sqrt(kappa) itself maps to 0.
double s_kappa_closed(double kappa, double theta) {
  if (kappa > kCurvatureSeam) {
    const double edge = std::numbers::pi / std::sqrt(kappa);
    if (theta >= edge && theta <= edge * (1.0 + 1e-12)) return 0.0;
  }
  return s_kappa(kappa, theta);
}

}  // namespace

CertificateResult ratio_bounds_check(const WeightedInterval& w, double K, double N,
                                     std::size_t grid_points) {
  require_grid(grid_points);
  if (!(N > 1.0)) throw DomainError("ratio_bounds_check: N must exceed 1");
  CertificateResult res;
  res.grid_spec = grid_description(grid_points, "pairs x0 <= x1, relative margin");
  const double kappa = K / (N - 1.0);
  const double a = w.a();
  const double b = w.b();
  const auto xs = linspace(a, b, grid_points);
  double best = kInf;
  std::optional<Witness> bw;
  try {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x0 = xs[i];
      const double h0 = w(x0);
      for (std::size_t j = i; j < xs.size(); ++j) {
        const double x1 = xs[j];
        if (h0 <= w.zero_floor()) {
          ++res.skipped;
          continue;
        }
        const double ratio = w(x1) / h0;
        const double den_lo = s_kappa_closed(kappa, b - x0);
        const double lower = den_lo == 0.0 ? 0.0 : std::pow(s_kappa_closed(kappa, b - x1) / den_lo, N - 1.0);
        const double den_hi = s_kappa_closed(kappa, x0 - a);
        const double upper = den_hi == 0.0 ? kInf : std::pow(s_kappa_closed(kappa, x1 - a) / den_hi, N - 1.0);
        const double slack = std::min(ratio - lower, upper - ratio) / std::max(1.0, ratio);
        ++res.evaluated;
        const Witness wt{x0, x1, 0.0};
        if (slack < best || (slack == best && worse(slack, wt, best, bw))) {
          best = slack;
          bw = wt;
        }
      }
    }
  } catch (const DomainError& e) {
    res.passed = false;
    res.worst_slack = -kInf;
    res.reason = std::string("interval exceeds the s_kappa domain: ") + e.what();
    return res;
  }
  res.worst_slack = best;
  res.witness = bw;
  res.passed = best >= -kCertificateSlack;
  if (!res.passed) res.reason = "ratio bound violated";
  return res;
}

double ratio_bound_constant(double K, double N, double D, double eps) {
  if (!(N > 1.0)) throw DomainError("ratio_bound_constant: N must exceed 1");
  if (!(eps > 0.0 && 2.0 * eps <= D)) throw DomainError("ratio_bound_constant: need 0 < 2 eps <= D");
  const double kappa = K / (N - 1.0);
  // Both orderings of a pair reduce to a quotient of s_kappa values on [eps, D - eps].
  double hi = std::max(s_kappa(kappa, eps), s_kappa(kappa, D - eps));
  const double lo = std::min(s_kappa(kappa, eps), s_kappa(kappa, D - eps));
  if (kappa > kCurvatureSeam) {
    const double peak = std::numbers::pi / (2.0 * std::sqrt(kappa));
    if (peak > eps && peak < D - eps) hi = 1.0 / std::sqrt(kappa);
  }
  return std::pow(hi / lo, N - 1.0);
}

double ratio_sup(const WeightedInterval& w, double eps, std::size_t grid_points) {
  const auto xs = linspace(w.a() + eps, w.b() - eps, grid_points);
  double lo = kInf;
  double hi = 0.0;
  for (double x : xs) {
    const double v = w(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo <= 0.0) return kInf;
  return hi / lo;
}

InequalityReport envelope_bound(const WeightedInterval& w, double xbar, double K, double N,
                                bool verify_certificate) {
  if (!(xbar > w.a() && xbar < w.b())) throw DomainError("envelope_bound: xbar must lie in (a,b)");
  const bool infinite_n = std::isinf(N);
  if (verify_certificate) {
    const auto cert = infinite_n ? check_cd_density(w, K, N, 32) : check_mcp_density(w, K, N, 32);
    if (!cert.passed) throw PreconditionError("envelope_bound: density certificate failed");
  }
  const double D = w.length();
  const double C = infinite_n ? c_kd(K, D) : c_knd(K, N, D);
  const double left = w.sup_on(w.a(), xbar);
  const double right = w.sup_on(xbar, w.b());
  const double hx = w(xbar);
  auto r = make_report(infinite_n ? "envelope_cd" : "envelope_mcp", Sense::kUpperBound,
                       std::min(left, right), hx * C, C, kCertificateSlack);
  r.add("xbar", xbar);
  r.add("sup_left", left);
  r.add("sup_right", right);
  r.add("h_xbar", hx);
  r.add("K", K);
  r.add("N", N);
  r.add("D", D);
  return r;
}

}  // namespace needle
