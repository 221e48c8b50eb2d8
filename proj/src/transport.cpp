#include "needle/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "needle/errors.hpp"
#include "needle/perimeter.hpp"

namespace needle {

LineMeasure::LineMeasure(std::vector<double> knots, std::vector<double> density)
    : knots_(std::move(knots)), density_(std::move(density)) {
  if (knots_.size() != density_.size()) throw ShapeError("LineMeasure: knots and density differ in size");
  if (knots_.size() < 2) throw ShapeError("LineMeasure: need at least two knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(density_[i])) {
      throw DomainError("LineMeasure: non-finite knot or density");
    }
    if (density_[i] < 0.0) throw DomainError("LineMeasure: density must be nonnegative");
    if (i > 0) {
      if (knots_[i] < knots_[i - 1]) throw DomainError("LineMeasure: knots must be nondecreasing");
      mass_ += 0.5 * (density_[i] + density_[i - 1]) * (knots_[i] - knots_[i - 1]);
    }
  }
}

LineMeasure LineMeasure::uniform(double a, double b, std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2 || !(a < b)) throw ShapeError("LineMeasure::uniform: need a < b and two samples");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  x.back() = b;
  return {std::move(x), std::vector<double>(samples.begin(), samples.end())};
}

LineMeasure LineMeasure::block(double lo, double hi, double height) {
  if (!(lo <= hi)) throw DomainError("LineMeasure::block: need lo <= hi");
  return {{lo, lo, hi, hi}, {0.0, height, height, 0.0}};
}

double LineMeasure::sup() const { return *std::max_element(density_.begin(), density_.end()); }

double LineMeasure::support_lo() const {
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (density_[i] > 0.0) return i == 0 ? knots_[0] : knots_[i - 1];
  }
  return knots_.front();
}

double LineMeasure::support_hi() const {
  for (std::size_t i = density_.size(); i-- > 0;) {
    if (density_[i] > 0.0) return i + 1 == density_.size() ? knots_.back() : knots_[i + 1];
  }
  return knots_.back();
}

double LineMeasure::right_limit(double x) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin() || it == knots_.end()) return 0.0;
  const auto j = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t i = j - 1;
  const double f = (x - knots_[i]) / (knots_[j] - knots_[i]);
  return (1.0 - f) * density_[i] + f * density_[j];
}

double LineMeasure::left_limit(double x) const {
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin() || it == knots_.end()) return 0.0;
  const auto j = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t i = j - 1;
  const double f = (x - knots_[i]) / (knots_[j] - knots_[i]);
  return (1.0 - f) * density_[i] + f * density_[j];
}

LineMeasure LineMeasure::scaled(double s) const {
  if (!(s >= 0.0)) throw DomainError("LineMeasure::scaled: factor must be nonnegative");
  auto d = density_;
  for (double& v : d) v *= s;
  return {knots_, std::move(d)};
}

LineMeasure LineMeasure::shifted(double c) const {
  auto k = knots_;
  for (double& v : k) v += c;
  return {std::move(k), density_};
}

namespace {

std::vector<double> merged_breakpoints(const LineMeasure& mu, const LineMeasure& nu) {
  std::vector<double> z;
  z.reserve(mu.knots().size() + nu.knots().size());
  std::merge(mu.knots().begin(), mu.knots().end(), nu.knots().begin(), nu.knots().end(),
             std::back_inserter(z));
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

// Integral of |c0 + c1 s + c2 s^2| over [0, len].
double abs_quadratic_integral(double c0, double c1, double c2, double len) {
  std::array<double, 4> cuts{0.0, len, len, len};
  std::size_t nc = 1;
  auto add_root = [&](double r) {
    if (r > 0.0 && r < len) cuts[nc++] = r;
  };
  const double scale = std::abs(c0) + std::abs(c1) * len + std::abs(c2) * len * len;
  if (std::abs(c2) * len * len <= 1e-14 * scale) {
    if (c1 != 0.0) add_root(-c0 / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc > 0.0) {
      const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
      if (q != 0.0) {
        add_root(q / c2);
        add_root(c0 / q);
      } else {
        add_root(0.0);
      }
    }
  }
  std::sort(cuts.begin() + 1, cuts.begin() + static_cast<std::ptrdiff_t>(nc));
  cuts[nc] = len;
  auto prim = [&](double s) { return s * (c0 + s * (c1 / 2.0 + s * c2 / 3.0)); };
  double total = 0.0;
  for (std::size_t i = 0; i < nc; ++i) total += std::abs(prim(cuts[i + 1]) - prim(cuts[i]));
  return total;
}

double checked_ratio(double m1, double m2, double mass_tol) {
  if (std::abs(m1 - m2) > mass_tol * std::max({m1, m2, 1.0})) {
    throw MassMismatchError("measures differ in mass beyond tolerance");
  }
  return m2 > 0.0 ? m1 / m2 : 1.0;
}

}  // namespace

double w1_line(const LineMeasure& mu, const LineMeasure& nu, double mass_tol) {
  const double s = checked_ratio(mu.mass(), nu.mass(), mass_tol);
  const auto z = merged_breakpoints(mu, nu);
  double diff = 0.0;  // F_mu - F_nu at z[j]
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    const double len = z[j + 1] - z[j];
    const double l = mu.right_limit(z[j]) - s * nu.right_limit(z[j]);
    const double r = mu.left_limit(z[j + 1]) - s * nu.left_limit(z[j + 1]);
    const double slope = (r - l) / len;
    total += abs_quadratic_integral(diff, l, slope / 2.0, len);
    diff += 0.5 * (l + r) * len;
  }
  return total;
}

double l1_distance(const LineMeasure& mu, const LineMeasure& nu) {
  const auto z = merged_breakpoints(mu, nu);
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    const double len = z[j + 1] - z[j];
    const double e0 = mu.right_limit(z[j]) - nu.right_limit(z[j]);
    const double e1 = mu.left_limit(z[j + 1]) - nu.left_limit(z[j + 1]);
    if (e0 * e1 >= 0.0) {
      total += 0.5 * len * (std::abs(e0) + std::abs(e1));
    } else {
      total += 0.5 * len * (e0 * e0 + e1 * e1) / (std::abs(e0) + std::abs(e1));
    }
  }
  return total;
}

double w1_atoms(std::span<const double> positions, std::span<const double> mu,
                std::span<const double> nu, double mass_tol) {
  const std::size_t n = positions.size();
  if (mu.size() != n || nu.size() != n) throw ShapeError("w1_atoms: size mismatch");
  const double mm = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double nm = std::accumulate(nu.begin(), nu.end(), 0.0);
  const double s = checked_ratio(mm, nm, mass_tol);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return positions[i] < positions[j]; });
  double cdf = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cdf += mu[order[k]] - s * nu[order[k]];
    total += std::abs(cdf) * (positions[order[k + 1]] - positions[order[k]]);
  }
  return total;
}

double wp_atoms(std::span<const double> positions, std::span<const double> mu,
                std::span<const double> nu, double p) {
  const std::size_t n = positions.size();
  if (mu.size() != n || nu.size() != n) throw ShapeError("wp_atoms: size mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return positions[i] < positions[j]; });
  const double mm = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double nm = std::accumulate(nu.begin(), nu.end(), 0.0);
  std::size_t i = 0;
  std::size_t j = 0;
  double ri = n ? mu[order[0]] / mm : 0.0;
  double rj = n ? nu[order[0]] / nm : 0.0;
  double cost = 0.0;
  while (i < n && j < n) {
    const double m = std::min(ri, rj);
    cost += m * std::pow(std::abs(positions[order[i]] - positions[order[j]]), p);
    ri -= m;
    rj -= m;
    if (ri <= 1e-300 && ++i < n) ri = mu[order[i]] / mm;
    if (rj <= 1e-300 && ++j < n) rj = nu[order[j]] / nm;
  }
  return std::pow(cost, 1.0 / p);
}

LineMeasure Block::measure() const {
  return side == Side::kLeft ? LineMeasure::block(xbar - width, xbar, height)
                             : LineMeasure::block(xbar, xbar + width, height);
}

Block block_rearrangement(const LineMeasure& f_part, double xbar, Side side) {
  const double slack = 1e-12 * std::max(1.0, std::abs(xbar));
  if (f_part.mass() > 0.0) {
    if (side == Side::kLeft && f_part.support_hi() > xbar + slack) {
      throw PreconditionError("block_rearrangement: left part extends beyond xbar");
    }
    if (side == Side::kRight && f_part.support_lo() < xbar - slack) {
      throw PreconditionError("block_rearrangement: right part extends before xbar");
    }
  }
  Block b;
  b.xbar = xbar;
  b.side = side;
  b.height = f_part.sup();
  b.width = b.height > 0.0 ? f_part.mass() / b.height : 0.0;
  return b;
}

double direct_cost(const Block& rf, const Block& rg) {
  if (rf.side == rg.side) throw ShapeError("direct_cost: blocks must sit on opposite sides");
  if (std::abs(rf.xbar - rg.xbar) > 1e-12 * std::max(1.0, std::abs(rf.xbar))) {
    throw ShapeError("direct_cost: blocks must share xbar");
  }
  auto term = [](const Block& b) { return b.height > 0.0 ? b.mass() * b.mass() / b.height : 0.0; };
  return 0.5 * (term(rf) + term(rg));
}

namespace {

// Knots of f h with the interpolant's zero crossings inserted.
void signed_knots(const SignedFunction1D& f, const WeightedInterval* w, std::vector<double>& x,
                  std::vector<double>& g) {
  const auto& nodes = f.nodes();
  const auto& vals = f.values();
  x.clear();
  g.clear();
  x.reserve(nodes.size() * 2);
  g.reserve(nodes.size() * 2);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double gi = vals[i] * (w ? (*w)(nodes[i]) : 1.0);
    if (i > 0) {
      const double gp = g.back();
      if ((gp > 0.0 && gi < 0.0) || (gp < 0.0 && gi > 0.0)) {
        const double xp = x.back();
        double xc = xp + (nodes[i] - xp) * gp / (gp - gi);
        xc = std::clamp(xc, xp, nodes[i]);
        x.push_back(xc);
        g.push_back(0.0);
      }
    }
    x.push_back(nodes[i]);
    g.push_back(gi);
  }
}

LineMeasure part(const SignedFunction1D& f, const WeightedInterval* w, double sign) {
  std::vector<double> x;
  std::vector<double> g;
  signed_knots(f, w, x, g);
  for (double& v : g) v = std::max(sign * v, 0.0);
  return {std::move(x), std::move(g)};
}

}  // namespace

LineMeasure positive_part(const SignedFunction1D& f, const WeightedInterval* w) { return part(f, w, 1.0); }

LineMeasure negative_part(const SignedFunction1D& f, const WeightedInterval* w) { return part(f, w, -1.0); }

RayTest single_ray_test(const SignedFunction1D& f, const WeightedInterval* w) {
  std::vector<double> x;
  std::vector<double> g;
  signed_knots(f, w, x, g);
  double p = 0.0;
  double tv = 0.0;
  RayTest res;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double piece = 0.5 * (g[i] + g[i - 1]) * (x[i] - x[i - 1]);
    p += piece;
    tv += std::abs(piece);
    res.min_primitive = std::min(res.min_primitive, p);
    res.max_primitive = std::max(res.max_primitive, p);
  }
  // The end value is the residual mean; it is absorbed into the tolerance.
  res.tol = 1e-10 * tv + std::abs(p);
  const bool pos = res.min_primitive >= -res.tol;
  const bool neg = res.max_primitive <= res.tol;
  res.single_ray = pos || neg;
  res.orientation = pos && neg ? RayOrientation::kBoth
                    : pos      ? RayOrientation::kPositive
                    : neg      ? RayOrientation::kNegative
                               : RayOrientation::kNone;
  return res;
}

double duality_gap(const SignedFunction1D& f, const WeightedInterval* w, double mass_tol) {
  const RayTest ray = single_ray_test(f, w);
  if (!ray.single_ray) throw PreconditionError("duality_gap: transport is not along a single ray");
  const LineMeasure pos = positive_part(f, w);
  const LineMeasure neg = negative_part(f, w);
  if (pos.mass() == 0.0 && neg.mass() == 0.0) return 0.0;
  const double w1 = w1_line(pos, neg, mass_tol);
  std::vector<double> x;
  std::vector<double> g;
  signed_knots(f, w, x, g);
  double moment = 0.0;  // int x f h
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double len = x[i] - x[i - 1];
    moment += len * (g[i - 1] * (2.0 * x[i - 1] + x[i]) + g[i] * (x[i - 1] + 2.0 * x[i])) / 6.0;
  }
  const double dual = ray.orientation == RayOrientation::kNegative ? moment : -moment;
  return std::abs(w1 - dual);
}

InequalityReport w1_diam_bound(const LineMeasure& mu, const LineMeasure& nu, double D) {
  if (!(D > 0.0)) throw DomainError("w1_diam_bound: D must be positive");
  const double lo = std::min(mu.support_lo(), nu.support_lo());
  const double hi = std::max(mu.support_hi(), nu.support_hi());
  if (hi - lo > D * (1.0 + 1e-12)) throw PreconditionError("w1_diam_bound: supports exceed length D");
  const double w1 = w1_line(mu, nu);
  const double l1 = l1_distance(mu, nu);
  auto r = make_report("w1_diam_bound", Sense::kUpperBound, w1, D * l1, D);
  r.add("W1", w1);
  r.add("l1_distance", l1);
  r.add("D", D);
  return r;
}

}  // namespace needle
