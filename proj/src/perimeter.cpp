#include "needle/perimeter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "needle/errors.hpp"

namespace needle {

SignedFunction1D::SignedFunction1D(std::vector<double> nodes, std::vector<double> values, Evaluator exact)
    : nodes_(std::move(nodes)), values_(std::move(values)), exact_(std::move(exact)) {
  if (nodes_.size() != values_.size()) throw ShapeError("SignedFunction1D: nodes and values differ in size");
  if (nodes_.size() < 2) throw ShapeError("SignedFunction1D: need at least two samples");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]) || !std::isfinite(values_[i])) {
      throw DomainError("SignedFunction1D: non-finite sample");
    }
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw DomainError("SignedFunction1D: nodes must increase");
  }
}

SignedFunction1D SignedFunction1D::sample(Evaluator fn, double a, double b, std::size_t n) {
  if (n < 2 || !(a < b)) throw ShapeError("SignedFunction1D::sample: need a < b and n >= 2");
  std::vector<double> x(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = fn(x[i]);
  }
  return {std::move(x), std::move(v), std::move(fn)};
}

SignedFunction1D SignedFunction1D::uniform(double a, double b, std::vector<double> values) {
  const std::size_t n = values.size();
  if (n < 2 || !(a < b)) throw ShapeError("SignedFunction1D::uniform: need a < b and two samples");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return {std::move(x), std::move(values)};
}

double SignedFunction1D::interpolate(double x) const {
  if (x <= nodes_.front()) return values_.front();
  if (x >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const auto j = static_cast<std::size_t>(it - nodes_.begin());
  const double f = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
  return (1.0 - f) * values_[j - 1] + f * values_[j];
}

double SignedFunction1D::operator()(double x) const { return exact_ ? exact_(x) : interpolate(x); }

double SignedFunction1D::sup_norm() const { return std::max(positive_sup(), negative_sup()); }

double SignedFunction1D::positive_sup() const {
  return std::max(0.0, *std::max_element(values_.begin(), values_.end()));
}

double SignedFunction1D::negative_sup() const {
  return std::max(0.0, -*std::min_element(values_.begin(), values_.end()));
}

SignedFunction1D SignedFunction1D::shifted(double c) const {
  auto v = values_;
  for (double& y : v) y += c;
  Evaluator e;
  if (exact_) e = [f = exact_, c](double x) { return f(x) + c; };
  return {nodes_, std::move(v), std::move(e)};
}

SignedFunction1D SignedFunction1D::scaled(double s) const {
  auto v = values_;
  for (double& y : v) y *= s;
  Evaluator e;
  if (exact_) e = [f = exact_, s](double x) { return f(x) * s; };
  return {nodes_, std::move(v), std::move(e)};
}

namespace {

double refine_zero(const SignedFunction1D& f, std::size_t i, double ftol) {
  double lo = f.nodes()[i];
  double hi = f.nodes()[i + 1];
  double flo = f.values()[i];
  double fhi = f.values()[i + 1];
  if (!f.has_evaluator()) return lo + (hi - lo) * flo / (flo - fhi);
  const double width_tol = 1e-12 * std::max(1.0, f.b() - f.a());
  double mid = 0.5 * (lo + hi);
  double fm = f(mid);
  for (int it = 0; it < 400; ++it) {
    if (std::abs(fm) <= ftol && hi - lo <= width_tol) break;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    const double next = 0.5 * (lo + hi);
    if (next == lo || next == hi) break;
    mid = next;
    fm = f(mid);
  }
  if (std::abs(fm) > ftol) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "nodal_decompose: unresolved sign change near x = %.17g (|f| = %.3g)",
                  mid, std::abs(fm));
    throw DomainError(buf);
  }
  return mid;
}

}  // namespace

NodalDecomposition nodal_decompose(const SignedFunction1D& f) {
  NodalDecomposition nd;
  nd.a = f.a();
  nd.b = f.b();
  const auto& x = f.nodes();
  const auto& v = f.values();
  const std::size_t n = x.size();
  const double ftol = kZeroTolRel * f.sup_norm();
  std::vector<int> sign(n);
  for (std::size_t i = 0; i < n; ++i) sign[i] = v[i] > ftol ? 1 : (v[i] < -ftol ? -1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (sign[i] == 0 && sign[i + 1] == 0) nd.zero_plateau = true;
  }

  std::size_t i = 0;
  while (i < n) {
    if (sign[i] != 1) {
      ++i;
      continue;
    }
    const std::size_t p = i;
    while (i < n && sign[i] == 1) ++i;
    const std::size_t q = i - 1;
    double left = x[0];
    if (p > 0) left = sign[p - 1] == 0 ? x[p - 1] : refine_zero(f, p - 1, ftol);
    double right = x[n - 1];
    if (q + 1 < n) right = sign[q + 1] == 0 ? x[q + 1] : refine_zero(f, q, ftol);
    nd.components.emplace_back(left, right);
  }

  const double touch = 1e-12 * std::max(1.0, nd.b - nd.a);
  for (const auto& c : nd.components) {
    if (!nd.merged_intervals.empty() && c.first <= nd.merged_intervals.back().second + touch) {
      nd.merged_intervals.back().second = std::max(nd.merged_intervals.back().second, c.second);
    } else {
      nd.merged_intervals.push_back(c);
    }
  }
  for (const auto& c : nd.components) {
    for (double z : {c.first, c.second}) {
      if (z > nd.a && z < nd.b) nd.zeros.push_back(z);
    }
  }
  std::sort(nd.zeros.begin(), nd.zeros.end());
  nd.zeros.erase(std::unique(nd.zeros.begin(), nd.zeros.end()), nd.zeros.end());
  for (const auto& m : nd.merged_intervals) {
    for (double z : {m.first, m.second}) {
      if (z != nd.a && z != nd.b) nd.boundary.push_back(z);
    }
  }
  return nd;
}

double weighted_perimeter(const NodalDecomposition& nd, const WeightedInterval& w) {
  double s = 0.0;
  for (double z : nd.boundary) s += w(z);
  return s;
}

double counting_perimeter(const NodalDecomposition& nd) { return static_cast<double>(nd.boundary.size()); }

namespace {

void check_grids(const CellGrid& e, const CellGrid& w) {
  if (e.nx == 0 || e.ny == 0 || e.values.size() != e.nx * e.ny) throw ShapeError("cell grid shape mismatch");
  if (w.nx != e.nx || w.ny != e.ny || w.values.size() != e.values.size()) {
    throw ShapeError("weight grid must match the indicator grid");
  }
}

double vertical_edges(const CellGrid& e, const CellGrid& w) {
  const double dy = 1.0 / static_cast<double>(e.ny);
  double s = 0.0;
  for (std::size_t j = 0; j < e.ny; ++j) {
    for (std::size_t i = 0; i + 1 < e.nx; ++i) {
      if ((e.at(i, j) > 0.5) != (e.at(i + 1, j) > 0.5)) s += 0.5 * (w.at(i, j) + w.at(i + 1, j)) * dy;
    }
  }
  return s;
}

}  // namespace

double grid_perimeter_2d(const CellGrid& indicator, const CellGrid& weights) {
  check_grids(indicator, weights);
  const double dx = 1.0 / static_cast<double>(indicator.nx);
  double s = vertical_edges(indicator, weights);
  for (std::size_t j = 0; j + 1 < indicator.ny; ++j) {
    for (std::size_t i = 0; i < indicator.nx; ++i) {
      if ((indicator.at(i, j) > 0.5) != (indicator.at(i, j + 1) > 0.5)) {
        s += 0.5 * (weights.at(i, j) + weights.at(i, j + 1)) * dx;
      }
    }
  }
  return s;
}

double needle_perimeter_integral(const CellGrid& indicator, const CellGrid& weights) {
  check_grids(indicator, weights);
  return vertical_edges(indicator, weights);
}

}  // namespace needle
