#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "needle/density.hpp"

namespace needle {

/// A continuous function on [a,b] known through samples at sorted nodes, plus
/// an optional exact evaluator used to refine zero crossings.
class SignedFunction1D {
 public:
  using Evaluator = std::function<double(double)>;

  SignedFunction1D(std::vector<double> nodes, std::vector<double> values, Evaluator exact = {});

  /// n uniform samples of fn on [a,b]; fn is kept as the exact evaluator.
  static SignedFunction1D sample(Evaluator fn, double a, double b, std::size_t n);
  /// Uniform samples, piecewise-linear in between.
  static SignedFunction1D uniform(double a, double b, std::vector<double> values);

  [[nodiscard]] double a() const { return nodes_.front(); }
  [[nodiscard]] double b() const { return nodes_.back(); }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] bool has_evaluator() const { return static_cast<bool>(exact_); }

  /// Exact evaluator when present, otherwise linear interpolation.
  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] double interpolate(double x) const;

  [[nodiscard]] double sup_norm() const;
  [[nodiscard]] double positive_sup() const;
  [[nodiscard]] double negative_sup() const;

  /// Same function plus a constant.
  [[nodiscard]] SignedFunction1D shifted(double c) const;
  [[nodiscard]] SignedFunction1D scaled(double s) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  Evaluator exact_;
};

/// Bisection tolerance on |f| relative to ||f||_inf.
inline constexpr double kZeroTolRel = 1e-10;

/// Components of {f > 0}, the closures merged where they touch, and the boundary
/// B(E): closure endpoints other than the ends of the support.
struct NodalDecomposition {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> zeros;                              // refined sign changes, sorted
  std::vector<std::pair<double, double>> components;      // open intervals where f > 0
  std::vector<std::pair<double, double>> merged_intervals;
  std::vector<double> boundary;
  bool zero_plateau = false;  // f vanished on a run of consecutive samples
};

/// Throws DomainError naming the location when a sign change cannot be refined
/// to the zero tolerance (a jump).
[[nodiscard]] NodalDecomposition nodal_decompose(const SignedFunction1D& f);

/// Sum of h over the boundary set.
[[nodiscard]] double weighted_perimeter(const NodalDecomposition& nd, const WeightedInterval& w);
/// Lebesgue version: the number of boundary points.
[[nodiscard]] double counting_perimeter(const NodalDecomposition& nd);

/// Boolean set on a uniform n_x by n_y cell grid over [0,1]^2, row-major with
/// index (j * n_x + i) for column i, row j.
struct CellGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
};

/// Weighted count of interior edges separating E from its complement, times the
/// edge length. Edge weights are the mean of the two adjacent cell weights.
[[nodiscard]] double grid_perimeter_2d(const CellGrid& indicator, const CellGrid& weights);

/// Integral over rows (horizontal needles) of the 1-D perimeter of each row's
/// section, with the same edge weights: the right side of the disintegration
/// inequality for horizontal needles with uniform quotient measure.
[[nodiscard]] double needle_perimeter_integral(const CellGrid& indicator, const CellGrid& weights);

}  // namespace needle
