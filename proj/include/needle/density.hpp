#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "needle/report.hpp"

namespace needle {

// Closed-form density families. Each evaluates to a nonnegative number.

/// h(x) = c
struct ConstantDensity {
  double c = 1.0;
};
/// h(x) = c (x - shift)^p, zero left of shift
struct PowerDensity {
  double c = 1.0;
  double shift = 0.0;
  double p = 1.0;
};
/// h(x) = c max(sin(omega x + phase), 0)^p
struct SinPowDensity {
  double c = 1.0;
  double omega = 1.0;
  double phase = 0.0;
  double p = 1.0;
};
/// h(x) = c exp(-kappa (x - mu)^2 / 2); log h is a concave quadratic when kappa > 0
struct GaussLogDensity {
  double c = 1.0;
  double mu = 0.0;
  double kappa = 1.0;
};
/// h(x) = c exp(rate x)
struct ExpDensity {
  double c = 1.0;
  double rate = 0.0;
};
/// Uniform samples on [a,b], piecewise-linear in between.
struct GridDensity {
  std::vector<double> values;
};
/// Arbitrary callable, used by tests and generators.
struct CustomDensity {
  std::function<double(double)> fn;
  std::string label = "custom";
};

using DensityRep = std::variant<ConstantDensity, PowerDensity, SinPowDensity, GaussLogDensity,
                                ExpDensity, GridDensity, CustomDensity>;

/// The one-dimensional model space ([a,b], |.|, h dx).
class WeightedInterval {
 public:
  WeightedInterval(double a, double b, DensityRep density);

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double length() const { return b_ - a_; }
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] const DensityRep& density() const { return density_; }
  [[nodiscard]] std::string kind() const;

  /// h(x); x is clamped into [a,b] so rounding at the ends never leaves the support.
  [[nodiscard]] double operator()(double x) const;

  /// Sup of h over [lo,hi] (dense sampling plus grid nodes for sampled densities).
  [[nodiscard]] double sup_on(double lo, double hi) const;
  [[nodiscard]] double max_value() const { return max_value_; }

  /// Values at or below this are treated as exact zeros (e.g. sin(pi)^2 ~ 1e-32).
  [[nodiscard]] double zero_floor() const { return 1e-14 * max_value_; }

  [[nodiscard]] bool is_constant() const;

 private:
  double a_;
  double b_;
  DensityRep density_;
  double mass_ = 0.0;
  double max_value_ = 0.0;
};

/// Convenience constructors.
[[nodiscard]] WeightedInterval lebesgue(double a, double b);
[[nodiscard]] WeightedInterval custom_density(double a, double b, std::function<double(double)> fn,
                                              std::string label = "custom");

struct Witness {
  double x0 = 0.0;
  double x1 = 0.0;
  double t = 0.0;
};

struct CertificateResult {
  bool passed = false;
  double worst_slack = 0.0;
  std::optional<Witness> witness;
  std::string grid_spec;
  std::string reason;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// A grid certificate passes when worst_slack >= -kCertificateSlack.
inline constexpr double kCertificateSlack = 1e-9;

/// Margin of the CD(K,N) density inequality at one triple (N > 1 finite, or N = inf
/// for the log form). Negative means violated.
[[nodiscard]] double cd_slack(const WeightedInterval& w, double K, double N, double x0, double x1,
                              double t);
/// Margin of the MCP(K,N) density inequality at one triple.
[[nodiscard]] double mcp_slack(const WeightedInterval& w, double K, double N, double x0, double x1,
                               double t);

/// Grid certificate of the CD(K,N) density condition. N may be 1, finite > 1, or inf.
[[nodiscard]] CertificateResult check_cd_density(const WeightedInterval& w, double K, double N,
                                                 std::size_t grid_points);

/// Grid certificate of the MCP(K,N) density condition, both orientations.
[[nodiscard]] CertificateResult check_mcp_density(const WeightedInterval& w, double K, double N,
                                                  std::size_t grid_points);

/// Two-sided ratio bounds on h(x1)/h(x0) implied by MCP(K,N). Pairs with h(x0) = 0
/// are skipped and counted in `skipped`.
[[nodiscard]] CertificateResult ratio_bounds_check(const WeightedInterval& w, double K, double N,
                                                   std::size_t grid_points);

/// (max s_k / min s_k over [eps, D - eps])^{N-1} with k = K/(N-1): bound on
/// sup h(x1)/h(x0) over [a+eps, b-eps] for an MCP(K,N) density on an interval of
/// length D. Reduces to (s_k(D - eps) / s_k(eps))^{N-1} when s_k is monotone there.
[[nodiscard]] double ratio_bound_constant(double K, double N, double D, double eps);

/// Sup of h(x1)/h(x0) over grid pairs in [a+eps, b-eps].
[[nodiscard]] double ratio_sup(const WeightedInterval& w, double eps, std::size_t grid_points);

/// min(sup_[a,xbar] h, sup_[xbar,b] h) <= h(xbar) C, with C = c_kd for N = inf and
/// c_knd otherwise. When verify_certificate is set the matching certificate is
/// checked first and PreconditionError raised if it fails.
[[nodiscard]] InequalityReport envelope_bound(const WeightedInterval& w, double xbar, double K,
                                              double N, bool verify_certificate = true);

}  // namespace needle
