#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <string>

namespace needle {

/// A real number or +infinity. The distortion coefficients and the maximal
/// diameter legitimately take the value +infinity, so they return this type
/// instead of throwing.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit on purpose

  static constexpr ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] constexpr bool is_infinite() const {
    return value_ == std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] constexpr bool is_finite() const { return !is_infinite(); }
  [[nodiscard]] constexpr double value() const { return value_; }

  friend constexpr auto operator<=>(const ExtendedReal&, const ExtendedReal&) = default;

  friend ExtendedReal max(ExtendedReal a, ExtendedReal b) { return a < b ? b : a; }
  /// Product with a nonnegative scalar; +inf absorbs positives, 0*inf is 0.
  friend ExtendedReal scale(ExtendedReal a, double s) {
    if (s == 0.0) return ExtendedReal(0.0);
    return ExtendedReal(a.value_ * s);
  }

  [[nodiscard]] std::string to_string() const;

 private:
  double value_ = 0.0;
};

/// Dimension upper bound N in [1, inf].
class Dimension {
 public:
  explicit Dimension(double n);
  static Dimension infinite() { return Dimension(std::numeric_limits<double>::infinity()); }

  [[nodiscard]] bool is_infinite() const { return std::isinf(n_); }
  [[nodiscard]] double value() const { return n_; }

 private:
  double n_;
};

/// Curvature lower bound K and dimension upper bound N.
struct CurvatureParams {
  double K = 0.0;
  Dimension N{1.0};
};

/// Below this magnitude kappa (or K) is treated as exactly zero.
inline constexpr double kCurvatureSeam = 1e-12;

/// sin(sqrt(k) t)/sqrt(k), t, or sinh(sqrt(-k) t)/sqrt(-k) by the sign of kappa.
/// Throws DomainError when kappa > 0 and theta >= pi/sqrt(kappa).
[[nodiscard]] double s_kappa(double kappa, double theta);

/// Distortion coefficient sigma^{(t)}_{K,Ncal}(theta) for Ncal in (0, inf].
[[nodiscard]] ExtendedReal sigma_coeff(double t, double K, double Ncal, double theta);

/// tau^{(t)}_{K,N}(theta) = t^{1/N} sigma^{(t)}_{K,N-1}(theta)^{1-1/N}; for N = 1 it
/// is t when K <= 0 and +inf when K > 0.
[[nodiscard]] ExtendedReal tau_coeff(double t, const CurvatureParams& params, double theta);

/// pi / sqrt(K/Ncal) when K > 0 and Ncal finite, +inf otherwise.
[[nodiscard]] ExtendedReal max_diameter(double K, double Ncal);

/// Envelope constant under CD(K,inf): 1 for K >= 0, exp(-K D^2 / 2) for K < 0.
[[nodiscard]] double c_kd(double K, double D);

/// Envelope constant under MCP(K,N): 2^{N-1}, times exp(sqrt(-K(N-1)) D/2) when K < 0.
[[nodiscard]] double c_knd(double K, double N, double D);

/// Heat-flow displacement constant (2N (1 - e^{-2Kt/3}) / (2Kt/3))^{1/2};
/// the K -> 0 limit sqrt(2N) is used on the seam.
[[nodiscard]] double heat_contraction_coeff(double t, double K, double N);

}  // namespace needle
