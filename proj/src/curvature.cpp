#include "needle/curvature.hpp"

#include <cstdio>
#include <numbers>

#include "needle/errors.hpp"

namespace needle {

std::string ExtendedReal::to_string() const {
  if (is_infinite()) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

Dimension::Dimension(double n) : n_(n) {
  if (!(n >= 1.0)) throw DomainError("dimension N must satisfy N >= 1 or N = inf");
}

double s_kappa(double kappa, double theta) {
  if (theta < 0.0) throw DomainError("s_kappa: theta must be nonnegative");
  if (std::abs(kappa) < kCurvatureSeam) return theta;
  if (kappa > 0.0) {
    const double r = std::sqrt(kappa);
    if (theta >= std::numbers::pi / r) throw DomainError("s_kappa: theta >= pi/sqrt(kappa)");
    return std::sin(r * theta) / r;
  }
  const double r = std::sqrt(-kappa);
  return std::sinh(r * theta) / r;
}

namespace {

// sinh(t x) / sinh(x) for x > 0 without overflow.
double sinh_ratio(double t, double x) {
  if (x < 20.0) return std::sinh(t * x) / std::sinh(x);
  return std::exp((t - 1.0) * x) * (-std::expm1(-2.0 * t * x)) / (-std::expm1(-2.0 * x));
}

}  // namespace

ExtendedReal sigma_coeff(double t, double K, double Ncal, double theta) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("sigma_coeff: t must lie in [0,1]");
  if (!(Ncal > 0.0)) throw DomainError("sigma_coeff: Ncal must be positive");
  if (theta < 0.0) throw DomainError("sigma_coeff: theta must be nonnegative");
  if (std::abs(K) < kCurvatureSeam || std::isinf(Ncal)) return t;
  if (theta >= max_diameter(K, Ncal)) return ExtendedReal::infinity();
  if (theta == 0.0) return t;
  if (K > 0.0) {
    const double r = theta * std::sqrt(K / Ncal);
    return std::sin(t * r) / std::sin(r);
  }
  return sinh_ratio(t, theta * std::sqrt(-K / Ncal));
}

ExtendedReal tau_coeff(double t, const CurvatureParams& params, double theta) {
  const double N = params.N.value();
  if (N == 1.0) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("tau_coeff: t must lie in [0,1]");
    return params.K > 0.0 ? ExtendedReal::infinity() : ExtendedReal(t);
  }
  const ExtendedReal s = sigma_coeff(t, params.K, N - 1.0, theta);
  if (s.is_infinite()) return t > 0.0 ? s : ExtendedReal(0.0);
  if (params.N.is_infinite()) return s;
  return std::pow(t, 1.0 / N) * std::pow(s.value(), 1.0 - 1.0 / N);
}

ExtendedReal max_diameter(double K, double Ncal) {
  if (!(Ncal > 0.0)) throw DomainError("max_diameter: Ncal must be positive");
  if (K > 0.0 && !std::isinf(Ncal)) return std::numbers::pi / std::sqrt(K / Ncal);
  return ExtendedReal::infinity();
}

double c_kd(double K, double D) {
  if (!(D > 0.0)) throw DomainError("c_kd: D must be positive");
  if (K >= 0.0) return 1.0;
  if (std::isinf(D)) throw DomainError("c_kd: infinite diameter with K < 0");
  return std::exp(-K * D * D / 2.0);
}

double c_knd(double K, double N, double D) {
  if (!(N > 1.0)) throw DomainError("c_knd: N must exceed 1");
  if (!(D > 0.0)) throw DomainError("c_knd: D must be positive");
  const double base = std::pow(2.0, N - 1.0);
  if (K >= 0.0) return base;
  if (std::isinf(D)) throw DomainError("c_knd: infinite diameter with K < 0");
  return base * std::exp(std::sqrt(-K * (N - 1.0)) * D / 2.0);
}

double heat_contraction_coeff(double t, double K, double N) {
  if (!(t > 0.0)) throw DomainError("heat_contraction_coeff: t must be positive");
  if (!(N >= 1.0)) throw DomainError("heat_contraction_coeff: N must be >= 1");
  const double x = 2.0 * K * t / 3.0;
  if (std::abs(x) < kCurvatureSeam) return std::sqrt(2.0 * N);
  return std::sqrt(2.0 * N * (-std::expm1(-x)) / x);
}

}  // namespace needle
