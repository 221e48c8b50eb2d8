#include <cmath>
#include <numbers>

#include "doctest.h"
#include "needle/curvature.hpp"
#include "needle/errors.hpp"

using namespace needle;
using std::numbers::pi;

TEST_CASE("s_kappa branches") {
  CHECK(s_kappa(0.0, 2.5) == 2.5);
  CHECK(s_kappa(1.0, pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s_kappa(-1.0, 1.0) == doctest::Approx(1.1752011936438014).epsilon(1e-15));
  CHECK_THROWS_AS((void)s_kappa(1.0, pi), DomainError);
  CHECK_THROWS_AS((void)s_kappa(4.0, 2.0), DomainError);
}

TEST_CASE("s_kappa is continuous across kappa = 0") {
  for (double th : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(s_kappa(1e-13, th) == th);
    CHECK(s_kappa(1e-9, th) == doctest::Approx(th).epsilon(1e-8));
    CHECK(s_kappa(-1e-9, th) == doctest::Approx(th).epsilon(1e-8));
  }
}

TEST_CASE("s_kappa increasing for kappa <= 0") {
  for (double k : {0.0, -0.5, -3.0}) {
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double v = s_kappa(k, 0.05 * i);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("sigma coefficient") {
  CHECK(sigma_coeff(0.3, 0.0, 4.0, 7.0).value() == 0.3);
  CHECK(sigma_coeff(0.3, 2.0, std::numeric_limits<double>::infinity(), 7.0).value() == 0.3);
  CHECK(sigma_coeff(0.5, 1.0, 1.0, pi / 2).value() == doctest::Approx(0.70710678118654752).epsilon(1e-14));
  CHECK(sigma_coeff(0.5, 1.0, 1.0, pi).is_infinite());
  CHECK(sigma_coeff(0.5, 1.0, 1.0, 4.0).is_infinite());
  CHECK(sigma_coeff(0.3, -2.0, 3.0, 1.5).value() == doctest::Approx(0.24167917432951731).epsilon(1e-14));
  CHECK(sigma_coeff(0.7, 2.0, 3.0, 2.0).value() == doctest::Approx(0.91168451850837649).epsilon(1e-14));
  CHECK(sigma_coeff(0.25, 1.0, 2.0, 0.0).value() == 0.25);
}

TEST_CASE("sigma tends to t as theta -> 0") {
  for (double K : {-5.0, -1.0, 1.0, 5.0}) {
    for (double t : {0.1, 0.5, 0.9}) {
      CHECK(std::abs(sigma_coeff(t, K, 2.0, 1e-7).value() - t) <= 1e-9);
    }
  }
}

TEST_CASE("sigma for large negative curvature does not overflow") {
  const auto v = sigma_coeff(0.5, -1e4, 1.0, 50.0);
  CHECK(v.is_finite());
  CHECK(v.value() >= 0.0);
  CHECK(v.value() < 1e-100);
}

TEST_CASE("tau coefficient") {
  CHECK(tau_coeff(0.4, {0.0, Dimension(5.0)}, 1.0).value() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(tau_coeff(0.5, {1.0, Dimension(1.0)}, 0.1).is_infinite());
  CHECK(tau_coeff(0.5, {-1.0, Dimension(1.0)}, 0.1).value() == 0.5);
  CHECK(tau_coeff(0.5, {2.0, Dimension(2.0)}, 1.0).value() ==
        doctest::Approx(0.57344706349808997).epsilon(1e-14));
  for (double N : {1.5, 2.0, 7.0}) {
    for (double th : {0.0, 0.3, 9.0}) CHECK(tau_coeff(0.37, {0.0, Dimension(N)}, th).value() == doctest::Approx(0.37));
  }
}

TEST_CASE("dimension must be at least one") { CHECK_THROWS_AS(Dimension(0.5), DomainError); }

TEST_CASE("max diameter") {
  CHECK(max_diameter(1.0, 4.0).value() == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(max_diameter(0.0, 5.0).is_infinite());
  CHECK(max_diameter(-1.0, 3.0).is_infinite());
  CHECK(max_diameter(1.0, std::numeric_limits<double>::infinity()).is_infinite());
}

TEST_CASE("envelope constants") {
  CHECK(c_kd(0.5, 10.0) == 1.0);
  CHECK(c_kd(0.0, 1.0) == 1.0);
  CHECK(std::abs(c_kd(-1.0, 2.0) - 7.3890560989306502) <= 1e-12);
  CHECK(c_knd(0.0, 3.0, 7.0) == 4.0);
  CHECK(std::abs(c_knd(-1.0, 2.0, 2.0) - 5.4365636569180905) <= 1e-12);
  CHECK(c_knd(1.0, 2.0, 1.0) == 2.0);
  CHECK_THROWS_AS((void)c_kd(-1.0, std::numeric_limits<double>::infinity()), DomainError);
  CHECK_THROWS_AS((void)c_knd(-1.0, 2.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("envelope constants monotone") {
  for (double D : {0.5, 1.0, 3.0}) {
    double prev_kd = std::numeric_limits<double>::infinity();
    double prev_knd = prev_kd;
    for (double K = -4.0; K <= 2.0; K += 0.25) {
      CHECK(c_kd(K, D) <= prev_kd);
      CHECK(c_knd(K, 3.0, D) <= prev_knd);
      CHECK(c_kd(K, D) >= 1.0);
      prev_kd = c_kd(K, D);
      prev_knd = c_knd(K, 3.0, D);
    }
  }
  for (double K : {-2.0, -0.5}) {
    CHECK(c_kd(K, 1.0) <= c_kd(K, 2.0));
    CHECK(c_knd(K, 2.5, 1.0) <= c_knd(K, 2.5, 2.0));
  }
}

TEST_CASE("heat contraction coefficient") {
  CHECK(heat_contraction_coeff(0.7, 0.0, 2.0) == 2.0);
  CHECK(heat_contraction_coeff(1.0, 0.0, 8.0) == 4.0);
  CHECK(heat_contraction_coeff(0.5, -3.0, 2.0) == doctest::Approx(2.6216649888641724).epsilon(1e-14));
  for (double t : {1e-6, 0.01, 1.0, 100.0}) {
    for (double K : {0.0, 1e-14, 0.3, 5.0}) {
      CHECK(heat_contraction_coeff(t, K, 3.0) <= std::sqrt(6.0) * (1 + 1e-15));
    }
  }
  CHECK(heat_contraction_coeff(0.5, 1e-9, 2.0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("extended real formatting and ordering") {
  CHECK(ExtendedReal::infinity().to_string() == "inf");
  CHECK(ExtendedReal(0.5).to_string() == "0.5");
  CHECK(ExtendedReal(1.0) < ExtendedReal::infinity());
  CHECK(max(ExtendedReal(2.0), ExtendedReal::infinity()).is_infinite());
  CHECK(scale(ExtendedReal::infinity(), 3.0).is_infinite());
  CHECK(scale(ExtendedReal::infinity(), 0.0).value() == 0.0);
}
