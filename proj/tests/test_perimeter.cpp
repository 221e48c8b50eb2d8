#include <cmath>
#include <numbers>

#include "doctest.h"
#include "needle/errors.hpp"
#include "needle/perimeter.hpp"

using namespace needle;
using std::numbers::pi;

TEST_CASE("nodal decomposition of sin(2 pi x)") {
  const auto f = SignedFunction1D::sample([](double x) { return std::sin(2 * pi * x); }, 0.0, 1.0, 257);
  const auto nd = nodal_decompose(f);
  REQUIRE(nd.components.size() == 1);
  CHECK(nd.components[0].first == 0.0);
  CHECK(nd.components[0].second == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(nd.boundary.size() == 1);
  CHECK(nd.boundary[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(weighted_perimeter(nd, lebesgue(0, 1)) == doctest::Approx(1.0));
  CHECK_FALSE(nd.zero_plateau);
}

TEST_CASE("negative function has empty boundary") {
  const auto f = SignedFunction1D::uniform(0.0, 1.0, std::vector<double>(300, -1.0));
  const auto nd = nodal_decompose(f);
  CHECK(nd.components.empty());
  CHECK(nd.boundary.empty());
  CHECK(weighted_perimeter(nd, lebesgue(0, 1)) == 0.0);
}

TEST_CASE("cos(k pi x) zeros") {
  for (int k = 1; k <= 12; ++k) {
    const auto f = SignedFunction1D::sample([k](double x) { return std::cos(k * pi * x); }, 0.0, 1.0, 1024);
    const auto nd = nodal_decompose(f);
    CHECK(counting_perimeter(nd) == k);
    REQUIRE(nd.zeros.size() == static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
      CHECK(std::abs(nd.zeros[j - 1] - (2.0 * j - 1) / (2.0 * k)) <= 1e-11);
      CHECK(std::abs(f(nd.zeros[j - 1])) <= 1e-10);
    }
  }
}

TEST_CASE("weighted perimeter with sin^2 weight") {
  const WeightedInterval w(0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 2.0});
  const auto f = SignedFunction1D::sample([](double x) { return std::sin(2 * x - pi / 2) * -1.0; }, 0.0, pi, 513);
  // -sin(2x - pi/2) = cos(2x) > 0 off (pi/4, 3pi/4); negate to get E = (pi/4, 3pi/4).
  const auto nd = nodal_decompose(f.scaled(-1.0));
  REQUIRE(nd.merged_intervals.size() == 1);
  CHECK(nd.merged_intervals[0].first == doctest::Approx(pi / 4));
  CHECK(nd.merged_intervals[0].second == doctest::Approx(3 * pi / 4));
  CHECK(weighted_perimeter(nd, w) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("touching closures merge") {
  // |sin(2 pi x)|-like: positive on (0,1/2) and (1/2,1), zero at 1/2.
  const auto f = SignedFunction1D::sample([](double x) { return std::abs(std::sin(2 * pi * x)) + 0.0; }, 0.0, 1.0, 257);
  const auto nd = nodal_decompose(f);
  CHECK(nd.components.size() == 2);
  CHECK(nd.merged_intervals.size() == 1);
  CHECK(nd.boundary.empty());
}

TEST_CASE("perimeter additive over merged intervals") {
  const auto f = SignedFunction1D::sample([](double x) { return std::cos(5 * pi * x); }, 0.0, 1.0, 1000);
  const auto nd = nodal_decompose(f);
  const WeightedInterval w(0.0, 1.0, ExpDensity{1.0, 0.7});
  double s = 0.0;
  for (const auto& m : nd.merged_intervals) {
    if (m.first != 0.0) s += w(m.first);
    if (m.second != 1.0) s += w(m.second);
  }
  CHECK(weighted_perimeter(nd, w) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("zero plateau flagged") {
  const auto f = SignedFunction1D::uniform(0.0, 1.0, {1.0, 0.0, 0.0, 0.0, -1.0});
  const auto nd = nodal_decompose(f);
  CHECK(nd.zero_plateau);
  REQUIRE(nd.boundary.size() == 1);
  CHECK(nd.boundary[0] == 0.25);
}

TEST_CASE("jump is reported with its location") {
  const auto f = SignedFunction1D::sample([](double x) { return x < 0.3 ? 1.0 : -1.0; }, 0.0, 1.0, 256);
  try {
    (void)nodal_decompose(f);
    FAIL("expected an exception");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    const auto pos = msg.find("x = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::abs(std::stod(msg.substr(pos + 4)) - 0.3) <= 1e-9);
  }
}

TEST_CASE("grid perimeter") {
  const std::size_t n = 32;
  CellGrid e{n, n, std::vector<double>(n * n, 0.0)};
  CellGrid ones{n, n, std::vector<double>(n * n, 1.0)};
  CHECK(grid_perimeter_2d(e, ones) == 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n / 2; ++i) e.values[j * n + i] = 1.0;
  }
  CHECK(grid_perimeter_2d(e, ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(needle_perimeter_integral(e, ones) == doctest::Approx(1.0).epsilon(1e-14));
  CellGrid hw{n, n, std::vector<double>(n * n)};
  auto h = [](double x) { return 1.0 + x * x; };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) hw.values[j * n + i] = h((i + 0.5) / n);
  }
  const double edge = 0.5 * (h((n / 2 - 0.5) / n) + h((n / 2 + 0.5) / n));
  CHECK(grid_perimeter_2d(e, hw) == doctest::Approx(edge).epsilon(1e-14));
  CHECK(std::abs(edge - h(0.5)) <= 1.0 / n);
  CHECK_THROWS_AS((void)grid_perimeter_2d(e, CellGrid{n, n + 1, std::vector<double>(n * (n + 1))}), ShapeError);
}

TEST_CASE("2-D perimeter dominates the needle integral") {
  const std::size_t n = 24;
  CellGrid disk{n, n, std::vector<double>(n * n, 0.0)};
  CellGrid ones{n, n, std::vector<double>(n * n, 1.0)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n - 0.5;
      const double y = (j + 0.5) / n - 0.5;
      disk.values[j * n + i] = x * x + y * y < 0.09 ? 1.0 : 0.0;
    }
  }
  CHECK(grid_perimeter_2d(disk, ones) >= needle_perimeter_integral(disk, ones));
}
