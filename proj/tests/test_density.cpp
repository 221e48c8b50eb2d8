#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "needle/curvature.hpp"
#include "needle/density.hpp"
#include "needle/errors.hpp"

using namespace needle;
using std::numbers::pi;

namespace {

WeightedInterval sin2() { return {0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 2.0}}; }

}  // namespace

TEST_CASE("weighted interval mass and evaluation") {
  CHECK(lebesgue(0.0, 2.0).mass() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sin2().mass() == doctest::Approx(pi / 2).epsilon(1e-12));
  const WeightedInterval g(0.0, 1.0, GridDensity{{0.0, 1.0, 0.0}});
  CHECK(g.mass() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g(0.25) == doctest::Approx(0.5));
  CHECK(g(-3.0) == 0.0);
  const WeightedInterval p(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  CHECK(p.mass() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(WeightedInterval(1.0, 0.0, ConstantDensity{}), DomainError);
}

TEST_CASE("CD certificates") {
  const auto flat = check_cd_density(lebesgue(0.0, 1.0), 0.0, 7.0, 32);
  CHECK(flat.passed);

  const auto s2 = check_cd_density(sin2(), 2.0, 3.0, 64);
  CHECK(s2.passed);
  CHECK(s2.worst_slack >= -1e-9);
  CHECK(s2.evaluated == 64u * 64u * 64u);

  const WeightedInterval wiggle = custom_density(0.0, 1.0, [](double x) { return 1.0 + 0.5 * std::sin(10 * x); });
  const auto bad = check_cd_density(wiggle, 0.0, 2.0, 64);
  REQUIRE_FALSE(bad.passed);
  REQUIRE(bad.witness.has_value());
  // Oracle worst slack on the 64^3 grid.
  CHECK(bad.worst_slack == doctest::Approx(-0.9991365039118272).epsilon(1e-9));
  CHECK(std::abs(cd_slack(wiggle, 0.0, 2.0, bad.witness->x0, bad.witness->x1, bad.witness->t) - bad.worst_slack) <=
        1e-12);
}

TEST_CASE("CD(K,inf) log form") {
  const WeightedInterval g(-2.0, 2.0, GaussLogDensity{1.0, 0.0, 1.0});
  CHECK(check_cd_density(g, 1.0, std::numeric_limits<double>::infinity(), 32).passed);
  CHECK_FALSE(check_cd_density(g, 1.5, std::numeric_limits<double>::infinity(), 32).passed);
  CHECK(check_cd_density(lebesgue(0, 1), 0.0, std::numeric_limits<double>::infinity(), 16).passed);
}

TEST_CASE("CD(K,1) needs K <= 0 and constant density") {
  CHECK(check_cd_density(lebesgue(0, 1), -1.0, 1.0, 16).passed);
  CHECK_FALSE(check_cd_density(lebesgue(0, 1), 1.0, 1.0, 16).passed);
  const WeightedInterval p(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  CHECK_FALSE(check_cd_density(p, 0.0, 1.0, 16).passed);
}

TEST_CASE("sigma = inf reported as failure, not a crash") {
  const auto r = check_cd_density(lebesgue(0.0, 10.0), 1.0, 2.0, 16);
  CHECK_FALSE(r.passed);
  CHECK(r.reason.find("inf") != std::string::npos);
}

TEST_CASE("MCP certificates") {
  CHECK(check_mcp_density(lebesgue(0, 1), 0.0, 2.0, 32).passed);
  const WeightedInterval lin(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  const auto r = check_mcp_density(lin, 0.0, 2.0, 64);
  CHECK(r.passed);
  CHECK(r.worst_slack >= -1e-15);

  const WeightedInterval ex(0.0, 1.0, ExpDensity{1.0, -10.0});
  const auto bad = check_mcp_density(ex, 0.0, 2.0, 64);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.witness.has_value());
  CHECK(std::abs(mcp_slack(ex, 0.0, 2.0, bad.witness->x0, bad.witness->x1, bad.witness->t) - bad.worst_slack) <=
        1e-12);
  const double at = mcp_slack(ex, 0.0, 2.0, 0.0, 1.0, 0.5);
  CHECK(at == doctest::Approx(std::exp(-5.0) - 0.5).epsilon(1e-14));
  CHECK(at < 0.0);
}

TEST_CASE("CD implies MCP on the same grid") {
  const std::vector<std::tuple<WeightedInterval, double, double>> cases = {
      {sin2(), 2.0, 3.0},
      {WeightedInterval(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0}), 0.0, 2.0},
      {WeightedInterval(0.0, 2.0, SinPowDensity{1.0, 1.0, 0.2, 1.0}), 1.0, 2.0},
      {lebesgue(0.0, 3.0), -1.0, 4.0},
  };
  for (const auto& [w, K, N] : cases) {
    const auto cd = check_cd_density(w, K, N, 24);
    if (cd.passed) CHECK(check_mcp_density(w, K, N, 24).worst_slack >= -1e-9);
  }
}

TEST_CASE("failures persist under refinement") {
  const WeightedInterval ex(0.0, 1.0, ExpDensity{1.0, -10.0});
  for (std::size_t g : {16u, 31u, 48u}) CHECK_FALSE(check_mcp_density(ex, 0.0, 2.0, g).passed);
  const WeightedInterval wiggle = custom_density(0.0, 1.0, [](double x) { return 1.0 + 0.5 * std::sin(10 * x); });
  for (std::size_t g : {16u, 33u, 64u}) CHECK_FALSE(check_cd_density(wiggle, 0.0, 2.0, g).passed);
}

TEST_CASE("ratio bounds") {
  CHECK(ratio_bounds_check(lebesgue(0, 1), 0.0, 3.0, 64).passed);
  const WeightedInterval s(0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 1.0});
  const auto r = ratio_bounds_check(s, 1.0, 2.0, 256);
  CHECK(r.passed);
  CHECK(r.skipped > 0u);
  const WeightedInterval lin(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  const auto rl = ratio_bounds_check(lin, 0.0, 2.0, 64);
  CHECK(rl.passed);
  CHECK(rl.worst_slack == doctest::Approx(0.0).epsilon(1e-12));
  const WeightedInterval ex(0.0, 1.0, ExpDensity{1.0, -10.0});
  CHECK_FALSE(ratio_bounds_check(ex, 0.0, 2.0, 32).passed);
}

TEST_CASE("ratio sup below the MCP ratio constant") {
  const double eps = 0.1;
  const WeightedInterval s(0.0, pi, SinPowDensity{1.0, 1.0, 0.0, 1.0});
  CHECK(ratio_sup(s, eps, 128) <= ratio_bound_constant(1.0, 2.0, pi, eps) * (1 + 1e-12));
  const WeightedInterval lin(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  CHECK(ratio_sup(lin, eps, 128) <= ratio_bound_constant(0.0, 2.0, 1.0, eps) * (1 + 1e-12));
  CHECK(ratio_bound_constant(0.0, 2.0, 1.0, 0.1) == doctest::Approx(9.0));
}

TEST_CASE("envelope bound examples") {
  const auto r1 = envelope_bound(lebesgue(0, 1), 0.3, 0.0, 3.0);
  CHECK(r1.holds);
  CHECK(r1.lhs == doctest::Approx(1.0));
  const WeightedInterval g(-2.0, 2.0, GaussLogDensity{1.0, 0.0, 1.0});
  const auto r2 = envelope_bound(g, 1.0, 1.0, std::numeric_limits<double>::infinity());
  CHECK(r2.holds);
  CHECK(r2.lhs == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(r2.rhs == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  const WeightedInterval lin(0.0, 2.0, PowerDensity{1.0, 0.0, 1.0});
  const auto r3 = envelope_bound(lin, 1.0, 0.0, 2.0);
  CHECK(r3.holds);
  CHECK(r3.lhs == doctest::Approx(1.0));
  CHECK(r3.rhs == doctest::Approx(2.0));
  const WeightedInterval ex(0.0, 1.0, ExpDensity{1.0, -10.0});
  CHECK_THROWS_AS((void)envelope_bound(ex, 0.5, 0.0, 2.0), PreconditionError);
}

TEST_CASE("envelope bound holds at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const WeightedInterval g(0.0, 1.0, GaussLogDensity{1.0, 0.3, 4.0});
  const WeightedInterval lin(0.0, 1.0, PowerDensity{1.0, 0.0, 1.0});
  for (int i = 0; i < 20; ++i) {
    CHECK(envelope_bound(g, u(rng), 4.0, std::numeric_limits<double>::infinity()).holds);
    CHECK(envelope_bound(lin, u(rng), 0.0, 2.0).holds);
  }
}
