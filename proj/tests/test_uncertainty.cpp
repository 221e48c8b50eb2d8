#include <cmath>
#include <cstdlib>
#include <numbers>

#include "doctest.h"
#include "needle/curvature.hpp"
#include "needle/errors.hpp"
#include "needle/parallel.hpp"
#include "needle/transport.hpp"
#include "needle/uncertainty.hpp"

using namespace needle;
using std::numbers::pi;

namespace {

SignedFunction1D sin_mode(double n, std::size_t samples = 2001) {
  return SignedFunction1D::sample([n](double x) { return std::sin(2 * pi * n * x); }, 0.0, 1.0, samples);
}

// Indicator of (0,1/2) minus indicator of (1/2,1), smoothed over width eps.
SignedFunction1D step_mollified(double eps = 1e-3, std::size_t samples = 4001) {
  return SignedFunction1D::sample([eps](double x) { return -std::tanh((x - 0.5) / eps); }, 0.0, 1.0, samples);
}

std::optional<double> verify_basic_masses(const SignedFunction1D& f, const WeightedInterval& w) {
  return positive_part(f, &w).mass() - negative_part(f, &w).mass();
}

}  // namespace

TEST_CASE("verify_basic examples") {
  const auto r = verify_basic(sin_mode(1));
  CHECK(r.holds);
  CHECK(r.lhs == doctest::Approx(1 / (2 * pi)).epsilon(1e-5));
  CHECK(r.rhs == doctest::Approx(1 / (2 * pi * pi)).epsilon(1e-5));
  CHECK(r.ratio == doctest::Approx(pi).epsilon(1e-4));
  CHECK(*r.get("perimeter") == 1.0);

  const auto s = verify_basic(step_mollified());
  CHECK(s.holds);
  CHECK(s.lhs == doctest::Approx(0.25).epsilon(1e-2));
  CHECK(s.rhs == doctest::Approx(0.125).epsilon(1e-2));
  CHECK(s.ratio == doctest::Approx(2.0).epsilon(1e-2));

  CHECK_THROWS_AS((void)verify_basic(SignedFunction1D::uniform(0, 1, {0, 0, 0})), DegenerateInputError);
  CHECK_THROWS_AS((void)verify_basic(sin_mode(1).shifted(0.1)), PreconditionError);
  // +,-,+ profile with zero mean is not single-ray when the middle lobe dominates.
  const auto two = SignedFunction1D::sample([](double x) { return std::cos(2 * pi * x); }, 0, 1, 2001);
  CHECK_THROWS_AS((void)verify_basic(two), PreconditionError);
}

TEST_CASE("verify_cd and verify_mcp") {
  const auto f = sin_mode(1);
  const auto flat = lebesgue(0, 1);
  const auto cd = verify_cd(f, flat, 0.0);
  CHECK(cd.holds);
  CHECK(cd.lhs == doctest::Approx(1 / (2 * pi)).epsilon(1e-5));
  CHECK(cd.rhs == doctest::Approx(std::pow(2 / pi, 2) / 8).epsilon(1e-5));
  CHECK(cd.constant_used == 1.0);
  const auto mcp = verify_mcp(f, flat, 0.0, 2.0);
  CHECK(mcp.holds);
  CHECK(mcp.constant_used == 2.0);
  CHECK(mcp.rhs == doctest::Approx(cd.rhs / 2).epsilon(1e-12));
  // RHS_cd <= LHS whenever the Lebesgue check holds.
  CHECK(verify_basic(f).holds);
  CHECK(cd.rhs <= cd.lhs);

  const WeightedInterval gauss(0, 1, GaussLogDensity{1.0, 0.0, 1.0});
  const auto g = tilt_corrected(f, &gauss);
  const auto gr = verify_cd(g, gauss, 1.0);
  CHECK(gr.holds);

  const WeightedInterval lin(0, 1, PowerDensity{1.0, 0.0, 1.0});
  const auto lf = tilt_corrected(f, &lin);
  const auto lr = verify_mcp(lf, lin, 0.0, 2.0);
  CHECK(lr.holds);
  CHECK(lr.constant_used == 2.0);
  CHECK(std::abs(*lr.get("l1_pos") - *lr.get("l1_neg")) <= 1e-14);

  const auto shifted = mean_corrected(sin_mode(1), &lin);
  CHECK(std::abs(*verify_basic_masses(shifted, lin)) <= 1e-14);

  const WeightedInterval steep(0, 1, ExpDensity{1.0, -10.0});
  const auto sf = mean_corrected(f, &steep);
  CHECK_THROWS_AS((void)verify_mcp(sf, steep, 0.0, 2.0), PreconditionError);
  CHECK_THROWS_AS((void)verify_cd(SignedFunction1D::uniform(0, 1, {0, 0}), flat, 0.0), DegenerateInputError);
  CHECK_THROWS_AS((void)verify_cd(f, lebesgue(0, 2), 0.0), DomainError);
}

TEST_CASE("constants monotone in D") {
  const auto f = sin_mode(1);
  // K < 0: RHS shrinks as the interval grows (f rescaled to each interval).
  double prev = INFINITY;
  for (double D : {0.5, 1.0, 2.0, 4.0}) {
    const auto fd = SignedFunction1D::sample([D](double x) { return std::sin(2 * pi * x / D); }, 0.0, D, 2001);
    const auto r = verify_cd(fd, lebesgue(0, D), -1.0);
    const double unit = *r.get("l1_fh") * *r.get("l1_fh") / (8 * *r.get("linf"));
    CHECK(r.rhs / unit <= prev);
    prev = r.rhs / unit;
    const auto r0 = verify_cd(fd, lebesgue(0, D), 0.0);
    CHECK(r0.rhs == doctest::Approx(unit).epsilon(1e-12));
  }
}

TEST_CASE("sharpness sweep") {
  const auto rows = sharpness_sweep(64, 4);
  REQUIRE(rows.size() == 64);
  CHECK(rows[0].ratio == doctest::Approx(pi).epsilon(1e-4));
  CHECK(rows[7].ratio == doctest::Approx(15 * pi / 8).epsilon(1e-4));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    CHECK(rows[i].holds);
    CHECK(*rows[i].get("perimeter") == 2 * n - 1);
    CHECK(*rows[i].get("W1") == doctest::Approx(1 / (2 * pi * n)).epsilon(1e-4));
    CHECK(rows[i].ratio <= 2 * pi + 1e-6);
    if (i > 0) CHECK(rows[i].ratio > rows[i - 1].ratio);
  }
  const auto serial = sharpness_sweep(8, 1);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].lhs == rows[i].lhs);
  CHECK_THROWS_AS((void)sharpness_sweep(257), DomainError);
}

TEST_CASE("random piecewise-linear suite") {
  const auto a = random_pwl(7);
  const auto b = random_pwl(7);
  CHECK(a.f.values() == b.f.values());
  CHECK(a.f.nodes().size() >= 8);
  CHECK(a.f.nodes().size() <= 32);
  const auto rows = random_basic_suite(200, 1000, 4);
  for (const auto& r : rows) {
    CHECK(r.holds);
    CHECK(r.ratio >= 1 - 1e-8);
    CHECK(r.seed.has_value());
  }
  CHECK(*rows[3].seed == 1003);
  const auto again = random_basic_suite(20, 1000, 1);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].lhs == rows[i].lhs);
}

TEST_CASE("parallel_map ordering and errors") {
  const auto v = parallel_map(100, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_WITH(parallel_map(50, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 7 || i == 30) throw Error("fail " + std::to_string(i));
                                   return 0;
                                 }),
                    "fail 7");
  CHECK(resolve_jobs(3) == 3);
  setenv(kJobsEnv, "5", 1);
  CHECK(resolve_jobs() == 5);
  setenv(kJobsEnv, "x", 1);
  CHECK(resolve_jobs() >= 1);
  unsetenv(kJobsEnv);
}

TEST_CASE("product demo") {
  const auto g = sin_mode(1);
  const auto d = product_demo(g, 32);
  CHECK(d.indeterminacy.holds);
  CHECK(std::abs(d.w1_2d - 1 / (2 * pi)) <= 0.05 / (2 * pi));
  CHECK(std::abs(d.perimeter_2d - 1.0) <= 2.0 / 32);
  CHECK(d.perineq.holds);
  CHECK(d.max_needle_mean <= 1e-8);

  const auto s = product_demo(step_mollified(), 32);
  CHECK(s.perineq.holds);
  CHECK(s.needle_perimeter == s.perimeter_2d);
  CHECK(s.indeterminacy.holds);

  // First-order convergence of the 2-D transport cost to the 1-D value.
  const double e16 = std::abs(product_demo(g, 16).w1_2d - 1 / (2 * pi));
  const double e32 = std::abs(d.w1_2d - 1 / (2 * pi));
  CHECK(e32 < e16);
  CHECK(e16 / e32 >= 1.5);

  CHECK_THROWS_AS((void)product_demo(SignedFunction1D::uniform(0, 1, {0, 0}), 16), DegenerateInputError);
  CHECK_THROWS_AS((void)product_demo(sin_mode(6), 8), DomainError);
  CHECK_THROWS_AS((void)product_demo(g, 65), DomainError);
}
