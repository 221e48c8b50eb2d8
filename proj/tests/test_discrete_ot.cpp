#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "needle/discrete_ot.hpp"
#include "needle/errors.hpp"
#include "needle/transport.hpp"

using namespace needle;

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double zero_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = u(rng) < zero_prob ? 0.0 : u(rng);
  if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
  return w;
}

std::vector<double> normalized(std::vector<double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return w;
}

}  // namespace

TEST_CASE("two points") {
  const std::vector<double> x{0.0, 1.0};
  const auto space = FiniteMetricSpace::line(x);
  const auto r = emd_exact(DiscreteMeasure({1.0, 0.0}), DiscreteMeasure({0.0, 1.0}), space, 1);
  CHECK(r.cost == 1.0);
  const auto plan = r.dense_plan(2);
  CHECK(plan == std::vector<double>{0.0, 1.0, 0.0, 0.0});
}

TEST_CASE("grid discretization of adjacent blocks") {
  const std::size_t n = 1000;
  std::vector<double> x(n);
  std::vector<double> mu(n, 0.0);
  std::vector<double> nu(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (i + 0.5) / n;
    if (x[i] > 0.2 && x[i] < 0.5) mu[i] = 1.0 / n;
    if (x[i] > 0.5 && x[i] < 0.8) nu[i] = 1.0 / n;
  }
  const auto r = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(nu), FiniteMetricSpace::line(x), 1);
  CHECK(std::abs(r.cost - 0.09) <= 1e-6);
  CHECK(std::abs(r.cost - w1_atoms(x, mu, nu)) <= 1e-9);
}

TEST_CASE("relabeling invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 40;
  std::vector<double> pts(2 * n);
  for (double& v : pts) v = u(rng);
  const auto mu = normalized(random_weights(rng, n, 0.3));
  const auto nu = normalized(random_weights(rng, n, 0.3));
  const auto r = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(nu), FiniteMetricSpace::euclidean(pts, 2), 1);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pts2(2 * n);
  std::vector<double> mu2(n);
  std::vector<double> nu2(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts2[2 * i] = pts[2 * perm[i]];
    pts2[2 * i + 1] = pts[2 * perm[i] + 1];
    mu2[i] = mu[perm[i]];
    nu2[i] = nu[perm[i]];
  }
  const auto r2 = emd_exact(DiscreteMeasure(mu2), DiscreteMeasure(nu2), FiniteMetricSpace::euclidean(pts2, 2), 1);
  CHECK(r2.cost == doctest::Approx(r.cost).epsilon(1e-12));
}

TEST_CASE("dual certificate and agreement with the CDF formula") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + trial * 6;
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    const auto mu = normalized(random_weights(rng, n, 0.4));
    const auto nu = normalized(random_weights(rng, n, 0.4));
    for (int p : {1, 2}) {
      const auto space = FiniteMetricSpace::line(x);
      const auto r = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(nu), space, p);
      const auto c = certify(r, DiscreteMeasure(mu), DiscreteMeasure(nu), space, p);
      CHECK(c.max_violation <= 1e-9);
      CHECK(c.max_support_slack <= 1e-9);
      CHECK(c.gap <= 1e-9 * (1 + r.cost));
      CHECK(c.max_marginal_error <= 1e-9);
      if (p == 1) {
        CHECK(std::abs(r.cost - w1_atoms(x, mu, nu)) <= 1e-9 * (1 + r.cost));
      } else {
        const double w2 = wp_atoms(x, mu, nu, 2.0);
        CHECK(std::abs(r.cost - w2 * w2) <= 1e-9 * (1 + r.cost));
        const auto r1 = emd_exact(DiscreteMeasure(mu), DiscreteMeasure(nu), space, 1);
        CHECK(r1.cost <= std::sqrt(r.cost) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("2-D instances certify") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 60;
    std::vector<double> pts(2 * n);
    for (double& v : pts) v = u(rng);
    const auto space = FiniteMetricSpace::euclidean(pts, 2);
    const DiscreteMeasure mu(normalized(random_weights(rng, n, 0.2)));
    const DiscreteMeasure nu(normalized(random_weights(rng, n, 0.2)));
    for (int p : {1, 2}) {
      const auto r = emd_exact(mu, nu, space, p);
      const auto c = certify(r, mu, nu, space, p);
      CHECK(c.max_violation <= 1e-9);
      CHECK(c.gap <= 1e-9 * (1 + r.cost));
      CHECK(c.max_marginal_error <= 1e-9);
    }
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(FiniteMetricSpace(2, {0.0, 1.0, 2.0, 0.0}), DomainError);
  CHECK_THROWS_AS(FiniteMetricSpace(2, {1.0, 1.0, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(FiniteMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}), DomainError);
  CHECK_NOTHROW(FiniteMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}, false));
  CHECK_THROWS_AS(FiniteMetricSpace(2, {0.0, 1.0}), ShapeError);
  CHECK_THROWS_AS(DiscreteMeasure({1.0, -0.5}), DomainError);
  const auto sp = FiniteMetricSpace::line(std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS((void)emd_exact(DiscreteMeasure({1.0, 0.0}), DiscreteMeasure({0.0, 2.0}), sp, 1), MassMismatchError);
  CHECK_THROWS_AS((void)emd_exact(DiscreteMeasure({1.0, 0.0}), DiscreteMeasure({0.0, 1.0}), sp, 3), DomainError);
  CHECK_THROWS_AS((void)emd_exact(DiscreteMeasure({1.0}), DiscreteMeasure({0.0, 1.0}), sp, 1), ShapeError);
  std::vector<double> big(kMaxOtPoints + 1, 0.0);
  CHECK_THROWS_AS((void)emd_exact(DiscreteMeasure(big), DiscreteMeasure(big),
                                  FiniteMetricSpace::line(std::vector<double>(kMaxOtPoints + 1, 0.0)), 1),
                  DomainError);
}

TEST_CASE("DOTM round trip") {
  const std::vector<double> pts{0.0, 0.0, 1.0, 0.0, 0.0, 2.0};
  const auto sp = FiniteMetricSpace::euclidean(pts, 2);
  std::stringstream ss;
  write_dotm(ss, sp);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 16 + 9 * 8);
  CHECK(bytes.substr(0, 4) == "DOTM");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  const auto back = read_dotm(ss);
  CHECK(back.matrix() == sp.matrix());
  std::stringstream bad("DOTX");
  CHECK_THROWS_AS((void)read_dotm(bad), ParseError);
  std::stringstream trunc(bytes.substr(0, 20));
  CHECK_THROWS_AS((void)read_dotm(trunc), ParseError);
}
