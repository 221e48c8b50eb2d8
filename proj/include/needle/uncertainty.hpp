#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "needle/density.hpp"
#include "needle/perimeter.hpp"
#include "needle/report.hpp"

namespace needle {

/// Relative mismatch between the masses of f+ h and f- h accepted as zero mean.
inline constexpr double kZeroMeanTol = 1e-9;

/// f - c with c chosen so that f+ h and f- h carry equal mass (to round-off)
/// under the same quadrature the checks use. Null weight means Lebesgue.
[[nodiscard]] SignedFunction1D mean_corrected(const SignedFunction1D& f, const WeightedInterval* w = nullptr);

/// f(x) exp(beta (x - m)), m the midpoint, with beta chosen for zero mean under h.
/// Keeps the zeros and the sign pattern of f, so a two-lobe profile stays
/// single-ray. Throws PreconditionError when no beta in [-1024, 1024] works.
[[nodiscard]] SignedFunction1D tilt_corrected(const SignedFunction1D& f, const WeightedInterval* w = nullptr);

/// W1(f+, f-) H0(B({f > 0})) >= ||f+||_1^2 / (2 min(||f+||_inf, ||f-||_inf)) on
/// Lebesgue measure.
[[nodiscard]] InequalityReport verify_basic(const SignedFunction1D& f, double mass_tol = kZeroMeanTol);

/// W1(f+ h, f- h) sum_{B({f > 0})} h >= ||f h||_1^2 / (8 c_kd(K, D) ||f||_inf) for a
/// CD(K,inf) density, D = b - a.
[[nodiscard]] InequalityReport verify_cd(const SignedFunction1D& f, const WeightedInterval& w, double K,
                                         double mass_tol = kZeroMeanTol);

/// Same left side against ||f h||_1^2 / (8 c_knd(K, N, D) ||f||_inf) for an MCP(K,N)
/// density.
[[nodiscard]] InequalityReport verify_mcp(const SignedFunction1D& f, const WeightedInterval& w, double K,
                                          double N, double mass_tol = kZeroMeanTol);

/// Grid size of the density certificates run by verify_cd and verify_mcp.
inline constexpr std::size_t kVerifyCertificateGrid = 64;

/// verify_basic on sin(2 pi n x), n = 1..n_max, sampled at 256 points per period.
[[nodiscard]] std::vector<InequalityReport> sharpness_sweep(std::size_t n_max, std::size_t jobs = 1);

/// Random zero-mean single-ray piecewise-linear function on [0,1] with 8 to 32
/// knots, rejection-sampled from the stream seeded with `seed`.
struct RandomPwl {
  SignedFunction1D f;
  std::uint64_t seed = 0;
  std::size_t attempts = 0;
};
[[nodiscard]] RandomPwl random_pwl(std::uint64_t seed);

/// verify_basic on random_pwl(seed + i) for i < count; each report carries its seed.
[[nodiscard]] std::vector<InequalityReport> random_basic_suite(std::size_t count, std::uint64_t seed,
                                                               std::size_t jobs = 1);

/// f(x,y) = g(x) on [0,1]^2 with Lebesgue measure, on a grid_n x grid_n cell grid.
/// Needles are the horizontal rows.
struct ProductDemo {
  InequalityReport indeterminacy;  // W1_2d Per_2d >= ||f||_1^2 / (8 ||f||_inf), K = 0
  InequalityReport perineq;        // Per_2d >= integral of needle perimeters
  double w1_2d = 0.0;
  double perimeter_2d = 0.0;
  double needle_perimeter = 0.0;
  double max_needle_mean = 0.0;  // max over rows of |mean of f on the row|
  std::size_t grid_n = 0;
};

/// Largest grid for which the exact 2-D transport fits the solver's size limit.
inline constexpr std::size_t kProductDemoMaxGrid = 64;

[[nodiscard]] ProductDemo product_demo(const SignedFunction1D& g, std::size_t grid_n);

}  // namespace needle
