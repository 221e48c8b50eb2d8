#pragma once

#include <span>
#include <vector>

#include "needle/density.hpp"
#include "needle/report.hpp"

namespace needle {

class SignedFunction1D;

/// Nonnegative measure on the line with a piecewise-linear density.
///
/// The density is given at nondecreasing knots and interpolated linearly between
/// consecutive knots; it vanishes outside [knots.front(), knots.back()]. Two knots
/// at the same position encode a jump, so indicator blocks are represented
/// exactly.
class LineMeasure {
 public:
  LineMeasure() = default;
  LineMeasure(std::vector<double> knots, std::vector<double> density);

  /// Uniform samples on [a,b].
  static LineMeasure uniform(double a, double b, std::span<const double> samples);
  /// height * indicator of (lo, hi).
  static LineMeasure block(double lo, double hi, double height);

  [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
  [[nodiscard]] const std::vector<double>& density() const { return density_; }
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] double sup() const;
  [[nodiscard]] bool empty() const { return knots_.empty(); }
  [[nodiscard]] double lo() const { return knots_.front(); }
  [[nodiscard]] double hi() const { return knots_.back(); }

  /// Smallest and largest x where the density is positive (lo() and hi() if none).
  [[nodiscard]] double support_lo() const;
  [[nodiscard]] double support_hi() const;

  /// One-sided limits of the density.
  [[nodiscard]] double right_limit(double x) const;
  [[nodiscard]] double left_limit(double x) const;

  [[nodiscard]] LineMeasure scaled(double s) const;
  [[nodiscard]] LineMeasure shifted(double c) const;

 private:
  std::vector<double> knots_;
  std::vector<double> density_;
  double mass_ = 0.0;
};

/// Relative mass mismatch tolerated by w1_line before raising MassMismatchError.
inline constexpr double kMassTol = 1e-9;

/// W1 on the line as the integral of |F_mu - F_nu|. The second measure is
/// renormalized to the mass of the first. The integrand is piecewise quadratic on
/// the union of both knot sets and is integrated exactly.
[[nodiscard]] double w1_line(const LineMeasure& mu, const LineMeasure& nu, double mass_tol = kMassTol);

/// L1 distance between the two densities (exact on the union knot set).
[[nodiscard]] double l1_distance(const LineMeasure& mu, const LineMeasure& nu);

/// W1 between two atomic measures on the line sharing the atom positions.
[[nodiscard]] double w1_atoms(std::span<const double> positions, std::span<const double> mu,
                              std::span<const double> nu, double mass_tol = kMassTol);

/// W_p between two probability vectors on the line by the quantile formula.
[[nodiscard]] double wp_atoms(std::span<const double> positions, std::span<const double> mu,
                              std::span<const double> nu, double p);

enum class Side { kLeft, kRight };

/// height * indicator of (xbar - width, xbar) (left) or (xbar, xbar + width) (right).
struct Block {
  double height = 0.0;
  double xbar = 0.0;
  double width = 0.0;
  Side side = Side::kLeft;

  [[nodiscard]] double mass() const { return height * width; }
  [[nodiscard]] LineMeasure measure() const;
};

/// Rearranges f_part into a block of height ||f||_inf adjacent to xbar on the given
/// side with the same mass. f_part must vanish on the other side of xbar.
[[nodiscard]] Block block_rearrangement(const LineMeasure& f_part, double xbar, Side side);

/// Closed-form W1 between two adjacent blocks: (m_f^2/H_f + m_g^2/H_g) / 2.
[[nodiscard]] double direct_cost(const Block& rf, const Block& rg);

/// Positive and negative parts of f h as line measures. Knots are the function
/// nodes plus the zero crossings of the interpolant, so both parts are exactly
/// piecewise linear. A null weight means Lebesgue measure.
[[nodiscard]] LineMeasure positive_part(const SignedFunction1D& f, const WeightedInterval* w = nullptr);
[[nodiscard]] LineMeasure negative_part(const SignedFunction1D& f, const WeightedInterval* w = nullptr);

enum class RayOrientation { kNone, kPositive, kNegative, kBoth };

struct RayTest {
  bool single_ray = false;
  RayOrientation orientation = RayOrientation::kNone;
  double min_primitive = 0.0;
  double max_primitive = 0.0;
  double tol = 0.0;
};

/// Whether s -> int_a^s f h keeps one sign. Positive orientation means f+ mass
/// sits to the left of f- mass and moves rightwards.
[[nodiscard]] RayTest single_ray_test(const SignedFunction1D& f, const WeightedInterval* w = nullptr);

/// Gap |W1(f+h, f-h) - int u f h| for the potential u = -x (positive orientation)
/// or u = x (negative orientation). Throws PreconditionError when not single-ray.
[[nodiscard]] double duality_gap(const SignedFunction1D& f, const WeightedInterval* w = nullptr,
                                 double mass_tol = kMassTol);

/// W1(mu,nu) <= D ||f - g||_1.
[[nodiscard]] InequalityReport w1_diam_bound(const LineMeasure& mu, const LineMeasure& nu, double D);

}  // namespace needle
