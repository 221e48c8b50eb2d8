#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace needle {

/// Symmetric distance matrix on n points.
class FiniteMetricSpace {
 public:
  /// Validates symmetry, zero diagonal, nonnegativity and, if requested, the
  /// triangle inequality (O(n^3)).
  FiniteMetricSpace(std::size_t n, std::vector<double> dist, bool check_triangle = true);

  /// Euclidean distances between points given as rows of `coords` (dim columns).
  static FiniteMetricSpace euclidean(std::span<const double> coords, std::size_t dim);
  static FiniteMetricSpace line(std::span<const double> positions);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  [[nodiscard]] const std::vector<double>& matrix() const { return dist_; }

 private:
  std::size_t n_;
  std::vector<double> dist_;
};

/// Nonnegative weights on the points of a FiniteMetricSpace.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<double> weights);
  [[nodiscard]] const std::vector<double>& weights() const { return w_; }
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] std::size_t size() const { return w_.size(); }

 private:
  std::vector<double> w_;
  double mass_ = 0.0;
};

struct PlanEntry {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0.0;
};

struct EmdResult {
  double cost = 0.0;               // sum plan * dist^p
  std::vector<PlanEntry> plan;     // nonzero entries
  std::vector<double> phi;         // source potentials
  std::vector<double> psi;         // target potentials; phi_i + psi_j <= dist_ij^p
  double dual_objective = 0.0;
  std::size_t phases = 0;
  std::size_t augmentations = 0;

  [[nodiscard]] std::vector<double> dense_plan(std::size_t n) const;
};

/// Costs are scaled to integers by this factor so reduced costs are exact.
inline constexpr double kCostScale = 1e12;
inline constexpr std::size_t kMaxOtPoints = 4096;

/// Exact optimal transport between mu and nu on `space` with cost dist^p, p in {1,2}.
///
/// Primal-dual successive shortest paths: Dijkstra on reduced costs, then
/// augmentation along every admissible (zero reduced cost) path before the next
/// Dijkstra. Returns the plan and the potentials certifying optimality.
[[nodiscard]] EmdResult emd_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const FiniteMetricSpace& space, int p);

/// Max violation of phi_i + psi_j <= c_ij, max |phi_i + psi_j - c_ij| on the plan
/// support, and the primal-dual gap.
struct DualCertificate {
  double max_violation = 0.0;
  double max_support_slack = 0.0;
  double gap = 0.0;
  double max_marginal_error = 0.0;
};
[[nodiscard]] DualCertificate certify(const EmdResult& r, const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, const FiniteMetricSpace& space, int p);

// Binary distance-matrix file ("DOTM"): 16-byte header then n*n little-endian
// float64 entries, row-major.
//   bytes 0..3   ASCII "DOTM"
//   bytes 4..7   uint32 LE format version (1)
//   bytes 8..15  uint64 LE n
void write_dotm(std::ostream& out, const FiniteMetricSpace& space);
[[nodiscard]] FiniteMetricSpace read_dotm(std::istream& in, bool check_triangle = true);
inline constexpr std::uint32_t kDotmVersion = 1;

}  // namespace needle
