#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "needle/density.hpp"
#include "needle/perimeter.hpp"
#include "needle/report.hpp"

namespace needle {

/// -(h f')' = lambda h f on [a,b] with Neumann ends, discretized on grid_n cells.
struct SturmLiouvilleProblem {
  WeightedInterval space;
  std::size_t grid_n = 2000;
};

/// Eigenvalue with its eigenfunction sampled at cell centres, unit L2(h) norm and
/// positive in the first cell.
struct EigenPair {
  std::size_t index = 0;
  double lambda = 0.0;
  std::vector<double> values;
  double residual = 0.0;  // |(A - lambda M) f| in the dual mass norm, over max(1, lambda)

  [[nodiscard]] EigenPair scaled(double s) const;
};

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Relative mass mismatch accepted between f+ h and f- h for discretized
/// eigenfunctions: the discrete zero mean (midpoint rule) and the exact integral
/// of the piecewise-linear interpolant differ at second order in the cell size.
inline constexpr double kSpectralMassTol = 1e-4;

/// First `modes` eigenpairs of a SturmLiouvilleProblem.
///
/// Conservative three-point finite volumes: cell-centred unknowns, face fluxes
/// h(face) (f_{i+1} - f_i)/dx, no flux through the two ends, lumped mass
/// h(x_i) dx. The symmetric tridiagonal matrix M^{-1/2} A M^{-1/2} is solved by
/// Sturm bisection and inverse iteration.
class EigenBasis {
 public:
  EigenBasis(SturmLiouvilleProblem problem, std::size_t modes);

  [[nodiscard]] const WeightedInterval& space() const { return problem_.space; }
  [[nodiscard]] std::size_t grid_n() const { return problem_.grid_n; }
  [[nodiscard]] std::size_t size() const { return pairs_.size(); }
  [[nodiscard]] const EigenPair& operator[](std::size_t k) const { return pairs_.at(k); }
  [[nodiscard]] const std::vector<EigenPair>& pairs() const { return pairs_; }
  [[nodiscard]] const std::vector<double>& centers() const { return centers_; }
  [[nodiscard]] const std::vector<double>& cell_mass() const { return cell_mass_; }
  [[nodiscard]] double total_mass() const { return total_mass_; }

  [[nodiscard]] double inner(std::span<const double> f, std::span<const double> g) const;
  [[nodiscard]] double integral(std::span<const double> f) const;
  [[nodiscard]] Norms norms(std::span<const double> f) const;

  /// fn at the cell centres.
  [[nodiscard]] std::vector<double> sample(const std::function<double(double)>& fn) const;
  /// Cell values as a continuous function on [a,b]: nodes a, centres, b, with the
  /// end values copied from the adjacent cells (zero slope at Neumann ends).
  [[nodiscard]] SignedFunction1D function(std::span<const double> values) const;

  [[nodiscard]] std::vector<double> project(std::span<const double> values) const;
  [[nodiscard]] std::vector<double> synthesize(std::span<const double> coeffs) const;

  /// Max |<f_j, f_k> - delta_jk|.
  [[nodiscard]] double gram_deviation() const;
  /// Max |int f_k h| over k >= 1.
  [[nodiscard]] double max_mean_residual() const;

 private:
  SturmLiouvilleProblem problem_;
  std::vector<double> centers_;
  std::vector<double> cell_mass_;
  double total_mass_ = 0.0;
  std::vector<EigenPair> pairs_;
};

/// Coefficients on an eigenbasis; the heat flow acts diagonally on them.
struct HeatState {
  std::vector<double> coeffs;
  std::vector<double> lambdas;
  double time = 0.0;
  double trunc_error = 0.0;  // L2(h) distance between the input and its projection
};

[[nodiscard]] HeatState heat_state(const EigenBasis& basis, std::span<const double> values);
/// Multiplies coefficient k by exp(-lambda_k t).
[[nodiscard]] HeatState heat_evolve(const HeatState& state, double t);
[[nodiscard]] std::vector<double> reconstruct(const EigenBasis& basis, const HeatState& state);

/// Perimeter of {f > 0} against sqrt(lambda) / (8 C sqrt(m(X))) ||f||_1^2 / (||f||_2 ||f||_inf)
/// with C = c_kd(K, D) under a CD(K,inf) certificate.
[[nodiscard]] InequalityReport nodal_bound_cd(const EigenBasis& basis, const EigenPair& pair, double K);
/// Same with C = c_knd(K, N, D) under an MCP(K,N) certificate.
[[nodiscard]] InequalityReport nodal_bound_mcp(const EigenBasis& basis, const EigenPair& pair, double K,
                                               double N);

/// W1(f+ h, f- h) <= sqrt(m(X)/lambda) ||f||_2.
[[nodiscard]] InequalityReport w1_eig_upper(const EigenBasis& basis, const EigenPair& pair);

/// W1(f+ h, f- h) <= (sqrt(t) C(t,K,N) + D e^{-lambda t}) ||f||_1 at t = log(lambda)/lambda.
/// Also reports the back-solved constants of the form C sqrt(log(lambda)/lambda) ||f||_1.
[[nodiscard]] InequalityReport w1_heat_upper(const EigenBasis& basis, const EigenPair& pair, double K,
                                             double N);

/// Several linked inequalities checked together.
struct ChainReport {
  std::string check;
  std::vector<InequalityReport> links;
  std::vector<std::pair<std::string, double>> metadata;
  bool holds = false;

  [[nodiscard]] std::optional<double> get(const std::string& key) const;
};

using ModeCoefficients = std::vector<std::pair<std::size_t, double>>;

/// Perimeter of {f > 0} for f = sum a_k f_k against
/// sqrt(lambda_min) / (8 sqrt(m(X)) C_{K,N,D}) ||f||_1^2 / (||f||_2 ||f||_inf).
[[nodiscard]] InequalityReport combo_nodal_bound(const EigenBasis& basis, const ModeCoefficients& coeffs,
                                                 double lambda_min, double K, double N);

/// The three links of the heat-flow upper bound for f = sum a_k f_k, K >= 0, at
/// t = log(lambda_min ||f||_2 / ||f||_1) / lambda_min:
///   (i)   ||f_t||_1^2 <= m(X) ||f_t||_2^2
///   (ii)  ||f_t||_2^2 <= e^{-2 lambda_min t} ||f||_2^2
///   (iii) W1(f+ h, f- h) <= sqrt(t) ||f||_1 C(t,K,N) + D sqrt(m(X)) e^{-lambda_min t} ||f||_2
[[nodiscard]] ChainReport combo_heat_chain(const EigenBasis& basis, const ModeCoefficients& coeffs,
                                           double lambda_min, double K, double N);

/// ||f||_inf <= C_ext lambda^{N/4} ||f||_2 <= C_ext lambda^{N/4} ||f||_inf^{1/2} ||f||_1^{1/2},
/// and the perimeter against the implied lower bound lambda^{(1-N)/2} / (Cbar sqrt(log lambda))
/// with Cbar = 8 C_pack c_kd(K,D) C_ext^2. Requires m(X) = 1 and lambda >= max(2, 1/D).
[[nodiscard]] ChainReport main5_chain(const EigenBasis& basis, const EigenPair& pair, double K, double N,
                                      double c_ext);

/// W2(H_t mu, H_t nu) <= W2(mu, nu) for two densities (cell values) on the basis
/// grid, both computed by the exact discrete solver.
[[nodiscard]] InequalityReport w2_contraction_check(const EigenBasis& basis, std::span<const double> mu,
                                                    std::span<const double> nu, double t);

/// CSV rows "x,f_0,f_1,..." at the cell centres.
void write_eigen_csv(std::ostream& out, const EigenBasis& basis);

}  // namespace needle
