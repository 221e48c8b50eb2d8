#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "needle/density.hpp"
#include "needle/discrete_ot.hpp"
#include "needle/perimeter.hpp"
#include "needle/report.hpp"
#include "needle/spectral.hpp"

namespace needle {

inline constexpr int kReportSchema = 1;

/// "%.17g", with "inf", "-inf" and "nan" as quoted strings.
[[nodiscard]] std::string json_number(double v);
/// JSON string literal with escaping.
[[nodiscard]] std::string json_string(const std::string& s);

/// Report as one JSON object with a fixed field order:
/// schema, check, sense, lhs, rhs, ratio, holds, constant_used, tol, metadata, notes, seed.
[[nodiscard]] std::string report_json(const InequalityReport& r);
/// schema, check, holds, links (reports without schema), metadata.
[[nodiscard]] std::string chain_json(const ChainReport& r);

/// Densities: {"interval":[a,b], "kind":..., "values":[...]} for grids or
/// {"interval":[a,b], "kind":..., "params":{...}} for closed forms. Kinds and
/// parameters: constant{c}, power{c,shift,p}, sinpow{c,omega,phase,p},
/// gauss{c,mu,kappa}, exp{c,rate}, grid.
[[nodiscard]] WeightedInterval read_density_json(std::istream& in);
/// Two columns x,h on a uniform grid; an optional header line is skipped.
[[nodiscard]] WeightedInterval read_density_csv(std::istream& in);
/// Dispatches on the extension (.json or .csv).
[[nodiscard]] WeightedInterval read_density_file(const std::string& path);
void write_density_json(std::ostream& out, const WeightedInterval& w);

/// Signed functions: {"interval":[a,b], "values":[...]} (uniform samples) or
/// {"nodes":[...], "values":[...]}.
[[nodiscard]] SignedFunction1D read_function_json(std::istream& in);
/// Two columns x,f at sorted nodes; an optional header line is skipped.
[[nodiscard]] SignedFunction1D read_function_csv(std::istream& in);
[[nodiscard]] SignedFunction1D read_function_file(const std::string& path);
void write_function_csv(std::ostream& out, const SignedFunction1D& f);

/// 2-D cell grids: {"nx":..,"ny":..,"values":[row-major]} or binary with the
/// 16-byte header "NGRD", u32 version, u32 nx, u32 ny, then nx*ny little-endian
/// doubles.
[[nodiscard]] CellGrid read_grid_json(std::istream& in);
[[nodiscard]] CellGrid read_grid_binary(std::istream& in);
void write_grid_binary(std::ostream& out, const CellGrid& g);

/// Distance matrix {"n":n, "dist":[[...],...]} (rows) or "dist":[flat].
[[nodiscard]] FiniteMetricSpace read_matrix_json(std::istream& in, bool check_triangle = true);

/// {"density": <density>, "grid_n": int, "modes": int}
struct ProblemSpec {
  SturmLiouvilleProblem problem;
  std::size_t modes = 10;
};
[[nodiscard]] ProblemSpec read_problem_json(std::istream& in);
/// {"schema":1, "grid_n":.., "modes":.., "lambda":[...], "residual":[...]}
void write_eigen_header_json(std::ostream& out, const EigenBasis& basis);

/// Everything a CLI run depends on.
struct RunConfig {
  std::string command;
  std::string mode;
  std::vector<std::string> inputs;
  double K = 0.0;
  double N = 2.0;
  std::optional<double> D;
  std::size_t grid = 0;
  std::size_t modes = 0;
  std::uint64_t seed = 0;
  double tol = kReportTol;
  std::string out;
  std::size_t jobs = 0;
  std::string fn;
  double freq = 1.0;
  std::string what;
  std::string density;
  std::size_t index = 0;       // eigenpair index; 0 means the default sweep
  std::string coeffs;          // "k:a,k:a,..."
  double c_ext = 1.0;
  double t = 0.5;
  double theta = 1.0;
  std::size_t n_max = 64;

  bool operator==(const RunConfig&) const = default;
};

/// Lossless round trip (infinite N is stored as the string "inf").
[[nodiscard]] std::string config_json(const RunConfig& c);
[[nodiscard]] RunConfig config_from_json(const std::string& text);

}  // namespace needle
