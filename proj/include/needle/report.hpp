#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace needle {

/// Which way the checked inequality points.
enum class Sense {
  kLowerBound,  // holds iff lhs >= rhs (1 - tol)
  kUpperBound,  // holds iff lhs <= rhs (1 + tol)
};

inline constexpr double kReportTol = 1e-8;

/// Result of any inequality check: both sides, their ratio and the named
/// quantities that went into them.
struct InequalityReport {
  std::string check;
  Sense sense = Sense::kLowerBound;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool holds = false;
  double constant_used = 0.0;
  double tol = kReportTol;
  std::vector<std::pair<std::string, double>> metadata;
  std::vector<std::pair<std::string, std::string>> notes;
  std::optional<std::uint64_t> seed;

  /// Recomputes ratio and holds from lhs, rhs, sense and tol.
  void finalize();

  void add(std::string key, double value) { metadata.emplace_back(std::move(key), value); }
  void note(std::string key, std::string value) { notes.emplace_back(std::move(key), std::move(value)); }
  [[nodiscard]] std::optional<double> get(const std::string& key) const;
};

[[nodiscard]] InequalityReport make_report(std::string check, Sense sense, double lhs, double rhs,
                                           double constant_used = 0.0, double tol = kReportTol);

}  // namespace needle
