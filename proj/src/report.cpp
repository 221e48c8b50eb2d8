#include "needle/report.hpp"

#include <limits>

namespace needle {

namespace {
// Absorbs round-off when both sides vanish.
constexpr double kAbsSlack = 1e-14;
}  // namespace

void InequalityReport::finalize() {
  ratio = rhs == 0.0 ? std::numeric_limits<double>::infinity() : lhs / rhs;
  if (sense == Sense::kLowerBound) {
    holds = lhs >= rhs * (1.0 - tol) - kAbsSlack;
  } else {
    holds = lhs <= rhs * (1.0 + tol) + kAbsSlack;
  }
}

std::optional<double> InequalityReport::get(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

InequalityReport make_report(std::string check, Sense sense, double lhs, double rhs,
                             double constant_used, double tol) {
  InequalityReport r;
  r.check = std::move(check);
  r.sense = sense;
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant_used = constant_used;
  r.tol = tol;
  r.finalize();
  return r;
}

}  // namespace needle
