#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace needle {

struct AcceptanceResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the twelve acceptance criteria in order. Exceptions inside a criterion
/// turn into a failure carrying the message.
[[nodiscard]] std::vector<AcceptanceResult> run_acceptance(std::size_t jobs = 1);

/// One line per criterion: "PASS  3 <title>: <detail> (<seconds> s)".
void print_acceptance(std::ostream& out, const std::vector<AcceptanceResult>& results);

}  // namespace needle
