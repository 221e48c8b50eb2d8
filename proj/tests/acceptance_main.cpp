#include <algorithm>
#include <iostream>

#include "needle/acceptance.hpp"
#include "needle/parallel.hpp"

int main() {
  const auto results = needle::run_acceptance(needle::resolve_jobs());
  needle::print_acceptance(std::cout, results);
  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == static_cast<long>(results.size()) ? 0 : 1;
}
