#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace needle {

/// Environment variable consulted when no worker count is given.
inline constexpr const char* kJobsEnv = "NEEDLE_UNCERTAINTY_JOBS";

/// Worker count: the explicit value if set and positive, else the environment
/// variable, else the hardware concurrency (at least 1).
[[nodiscard]] std::size_t resolve_jobs(std::optional<std::size_t> requested = std::nullopt);

/// fn(0), ..., fn(count - 1) on up to `jobs` threads. Results are stored by
/// index, so the output does not depend on scheduling. The exception of the
/// lowest failing index is rethrown after all workers join.
template <class F>
auto parallel_map(std::size_t count, std::size_t jobs, F fn) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, count));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace needle
