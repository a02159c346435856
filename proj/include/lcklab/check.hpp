#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "lcklab/types.hpp"

namespace lcklab {

enum class Status { Pass, Fail, Inapplicable, Withheld };

std::string_view to_string(Status s);
Status status_from_string(std::string_view s);

/// Outcome of one named verification. A passing report always has
/// residual <= tolerance.
struct CheckReport {
  std::string name;
  Status status = Status::Inapplicable;
  double residual = 0.0;
  double tolerance = 0.0;
  VecC worst_sample;
  double worst_value = 0.0;
  double elapsed_ms = 0.0;
  std::string detail;
  std::map<std::string, double> metrics;

  bool passed() const { return status == Status::Pass; }
};

/// pass iff residual <= tolerance (and residual is a number)
CheckReport graded(std::string name, double residual, double tolerance);

/// Fills out[i] = fn(i) for i in [0, count) on up to `threads` workers.
/// Each slot is written by exactly one worker, so the result does not depend
/// on the thread count.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int threads, Fn&& fn) {
  std::vector<T> out(count);
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace lcklab
