#pragma once

// Static-partition parallel loop over replicate indices. Internal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ellshrink::detail {

// Runs fn(k) for k in [0, count). Each worker owns one contiguous block
// and stops at its first exception; the exception from the smallest
// failing index is rethrown, so failures are reported deterministically.
template <class Fn>
void for_each_replicate(std::int64_t count, unsigned threads, Fn&& fn) {
  const auto workers = static_cast<std::int64_t>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    for (std::int64_t k = 0; k < count; ++k) fn(k);
    return;
  }
  struct Failure {
    std::int64_t index = -1;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t begin = count * w / workers;
    const std::int64_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      for (std::int64_t k = begin; k < end; ++k) {
        try {
          fn(k);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = {k, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f.error) std::rethrow_exception(f.error);
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace ellshrink::detail
