#pragma once

#include <cstddef>
#include <functional>

namespace difflab {

/// Number of worker threads used by the ensemble engines. 0 selects
/// std::thread::hardware_concurrency().
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Fixed partition used by every parallel loop. Block boundaries depend only
/// on the problem size, never on the thread count, so per-block partial
/// results can be reduced in block order for bit-identical reruns.
inline constexpr std::size_t kBlockSize = 4096;

inline std::size_t block_count(std::size_t items) {
  return (items + kBlockSize - 1) / kBlockSize;
}

/// Runs body(block, begin, end) for every block of [0, items). Blocks may run
/// concurrently and in any order. The first exception thrown by a block is
/// rethrown on the calling thread after all workers join.
void parallel_blocks(
    std::size_t items,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace difflab
