#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace kinopt {

/// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  KahanSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline double compensated_mean(std::span<const double> xs) noexcept {
  return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

/// Number of chunks parallel_for_chunks uses for (n, workers).
inline std::size_t chunk_count(std::size_t n, int workers) noexcept {
  const std::size_t w = workers < 1 ? 1 : static_cast<std::size_t>(workers);
  return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(n, 1));
}

/// Runs body(chunk, begin, end) over chunk_count(n, workers) contiguous chunks
/// of [0, n). The chunk boundaries depend only on (n, workers), so any
/// per-chunk reduction combined in chunk order is reproducible for a fixed
/// worker count.
template <typename Body>
void parallel_for_chunks(std::size_t n, int workers, Body&& body) {
  const std::size_t chunks = chunk_count(n, workers);
  if (chunks == 1) {
    body(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(chunks - 1);
  const std::size_t base = n / chunks;
  const std::size_t extra = n % chunks;
  std::size_t begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = begin + base + (c < extra ? 1 : 0);
    if (c + 1 == chunks) {
      body(c, begin, end);
    } else {
      threads.emplace_back([&body, c, begin, end] { body(c, begin, end); });
    }
    begin = end;
  }
}

/// parallel_for_chunks without the chunk index.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  parallel_for_chunks(n, workers, [&body](std::size_t, std::size_t begin, std::size_t end) { body(begin, end); });
}

}  // namespace kinopt
