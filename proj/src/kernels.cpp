// SPDX-License-Identifier: Apache-2.0

#include "stenosim/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stenosim {

namespace {
std::atomic<Backend> g_backend{Backend::openmp};
}

Backend default_backend() { return g_backend.load(std::memory_order_relaxed); }
void set_default_backend(Backend b) {
  g_backend.store(b, std::memory_order_relaxed);
}

namespace kernels {

namespace {

inline void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel: size mismatch");
}

// Applies `chunk_op` to every chunk, storing one partial result per chunk,
// then folds the partials in chunk order. The fold order never depends on
// the backend or the thread count.
template <class ChunkOp>
double chunked_reduce(std::int64_t n, Backend b, ChunkOp&& chunk_op) {
  const std::int64_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
  if (nchunks <= 1) return n > 0 ? chunk_op(0, n) : 0.0;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  parallel_for(nchunks, b, [&](std::int64_t c) {
    const std::int64_t lo = c * kReductionChunk;
    const std::int64_t hi = std::min(n, lo + kReductionChunk);
    partial[static_cast<std::size_t>(c)] = chunk_op(lo, hi);
  });
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

}  // namespace

void fill(std::span<double> y, double value, Backend b) {
  parallel_for(static_cast<std::int64_t>(y.size()), b,
               [&](std::int64_t i) { y[static_cast<std::size_t>(i)] = value; });
}

void copy(std::span<const double> x, std::span<double> y, Backend b) {
  check_same_size(x.size(), y.size());
  parallel_for(static_cast<std::int64_t>(y.size()), b, [&](std::int64_t i) {
    y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  });
}

void axpy(double a, std::span<const double> x, std::span<double> y,
          Backend b) {
  check_same_size(x.size(), y.size());
  parallel_for(static_cast<std::int64_t>(y.size()), b, [&](std::int64_t i) {
    y[static_cast<std::size_t>(i)] += a * x[static_cast<std::size_t>(i)];
  });
}

void scale(std::span<double> y, double a, Backend b) {
  parallel_for(static_cast<std::int64_t>(y.size()), b,
               [&](std::int64_t i) { y[static_cast<std::size_t>(i)] *= a; });
}

double dot(std::span<const double> x, std::span<const double> y, Backend b) {
  check_same_size(x.size(), y.size());
  return chunked_reduce(static_cast<std::int64_t>(x.size()), b,
                        [&](std::int64_t lo, std::int64_t hi) {
                          double s = 0.0;
                          for (std::int64_t i = lo; i < hi; ++i)
                            s += x[static_cast<std::size_t>(i)] *
                                 y[static_cast<std::size_t>(i)];
                          return s;
                        });
}

double weighted_sum(std::span<const double> w, std::span<const double> x,
                    Backend b) {
  return dot(w, x, b);
}

double sum(std::span<const double> x, Backend b) {
  return chunked_reduce(static_cast<std::int64_t>(x.size()), b,
                        [&](std::int64_t lo, std::int64_t hi) {
                          double s = 0.0;
                          for (std::int64_t i = lo; i < hi; ++i)
                            s += x[static_cast<std::size_t>(i)];
                          return s;
                        });
}

double norm2(std::span<const double> x, Backend b) {
  return std::sqrt(dot(x, x, b));
}

double weighted_norm2(std::span<const double> w, std::span<const double> x,
                      Backend b) {
  check_same_size(w.size(), x.size());
  const double s = chunked_reduce(
      static_cast<std::int64_t>(x.size()), b,
      [&](std::int64_t lo, std::int64_t hi) {
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
          const auto k = static_cast<std::size_t>(i);
          acc += w[k] * x[k] * x[k];
        }
        return acc;
      });
  return std::sqrt(s);
}

double max_abs(std::span<const double> x, Backend b) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
  auto chunk_max = [&](std::int64_t lo, std::int64_t hi) {
    double m = 0.0;
    for (std::int64_t i = lo; i < hi; ++i)
      m = std::max(m, std::abs(x[static_cast<std::size_t>(i)]));
    return m;
  };
  if (nchunks <= 1) return n > 0 ? chunk_max(0, n) : 0.0;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  parallel_for(nchunks, b, [&](std::int64_t c) {
    const std::int64_t lo = c * kReductionChunk;
    partial[static_cast<std::size_t>(c)] =
        chunk_max(lo, std::min(n, lo + kReductionChunk));
  });
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

}  // namespace kernels
}  // namespace stenosim
