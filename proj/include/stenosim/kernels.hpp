// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel kernel primitives used by the field containers and the flow
// solver. Every kernel exists in a serial and an OpenMP flavor selected by a
// Backend argument. Reductions are chunked: partial sums over fixed-size
// chunks are combined in chunk order, so serial and parallel execution (at
// any thread count) produce bit-identical results. The serial flavor is the
// reference implementation the tests compare against; tools/bench_kernels
// times the two against each other.

#pragma once

#include <cstdint>
#include <span>

namespace stenosim {

enum class Backend { serial, openmp };

Backend default_backend();
void set_default_backend(Backend b);

template <class F>
inline void parallel_for(std::int64_t n, Backend b, F&& body) {
  if (b == Backend::openmp) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
}

template <class F>
inline void parallel_for(std::int64_t n, F&& body) {
  parallel_for(n, default_backend(), static_cast<F&&>(body));
}

namespace kernels {

// Chunk size for deterministic reductions.
inline constexpr std::int64_t kReductionChunk = 4096;

void fill(std::span<double> y, double value, Backend b = default_backend());
void copy(std::span<const double> x, std::span<double> y,
          Backend b = default_backend());
// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y,
          Backend b = default_backend());
void scale(std::span<double> y, double a, Backend b = default_backend());

double dot(std::span<const double> x, std::span<const double> y,
           Backend b = default_backend());
// sum_i w[i]*x[i]
double weighted_sum(std::span<const double> w, std::span<const double> x,
                    Backend b = default_backend());
double sum(std::span<const double> x, Backend b = default_backend());
double norm2(std::span<const double> x, Backend b = default_backend());
// sqrt(sum_i w[i]*x[i]^2)
double weighted_norm2(std::span<const double> w, std::span<const double> x,
                      Backend b = default_backend());
double max_abs(std::span<const double> x, Backend b = default_backend());

}  // namespace kernels
}  // namespace stenosim
