// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stenosim/kernels.hpp"

using namespace stenosim;

namespace {
std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}
}  // namespace

TEST_CASE("serial and openmp backends are bit-identical") {
  // spans chunk boundaries (kReductionChunk) and a remainder
  for (std::size_t n : {1ul, 100ul, 4096ul, 4097ul, 1000000ul}) {
    auto x = random_vec(n, 1);
    auto y = random_vec(n, 2);

    CHECK(kernels::dot(x, y, Backend::serial) == kernels::dot(x, y, Backend::openmp));
    CHECK(kernels::sum(x, Backend::serial) == kernels::sum(x, Backend::openmp));
    CHECK(kernels::norm2(x, Backend::serial) == kernels::norm2(x, Backend::openmp));
    CHECK(kernels::max_abs(x, Backend::serial) ==
          kernels::max_abs(x, Backend::openmp));
    auto w = x;
    for (auto& e : w) e = std::abs(e);
    CHECK(kernels::weighted_norm2(w, y, Backend::serial) ==
          kernels::weighted_norm2(w, y, Backend::openmp));

    auto ys = y, yo = y;
    kernels::axpy(0.37, x, ys, Backend::serial);
    kernels::axpy(0.37, x, yo, Backend::openmp);
    CHECK(ys == yo);
  }
}

TEST_CASE("reduction values match a plain loop") {
  auto x = random_vec(10000, 3);
  auto y = random_vec(10000, 4);
  double ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ref += x[i] * y[i];
  CHECK(kernels::dot(x, y) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("fill/copy/scale basics") {
  std::vector<double> a(1000, 0.0), b(1000, 0.0);
  kernels::fill(a, 2.5);
  CHECK(a[999] == 2.5);
  kernels::copy(a, b, Backend::openmp);
  CHECK(b == a);
  kernels::scale(b, 2.0);
  CHECK(b[0] == 5.0);
  CHECK(kernels::max_abs(b) == 5.0);
}
