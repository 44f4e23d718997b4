/* Copyright 2026 The RatingRL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "ratingrl/core/rng.hpp"
#include "ratingrl/kernels/reduce.hpp"

namespace ratingrl::kernels {
namespace {

// Values spanning many magnitudes so summation order is visible in the bits.
double term_value(std::size_t i, std::size_t k) {
  CounterRng rng(i * 131 + k);
  return std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(60)) - 30);
}

std::vector<double> blocked_reference(std::size_t n, std::size_t dim) {
  // The documented order: items in index order within a block, blocks in order.
  std::vector<double> out(dim, 0.0);
  for (std::size_t lo = 0; lo < n; lo += kReduceBlock) {
    std::vector<double> acc(dim, 0.0);
    for (std::size_t i = lo; i < std::min(n, lo + kReduceBlock); ++i) {
      for (std::size_t k = 0; k < dim; ++k) acc[k] += term_value(i, k);
    }
    for (std::size_t k = 0; k < dim; ++k) out[k] += acc[k];
  }
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class ThreadRestore : public ::testing::Test {
 protected:
  void TearDown() override { set_threads(saved_); }
  int saved_ = max_threads();
};

using OrderedSum = ThreadRestore;

TEST_F(OrderedSum, BitIdenticalAcrossThreadCounts) {
  const std::size_t dim = 5;
  for (const std::size_t n : {0u, 1u, 15u, 16u, 17u, 100u, 1000u}) {
    const auto expected = blocked_reference(n, dim);
    for (const int threads : {1, 2, 3, 4, 8}) {
      set_threads(threads);
      const auto got = ordered_sum(n, dim, [](std::size_t i, std::span<double> acc) {
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += term_value(i, k);
      });
      EXPECT_TRUE(bit_equal(got, expected)) << "n=" << n << " threads=" << threads;
    }
  }
}

TEST_F(OrderedSum, MatchesSerialReferenceWithinRounding) {
  const std::size_t n = 777, dim = 3;
  auto term = [](std::size_t i, std::span<double> acc) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += term_value(i, k);
  };
  const auto par = ordered_sum(n, dim, term);
  const auto ser = serial::ordered_sum(n, dim, term);
  for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(par[k], ser[k], 1e-12 * (1.0 + std::abs(ser[k])));
}

TEST_F(OrderedSum, IntegerSumsAreExact) {
  for (const int threads : {1, 4}) {
    set_threads(threads);
    const auto s = ordered_sum(1000, 1, [](std::size_t i, std::span<double> acc) {
      acc[0] += static_cast<double>(i);
    });
    EXPECT_EQ(s[0], 999.0 * 1000.0 / 2.0);
  }
}

using OrderedMap = ThreadRestore;

TEST_F(OrderedMap, MatchesSerialForAnyThreadCount) {
  const auto ser = serial::ordered_map<double>(500, [](std::size_t i) { return term_value(i, 0); });
  for (const int threads : {1, 2, 4}) {
    set_threads(threads);
    const auto par = ordered_map<double>(500, [](std::size_t i) { return term_value(i, 0); });
    EXPECT_TRUE(bit_equal(par, ser));
  }
}

}  // namespace
}  // namespace ratingrl::kernels
