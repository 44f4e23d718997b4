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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratingrl::kernels {

// Number of consecutive items summed serially inside one block. Results depend
// on this constant but never on the thread count.
inline constexpr std::size_t kReduceBlock = 16;

// Sums per-item contributions into a dim-sized vector.
//   term(i, acc) adds item i's contribution into acc.
// Items are split into fixed blocks of kReduceBlock; blocks run in parallel,
// each block accumulates its items in index order, and block partials are
// combined in block order. Output is bit-identical for any OMP_NUM_THREADS.
template <class Term>
std::vector<double> ordered_sum(std::size_t n, std::size_t dim, Term&& term) {
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks * dim, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    std::span<double> acc(partial.data() + static_cast<std::size_t>(b) * dim, dim);
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    for (std::size_t i = lo; i < hi; ++i) term(i, acc);
  }
  std::vector<double> out(dim, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* p = partial.data() + b * dim;
    for (std::size_t k = 0; k < dim; ++k) out[k] += p[k];
  }
  return out;
}

// Parallel map with results stored by index.
template <class T, class Fn>
std::vector<T> ordered_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  }
  return out;
}

// Serial references kept for testing and benchmarking the kernels above.
namespace serial {

template <class Term>
std::vector<double> ordered_sum(std::size_t n, std::size_t dim, Term&& term) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) term(i, std::span<double>(out));
  return out;
}

template <class T, class Fn>
std::vector<T> ordered_map(std::size_t n, Fn&& fn) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
  return out;
}

}  // namespace serial

int max_threads() noexcept;
void set_threads(int n) noexcept;

}  // namespace ratingrl::kernels
