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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ratingrl/core/types.hpp"
#include "ratingrl/estimator/estimator.hpp"
#include "ratingrl/model/sequence_model.hpp"

namespace ratingrl::oracle {

using estimator::RatingFn;
using model::GradientVector;
using model::ModelDims;
using model::ModelParams;

// Enumeration is refused when (V - 2)^L_max exceeds this.
inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

// Throws SizeError when the guard is exceeded.
void check_enumerable(std::size_t content_tokens, std::size_t max_len);

// Every caption with 1..max_len content tokens, EOS-terminated, sorted
// lexicographically by token id.
std::vector<Caption> enumerate_captions(const Vocabulary& vocab, std::size_t max_len);
std::vector<Caption> enumerate_captions(const ModelDims& dims);

// Contexts weighted uniformly, with a rating defined for every caption.
struct OracleWorld {
  std::vector<Context> contexts;
  RatingFn rating;
};

// Stored rating where `ratings` has one, `fallback` elsewhere.
RatingFn rating_lookup(const RatingsDataset& ratings, double fallback);
std::vector<Context> contexts_of(const RatingsDataset& ratings);

// p_theta(.|ctx) over C_L, aligned with enumerate_captions(dims).
std::vector<double> caption_log_probs(const ModelParams& params, const Context& ctx);

// sum_I p_D(I) sum_c p_theta(c|I) r(c|I). Walks the prefix tree once per
// context, so each hidden state is computed once.
double exact_objective(const ModelParams& params, const OracleWorld& world);

// sum_I p_D(I) sum_c p_theta(c|I) (r(c|I) - b) grad log p_theta(c|I).
GradientVector exact_policy_gradient(const ModelParams& params, const OracleWorld& world, double b);

// sum_I p_D(I) sum_c q(c|I) eta(c|I) (r^(c|I) - b) grad log p_theta(c|I)
// over the contexts of `ratings`, where eta = p_theta / q and r^ is the stored
// rating, or b for unrated captions.
GradientVector exact_offpolicy_expectation(const ModelParams& params, const RatingsDataset& ratings,
                                           double epsilon, double b);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. Throws NumericError
// on a non-finite evaluation.
std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& fn,
                                std::span<const double> x, double h);

// Brute-force references: one independent log_prob / grad_log_prob call per
// enumerated caption, summed in a single loop.
namespace serial {
double exact_objective(const ModelParams& params, const OracleWorld& world);
GradientVector exact_policy_gradient(const ModelParams& params, const OracleWorld& world, double b);
}  // namespace serial

}  // namespace ratingrl::oracle
