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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ratingrl/core/types.hpp"
#include "ratingrl/model/sequence_model.hpp"

namespace ratingrl::eval {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap of the mean over item-level resamples.
Interval bootstrap_ci(std::span<const double> scores, std::size_t resamples = 1000,
                      double level = 0.95, std::uint64_t seed = 0);

inline constexpr std::size_t kEvalBeam = 5;

// Beam-decodes one caption per context.
std::vector<Caption> decode_all(const model::ModelParams& params, std::span<const Context> contexts,
                                std::size_t beam = kEvalBeam);
std::size_t distinct_captions(std::span<const Caption> captions);

struct GoodnessConfig {
  std::size_t n_raters = 6;
  double noise = 0.1;
  std::size_t beam = kEvalBeam;
  std::size_t resamples = 1000;
  double level = 0.95;
};

struct GoodnessResult {
  double average = 0.0;  // mean of every binary vote
  double voting = 0.0;   // mean over captions of the majority outcome
  Interval average_ci;
  Interval voting_ci;
  std::vector<Caption> captions;
  std::vector<double> item_average;
  std::vector<double> item_voting;
};

// 1 for a strict majority of ones, 0 for a strict majority of zeros, 0.5 on a
// tie.
double majority_vote(std::span<const std::uint8_t> votes);

GoodnessResult goodness_eval(const model::ModelParams& params, std::span<const Context> contexts,
                             std::uint64_t seed, const GoodnessConfig& config = {});
// Same protocol on already decoded captions.
GoodnessResult goodness_of_captions(std::span<const Context> contexts,
                                    std::span<const Caption> captions, std::uint64_t seed,
                                    const GoodnessConfig& config = {});

// Five-way side-by-side scale. A rater judging (left, right) answers with the
// score of the matching statement:
//   left much better -1, left slightly better -0.5, equal 0,
//   right slightly better +0.5, right much better +1.
inline constexpr std::array<double, 5> kSxsScale = {-1.0, -0.5, 0.0, 0.5, 1.0};
inline constexpr double kSxsEqualBelow = 0.05;
inline constexpr double kSxsSlightBelow = 0.25;

// delta = score(right) - score(left), mapped onto kSxsScale.
double sxs_score(double delta);

enum class SxsDimension { kInformativeness = 0, kCorrectness = 1, kFluency = 2 };
inline constexpr std::array<const char*, 3> kSxsDimensionNames = {"informativeness", "correctness",
                                                                  "fluency"};

// Per-dimension quality of one caption: recall, precision, and g from r*.
std::array<double, 3> sxs_dimensions(const Context& ctx, const Caption& caption);

struct SxsConfig {
  std::size_t n_raters = 3;
  double noise = 0.02;
  std::size_t beam = kEvalBeam;
  std::size_t resamples = 1000;
  double level = 0.95;
};

struct SxsDimensionResult {
  double score = 0.0;  // mean over items; positive favors model A
  Interval ci;
  std::array<std::size_t, 5> histogram{};  // rater judgments per kSxsScale value
  std::vector<double> item_scores;         // mean of the raters per item
};

struct SxsResult {
  std::array<SxsDimensionResult, 3> dims;
  std::size_t identical_captions = 0;
  const SxsDimensionResult& operator[](SxsDimension d) const {
    return dims[static_cast<std::size_t>(d)];
  }
};

// Left/right placement is shuffled per item; judgments are mapped back so a
// positive score favors model A.
SxsResult sxs_eval(const model::ModelParams& model_a, const model::ModelParams& model_b,
                   std::span<const Context> contexts, std::uint64_t seed,
                   const SxsConfig& config = {});
SxsResult sxs_of_captions(std::span<const Context> contexts, std::span<const Caption> captions_a,
                          std::span<const Caption> captions_b, std::uint64_t seed,
                          const SxsConfig& config = {});

}  // namespace ratingrl::eval
