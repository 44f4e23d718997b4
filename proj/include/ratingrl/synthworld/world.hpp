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
#include <filesystem>
#include <span>
#include <vector>

#include "ratingrl/core/types.hpp"
#include "ratingrl/model/sequence_model.hpp"

namespace ratingrl::synth {

// Desk-scale world: V = 12 (10 content tokens), L_max = 4, 60 contexts with
// 3 targets each. |C_L| = 10 + 100 + 1000 + 10000 = 11110.
struct WorldSpec {
  std::size_t vocab_size = 12;
  std::size_t max_len = 4;
  std::size_t n_contexts = 60;
  std::size_t targets_per_context = 3;
  double rater_noise = 0.1;
  double feature_jitter = 0.05;
  std::size_t candidates_per_context = 5;
  std::uint64_t seed = 1;

  // Features are indicator embeddings over the vocabulary.
  std::size_t context_dim() const noexcept { return vocab_size; }
  // Throws ConfigError.
  void validate() const;
  bool operator==(const WorldSpec&) const = default;
};

struct World {
  WorldSpec spec;
  Vocabulary vocab;
  std::vector<Context> contexts;
};

// Target sets are drawn without replacement from the content tokens. Features
// are the L2-normalized target indicator plus N(0, feature_jitter) per entry.
World gen_world(const WorldSpec& spec);

inline constexpr double kFluencyWeight = 0.3;
inline constexpr double kContentWeight = 0.7;

// Pieces of r*. Precision and recall use clipped counts: each distinct target
// token is matched at most once, so repeating a token lowers precision.
struct RatingComponents {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fluency = 0.0;  // g(c): 1 without adjacent repeats and size() <= targets + 1 (EOS counted)
  double value = 0.0;    // clamp(0.7 f1 + 0.3 g, 0, 1)
};

RatingComponents rating_components(const Context& ctx, const Caption& caption);
double true_rating(const Context& ctx, const Caption& caption);

struct RaterVotes {
  std::vector<std::uint8_t> votes;
  double rating = 0.0;  // quantize_rating(mean(votes))
};

// Each rater votes Bernoulli(clamp(r_star + N(0, noise), 0, 1)).
RaterVotes simulate_raters(double r_star, std::size_t n, double noise, std::uint64_t seed);

struct Datasets {
  CaptionDataset captions;  // D_IC
  RatingsDataset ratings;   // D_CR
};

// D_IC holds each context's targets in increasing id order plus EOS. D_CR
// pools, per context, the beam outputs of every candidate model followed by
// round-robin samples until candidates_per_context distinct captions exist;
// each is rated by simulate_raters with 10 votes.
Datasets build_datasets(const World& world, std::span<const model::ModelParams> candidate_models);

CaptionDataset ground_truth_captions(const World& world);

// Beam width used when harvesting candidate captions.
inline constexpr std::size_t kHarvestBeam = 5;

// world.json: the WorldSpec plus every context.
void save_world(const std::filesystem::path& path, const World& world);
World load_world(const std::filesystem::path& path);

}  // namespace ratingrl::synth
