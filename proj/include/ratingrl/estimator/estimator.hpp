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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ratingrl/core/types.hpp"

namespace ratingrl::estimator {

// Rating estimator r~(c|I; phi): an MLP over [context features | normalized
// bag of content tokens | length fraction] with one tanh hidden layer and a
// sigmoid output. Token order is invisible to it.
struct EstimatorDims {
  std::size_t context_dim = 0;
  std::size_t vocab_size = 0;
  std::size_t hidden_dim = 0;
  std::size_t max_len = 0;
  TokenId bos_id = 0;
  TokenId eos_id = 1;

  std::size_t input_dim() const noexcept { return context_dim + vocab_size + 1; }
  std::size_t param_count() const noexcept { return hidden_dim * input_dim() + 2 * hidden_dim + 1; }
  void validate() const;
  bool operator==(const EstimatorDims&) const = default;
};

// Layout: W1 (hidden x input, row-major), b1 (hidden), w2 (hidden), b2.
struct EstimatorParams {
  EstimatorDims dims;
  std::vector<double> values;

  bool operator==(const EstimatorParams&) const = default;
};

EstimatorParams zero_estimator(const EstimatorDims& dims);

struct RatingFeatures {
  std::vector<double> values;  // context_dim + vocab_size + 1 entries

  std::span<const double> context(const EstimatorDims& d) const {
    return std::span<const double>(values).first(d.context_dim);
  }
  std::span<const double> bag_of_words(const EstimatorDims& d) const {
    return std::span<const double>(values).subspan(d.context_dim, d.vocab_size);
  }
  double length_fraction() const { return values.back(); }
};

// Bag of words counts content tokens only (EOS excluded) and is normalized by
// the content length. The length fraction counts EOS: size() / max_len.
RatingFeatures featurize(const EstimatorDims& dims, const Context& ctx, const Caption& caption);

double predict_from_features(const EstimatorParams& phi, std::span<const double> features);
double predict_rating(const EstimatorParams& phi, const Context& ctx, const Caption& caption);

struct EstimatorConfig {
  std::size_t hidden_dim = 16;
  double lr = 1e-3;
  std::size_t epochs = 2000;
  std::size_t patience = 200;
  double init_scale = 0.1;
};

struct EstimatorTrainResult {
  EstimatorParams params;  // at the lowest validation MSE
  double train_mse = 0.0;
  double val_mse = 0.0;
  double val_spearman = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  // Set when the id-hash split leaves one side empty; training then uses all
  // examples for both sides.
  bool degenerate_split = false;
  std::vector<double> train_mse_history;  // before each epoch's update
};

// True when `context_id` falls in the held-out 10%.
bool is_validation_context(std::string_view context_id) noexcept;

// Full-batch Adam on mean squared error against the quantized ratings.
// Deterministic in (ratings, config, seed).
EstimatorTrainResult train_estimator(const RatingsDataset& ratings, const Vocabulary& vocab,
                                     std::size_t max_len, const EstimatorConfig& config,
                                     std::uint64_t seed);

// Mean squared error of the estimator and the gradient of that loss.
double mse_and_gradient(const EstimatorParams& phi, std::span<const RatingFeatures> inputs,
                        std::span<const double> targets, std::span<double> grad);

// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);
// Spearman rank correlation (Pearson correlation of average ranks). Returns 0
// when either side has no rank variance.
double spearman(std::span<const double> pred, std::span<const double> truth);

using RatingFn = std::function<double(const Context&, const Caption&)>;

struct ProbeFamily {
  std::string name;
  std::size_t count = 0;
  double mean_predicted = 0.0;
  double mean_true = 0.0;  // only meaningful when has_true
  bool has_true = false;
  double fraction_above = 0.0;  // share of probes predicted > kProbeHighRating
};

inline constexpr double kProbeHighRating = 0.9;

struct ProbeReport {
  std::vector<ProbeFamily> families;
  std::size_t total = 0;
  double fraction_above = 0.0;
};

// Scores ill-formed captions against every context of `ratings`:
//   "eos_only"        the empty caption
//   "single_token"    each content token alone
//   "repeated_token"  each content token repeated max_len times
//   "top_repeated_token"  per context, the caption of one content token
//                     repeated 2..max_len times that the estimator rates highest
// When `truth` is given, the report also carries the mean true rating.
ProbeReport probe_estimator(const EstimatorParams& phi, const RatingsDataset& ratings,
                            const RatingFn& truth = {});

void save_estimator(const std::filesystem::path& path, const EstimatorParams& phi);
EstimatorParams load_estimator(const std::filesystem::path& path);

}  // namespace ratingrl::estimator
