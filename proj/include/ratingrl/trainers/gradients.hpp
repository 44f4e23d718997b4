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
#include <span>
#include <vector>

#include "ratingrl/core/types.hpp"
#include "ratingrl/estimator/estimator.hpp"
#include "ratingrl/model/sequence_model.hpp"
#include "ratingrl/trainers/config.hpp"

namespace ratingrl::train {

using model::GradientVector;
using model::ModelParams;

// A batch gradient plus the by-products the training trace records.
struct GradientEstimate {
  GradientVector gradient;
  double objective = 0.0;   // MLE: mean log-likelihood; PG: mean (weighted) reward
  std::size_t samples = 0;
  std::size_t rated = 0;    // OffPG: samples that hit a rated caption
  std::size_t eta_clips = 0;
};

// Mean of grad_log_prob over the batch (gradient of the average
// log-likelihood, ascent direction).
GradientEstimate mle_gradient(const ModelParams& params, std::span<const CaptionPair> batch);

// Ground truth plus every rated caption with rating strictly above t.
CaptionDataset merge_positive(const CaptionDataset& captions, const RatingsDataset& ratings,
                              double t);

// q(c|I) = (1 - eps) p_D(c|I) + eps / |C_L|.
double q_prob(const RatedContext& entry, const Caption& caption, double epsilon,
              std::uint64_t space_size);
double q_prob(const RatingsDataset& ratings, const Context& ctx, const Caption& caption,
              double epsilon, std::uint64_t space_size);

// Draw from q: a uniformly chosen rated caption with probability 1 - eps,
// otherwise a uniform draw from C_L.
Caption q_sample(const RatedContext& entry, const CaptionSpace& space, double epsilon,
                 std::uint64_t seed);
Caption q_sample(const RatingsDataset& ratings, const Context& ctx, const CaptionSpace& space,
                 double epsilon, std::uint64_t seed);

// The scalar b subtracted from rewards.
class BaselineTracker {
 public:
  // value fixed to the mean quantized rating of D_CR.
  static BaselineTracker dataset_mean(const RatingsDataset& ratings);
  // value_t = decay * value_{t-1} + (1 - decay) * batch mean; the first
  // update initializes value to the batch mean.
  static BaselineTracker moving_average(double decay);
  static BaselineTracker fixed(double value);

  BaselineMode mode() const noexcept { return mode_; }
  double value() const noexcept { return value_; }
  bool initialized() const noexcept { return initialized_; }
  double decay() const noexcept { return decay_; }
  void update(double batch_mean) noexcept;

 private:
  BaselineTracker(BaselineMode mode, double value, double decay, bool initialized)
      : mode_(mode), value_(value), decay_(decay), initialized_(initialized) {}

  BaselineMode mode_;
  double value_;
  double decay_;
  bool initialized_;
};

// acc += weight * grad log p(caption | ctx); returns log p.
double add_score_term(const ModelParams& params, const Context& ctx, const Caption& caption,
                      double weight, std::span<double> acc);

// On-policy gradient with the learned estimator: one sample per context,
// mean of (r~ - b) grad log p. A moving-average baseline is updated with the
// batch's mean estimate after the gradient is formed.
GradientEstimate onpg_gradient(const ModelParams& params, const estimator::EstimatorParams& phi,
                               std::span<const Context> contexts, BaselineTracker& baseline,
                               std::uint64_t seed);

struct OffPolicySample {
  std::size_t entry;  // index into RatingsDataset::entries()
  Caption caption;
};

// Importance weight and substituted reward for one q-sample.
struct OffPolicyWeight {
  bool rated = false;
  double reward = 0.0;  // stored rating, or b when unrated
  double eta = 0.0;     // p_theta / q, clipped; 0 when the term is skipped
  bool clipped = false;
};

// Computes the sample's weight and adds eta * (r - b) * grad log p to acc.
// Unrated captions take reward b, so their term is the exact zero vector and
// no model evaluation happens; likewise for rated captions with r == b.
OffPolicyWeight add_offpolicy_term(const ModelParams& params, const RatingsDataset& ratings,
                                   const OffPolicySample& sample, double epsilon, double b,
                                   std::uint64_t space_size, double eta_clip,
                                   std::span<double> acc);

// p_D(I) uniform over D_CR contexts, then c ~ q(.|I).
std::vector<OffPolicySample> draw_offpolicy_samples(const RatingsDataset& ratings,
                                                    const CaptionSpace& space, double epsilon,
                                                    std::size_t n, std::uint64_t seed);

// Mean of importance-weighted terms over the given samples.
GradientEstimate offpg_gradient_from_samples(const ModelParams& params,
                                             const RatingsDataset& ratings,
                                             std::span<const OffPolicySample> samples,
                                             double epsilon, double b, std::uint64_t space_size,
                                             double eta_clip);

// Off-policy gradient over config.batch_size / 2 contexts. Requires a
// dataset-mean baseline.
GradientEstimate offpg_gradient(const ModelParams& params, const RatingsDataset& ratings,
                                const TrainConfig& config, const BaselineTracker& baseline,
                                std::uint64_t seed);

// alpha * pg + mle.
GradientVector curriculum_gradient(std::span<const double> pg, std::span<const double> mle,
                                   double alpha);

}  // namespace ratingrl::train
