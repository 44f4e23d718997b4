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

#include "ratingrl/trainers/gradients.hpp"

#include <cmath>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"
#include "ratingrl/kernels/reduce.hpp"

namespace ratingrl::train {
namespace {

void scale_in_place(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

}  // namespace

GradientEstimate mle_gradient(const ModelParams& params, std::span<const CaptionPair> batch) {
  if (batch.empty()) throw DomainError("mle_gradient: empty batch");
  for (const auto& pair : batch) model::validate_caption_for(params.dims, pair.caption);
  std::vector<double> log_probs(batch.size());
  GradientEstimate est;
  est.gradient = kernels::ordered_sum(batch.size(), params.values.size(),
                                      [&](std::size_t i, std::span<double> acc) {
                                        log_probs[i] = model::accumulate_grad_log_prob(
                                            params, batch[i].context, batch[i].caption, 1.0, acc);
                                      });
  const double inv = 1.0 / static_cast<double>(batch.size());
  scale_in_place(est.gradient, inv);
  for (const double lp : log_probs) est.objective += lp;
  est.objective *= inv;
  est.samples = batch.size();
  return est;
}

CaptionDataset merge_positive(const CaptionDataset& captions, const RatingsDataset& ratings,
                              double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("merge_positive: threshold outside [0, 1]");
  CaptionDataset merged = captions;
  for (const auto& entry : ratings.entries()) {
    for (const auto& rc : entry.captions) {
      if (rc.rating > t) merged.pairs.push_back(CaptionPair{entry.context, rc.caption});
    }
  }
  return merged;
}

double q_prob(const RatedContext& entry, const Caption& caption, double epsilon,
              std::uint64_t space_size) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("q_prob: epsilon outside [0, 1]");
  if (space_size == 0) throw DomainError("q_prob: empty caption space");
  const double p_data =
      entry.rating_of(caption) ? 1.0 / static_cast<double>(entry.captions.size()) : 0.0;
  return (1.0 - epsilon) * p_data + epsilon / static_cast<double>(space_size);
}

double q_prob(const RatingsDataset& ratings, const Context& ctx, const Caption& caption,
              double epsilon, std::uint64_t space_size) {
  const RatedContext* entry = ratings.find(ctx.id);
  if (!entry) throw DomainError("q_prob: context '" + ctx.id + "' not in ratings dataset");
  return q_prob(*entry, caption, epsilon, space_size);
}

Caption q_sample(const RatedContext& entry, const CaptionSpace& space, double epsilon,
                 std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("q_sample: epsilon outside [0, 1]");
  if (entry.captions.empty()) throw DomainError("q_sample: context has no rated captions");
  CounterRng rng(seed, /*stream=*/0x9);
  if (rng.uniform() < epsilon) return space.at(rng.below(space.size()));
  return entry.captions[rng.below(entry.captions.size())].caption;
}

Caption q_sample(const RatingsDataset& ratings, const Context& ctx, const CaptionSpace& space,
                 double epsilon, std::uint64_t seed) {
  const RatedContext* entry = ratings.find(ctx.id);
  if (!entry) throw DomainError("q_sample: context '" + ctx.id + "' not in ratings dataset");
  return q_sample(*entry, space, epsilon, seed);
}

BaselineTracker BaselineTracker::dataset_mean(const RatingsDataset& ratings) {
  return BaselineTracker(BaselineMode::kDatasetMean, ratings.mean_rating(), 0.0, true);
}

BaselineTracker BaselineTracker::moving_average(double decay) {
  return BaselineTracker(BaselineMode::kMovingAverage, 0.0, decay, false);
}

BaselineTracker BaselineTracker::fixed(double value) {
  return BaselineTracker(BaselineMode::kDatasetMean, value, 0.0, true);
}

void BaselineTracker::update(double batch_mean) noexcept {
  if (mode_ != BaselineMode::kMovingAverage) return;
  if (!initialized_) {
    value_ = batch_mean;
    initialized_ = true;
    return;
  }
  value_ = decay_ * value_ + (1.0 - decay_) * batch_mean;
}

double add_score_term(const ModelParams& params, const Context& ctx, const Caption& caption,
                      double weight, std::span<double> acc) {
  return model::accumulate_grad_log_prob(params, ctx, caption, weight, acc);
}

GradientEstimate onpg_gradient(const ModelParams& params, const estimator::EstimatorParams& phi,
                               std::span<const Context> contexts, BaselineTracker& baseline,
                               std::uint64_t seed) {
  if (contexts.empty()) throw DomainError("onpg_gradient: no contexts");
  struct Draw {
    Caption caption;
    double estimate;
  };
  const auto draws = kernels::ordered_map<Draw>(contexts.size(), [&](std::size_t i) {
    Caption c = model::sample(params, contexts[i], derive_seed(seed, i));
    const double r = estimator::predict_rating(phi, contexts[i], c);
    return Draw{std::move(c), r};
  });
  double mean_estimate = 0.0;
  for (const auto& d : draws) mean_estimate += d.estimate;
  mean_estimate /= static_cast<double>(draws.size());

  if (!baseline.initialized()) baseline.update(mean_estimate);
  const double b = baseline.value();
  GradientEstimate est;
  est.gradient = kernels::ordered_sum(contexts.size(), params.values.size(),
                                      [&](std::size_t i, std::span<double> acc) {
                                        const double adv = draws[i].estimate - b;
                                        if (adv == 0.0) return;
                                        add_score_term(params, contexts[i], draws[i].caption, adv, acc);
                                      });
  scale_in_place(est.gradient, 1.0 / static_cast<double>(contexts.size()));
  est.objective = mean_estimate;
  est.samples = contexts.size();
  baseline.update(mean_estimate);
  return est;
}

OffPolicyWeight add_offpolicy_term(const ModelParams& params, const RatingsDataset& ratings,
                                   const OffPolicySample& sample, double epsilon, double b,
                                   std::uint64_t space_size, double eta_clip,
                                   std::span<double> acc) {
  const RatedContext& entry = ratings.entries().at(sample.entry);
  OffPolicyWeight w;
  const auto rating = entry.rating_of(sample.caption);
  w.rated = rating.has_value();
  w.reward = rating.value_or(b);
  if (!w.rated || w.reward == b) return w;

  const double log_q = std::log(q_prob(entry, sample.caption, epsilon, space_size));
  const double log_p = model::log_prob(params, entry.context, sample.caption);
  const double log_eta = log_p - log_q;
  if (log_eta > std::log(eta_clip)) {
    w.eta = eta_clip;
    w.clipped = true;
  } else {
    w.eta = std::exp(log_eta);
  }
  add_score_term(params, entry.context, sample.caption, w.eta * (w.reward - b), acc);
  return w;
}

std::vector<OffPolicySample> draw_offpolicy_samples(const RatingsDataset& ratings,
                                                    const CaptionSpace& space, double epsilon,
                                                    std::size_t n, std::uint64_t seed) {
  if (ratings.empty()) throw DomainError("draw_offpolicy_samples: empty ratings dataset");
  std::vector<OffPolicySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, i), /*stream=*/0xc7);
    const auto entry = static_cast<std::size_t>(rng.below(ratings.num_contexts()));
    out.push_back(OffPolicySample{
        entry, q_sample(ratings.entries()[entry], space, epsilon, derive_seed(seed, i, 1))});
  }
  return out;
}

GradientEstimate offpg_gradient_from_samples(const ModelParams& params,
                                             const RatingsDataset& ratings,
                                             std::span<const OffPolicySample> samples,
                                             double epsilon, double b, std::uint64_t space_size,
                                             double eta_clip) {
  if (samples.empty()) throw DomainError("offpg_gradient: no samples");
  for (const auto& s : samples) {
    if (s.entry >= ratings.num_contexts()) throw DomainError("offpg_gradient: bad context index");
    model::validate_caption_for(params.dims, s.caption);
  }
  std::vector<OffPolicyWeight> weights(samples.size());
  GradientEstimate est;
  est.gradient = kernels::ordered_sum(
      samples.size(), params.values.size(), [&](std::size_t i, std::span<double> acc) {
        weights[i] =
            add_offpolicy_term(params, ratings, samples[i], epsilon, b, space_size, eta_clip, acc);
      });
  const double inv = 1.0 / static_cast<double>(samples.size());
  scale_in_place(est.gradient, inv);
  for (const auto& w : weights) {
    // Unrated samples are never evaluated; they count at face value b.
    est.objective += w.rated ? w.eta * w.reward : b;
    est.rated += w.rated ? 1 : 0;
    est.eta_clips += w.clipped ? 1 : 0;
  }
  est.objective *= inv;
  est.samples = samples.size();
  return est;
}

GradientEstimate offpg_gradient(const ModelParams& params, const RatingsDataset& ratings,
                                const TrainConfig& config, const BaselineTracker& baseline,
                                std::uint64_t seed) {
  if (baseline.mode() != BaselineMode::kDatasetMean) {
    throw ConfigError("offpg_gradient requires a dataset-mean baseline");
  }
  const CaptionSpace space = model::caption_space(params.dims);
  const std::size_t n = config.batch_size / 2 > 0 ? config.batch_size / 2 : 1;
  const auto samples = draw_offpolicy_samples(ratings, space, config.epsilon, n, seed);
  return offpg_gradient_from_samples(params, ratings, samples, config.epsilon, baseline.value(),
                                     space.size(), config.eta_clip);
}

GradientVector curriculum_gradient(std::span<const double> pg, std::span<const double> mle,
                                   double alpha) {
  if (pg.size() != mle.size()) throw DomainError("curriculum_gradient: length mismatch");
  GradientVector out(mle.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * pg[i] + mle[i];
  return out;
}

}  // namespace ratingrl::train
