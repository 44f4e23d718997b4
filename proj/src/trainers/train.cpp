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

#include "ratingrl/trainers/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"
#include "ratingrl/trainers/gradients.hpp"
#include "ratingrl/trainers/optim.hpp"

namespace ratingrl::train {
namespace {

std::vector<CaptionPair> draw_pairs(const CaptionDataset& data, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/0xba7c);
  std::vector<CaptionPair> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(data.pairs[rng.below(data.pairs.size())]);
  return out;
}

std::vector<Context> draw_contexts(const CaptionDataset& data, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/0xc07e);
  std::vector<Context> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(data.pairs[rng.below(data.pairs.size())].context);
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

TrainResult train(TrainMode mode, const model::ModelParams& init, const TrainInputs& in,
                  const TrainConfig& config) {
  const bool pg = mode == TrainMode::kOnPolicy || mode == TrainMode::kOffPolicy;
  config.validate(pg);
  if (!in.captions || in.captions->pairs.empty()) {
    throw ConfigError(std::string(to_string(mode)) + " training needs a non-empty caption dataset");
  }
  if ((mode == TrainMode::kBaselinePlus || mode == TrainMode::kOffPolicy) &&
      (!in.ratings || in.ratings->empty())) {
    throw ConfigError(std::string(to_string(mode)) + " training needs a ratings dataset");
  }
  if (mode == TrainMode::kOnPolicy && !in.estimator) {
    throw ConfigError("onpg training needs a trained rating estimator");
  }
  for (const auto& p : in.captions->pairs) model::validate_caption_for(init.dims, p.caption);

  CaptionDataset merged;
  const CaptionDataset* mle_data = in.captions;
  if (mode == TrainMode::kBaselinePlus) {
    merged = merge_positive(*in.captions, *in.ratings, config.t_threshold);
    mle_data = &merged;
  }

  const BaselineMode default_b =
      mode == TrainMode::kOnPolicy ? BaselineMode::kMovingAverage : BaselineMode::kDatasetMean;
  const BaselineMode b_mode = config.b_mode.value_or(default_b);
  if (mode == TrainMode::kOffPolicy && b_mode != BaselineMode::kDatasetMean) {
    throw ConfigError("offpg training requires the dataset_mean baseline");
  }
  if (mode == TrainMode::kOnPolicy && b_mode == BaselineMode::kDatasetMean && !in.ratings) {
    throw ConfigError("a dataset_mean baseline needs a ratings dataset");
  }
  BaselineTracker baseline = b_mode == BaselineMode::kMovingAverage
                                 ? BaselineTracker::moving_average(config.ma_decay)
                                 : (in.ratings ? BaselineTracker::dataset_mean(*in.ratings)
                                               : BaselineTracker::fixed(0.0));

  std::size_t batch = config.batch_size;
  if (mode == TrainMode::kOnPolicy) {
    batch = std::max<std::size_t>(
        2, static_cast<std::size_t>(
               std::lround(static_cast<double>(config.batch_size) * config.onpg_batch_factor)));
  }
  const std::size_t mle_n = pg ? std::max<std::size_t>(1, batch / 2) : batch;
  const std::size_t pg_n = std::max<std::size_t>(1, batch - mle_n);
  TrainConfig offpg_config = config;
  offpg_config.batch_size = 2 * pg_n;

  TrainResult out;
  out.params = init;
  AdamState adam;
  for (std::size_t step = 0; step < config.steps; ++step) {
    TraceRow row;
    row.step = step;
    row.lr = lr_schedule(step, config);
    const std::uint64_t step_seed = derive_seed(config.seed, step, 0x57e9);

    const auto pairs = draw_pairs(*mle_data, mle_n, derive_seed(step_seed, 1));
    GradientEstimate mle = mle_gradient(out.params, pairs);
    row.mle_obj = mle.objective;
    GradientVector grad;
    if (mode == TrainMode::kOffPolicy) {
      const auto est = offpg_gradient(out.params, *in.ratings, offpg_config, baseline,
                                      derive_seed(step_seed, 2));
      out.eta_clip_count += est.eta_clips;
      row.pg_obj_estimate = est.objective;
      grad = curriculum_gradient(est.gradient, mle.gradient, config.alpha);
    } else if (mode == TrainMode::kOnPolicy) {
      const auto contexts = draw_contexts(*in.captions, pg_n, derive_seed(step_seed, 3));
      const auto est = onpg_gradient(out.params, *in.estimator, contexts, baseline,
                                     derive_seed(step_seed, 4));
      row.pg_obj_estimate = est.objective;
      grad = curriculum_gradient(est.gradient, mle.gradient, config.alpha);
    } else {
      grad = std::move(mle.gradient);
    }
    row.eta_clip_count = out.eta_clip_count;
    if (in.oracle && config.trace_every > 0 &&
        (step % config.trace_every == 0 || step + 1 == config.steps)) {
      row.exact_expected_rating = oracle::exact_objective(out.params, *in.oracle);
    }
    out.trace.push_back(row);

    adam_step(out.params.values, grad, adam, row.lr);
    if (config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0) {
      out.checkpoints.push_back(out.params);
    }
  }
  out.baseline_value = baseline.value();
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "step,lr,mle_obj,pg_obj_estimate,exact_expected_rating,eta_clip_count\n";
  for (const auto& r : trace) {
    os << r.step << ',' << format_double(r.lr) << ',' << format_double(r.mle_obj) << ',';
    if (r.pg_obj_estimate) os << format_double(*r.pg_obj_estimate);
    os << ',';
    if (r.exact_expected_rating) os << format_double(*r.exact_expected_rating);
    os << ',' << r.eta_clip_count << '\n';
  }
  return os.str();
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << trace_csv(trace);
}

}  // namespace ratingrl::train
