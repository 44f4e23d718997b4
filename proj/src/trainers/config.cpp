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

#include "ratingrl/trainers/config.hpp"

#include <cmath>

#include "ratingrl/core/errors.hpp"

namespace ratingrl::train {

std::string_view to_string(TrainMode mode) noexcept {
  switch (mode) {
    case TrainMode::kBaseline: return "baseline";
    case TrainMode::kBaselinePlus: return "baseline_plus";
    case TrainMode::kOnPolicy: return "onpg";
    case TrainMode::kOffPolicy: return "offpg";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "baseline") return TrainMode::kBaseline;
  if (name == "baseline_plus") return TrainMode::kBaselinePlus;
  if (name == "onpg") return TrainMode::kOnPolicy;
  if (name == "offpg") return TrainMode::kOffPolicy;
  throw ConfigError("unknown training mode '" + std::string(name) + "'");
}

std::string_view to_string(BaselineMode mode) noexcept {
  return mode == BaselineMode::kDatasetMean ? "dataset_mean" : "moving_average";
}

BaselineMode parse_baseline_mode(std::string_view name) {
  if (name == "dataset_mean") return BaselineMode::kDatasetMean;
  if (name == "moving_average") return BaselineMode::kMovingAverage;
  throw ConfigError("unknown baseline mode '" + std::string(name) + "'");
}

void TrainConfig::validate(bool mixing) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw ConfigError("epsilon must be in (0, 0.5]");
  if (!(t_threshold >= 0.0 && t_threshold <= 1.0)) throw ConfigError("t_threshold must be in [0, 1]");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (mixing && batch_size % 2 != 0) throw ConfigError("batch_size must be even when mixing datasets");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
  if (decay_every_epochs == 0 || steps_per_epoch == 0) {
    throw ConfigError("decay_every_epochs and steps_per_epoch must be positive");
  }
  if (!(ma_decay >= 0.0 && ma_decay < 1.0)) throw ConfigError("ma_decay must be in [0, 1)");
  if (!(onpg_batch_factor > 0.0 && onpg_batch_factor <= 1.0)) {
    throw ConfigError("onpg_batch_factor must be in (0, 1]");
  }
  if (!(eta_clip > 1.0)) throw ConfigError("eta_clip must exceed 1");
}

double lr_schedule(std::size_t step, const TrainConfig& c) {
  const std::size_t warmup = c.warmup_epochs * c.steps_per_epoch;
  if (step < warmup) return c.lr * static_cast<double>(step) / static_cast<double>(warmup);
  const std::size_t spans = (step - warmup) / (c.decay_every_epochs * c.steps_per_epoch);
  return c.lr * std::pow(c.lr_decay, static_cast<double>(spans));
}

}  // namespace ratingrl::train
