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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ratingrl::train {

enum class BaselineMode { kDatasetMean, kMovingAverage };

enum class TrainMode { kBaseline, kBaselinePlus, kOnPolicy, kOffPolicy };

std::string_view to_string(TrainMode mode) noexcept;
TrainMode parse_train_mode(std::string_view name);  // "baseline", "baseline_plus", "onpg", "offpg"
std::string_view to_string(BaselineMode mode) noexcept;
BaselineMode parse_baseline_mode(std::string_view name);  // "dataset_mean", "moving_average"

// Desk-scale defaults. The full-scale run used batch 4096, lr 3.2e-5 and 3M
// iterations for the MLE model.
struct TrainConfig {
  double alpha = 10.0;   // weight on the policy-gradient term
  double epsilon = 0.1;  // uniform mixture weight in q
  double t_threshold = 0.5;
  std::size_t batch_size = 32;
  double lr = 3e-3;
  double lr_decay = 0.95;
  std::size_t warmup_epochs = 0;
  std::size_t decay_every_epochs = 25;
  std::size_t steps_per_epoch = 20;
  std::size_t steps = 2000;
  std::uint64_t seed = 1;
  // Unset: moving average for onpg, dataset mean for offpg.
  std::optional<BaselineMode> b_mode;
  double ma_decay = 0.99;
  double onpg_batch_factor = 0.25;
  double eta_clip = 1e6;
  std::size_t trace_every = 100;       // exact E[r*] cadence when an oracle is attached
  std::size_t checkpoint_every = 0;    // 0 disables intermediate checkpoints

  // Throws ConfigError. `mixing` requests the OffPG constraints.
  void validate(bool mixing) const;
};

// Linear warmup from 0 to lr over warmup_epochs, then lr * lr_decay^k where k
// counts completed decay_every_epochs spans after warmup.
double lr_schedule(std::size_t step, const TrainConfig& config);

}  // namespace ratingrl::train
