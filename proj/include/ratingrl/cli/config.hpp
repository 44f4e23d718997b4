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
#include <string>
#include <vector>

#include "ratingrl/estimator/estimator.hpp"
#include "ratingrl/eval/eval.hpp"
#include "ratingrl/model/sequence_model.hpp"
#include "ratingrl/synthworld/world.hpp"
#include "ratingrl/trainers/config.hpp"

namespace ratingrl::cli {

// Everything one experiment directory is built from. Every random draw is
// derived from `seed`.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  synth::WorldSpec world;
  std::size_t embed_dim = 2;
  std::size_t hidden_dim = 2;
  train::TrainConfig baseline;  // MLE from init; checkpoints feed D_CR
  train::TrainConfig finetune;  // every run that starts from the Baseline checkpoint
  estimator::EstimatorConfig estimator;
  eval::GoodnessConfig goodness;
  eval::SxsConfig sxs;
  std::vector<double> sweep_alphas{0.1, 1.0, 10.0, 100.0};
  std::vector<train::TrainMode> sweep_modes{train::TrainMode::kOnPolicy, train::TrainMode::kOffPolicy};
  std::vector<double> thresholds{0.5, 0.7};

  model::ModelDims model_dims() const;
  estimator::EstimatorDims estimator_dims() const;
};

ExperimentConfig default_config();

// Missing keys keep their defaults; unknown keys and ill-typed values throw
// ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON of every field, defaults included.
std::string to_json(const ExperimentConfig& config);
// FNV-1a 64 of to_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Per-purpose seeds derived from config.seed.
enum class SeedPurpose : std::uint64_t {
  kModelInit = 1,
  kBaselineTrain = 2,
  kFinetune = 3,
  kEstimator = 4,
  kEval = 5,
};
std::uint64_t seed_for(const ExperimentConfig& config, SeedPurpose purpose);

}  // namespace ratingrl::cli
