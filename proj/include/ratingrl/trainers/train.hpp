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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ratingrl/core/types.hpp"
#include "ratingrl/estimator/estimator.hpp"
#include "ratingrl/model/sequence_model.hpp"
#include "ratingrl/oracle/oracle.hpp"
#include "ratingrl/trainers/config.hpp"

namespace ratingrl::train {

// Datasets a run may use. Pointers are non-owning; unused ones may be null.
struct TrainInputs {
  const CaptionDataset* captions = nullptr;              // D_IC, every mode
  const RatingsDataset* ratings = nullptr;               // D_CR: baseline_plus, offpg
  const estimator::EstimatorParams* estimator = nullptr;  // onpg
  const oracle::OracleWorld* oracle = nullptr;           // optional exact E[r*] tracing
};

struct TraceRow {
  std::size_t step = 0;
  double lr = 0.0;
  double mle_obj = 0.0;
  std::optional<double> pg_obj_estimate;      // PG modes only
  std::optional<double> exact_expected_rating;  // every trace_every steps with an oracle
  std::size_t eta_clip_count = 0;             // cumulative
};

struct TrainResult {
  model::ModelParams params;
  std::vector<TraceRow> trace;
  // Parameters after every checkpoint_every steps, oldest first.
  std::vector<model::ModelParams> checkpoints;
  std::size_t eta_clip_count = 0;
  double baseline_value = 0.0;  // final b for PG modes
};

// Makes config.steps Adam ascent steps from `init`.
//   baseline       MLE on D_IC; alpha is ignored
//   baseline_plus  MLE on merge_positive(D_IC, D_CR, t_threshold)
//   onpg           alpha * OnPG + MLE, batch reduced by onpg_batch_factor
//   offpg          alpha * OffPG + MLE
// PG batches are split half MLE pairs, half policy-gradient contexts. Every
// draw is derived from config.seed, so equal inputs give equal results.
// Throws ConfigError when the mode's inputs are missing.
TrainResult train(TrainMode mode, const model::ModelParams& init, const TrainInputs& inputs,
                  const TrainConfig& config);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);
std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace ratingrl::train
