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
#include <vector>

#include "ratingrl/model/sequence_model.hpp"

namespace ratingrl {

// Flat-vector checkpoint file, all integers and floats little-endian:
//   char[8]  magic "RRLCKPT1"
//   u32      kind
//   u32      number of dims header entries
//   i64[n]   dims header
//   u64      number of values
//   f64[m]   values
enum class CheckpointKind : std::uint32_t { kModel = 1, kEstimator = 2 };

struct FlatCheckpoint {
  CheckpointKind kind;
  std::vector<std::int64_t> header;
  std::vector<double> values;
};

void write_flat_checkpoint(const std::filesystem::path& path, const FlatCheckpoint& ckpt);
FlatCheckpoint read_flat_checkpoint(const std::filesystem::path& path);

namespace model {
void save_params(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_params(const std::filesystem::path& path);
}  // namespace model

}  // namespace ratingrl
