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

#include "ratingrl/core/types.hpp"

namespace ratingrl {

// Vocabulary sidecar: {"tokens": [...], "bos_id": n, "eos_id": n}.
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

// D_IC as JSONL, one record per pair:
//   {"context_id", "features", "caption_tokens"[, "target_tokens"]}
// Doubles are written in shortest round-trip form, so save-then-load is exact.
void save_captions(const std::filesystem::path& path, const CaptionDataset& data);
CaptionDataset load_captions(const std::filesystem::path& path, const Vocabulary& vocab,
                             std::size_t max_len);

// D_CR as JSONL, one record per rated caption: the caption fields plus
// "votes" (kVotesPerCaption entries of 0/1) and an informational "rating".
// The rating is always recomputed from the votes on load.
void save_ratings(const std::filesystem::path& path, const RatingsDataset& data);
RatingsDataset load_ratings(const std::filesystem::path& path, const Vocabulary& vocab,
                            std::size_t max_len);

}  // namespace ratingrl
