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
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ratingrl/core/rng.hpp"
#include "ratingrl/core/types.hpp"
#include "ratingrl/model/sequence_model.hpp"

namespace ratingrl::testing {

inline Caption cap(std::initializer_list<TokenId> tokens) { return Caption{std::vector<TokenId>(tokens)}; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ratingrl-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// V = 5 (3 content tokens), L_max = 3: |C_L| = 3 + 9 + 27 = 39.
inline model::ModelDims tiny_dims(std::size_t hidden = 3, std::size_t embed = 2) {
  return model::ModelDims{5, embed, hidden, 4, 3, 0, 1};
}

inline Context random_context(std::uint64_t seed, std::size_t dim, const std::string& id = "c0") {
  CounterRng rng(seed, 77);
  Context ctx;
  ctx.id = id;
  for (std::size_t i = 0; i < dim; ++i) ctx.features.push_back(rng.uniform(-1.0, 1.0));
  return ctx;
}

// Init draws scaled up so distributions are far from uniform.
inline model::ModelParams random_params(std::uint64_t seed, const model::ModelDims& dims,
                                        double scale = 1.0) {
  model::ModelParams p = model::init_params(seed, dims);
  for (double& v : p.values) v *= scale / 0.08;
  return p;
}

// Random votes for `per_context` distinct captions of each context; with
// per_context >= |C_L| every caption is rated.
inline RatingsDataset random_ratings(std::uint64_t seed, const model::ModelDims& dims,
                                     std::size_t contexts, std::size_t per_context) {
  const CaptionSpace space = model::caption_space(dims);
  RatingsDataset d;
  for (std::size_t i = 0; i < contexts; ++i) {
    const Context ctx = random_context(derive_seed(seed, i), dims.context_dim, "ctx" + std::to_string(i));
    CounterRng rng(seed, 100 + i);
    const std::size_t n = per_context < space.size() ? per_context : space.size();
    const std::uint64_t offset = n < space.size() ? rng.below(space.size()) : 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::uint8_t> votes(kVotesPerCaption);
      const double p = rng.uniform();
      for (auto& v : votes) v = rng.uniform() < p ? 1 : 0;
      d.add(ctx, RatedCaption::from_votes(space.at((offset + k * 7) % space.size()), std::move(votes)));
    }
  }
  return d;
}

}  // namespace ratingrl::testing
