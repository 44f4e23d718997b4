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

#include "ratingrl/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"
#include "ratingrl/kernels/reduce.hpp"
#include "ratingrl/synthworld/world.hpp"

namespace ratingrl::eval {
namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// CI widened, if needed, to contain the point estimate.
Interval ci_around(std::span<const double> items, double point, std::size_t resamples,
                   double level, std::uint64_t seed) {
  Interval ci = bootstrap_ci(items, resamples, level, seed);
  ci.low = std::min(ci.low, point);
  ci.high = std::max(ci.high, point);
  return ci;
}

void check_contexts(std::span<const Context> contexts, std::size_t n_captions) {
  if (contexts.empty()) throw DomainError("evaluation needs at least one context");
  if (n_captions != contexts.size()) throw DomainError("one caption per context is required");
}

}  // namespace

Interval bootstrap_ci(std::span<const double> scores, std::size_t resamples, double level,
                      std::uint64_t seed) {
  if (scores.empty()) throw DomainError("bootstrap_ci: empty score list");
  if (resamples == 0) throw DomainError("bootstrap_ci: resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap_ci: level must be in (0, 1)");
  const std::size_t n = scores.size();
  std::vector<double> means(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    CounterRng rng(derive_seed(seed, r), /*stream=*/0xb007);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += scores[rng.below(n)];
    means[r] = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    return means[static_cast<std::size_t>(std::lround(pos))];
  };
  return Interval{at(tail), at(1.0 - tail)};
}

std::vector<Caption> decode_all(const model::ModelParams& params, std::span<const Context> contexts,
                                std::size_t beam) {
  if (beam == 0) throw DomainError("decode_all: beam must be >= 1");
  for (const auto& ctx : contexts) {
    if (ctx.features.size() != params.dims.context_dim) {
      throw ValidationError("context '" + ctx.id + "' feature dimension does not match model");
    }
  }
  return kernels::ordered_map<Caption>(contexts.size(), [&](std::size_t i) {
    return model::beam_search(params, contexts[i], beam);
  });
}

std::size_t distinct_captions(std::span<const Caption> captions) {
  return std::set<Caption>(captions.begin(), captions.end()).size();
}

double majority_vote(std::span<const std::uint8_t> votes) {
  std::size_t ones = 0;
  for (const auto v : votes) ones += v ? 1 : 0;
  const std::size_t zeros = votes.size() - ones;
  if (ones == zeros) return 0.5;
  return ones > zeros ? 1.0 : 0.0;
}

GoodnessResult goodness_eval(const model::ModelParams& params, std::span<const Context> contexts,
                             std::uint64_t seed, const GoodnessConfig& config) {
  if (contexts.empty()) throw DomainError("goodness_eval needs at least one context");
  const auto captions = decode_all(params, contexts, config.beam);
  return goodness_of_captions(contexts, captions, seed, config);
}

GoodnessResult goodness_of_captions(std::span<const Context> contexts,
                                    std::span<const Caption> captions, std::uint64_t seed,
                                    const GoodnessConfig& config) {
  check_contexts(contexts, captions.size());
  if (config.n_raters == 0) throw DomainError("goodness evaluation needs at least one rater");
  GoodnessResult out;
  out.captions.assign(captions.begin(), captions.end());
  std::size_t ones = 0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const double r = synth::true_rating(contexts[i], captions[i]);
    const auto votes =
        synth::simulate_raters(r, config.n_raters, config.noise, derive_seed(seed, i, 0x600d));
    std::size_t item_ones = 0;
    for (const auto v : votes.votes) item_ones += v;
    ones += item_ones;
    out.item_average.push_back(static_cast<double>(item_ones) / static_cast<double>(config.n_raters));
    out.item_voting.push_back(majority_vote(votes.votes));
  }
  out.average = static_cast<double>(ones) / static_cast<double>(contexts.size() * config.n_raters);
  out.voting = mean(out.item_voting);
  out.average_ci = ci_around(out.item_average, out.average, config.resamples, config.level,
                             derive_seed(seed, 0xa1));
  out.voting_ci = ci_around(out.item_voting, out.voting, config.resamples, config.level,
                            derive_seed(seed, 0xa2));
  return out;
}

double sxs_score(double delta) {
  const double mag = std::abs(delta);
  if (mag < kSxsEqualBelow) return 0.0;
  const double step = mag < kSxsSlightBelow ? 0.5 : 1.0;
  return delta > 0.0 ? step : -step;
}

std::array<double, 3> sxs_dimensions(const Context& ctx, const Caption& caption) {
  const auto rc = synth::rating_components(ctx, caption);
  return {rc.recall, rc.precision, rc.fluency};
}

SxsResult sxs_eval(const model::ModelParams& model_a, const model::ModelParams& model_b,
                   std::span<const Context> contexts, std::uint64_t seed, const SxsConfig& config) {
  if (contexts.empty()) throw DomainError("sxs_eval needs at least one context");
  const auto a = decode_all(model_a, contexts, config.beam);
  const auto b = decode_all(model_b, contexts, config.beam);
  return sxs_of_captions(contexts, a, b, seed, config);
}

SxsResult sxs_of_captions(std::span<const Context> contexts, std::span<const Caption> captions_a,
                          std::span<const Caption> captions_b, std::uint64_t seed,
                          const SxsConfig& config) {
  check_contexts(contexts, captions_a.size());
  check_contexts(contexts, captions_b.size());
  if (config.n_raters == 0) throw DomainError("sxs evaluation needs at least one rater");
  SxsResult out;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    out.identical_captions += captions_a[i] == captions_b[i] ? 1 : 0;
    CounterRng rng(derive_seed(seed, i, 0x5c5), /*stream=*/0x1);
    const bool a_on_left = rng.bernoulli(0.5);
    const auto qa = sxs_dimensions(contexts[i], captions_a[i]);
    const auto qb = sxs_dimensions(contexts[i], captions_b[i]);
    const auto& left = a_on_left ? qa : qb;
    const auto& right = a_on_left ? qb : qa;
    for (std::size_t d = 0; d < 3; ++d) {
      double item = 0.0;
      for (std::size_t r = 0; r < config.n_raters; ++r) {
        const double jitter = config.noise > 0.0 ? config.noise * rng.normal() : 0.0;
        const double judged = sxs_score(right[d] - left[d] + jitter);
        const double for_a = a_on_left ? -judged : judged;
        const auto bin = static_cast<std::size_t>(std::lround(for_a * 2.0) + 2);
        ++out.dims[d].histogram[bin];
        item += for_a;
      }
      out.dims[d].item_scores.push_back(item / static_cast<double>(config.n_raters));
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    auto& dim = out.dims[d];
    dim.score = mean(dim.item_scores);
    dim.ci = ci_around(dim.item_scores, dim.score, config.resamples, config.level,
                       derive_seed(seed, 0x5c, d));
  }
  return out;
}

}  // namespace ratingrl::eval
