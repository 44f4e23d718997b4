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

#include "ratingrl/synthworld/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>

#include "json.hpp"
#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"
#include "ratingrl/kernels/reduce.hpp"

namespace ratingrl::synth {
namespace {

using nlohmann::json;

std::string context_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ctx-%04zu", i);
  return buf;
}

}  // namespace

void WorldSpec::validate() const {
  if (vocab_size < 3) throw ConfigError("world vocab_size must be >= 3");
  if (max_len == 0) throw ConfigError("world max_len must be positive");
  if (n_contexts == 0) throw ConfigError("world needs at least one context");
  if (targets_per_context == 0 || targets_per_context > vocab_size - 2) {
    throw ConfigError("targets_per_context must be in [1, V - 2]");
  }
  if (targets_per_context > max_len) {
    throw ConfigError("targets_per_context must not exceed max_len (D_IC captions would not fit)");
  }
  if (!(rater_noise >= 0.0) || !(feature_jitter >= 0.0)) {
    throw ConfigError("rater_noise and feature_jitter must be >= 0");
  }
  if (candidates_per_context < 2) throw ConfigError("candidates_per_context must be >= 2");
}

World gen_world(const WorldSpec& spec) {
  spec.validate();
  World w{spec, Vocabulary::synthetic(spec.vocab_size - 2), {}};
  const auto& content = w.vocab.content_ids();
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.targets_per_context));
  w.contexts.reserve(spec.n_contexts);
  for (std::size_t i = 0; i < spec.n_contexts; ++i) {
    CounterRng rng(derive_seed(spec.seed, i), /*stream=*/0x3a7);
    // Partial Fisher-Yates over the content tokens.
    std::vector<TokenId> pool = content;
    for (std::size_t k = 0; k < spec.targets_per_context; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
    }
    std::vector<TokenId> targets(pool.begin(),
                                 pool.begin() + static_cast<std::ptrdiff_t>(spec.targets_per_context));
    std::sort(targets.begin(), targets.end());

    Context ctx{context_name(i), std::vector<double>(spec.context_dim(), 0.0), targets};
    for (const TokenId t : targets) ctx.features[static_cast<std::size_t>(t)] = scale;
    for (double& f : ctx.features) f += spec.feature_jitter * rng.normal();
    w.contexts.push_back(std::move(ctx));
  }
  return w;
}

RatingComponents rating_components(const Context& ctx, const Caption& caption) {
  RatingComponents rc;
  const auto content = caption.content();
  const std::set<TokenId> targets(ctx.target_tokens.begin(), ctx.target_tokens.end());
  const std::set<TokenId> present(content.begin(), content.end());
  std::size_t matches = 0;
  for (const TokenId t : present) matches += targets.count(t);
  if (!content.empty()) rc.precision = static_cast<double>(matches) / static_cast<double>(content.size());
  if (!targets.empty()) rc.recall = static_cast<double>(matches) / static_cast<double>(targets.size());
  if (rc.precision + rc.recall > 0.0) {
    rc.f1 = 2.0 * rc.precision * rc.recall / (rc.precision + rc.recall);
  }
  bool repeat = false;
  for (std::size_t k = 1; k < content.size(); ++k) repeat = repeat || content[k] == content[k - 1];
  const bool short_enough = caption.size() <= ctx.target_tokens.size() + 1;
  rc.fluency = !repeat && short_enough ? 1.0 : 0.0;
  rc.value = std::clamp(kContentWeight * rc.f1 + kFluencyWeight * rc.fluency, 0.0, 1.0);
  return rc;
}

double true_rating(const Context& ctx, const Caption& caption) {
  return rating_components(ctx, caption).value;
}

RaterVotes simulate_raters(double r_star, std::size_t n, double noise, std::uint64_t seed) {
  if (n == 0) throw DomainError("simulate_raters needs at least one rater");
  CounterRng rng(seed, /*stream=*/0x7a7e);
  RaterVotes out;
  out.votes.reserve(n);
  std::size_t ones = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double jitter = noise > 0.0 ? noise * rng.normal() : 0.0;
    const double p = std::clamp(r_star + jitter, 0.0, 1.0);
    const bool vote = rng.bernoulli(p);
    out.votes.push_back(vote ? 1 : 0);
    ones += vote ? 1 : 0;
  }
  out.rating = quantize_rating(static_cast<double>(ones) / static_cast<double>(n));
  return out;
}

CaptionDataset ground_truth_captions(const World& world) {
  CaptionDataset d;
  d.pairs.reserve(world.contexts.size());
  for (const auto& ctx : world.contexts) {
    Caption c{ctx.target_tokens};
    c.tokens.push_back(world.vocab.eos_id());
    d.pairs.push_back(CaptionPair{ctx, std::move(c)});
  }
  return d;
}

Datasets build_datasets(const World& world, std::span<const model::ModelParams> candidate_models) {
  const WorldSpec& spec = world.spec;
  spec.validate();
  if (candidate_models.empty()) throw ConfigError("build_datasets needs at least one candidate model");
  const std::size_t want = spec.candidates_per_context;
  const std::size_t max_draws = 100 * want;

  struct Harvest {
    std::vector<RatedCaption> rated;
    bool failed = false;
    std::exception_ptr error;
  };
  const auto per_context = kernels::ordered_map<Harvest>(world.contexts.size(), [&](std::size_t i) {
    Harvest h;
    try {
      const Context& ctx = world.contexts[i];
      std::vector<Caption> pool;
      auto offer = [&](Caption c) {
        if (pool.size() < want && std::find(pool.begin(), pool.end(), c) == pool.end()) {
          pool.push_back(std::move(c));
        }
      };
      for (const auto& m : candidate_models) offer(model::beam_search(m, ctx, kHarvestBeam));
      for (std::size_t draw = 0; pool.size() < want; ++draw) {
        if (draw == max_draws) {
          h.failed = true;
          return h;
        }
        const auto& m = candidate_models[draw % candidate_models.size()];
        offer(model::sample(m, ctx, derive_seed(spec.seed, i, 0x5a0000 + draw)));
      }
      for (std::size_t j = 0; j < pool.size(); ++j) {
        const auto votes = simulate_raters(true_rating(ctx, pool[j]), kVotesPerCaption,
                                           spec.rater_noise, derive_seed(spec.seed, i, 0x7a0000 + j));
        h.rated.push_back(RatedCaption::from_votes(std::move(pool[j]), votes.votes));
      }
    } catch (...) {
      h.error = std::current_exception();
    }
    return h;
  });

  Datasets out{ground_truth_captions(world), {}};
  for (std::size_t i = 0; i < per_context.size(); ++i) {
    if (per_context[i].error) std::rethrow_exception(per_context[i].error);
    if (per_context[i].failed) {
      throw GenerationError("context '" + world.contexts[i].id + "': fewer than " +
                            std::to_string(want) + " distinct captions after " +
                            std::to_string(max_draws) + " draws");
    }
    for (const auto& rc : per_context[i].rated) out.ratings.add(world.contexts[i], rc);
  }
  return out;
}

void save_world(const std::filesystem::path& path, const World& world) {
  const WorldSpec& s = world.spec;
  json j;
  j["spec"] = {{"vocab_size", s.vocab_size},
               {"max_len", s.max_len},
               {"n_contexts", s.n_contexts},
               {"targets_per_context", s.targets_per_context},
               {"rater_noise", s.rater_noise},
               {"feature_jitter", s.feature_jitter},
               {"candidates_per_context", s.candidates_per_context},
               {"seed", s.seed}};
  j["contexts"] = json::array();
  for (const auto& ctx : world.contexts) {
    j["contexts"].push_back(
        {{"context_id", ctx.id}, {"features", ctx.features}, {"target_tokens", ctx.target_tokens}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

World load_world(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  World w{{}, Vocabulary::synthetic(1), {}};
  try {
    const json j = json::parse(in);
    const json& s = j.at("spec");
    w.spec.vocab_size = s.at("vocab_size").get<std::size_t>();
    w.spec.max_len = s.at("max_len").get<std::size_t>();
    w.spec.n_contexts = s.at("n_contexts").get<std::size_t>();
    w.spec.targets_per_context = s.at("targets_per_context").get<std::size_t>();
    w.spec.rater_noise = s.at("rater_noise").get<double>();
    w.spec.feature_jitter = s.at("feature_jitter").get<double>();
    w.spec.candidates_per_context = s.at("candidates_per_context").get<std::size_t>();
    w.spec.seed = s.at("seed").get<std::uint64_t>();
    for (const auto& c : j.at("contexts")) {
      w.contexts.push_back(Context{c.at("context_id").get<std::string>(),
                                   c.at("features").get<std::vector<double>>(),
                                   c.at("target_tokens").get<std::vector<TokenId>>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  try {
    w.spec.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  w.vocab = Vocabulary::synthetic(w.spec.vocab_size - 2);
  if (w.contexts.size() != w.spec.n_contexts) {
    throw ValidationError(path.string() + ": context count does not match spec");
  }
  for (const auto& c : w.contexts) {
    if (c.features.size() != w.spec.context_dim()) {
      throw ValidationError(path.string() + ": context '" + c.id + "' has wrong feature dimension");
    }
  }
  return w;
}

}  // namespace ratingrl::synth
