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

#include "ratingrl/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/kernels/reduce.hpp"
#include "ratingrl/trainers/gradients.hpp"

namespace ratingrl::oracle {
namespace {

std::vector<Caption> enumerate_space(const CaptionSpace& space) {
  check_enumerable(space.content_ids().size(), space.max_len());
  std::vector<Caption> out;
  out.reserve(space.size());
  for (std::uint64_t i = 0; i < space.size(); ++i) out.push_back(space.at(i));
  std::sort(out.begin(), out.end());
  return out;
}

// Visits every caption of C_L under one context in prefix order, passing its
// log-probability to visit(caption, logp).
template <class Visit>
void walk(const model::Decoder& dec, const model::Decoder::State& state, Caption& prefix,
          double logp, std::vector<double>& scratch, Visit& visit) {
  const auto& d = dec.dims();
  if (state.content_len == d.max_len) {
    prefix.tokens.push_back(d.eos_id);
    visit(prefix, logp);
    prefix.tokens.pop_back();
    return;
  }
  dec.log_probs(state, scratch);
  const std::vector<double> lp = scratch;
  for (std::size_t k = 0; k < d.vocab_size; ++k) {
    if (std::isinf(lp[k])) continue;
    const auto t = static_cast<TokenId>(k);
    prefix.tokens.push_back(t);
    if (t == d.eos_id) {
      visit(prefix, logp + lp[k]);
    } else {
      walk(dec, dec.advance(state, t), prefix, logp + lp[k], scratch, visit);
    }
    prefix.tokens.pop_back();
  }
}

void check_world(const ModelParams& params, const OracleWorld& world) {
  if (world.contexts.empty()) throw DomainError("oracle world has no contexts");
  if (!world.rating) throw DomainError("oracle world has no rating function");
  check_enumerable(params.dims.vocab_size - 2, params.dims.max_len);
  for (const auto& ctx : world.contexts) {
    if (ctx.features.size() != params.dims.context_dim) {
      throw ValidationError("context '" + ctx.id + "' feature dimension does not match model");
    }
  }
}

}  // namespace

void check_enumerable(std::size_t content_tokens, std::size_t max_len) {
  double n = 1.0;
  for (std::size_t i = 0; i < max_len; ++i) n *= static_cast<double>(content_tokens);
  if (n > static_cast<double>(kEnumerationLimit)) {
    throw SizeError("caption space too large to enumerate: (V-2)^L_max = " + std::to_string(n));
  }
}

std::vector<Caption> enumerate_captions(const Vocabulary& vocab, std::size_t max_len) {
  return enumerate_space(CaptionSpace(vocab, max_len));
}

std::vector<Caption> enumerate_captions(const ModelDims& dims) {
  return enumerate_space(model::caption_space(dims));
}

RatingFn rating_lookup(const RatingsDataset& ratings, double fallback) {
  return [&ratings, fallback](const Context& ctx, const Caption& caption) {
    const RatedContext* entry = ratings.find(ctx.id);
    if (!entry) return fallback;
    return entry->rating_of(caption).value_or(fallback);
  };
}

std::vector<Context> contexts_of(const RatingsDataset& ratings) {
  std::vector<Context> out;
  out.reserve(ratings.num_contexts());
  for (const auto& e : ratings.entries()) out.push_back(e.context);
  return out;
}

std::vector<double> caption_log_probs(const ModelParams& params, const Context& ctx) {
  check_enumerable(params.dims.vocab_size - 2, params.dims.max_len);
  const model::Decoder dec(params, ctx);
  std::vector<std::pair<Caption, double>> visited;
  auto visit = [&](const Caption& c, double lp) { visited.emplace_back(c, lp); };
  Caption prefix;
  std::vector<double> scratch;
  walk(dec, dec.start(), prefix, 0.0, scratch, visit);
  std::sort(visited.begin(), visited.end());
  std::vector<double> out;
  out.reserve(visited.size());
  for (const auto& [c, lp] : visited) out.push_back(lp);
  return out;
}

double exact_objective(const ModelParams& params, const OracleWorld& world) {
  check_world(params, world);
  // A throwing RatingFn must not unwind through the parallel region.
  std::vector<std::exception_ptr> errors(world.contexts.size());
  const auto per_context = kernels::ordered_map<double>(world.contexts.size(), [&](std::size_t i) {
    const Context& ctx = world.contexts[i];
    double sum = 0.0;
    try {
      const model::Decoder dec(params, ctx);
      auto visit = [&](const Caption& c, double lp) { sum += std::exp(lp) * world.rating(ctx, c); };
      Caption prefix;
      std::vector<double> scratch;
      walk(dec, dec.start(), prefix, 0.0, scratch, visit);
    } catch (...) {
      errors[i] = std::current_exception();
    }
    return sum;
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double total = 0.0;
  for (const double v : per_context) total += v;
  return total / static_cast<double>(world.contexts.size());
}

GradientVector exact_policy_gradient(const ModelParams& params, const OracleWorld& world, double b) {
  check_world(params, world);
  const auto captions = enumerate_captions(params.dims);
  const std::size_t nc = captions.size();
  // Ratings are evaluated outside the parallel region; RatingFn may throw.
  std::vector<double> advantage(world.contexts.size() * nc);
  for (std::size_t i = 0; i < world.contexts.size(); ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      advantage[i * nc + j] = world.rating(world.contexts[i], captions[j]) - b;
    }
  }
  std::vector<std::vector<double>> log_probs(world.contexts.size());
  for (std::size_t i = 0; i < world.contexts.size(); ++i) {
    log_probs[i] = caption_log_probs(params, world.contexts[i]);
  }
  auto g = kernels::ordered_sum(
      world.contexts.size() * nc, params.values.size(), [&](std::size_t k, std::span<double> acc) {
        const std::size_t i = k / nc, j = k % nc;
        const double w = std::exp(log_probs[i][j]) * advantage[k];
        if (w == 0.0) return;
        model::accumulate_grad_log_prob(params, world.contexts[i], captions[j], w, acc);
      });
  const double inv = 1.0 / static_cast<double>(world.contexts.size());
  for (double& v : g) v *= inv;
  return g;
}

GradientVector exact_offpolicy_expectation(const ModelParams& params, const RatingsDataset& ratings,
                                           double epsilon, double b) {
  if (ratings.empty()) throw DomainError("exact_offpolicy_expectation: empty ratings dataset");
  check_enumerable(params.dims.vocab_size - 2, params.dims.max_len);
  const auto captions = enumerate_captions(params.dims);
  const std::size_t nc = captions.size();
  const std::size_t n_ctx = ratings.num_contexts();
  const auto space_size = static_cast<std::uint64_t>(nc);

  // Per (context, caption): weight q * eta * (r^ - b).
  std::vector<double> weight(n_ctx * nc);
  for (std::size_t i = 0; i < n_ctx; ++i) {
    const RatedContext& entry = ratings.entries()[i];
    const auto lps = caption_log_probs(params, entry.context);
    for (std::size_t j = 0; j < nc; ++j) {
      const double q = train::q_prob(entry, captions[j], epsilon, space_size);
      const double r_hat = entry.rating_of(captions[j]).value_or(b);
      const double eta = std::exp(lps[j] - std::log(q));
      weight[i * nc + j] = q * eta * (r_hat - b);
    }
  }
  auto g = kernels::ordered_sum(n_ctx * nc, params.values.size(),
                                [&](std::size_t k, std::span<double> acc) {
                                  if (weight[k] == 0.0) return;
                                  model::accumulate_grad_log_prob(
                                      params, ratings.entries()[k / nc].context, captions[k % nc],
                                      weight[k], acc);
                                });
  const double inv = 1.0 / static_cast<double>(n_ctx);
  for (double& v : g) v *= inv;
  return g;
}

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& fn,
                                std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff: h must be positive");
  std::vector<double> work(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    work[i] = x[i] + h;
    const double up = fn(work);
    work[i] = x[i] - h;
    const double down = fn(work);
    work[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff: non-finite evaluation at coordinate " + std::to_string(i));
    }
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

namespace serial {

double exact_objective(const ModelParams& params, const OracleWorld& world) {
  check_world(params, world);
  const auto captions = enumerate_captions(params.dims);
  double total = 0.0;
  for (const auto& ctx : world.contexts) {
    for (const auto& c : captions) total += std::exp(model::log_prob(params, ctx, c)) * world.rating(ctx, c);
  }
  return total / static_cast<double>(world.contexts.size());
}

GradientVector exact_policy_gradient(const ModelParams& params, const OracleWorld& world, double b) {
  check_world(params, world);
  const auto captions = enumerate_captions(params.dims);
  GradientVector g(params.values.size(), 0.0);
  for (const auto& ctx : world.contexts) {
    for (const auto& c : captions) {
      const double w = std::exp(model::log_prob(params, ctx, c)) * (world.rating(ctx, c) - b);
      const auto grad = model::grad_log_prob(params, ctx, c);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += w * grad[k];
    }
  }
  for (double& v : g) v /= static_cast<double>(world.contexts.size());
  return g;
}

}  // namespace serial
}  // namespace ratingrl::oracle
