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

#include "ratingrl/model/sequence_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"

namespace ratingrl::model {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// out = log softmax of logits over the tokens allowed at this step.
void masked_log_softmax(const double* logits, std::size_t vocab, const Decoder& dec,
                        std::size_t content_len, double* out) {
  double max_logit = kNegInf;
  for (std::size_t k = 0; k < vocab; ++k) {
    if (dec.allowed(content_len, static_cast<TokenId>(k))) max_logit = std::max(max_logit, logits[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < vocab; ++k) {
    if (dec.allowed(content_len, static_cast<TokenId>(k))) sum += std::exp(logits[k] - max_logit);
  }
  const double log_z = max_logit + std::log(sum);
  for (std::size_t k = 0; k < vocab; ++k) {
    out[k] = dec.allowed(content_len, static_cast<TokenId>(k)) ? logits[k] - log_z : kNegInf;
  }
}

}  // namespace

std::size_t ModelDims::param_count() const noexcept {
  return vocab_size * embed_dim + hidden_dim * (hidden_dim + embed_dim + context_dim + 1) +
         vocab_size * (hidden_dim + 1);
}

void ModelDims::validate() const {
  if (vocab_size < 3 || embed_dim == 0 || hidden_dim == 0 || context_dim == 0 || max_len == 0) {
    throw ConfigError("model dims must be positive with vocab_size >= 3");
  }
  const auto v = static_cast<TokenId>(vocab_size);
  if (bos_id < 0 || bos_id >= v || eos_id < 0 || eos_id >= v || bos_id == eos_id) {
    throw ConfigError("model dims have invalid BOS/EOS ids");
  }
}

ParamLayout ParamLayout::of(const ModelDims& d) noexcept {
  ParamLayout l{};
  l.embedding = 0;
  l.w_hidden = l.embedding + d.vocab_size * d.embed_dim;
  l.w_input = l.w_hidden + d.hidden_dim * d.hidden_dim;
  l.w_context = l.w_input + d.hidden_dim * d.embed_dim;
  l.b_hidden = l.w_context + d.hidden_dim * d.context_dim;
  l.w_out = l.b_hidden + d.hidden_dim;
  l.b_out = l.w_out + d.vocab_size * d.hidden_dim;
  l.total = l.b_out + d.vocab_size;
  return l;
}

CaptionSpace caption_space(const ModelDims& dims) {
  std::vector<TokenId> content;
  for (std::size_t k = 0; k < dims.vocab_size; ++k) {
    const auto t = static_cast<TokenId>(k);
    if (t != dims.bos_id && t != dims.eos_id) content.push_back(t);
  }
  return CaptionSpace(std::move(content), dims.eos_id, dims.max_len);
}

ModelParams init_params(std::uint64_t seed, const ModelDims& dims) {
  dims.validate();
  ModelParams p{dims, std::vector<double>(dims.param_count())};
  CounterRng rng(seed, /*stream=*/0x1417);
  for (double& v : p.values) v = rng.uniform(-0.08, 0.08);
  return p;
}

ModelParams zero_params(const ModelDims& dims) {
  dims.validate();
  return ModelParams{dims, std::vector<double>(dims.param_count(), 0.0)};
}

Decoder::Decoder(const ModelParams& params, const Context& ctx)
    : params_(params), layout_(ParamLayout::of(params.dims)) {
  const auto& d = params.dims;
  if (params.values.size() != layout_.total) {
    throw ValidationError("model parameter vector has wrong length");
  }
  if (ctx.features.size() != d.context_dim) {
    throw ValidationError("context '" + ctx.id + "' feature dimension does not match model");
  }
  context_proj_.assign(d.hidden_dim, 0.0);
  const double* wc = params.values.data() + layout_.w_context;
  const double* bh = params.values.data() + layout_.b_hidden;
  for (std::size_t i = 0; i < d.hidden_dim; ++i) {
    double a = bh[i];
    for (std::size_t j = 0; j < d.context_dim; ++j) a += wc[i * d.context_dim + j] * ctx.features[j];
    context_proj_[i] = a;
  }
}

bool Decoder::allowed(std::size_t content_len, TokenId token) const noexcept {
  const auto& d = params_.dims;
  if (token == d.bos_id) return false;
  if (content_len == 0) return token != d.eos_id;
  if (content_len >= d.max_len) return token == d.eos_id;
  return true;
}

void Decoder::hidden_step(std::span<const double> prev, TokenId input, std::span<double> out) const {
  const auto& d = params_.dims;
  const double* wh = params_.values.data() + layout_.w_hidden;
  const double* we = params_.values.data() + layout_.w_input;
  const double* emb = params_.values.data() + layout_.embedding +
                      static_cast<std::size_t>(input) * d.embed_dim;
  for (std::size_t i = 0; i < d.hidden_dim; ++i) {
    double a = context_proj_[i];
    for (std::size_t j = 0; j < d.hidden_dim; ++j) a += wh[i * d.hidden_dim + j] * prev[j];
    for (std::size_t j = 0; j < d.embed_dim; ++j) a += we[i * d.embed_dim + j] * emb[j];
    out[i] = std::tanh(a);
  }
}

Decoder::State Decoder::start() const {
  State s;
  const std::vector<double> zero(params_.dims.hidden_dim, 0.0);
  s.hidden.resize(params_.dims.hidden_dim);
  hidden_step(zero, params_.dims.bos_id, s.hidden);
  return s;
}

Decoder::State Decoder::advance(const State& state, TokenId token) const {
  State s;
  s.hidden.resize(params_.dims.hidden_dim);
  s.content_len = state.content_len + 1;
  hidden_step(state.hidden, token, s.hidden);
  return s;
}

void Decoder::log_probs(const State& state, std::vector<double>& out) const {
  const auto& d = params_.dims;
  out.assign(d.vocab_size, 0.0);
  std::vector<double> logits(d.vocab_size);
  const double* wo = params_.values.data() + layout_.w_out;
  const double* bo = params_.values.data() + layout_.b_out;
  for (std::size_t k = 0; k < d.vocab_size; ++k) {
    double z = bo[k];
    for (std::size_t j = 0; j < d.hidden_dim; ++j) z += wo[k * d.hidden_dim + j] * state.hidden[j];
    logits[k] = z;
  }
  masked_log_softmax(logits.data(), d.vocab_size, *this, state.content_len, out.data());
}

void validate_caption_for(const ModelDims& dims, const Caption& caption) {
  if (caption.tokens.empty() || caption.tokens.back() != dims.eos_id) {
    throw ValidationError("caption must end with EOS");
  }
  if (caption.content_length() == 0) {
    throw ValidationError("caption has no content tokens; the model assigns it zero probability");
  }
  if (caption.content_length() > dims.max_len) throw ValidationError("caption longer than max_len");
  for (const TokenId t : caption.content()) {
    if (t < 0 || static_cast<std::size_t>(t) >= dims.vocab_size || t == dims.bos_id ||
        t == dims.eos_id) {
      throw ValidationError("caption contains a non-content token before EOS");
    }
  }
}

double log_prob(const ModelParams& params, const Context& ctx, const Caption& caption) {
  validate_caption_for(params.dims, caption);
  const Decoder dec(params, ctx);
  std::vector<double> lp;
  Decoder::State s = dec.start();
  double total = 0.0;
  for (std::size_t t = 0; t < caption.size(); ++t) {
    if (s.content_len == params.dims.max_len) break;  // forced EOS, log 1
    dec.log_probs(s, lp);
    const TokenId y = caption.tokens[t];
    total += lp[static_cast<std::size_t>(y)];
    if (y != params.dims.eos_id) s = dec.advance(s, y);
  }
  return total;
}

double accumulate_grad_log_prob(const ModelParams& params, const Context& ctx,
                                const Caption& caption, double scale, std::span<double> grad) {
  const auto& d = params.dims;
  const ParamLayout L = ParamLayout::of(d);
  const std::size_t V = d.vocab_size, H = d.hidden_dim, E = d.embed_dim, C = d.context_dim;
  const Decoder dec(params, ctx);

  // Scored steps: forced EOS contributes neither probability nor gradient.
  const std::size_t steps = std::min(caption.size(), d.max_len);
  std::vector<double> hidden((steps + 1) * H, 0.0);  // hidden[t] = h_t, h_0 = 0
  std::vector<double> logp(steps * V);
  std::vector<TokenId> inputs(steps);

  Decoder::State s = dec.start();
  std::vector<double> lp;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    inputs[t] = t == 0 ? d.bos_id : caption.tokens[t - 1];
    std::copy(s.hidden.begin(), s.hidden.end(), hidden.begin() + static_cast<std::ptrdiff_t>((t + 1) * H));
    dec.log_probs(s, lp);
    std::copy(lp.begin(), lp.end(), logp.begin() + static_cast<std::ptrdiff_t>(t * V));
    const TokenId y = caption.tokens[t];
    total += lp[static_cast<std::size_t>(y)];
    if (t + 1 < steps) s = dec.advance(s, y);
  }

  const double* P = params.values.data();
  std::vector<double> dh_next(H, 0.0), dh(H), da(H), dlogit(V);
  for (std::size_t t = steps; t-- > 0;) {
    const double* h = hidden.data() + (t + 1) * H;
    const double* h_prev = hidden.data() + t * H;
    const double* lpt = logp.data() + t * V;
    const auto y = static_cast<std::size_t>(caption.tokens[t]);
    for (std::size_t k = 0; k < V; ++k) {
      const double p = std::isinf(lpt[k]) ? 0.0 : std::exp(lpt[k]);
      dlogit[k] = scale * ((k == y ? 1.0 : 0.0) - p);
    }
    for (std::size_t k = 0; k < V; ++k) {
      if (dlogit[k] == 0.0) continue;
      double* gw = grad.data() + L.w_out + k * H;
      for (std::size_t j = 0; j < H; ++j) gw[j] += dlogit[k] * h[j];
      grad[L.b_out + k] += dlogit[k];
    }
    for (std::size_t j = 0; j < H; ++j) {
      double acc = dh_next[j];
      for (std::size_t k = 0; k < V; ++k) acc += P[L.w_out + k * H + j] * dlogit[k];
      dh[j] = acc;
      da[j] = acc * (1.0 - h[j] * h[j]);
    }
    const auto x = static_cast<std::size_t>(inputs[t]);
    const double* emb = P + L.embedding + x * E;
    for (std::size_t i = 0; i < H; ++i) {
      const double a = da[i];
      double* gwh = grad.data() + L.w_hidden + i * H;
      for (std::size_t j = 0; j < H; ++j) gwh[j] += a * h_prev[j];
      double* gwe = grad.data() + L.w_input + i * E;
      for (std::size_t j = 0; j < E; ++j) gwe[j] += a * emb[j];
      double* gwc = grad.data() + L.w_context + i * C;
      for (std::size_t j = 0; j < C; ++j) gwc[j] += a * ctx.features[j];
      grad[L.b_hidden + i] += a;
    }
    double* gemb = grad.data() + L.embedding + x * E;
    for (std::size_t j = 0; j < E; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < H; ++i) acc += P[L.w_input + i * E + j] * da[i];
      gemb[j] += acc;
    }
    for (std::size_t j = 0; j < H; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < H; ++i) acc += P[L.w_hidden + i * H + j] * da[i];
      dh_next[j] = acc;
    }
  }
  return total;
}

GradientVector grad_log_prob(const ModelParams& params, const Context& ctx, const Caption& caption) {
  validate_caption_for(params.dims, caption);
  GradientVector g(params.values.size(), 0.0);
  accumulate_grad_log_prob(params, ctx, caption, 1.0, g);
  return g;
}

Caption sample(const ModelParams& params, const Context& ctx, std::uint64_t seed) {
  const auto& d = params.dims;
  const Decoder dec(params, ctx);
  CounterRng rng(seed, /*stream=*/0x5a3);
  Caption c;
  Decoder::State s = dec.start();
  std::vector<double> lp;
  while (true) {
    if (s.content_len == d.max_len) {
      c.tokens.push_back(d.eos_id);
      break;
    }
    dec.log_probs(s, lp);
    const double u = rng.uniform();
    double cum = 0.0;
    TokenId pick = -1;
    for (std::size_t k = 0; k < d.vocab_size; ++k) {
      if (std::isinf(lp[k])) continue;
      pick = static_cast<TokenId>(k);
      cum += std::exp(lp[k]);
      if (u < cum) break;
    }
    c.tokens.push_back(pick);
    if (pick == d.eos_id) break;
    s = dec.advance(s, pick);
  }
  return c;
}

Caption beam_search(const ModelParams& params, const Context& ctx, std::size_t beam) {
  if (beam == 0) throw DomainError("beam_search needs beam >= 1");
  const auto& d = params.dims;
  const Decoder dec(params, ctx);

  struct Hyp {
    double score;
    std::vector<TokenId> tokens;
    Decoder::State state;
  };
  const auto better = [](double sa, const std::vector<TokenId>& ta, double sb,
                         const std::vector<TokenId>& tb) {
    if (sa != sb) return sa > sb;
    return ta < tb;
  };

  std::vector<Hyp> live;
  live.push_back(Hyp{0.0, {}, dec.start()});
  std::vector<Hyp> finished;
  std::vector<double> lp;

  while (!live.empty()) {
    struct Cand {
      double score;
      std::vector<TokenId> tokens;
      std::size_t parent;
    };
    std::vector<Cand> cands;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const Hyp& h = live[b];
      if (h.state.content_len == d.max_len) {
        auto t = h.tokens;
        t.push_back(d.eos_id);
        cands.push_back(Cand{h.score, std::move(t), b});
        continue;
      }
      dec.log_probs(h.state, lp);
      for (std::size_t k = 0; k < d.vocab_size; ++k) {
        if (std::isinf(lp[k])) continue;
        auto t = h.tokens;
        t.push_back(static_cast<TokenId>(k));
        cands.push_back(Cand{h.score + lp[k], std::move(t), b});
      }
    }
    const std::size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [&](const Cand& a, const Cand& b) {
                        return better(a.score, a.tokens, b.score, b.tokens);
                      });
    std::vector<Hyp> next;
    for (std::size_t i = 0; i < keep; ++i) {
      Cand& c = cands[i];
      if (c.tokens.back() == d.eos_id) {
        finished.push_back(Hyp{c.score, std::move(c.tokens), {}});
      } else {
        Decoder::State st = dec.advance(live[c.parent].state, c.tokens.back());
        next.push_back(Hyp{c.score, std::move(c.tokens), std::move(st)});
      }
    }
    live = std::move(next);
  }

  const Hyp* best = &finished.front();
  for (const Hyp& h : finished) {
    if (better(h.score, h.tokens, best->score, best->tokens)) best = &h;
  }
  return Caption{best->tokens};
}

Caption greedy_decode(const ModelParams& params, const Context& ctx) {
  const auto& d = params.dims;
  const Decoder dec(params, ctx);
  Caption c;
  Decoder::State s = dec.start();
  std::vector<double> lp;
  while (true) {
    if (s.content_len == d.max_len) {
      c.tokens.push_back(d.eos_id);
      break;
    }
    dec.log_probs(s, lp);
    const auto best = static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    c.tokens.push_back(best);
    if (best == d.eos_id) break;
    s = dec.advance(s, best);
  }
  return c;
}

}  // namespace ratingrl::model
