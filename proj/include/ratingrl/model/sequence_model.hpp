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
#include <span>
#include <vector>

#include "ratingrl/core/types.hpp"

namespace ratingrl::model {

// Shape of the conditional caption model p_theta(c|I):
//   h_0 = 0, y_0 = BOS
//   h_t = tanh(W_h h_{t-1} + W_e emb(y_{t-1}) + W_c features + b_h)
//   p(y_t | y_<t, I) = softmax over allowed tokens of (W_o h_t + b_o)
// Allowed tokens depend only on how many content tokens were emitted:
//   none yet        -> content tokens (no empty captions)
//   1..max_len-1    -> content tokens and EOS
//   max_len         -> EOS only (forced, probability 1)
// BOS is never emitted. The support is therefore exactly C_L.
struct ModelDims {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t context_dim = 0;
  std::size_t max_len = 0;  // maximum content tokens
  TokenId bos_id = 0;
  TokenId eos_id = 1;

  std::size_t param_count() const noexcept;
  void validate() const;
  bool operator==(const ModelDims&) const = default;
};

// Offsets of each parameter block inside the flat vector, in storage order.
// Matrices are row-major.
struct ParamLayout {
  std::size_t embedding;  // V x d_e
  std::size_t w_hidden;   // d_h x d_h
  std::size_t w_input;    // d_h x d_e
  std::size_t w_context;  // d_h x d_ctx
  std::size_t b_hidden;   // d_h
  std::size_t w_out;      // V x d_h
  std::size_t b_out;      // V
  std::size_t total;

  static ParamLayout of(const ModelDims& dims) noexcept;
};

struct ModelParams {
  ModelDims dims;
  std::vector<double> values;

  bool operator==(const ModelParams&) const = default;
};

// d/dtheta_i in the same layout as ModelParams::values.
using GradientVector = std::vector<double>;

// C_L for this model: the exact support of p_theta(.|I).
CaptionSpace caption_space(const ModelDims& dims);

// Entries i.i.d. uniform on [-0.08, 0.08] from the counter-based generator.
ModelParams init_params(std::uint64_t seed, const ModelDims& dims);
ModelParams zero_params(const ModelDims& dims);

// Incremental decoding state for one (params, context) pair. The context
// projection W_c f + b_h is computed once.
class Decoder {
 public:
  struct State {
    std::vector<double> hidden;  // h_t after consuming the previous token
    std::size_t content_len = 0;
  };

  Decoder(const ModelParams& params, const Context& ctx);

  // State after consuming BOS.
  State start() const;
  // Consumes a content token.
  State advance(const State& state, TokenId token) const;
  // Next-token log-probabilities over the whole vocabulary; masked tokens are
  // -infinity.
  void log_probs(const State& state, std::vector<double>& out) const;
  bool allowed(std::size_t content_len, TokenId token) const noexcept;

  const ModelDims& dims() const noexcept { return params_.dims; }

 private:
  void hidden_step(std::span<const double> prev, TokenId input, std::span<double> out) const;

  const ModelParams& params_;
  ParamLayout layout_;
  std::vector<double> context_proj_;
};

void validate_caption_for(const ModelDims& dims, const Caption& caption);

// Sum over steps of log p(y_t | y_<t, I), including the EOS step. Always <= 0.
double log_prob(const ModelParams& params, const Context& ctx, const Caption& caption);

// Exact reverse-mode gradient of log_prob.
GradientVector grad_log_prob(const ModelParams& params, const Context& ctx, const Caption& caption);

// grad += scale * d log_prob / d theta; returns log_prob. Does not validate.
double accumulate_grad_log_prob(const ModelParams& params, const Context& ctx,
                                const Caption& caption, double scale, std::span<double> grad);

// Ancestral sample; EOS is forced after max_len content tokens.
Caption sample(const ModelParams& params, const Context& ctx, std::uint64_t seed);

// Length-unnormalized beam search. Each step ranks every extension of every
// live hypothesis, keeps the best `beam`, and retires the EOS-terminated ones.
// Ties prefer the lexicographically smaller token sequence.
Caption beam_search(const ModelParams& params, const Context& ctx, std::size_t beam);

Caption greedy_decode(const ModelParams& params, const Context& ctx);

}  // namespace ratingrl::model
