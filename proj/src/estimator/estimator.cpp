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

#include "ratingrl/estimator/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"
#include "ratingrl/model/checkpoint.hpp"
#include "ratingrl/trainers/optim.hpp"

namespace ratingrl::estimator {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Forward {
  std::vector<double> hidden;
  double output;
};

Forward forward(const EstimatorParams& phi, std::span<const double> x) {
  const auto& d = phi.dims;
  const std::size_t n_in = d.input_dim(), H = d.hidden_dim;
  const double* w1 = phi.values.data();
  const double* b1 = w1 + H * n_in;
  const double* w2 = b1 + H;
  const double b2 = w2[H];
  Forward f{std::vector<double>(H), 0.0};
  double z = b2;
  for (std::size_t i = 0; i < H; ++i) {
    double a = b1[i];
    for (std::size_t j = 0; j < n_in; ++j) a += w1[i * n_in + j] * x[j];
    f.hidden[i] = std::tanh(a);
    z += w2[i] * f.hidden[i];
  }
  f.output = sigmoid(z);
  return f;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

double mse_only(const EstimatorParams& phi, std::span<const RatingFeatures> xs,
                std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double e = forward(phi, xs[n].values).output - ys[n];
    s += e * e;
  }
  return s / static_cast<double>(xs.size());
}

}  // namespace

void EstimatorDims::validate() const {
  if (context_dim == 0 || vocab_size < 3 || hidden_dim == 0 || max_len == 0) {
    throw ConfigError("estimator dims must be positive");
  }
}

EstimatorParams zero_estimator(const EstimatorDims& dims) {
  dims.validate();
  return EstimatorParams{dims, std::vector<double>(dims.param_count(), 0.0)};
}

RatingFeatures featurize(const EstimatorDims& d, const Context& ctx, const Caption& caption) {
  if (ctx.features.size() != d.context_dim) {
    throw ValidationError("featurize: context dimension mismatch");
  }
  RatingFeatures f;
  f.values.assign(d.input_dim(), 0.0);
  std::copy(ctx.features.begin(), ctx.features.end(), f.values.begin());
  const auto content = caption.content();
  if (!content.empty()) {
    const double w = 1.0 / static_cast<double>(content.size());
    for (const TokenId t : content) {
      if (t < 0 || static_cast<std::size_t>(t) >= d.vocab_size) {
        throw ValidationError("featurize: token outside vocabulary");
      }
      f.values[d.context_dim + static_cast<std::size_t>(t)] += w;
    }
  }
  f.values.back() = static_cast<double>(caption.size()) / static_cast<double>(d.max_len);
  return f;
}

double predict_from_features(const EstimatorParams& phi, std::span<const double> features) {
  return forward(phi, features).output;
}

double predict_rating(const EstimatorParams& phi, const Context& ctx, const Caption& caption) {
  return predict_from_features(phi, featurize(phi.dims, ctx, caption).values);
}

double mse_and_gradient(const EstimatorParams& phi, std::span<const RatingFeatures> xs,
                        std::span<const double> ys, std::span<double> grad) {
  const auto& d = phi.dims;
  const std::size_t n_in = d.input_dim(), H = d.hidden_dim;
  std::fill(grad.begin(), grad.end(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + H * n_in;
  double* g_w2 = g_b1 + H;
  double* g_b2 = g_w2 + H;
  const double* w2 = phi.values.data() + H * n_in + H;
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  double loss = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const auto& x = xs[n].values;
    const Forward f = forward(phi, x);
    const double err = f.output - ys[n];
    loss += err * err;
    const double dz = 2.0 * err * f.output * (1.0 - f.output) * inv_n;
    *g_b2 += dz;
    for (std::size_t i = 0; i < H; ++i) {
      g_w2[i] += dz * f.hidden[i];
      const double da = dz * w2[i] * (1.0 - f.hidden[i] * f.hidden[i]);
      g_b1[i] += da;
      for (std::size_t j = 0; j < n_in; ++j) g_w1[i * n_in + j] += da * x[j];
    }
  }
  return loss * inv_n;
}

bool is_validation_context(std::string_view context_id) noexcept {
  return fnv1a(context_id) % 10 == 0;
}

EstimatorTrainResult train_estimator(const RatingsDataset& ratings, const Vocabulary& vocab,
                                     std::size_t max_len, const EstimatorConfig& config,
                                     std::uint64_t seed) {
  if (ratings.empty()) throw DomainError("train_estimator: empty ratings dataset");
  EstimatorDims dims;
  dims.context_dim = ratings.entries().front().context.features.size();
  dims.vocab_size = vocab.size();
  dims.hidden_dim = config.hidden_dim;
  dims.max_len = max_len;
  dims.bos_id = vocab.bos_id();
  dims.eos_id = vocab.eos_id();
  dims.validate();

  std::vector<RatingFeatures> train_x, val_x;
  std::vector<double> train_y, val_y;
  for (const auto& entry : ratings.entries()) {
    const bool val = is_validation_context(entry.context.id);
    for (const auto& rc : entry.captions) {
      (val ? val_x : train_x).push_back(featurize(dims, entry.context, rc.caption));
      (val ? val_y : train_y).push_back(rc.rating);
    }
  }
  EstimatorTrainResult result;
  if (train_x.empty() || val_x.empty()) {
    result.degenerate_split = true;
    train_x.insert(train_x.end(), val_x.begin(), val_x.end());
    train_y.insert(train_y.end(), val_y.begin(), val_y.end());
    val_x = train_x;
    val_y = train_y;
  }
  result.n_train = train_x.size();
  result.n_val = result.degenerate_split ? 0 : val_x.size();

  EstimatorParams phi = zero_estimator(dims);
  CounterRng rng(seed, /*stream=*/0xe57);
  for (double& v : phi.values) v = rng.uniform(-config.init_scale, config.init_scale);

  train::AdamState adam;
  std::vector<double> grad(phi.values.size());
  EstimatorParams best = phi;
  double best_val = mse_only(phi, val_x, val_y);
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double loss = mse_and_gradient(phi, train_x, train_y, grad);
    result.train_mse_history.push_back(loss);
    for (double& g : grad) g = -g;  // descend on MSE
    train::adam_step(phi.values, grad, adam, config.lr);
    result.epochs_run = epoch;
    const double val = mse_only(phi, val_x, val_y);
    if (val < best_val) {
      best_val = val;
      best = phi;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.params = std::move(best);
  result.train_mse = mse_only(result.params, train_x, train_y);
  result.val_mse = best_val;
  if (val_x.size() >= 2) {
    std::vector<double> pred;
    for (const auto& x : val_x) pred.push_back(predict_from_features(result.params, x.values));
    result.val_spearman = spearman(pred, val_y);
  }
  return result;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw DomainError("spearman: length mismatch");
  if (pred.size() < 2) throw DomainError("spearman: needs at least two values");
  const auto rp = average_ranks(pred);
  const auto rt = average_ranks(truth);
  const double n = static_cast<double>(rp.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const double a = rp[i] - mean, b = rt[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

ProbeReport probe_estimator(const EstimatorParams& phi, const RatingsDataset& ratings,
                            const RatingFn& truth) {
  const auto& d = phi.dims;
  std::vector<TokenId> content;
  for (std::size_t k = 0; k < d.vocab_size; ++k) {
    const auto t = static_cast<TokenId>(k);
    if (t != d.bos_id && t != d.eos_id) content.push_back(t);
  }
  const auto repeat = [&](TokenId t, std::size_t k) {
    Caption c;
    c.tokens.assign(k, t);
    c.tokens.push_back(d.eos_id);
    return c;
  };
  using Builder = std::function<std::vector<Caption>(const Context&)>;
  std::vector<std::pair<std::string, Builder>> families;
  families.emplace_back("eos_only", [&](const Context&) { return std::vector<Caption>{Caption{{d.eos_id}}}; });
  families.emplace_back("single_token", [&](const Context&) {
    std::vector<Caption> out;
    for (const TokenId t : content) out.push_back(repeat(t, 1));
    return out;
  });
  families.emplace_back("repeated_token", [&](const Context&) {
    std::vector<Caption> out;
    for (const TokenId t : content) out.push_back(repeat(t, d.max_len));
    return out;
  });
  if (d.max_len >= 2) {
    // Adversarial pick: the stutter the estimator rates highest for this context.
    families.emplace_back("top_repeated_token", [&](const Context& ctx) {
      Caption best;
      double best_p = -1.0;
      for (const TokenId t : content) {
        for (std::size_t k = 2; k <= d.max_len; ++k) {
          Caption c = repeat(t, k);
          const double p = predict_rating(phi, ctx, c);
          if (p > best_p) {
            best_p = p;
            best = std::move(c);
          }
        }
      }
      return std::vector<Caption>{best};
    });
  }

  ProbeReport report;
  std::size_t above_total = 0;
  for (const auto& [name, build] : families) {
    ProbeFamily fam;
    fam.name = name;
    fam.has_true = static_cast<bool>(truth);
    double pred_sum = 0.0, true_sum = 0.0;
    std::size_t above = 0;
    for (const auto& entry : ratings.entries()) {
      for (const auto& probe : build(entry.context)) {
        const double p = predict_rating(phi, entry.context, probe);
        pred_sum += p;
        if (p > kProbeHighRating) ++above;
        if (truth) true_sum += truth(entry.context, probe);
        ++fam.count;
      }
    }
    if (fam.count > 0) {
      fam.mean_predicted = pred_sum / static_cast<double>(fam.count);
      fam.mean_true = true_sum / static_cast<double>(fam.count);
      fam.fraction_above = static_cast<double>(above) / static_cast<double>(fam.count);
    }
    report.total += fam.count;
    above_total += above;
    report.families.push_back(std::move(fam));
  }
  if (report.total > 0) {
    report.fraction_above = static_cast<double>(above_total) / static_cast<double>(report.total);
  }
  return report;
}

void save_estimator(const std::filesystem::path& path, const EstimatorParams& phi) {
  const auto& d = phi.dims;
  FlatCheckpoint c{CheckpointKind::kEstimator,
                   {static_cast<std::int64_t>(d.context_dim), static_cast<std::int64_t>(d.vocab_size),
                    static_cast<std::int64_t>(d.hidden_dim), static_cast<std::int64_t>(d.max_len),
                    d.bos_id, d.eos_id},
                   phi.values};
  write_flat_checkpoint(path, c);
}

EstimatorParams load_estimator(const std::filesystem::path& path) {
  FlatCheckpoint c = read_flat_checkpoint(path);
  if (c.kind != CheckpointKind::kEstimator || c.header.size() != 6) {
    throw ParseError(path.string(), 0, "not an estimator checkpoint");
  }
  for (const auto h : c.header) {
    if (h < 0) throw ParseError(path.string(), 0, "negative dims in checkpoint");
  }
  EstimatorDims d;
  d.context_dim = static_cast<std::size_t>(c.header[0]);
  d.vocab_size = static_cast<std::size_t>(c.header[1]);
  d.hidden_dim = static_cast<std::size_t>(c.header[2]);
  d.max_len = static_cast<std::size_t>(c.header[3]);
  d.bos_id = static_cast<TokenId>(c.header[4]);
  d.eos_id = static_cast<TokenId>(c.header[5]);
  d.validate();
  if (c.values.size() != d.param_count()) {
    throw ValidationError(path.string() + ": value count does not match dims");
  }
  return EstimatorParams{d, std::move(c.values)};
}

}  // namespace ratingrl::estimator
