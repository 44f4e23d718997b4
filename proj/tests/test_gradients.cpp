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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "ratingrl/core/errors.hpp"
#include "ratingrl/oracle/oracle.hpp"
#include "ratingrl/trainers/gradients.hpp"
#include "ratingrl/trainers/optim.hpp"
#include "test_util.hpp"

namespace ratingrl::train {
namespace {

using testing::cap;
using testing::random_params;
using testing::random_ratings;
using testing::tiny_dims;

TEST(MleGradient, MeanOfPerPairGradients) {
  const auto dims = tiny_dims();
  const auto p = random_params(1, dims);
  std::vector<CaptionPair> batch;
  for (int i = 0; i < 5; ++i) {
    batch.push_back({testing::random_context(static_cast<std::uint64_t>(i), dims.context_dim),
                     cap({static_cast<TokenId>(2 + i % 3), 1})});
  }
  const auto est = mle_gradient(p, batch);
  std::vector<double> ref(p.values.size(), 0.0);
  double obj = 0.0;
  for (const auto& pair : batch) {
    const auto g = model::grad_log_prob(p, pair.context, pair.caption);
    for (std::size_t k = 0; k < g.size(); ++k) ref[k] += g[k] / 5.0;
    obj += model::log_prob(p, pair.context, pair.caption) / 5.0;
  }
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(est.gradient[k], ref[k], 1e-14);
  EXPECT_NEAR(est.objective, obj, 1e-14);
  EXPECT_THROW(mle_gradient(p, {}), DomainError);
}

TEST(MergePositive, StrictThresholdAndMonotone) {
  const auto ratings = random_ratings(3, tiny_dims(), 6, 8);
  CaptionDataset dic;
  dic.pairs.push_back({ratings.entries()[0].context, cap({2, 1})});
  std::size_t above_half = 0;
  for (const auto& e : ratings.entries()) {
    for (const auto& rc : e.captions) above_half += rc.rating > 0.5 ? 1 : 0;
  }
  const auto m5 = merge_positive(dic, ratings, 0.5);
  EXPECT_EQ(m5.size(), 1 + above_half);
  EXPECT_EQ(m5.pairs.front(), dic.pairs.front());
  double prev = merge_positive(dic, ratings, 0.0).size();
  for (int k = 1; k <= 8; ++k) {
    const double size = merge_positive(dic, ratings, k / 8.0).size();
    EXPECT_LE(size, prev);
    prev = size;
  }
  // Rating exactly 1 never exceeds t = 1.
  EXPECT_EQ(merge_positive(dic, ratings, 1.0).size(), 1u);
  EXPECT_THROW(merge_positive(dic, ratings, 1.5), DomainError);
}

TEST(MergePositive, HigherThresholdIsSubset) {
  const auto ratings = random_ratings(5, tiny_dims(), 4, 10);
  const CaptionDataset empty;
  const auto lo = merge_positive(empty, ratings, 0.25).pairs;
  const auto hi = merge_positive(empty, ratings, 0.625).pairs;
  for (const auto& p : hi) EXPECT_NE(std::find(lo.begin(), lo.end(), p), lo.end());
}

TEST(QProb, SumsToOneOverCaptionSpace) {
  const auto dims = tiny_dims();
  const auto ratings = random_ratings(2, dims, 3, 5);
  const CaptionSpace space = model::caption_space(dims);
  for (const double eps : {0.05, 0.1, 0.5}) {
    for (const auto& e : ratings.entries()) {
      double total = 0.0;
      for (std::uint64_t i = 0; i < space.size(); ++i) total += q_prob(e, space.at(i), eps, space.size());
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(QProb, RatedAndUnratedValues) {
  const auto dims = tiny_dims();
  const auto ratings = random_ratings(2, dims, 1, 4);
  const auto& e = ratings.entries()[0];
  const Caption rated = e.captions[0].caption;
  EXPECT_DOUBLE_EQ(q_prob(e, rated, 0.1, 39), 0.9 / 4 + 0.1 / 39);
  Caption unrated;
  const CaptionSpace space = model::caption_space(dims);
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    if (!e.rating_of(space.at(i))) {
      unrated = space.at(i);
      break;
    }
  }
  EXPECT_DOUBLE_EQ(q_prob(e, unrated, 0.1, 39), 0.1 / 39);
  EXPECT_THROW(q_prob(e, rated, 1.5, 39), DomainError);
  EXPECT_THROW(q_prob(ratings, Context{"absent", {}, {}}, rated, 0.1, 39), DomainError);
}

TEST(QSample, FrequenciesMatchQ) {
  const auto dims = tiny_dims();
  const auto ratings = random_ratings(4, dims, 1, 3);
  const auto& e = ratings.entries()[0];
  const CaptionSpace space = model::caption_space(dims);
  const double eps = 0.3;
  std::map<Caption, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[q_sample(e, space, eps, derive_seed(8, i))];
  for (const auto& [c, count] : counts) {
    const double q = q_prob(e, c, eps, space.size());
    EXPECT_NEAR(count, n * q, 4 * std::sqrt(n * q * (1 - q)) + 1);
  }
  for (const auto& rc : e.captions) {
    const double q = q_prob(e, rc.caption, eps, space.size());
    EXPECT_NEAR(counts[rc.caption], n * q, 4 * std::sqrt(n * q * (1 - q)));
  }
}

TEST(Baseline, DatasetMeanAndMovingAverage) {
  const auto ratings = random_ratings(1, tiny_dims(), 3, 4);
  const auto dm = BaselineTracker::dataset_mean(ratings);
  EXPECT_DOUBLE_EQ(dm.value(), ratings.mean_rating());
  EXPECT_TRUE(dm.initialized());
  auto fixed = BaselineTracker::fixed(0.37);
  fixed.update(0.9);
  EXPECT_DOUBLE_EQ(fixed.value(), 0.37);

  auto ma = BaselineTracker::moving_average(0.9);
  EXPECT_FALSE(ma.initialized());
  ma.update(0.5);
  EXPECT_DOUBLE_EQ(ma.value(), 0.5);
  ma.update(1.0);
  EXPECT_DOUBLE_EQ(ma.value(), 0.9 * 0.5 + 0.1 * 1.0);
}

TEST(OffPolicyTerm, UnratedCaptionsCancelExactly) {
  const auto dims = tiny_dims();
  const auto p = random_params(6, dims, 2.0);
  const auto ratings = random_ratings(6, dims, 2, 3);
  const CaptionSpace space = model::caption_space(dims);
  std::vector<OffPolicySample> samples;
  for (std::size_t e = 0; e < ratings.num_contexts(); ++e) {
    for (std::uint64_t i = 0; i < space.size(); ++i) {
      if (!ratings.entries()[e].rating_of(space.at(i))) samples.push_back({e, space.at(i)});
    }
  }
  ASSERT_FALSE(samples.empty());
  const auto est = offpg_gradient_from_samples(p, ratings, samples, 0.1, 0.42, space.size(), 1e6);
  for (const double g : est.gradient) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(est.rated, 0u);
  EXPECT_NEAR(est.objective, 0.42, 1e-12);
}

TEST(OffPolicyTerm, RewardEqualToBaselineCancelsRegardlessOfEta) {
  const auto dims = tiny_dims();
  const auto p = random_params(7, dims, 3.0);
  const auto ratings = random_ratings(7, dims, 1, 2);
  const auto& rc = ratings.entries()[0].captions[0];
  std::vector<double> acc(p.values.size(), 0.0);
  const auto w = add_offpolicy_term(p, ratings, {0, rc.caption}, 0.1, rc.rating, 39, 1e6, acc);
  EXPECT_TRUE(w.rated);
  for (const double g : acc) EXPECT_EQ(g, 0.0);
}

TEST(OffPolicyTerm, WeightMatchesDefinitionAndClips) {
  const auto dims = tiny_dims();
  const auto p = random_params(8, dims, 2.0);
  const auto ratings = random_ratings(8, dims, 1, 3);
  const auto& e = ratings.entries()[0];
  const auto& rc = e.captions[0];
  const double b = rc.rating == 0.5 ? 0.25 : 0.5;
  const double eta = std::exp(model::log_prob(p, e.context, rc.caption)) / q_prob(e, rc.caption, 0.1, 39);
  std::vector<double> acc(p.values.size(), 0.0);
  const auto w = add_offpolicy_term(p, ratings, {0, rc.caption}, 0.1, b, 39, 1e6, acc);
  EXPECT_NEAR(w.eta, eta, 1e-12 * eta);
  EXPECT_FALSE(w.clipped);
  const auto g = model::grad_log_prob(p, e.context, rc.caption);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(acc[k], w.eta * (rc.rating - b) * g[k], 1e-12);

  const double clip = 1.0 + eta / 2.0;
  std::vector<double> acc2(p.values.size(), 0.0);
  const auto w2 = add_offpolicy_term(p, ratings, {0, rc.caption}, 0.1, b, 39, clip, acc2);
  EXPECT_TRUE(w2.clipped || eta <= clip);
  if (w2.clipped) {
    EXPECT_DOUBLE_EQ(w2.eta, clip);
  }
}

TEST(OffPolicy, MonteCarloMeanMatchesExactExpectation) {
  const auto dims = tiny_dims();
  const auto p = random_params(10, dims, 1.0);
  const auto ratings = random_ratings(10, dims, 3, 6);
  const CaptionSpace space = model::caption_space(dims);
  const double eps = 0.2, b = ratings.mean_rating();
  const auto exact = oracle::exact_offpolicy_expectation(p, ratings, eps, b);
  const std::size_t n = 20000;
  const auto samples = draw_offpolicy_samples(ratings, space, eps, n, 77);
  std::vector<double> mean(p.values.size(), 0.0), sq(p.values.size(), 0.0);
  for (const auto& s : samples) {
    std::vector<double> acc(p.values.size(), 0.0);
    add_offpolicy_term(p, ratings, s, eps, b, space.size(), 1e12, acc);
    for (std::size_t k = 0; k < acc.size(); ++k) {
      mean[k] += acc[k] / n;
      sq[k] += acc[k] * acc[k] / n;
    }
  }
  const auto batch = offpg_gradient_from_samples(p, ratings, samples, eps, b, space.size(), 1e12);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double se = std::sqrt(std::max(sq[k] - mean[k] * mean[k], 0.0) / n);
    EXPECT_LE(std::abs(mean[k] - exact[k]), 5 * se + 1e-12) << k;
    EXPECT_NEAR(batch.gradient[k], mean[k], 1e-12);
  }
}

TEST(OffPolicy, SamplerDrawsContextsUniformly) {
  const auto dims = tiny_dims();
  const auto ratings = random_ratings(11, dims, 4, 2);
  const auto samples = draw_offpolicy_samples(ratings, model::caption_space(dims), 0.1, 40000, 3);
  std::vector<int> counts(4, 0);
  for (const auto& s : samples) ++counts[s.entry];
  for (const int c : counts) EXPECT_NEAR(c, 10000, 4 * std::sqrt(40000 * 0.25 * 0.75));
}

TEST(OffPolicy, RequiresDatasetMeanBaseline) {
  const auto dims = tiny_dims();
  const auto ratings = random_ratings(1, dims, 2, 2);
  auto ma = BaselineTracker::moving_average(0.9);
  EXPECT_THROW(offpg_gradient(random_params(1, dims), ratings, TrainConfig{}, ma, 1), ConfigError);
}

TEST(OnPolicy, MatchesPerSampleReference) {
  const auto dims = tiny_dims();
  const auto p = random_params(12, dims, 1.5);
  estimator::EstimatorParams phi = estimator::zero_estimator(
      estimator::EstimatorDims{dims.context_dim, dims.vocab_size, 3, dims.max_len, 0, 1});
  CounterRng rng(5);
  for (double& v : phi.values) v = rng.uniform(-1.0, 1.0);
  std::vector<Context> contexts;
  for (int i = 0; i < 6; ++i) contexts.push_back(testing::random_context(static_cast<std::uint64_t>(i), dims.context_dim));

  auto baseline = BaselineTracker::moving_average(0.5);
  const auto est = onpg_gradient(p, phi, contexts, baseline, 99);
  double mean = 0.0;
  std::vector<Caption> caps;
  std::vector<double> r;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    caps.push_back(model::sample(p, contexts[i], derive_seed(99, i)));
    r.push_back(estimator::predict_rating(phi, contexts[i], caps.back()));
    mean += r.back() / 6.0;
  }
  // First call: b starts at the batch mean, then one update toward it.
  std::vector<double> ref(p.values.size(), 0.0);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto g = model::grad_log_prob(p, contexts[i], caps[i]);
    for (std::size_t k = 0; k < g.size(); ++k) ref[k] += (r[i] - mean) * g[k] / 6.0;
  }
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(est.gradient[k], ref[k], 1e-13);
  EXPECT_NEAR(est.objective, mean, 1e-15);
  EXPECT_NEAR(baseline.value(), mean, 1e-15);
}

TEST(Curriculum, WeightedSum) {
  const std::vector<double> pg{1, 2, 3}, mle{0.5, -1, 0};
  EXPECT_EQ(curriculum_gradient(pg, mle, 10.0), (GradientVector{10.5, 19, 30}));
  EXPECT_EQ(curriculum_gradient(pg, mle, 0.0), mle);
  EXPECT_THROW(curriculum_gradient(pg, std::vector<double>{1}, 1.0), DomainError);
}

TEST(Adam, FirstStepMovesByLr) {
  std::vector<double> x{1.0, -2.0, 0.0};
  AdamState st;
  adam_step(x, std::vector<double>{0.3, -4.0, 0.0}, st, 0.01);
  EXPECT_NEAR(x[0], 1.01, 1e-9);
  EXPECT_NEAR(x[1], -2.01, 1e-9);
  EXPECT_EQ(x[2], 0.0);
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, AscendsConcaveObjective) {
  // f(x) = -(x - 3)^2; gradient 2 (3 - x).
  std::vector<double> x{0.0};
  AdamState st;
  for (int i = 0; i < 3000; ++i) adam_step(x, std::vector<double>{2 * (3 - x[0])}, st, 0.05);
  EXPECT_NEAR(x[0], 3.0, 1e-3);
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  std::vector<double> x{1.0};
  AdamState st;
  adam_step(x, std::vector<double>{1.0}, st, 0.1);
  const auto saved_x = x;
  const auto saved = st;
  EXPECT_THROW(adam_step(x, std::vector<double>{std::nan("")}, st, 0.1), NumericError);
  EXPECT_EQ(x, saved_x);
  EXPECT_EQ(st.m, saved.m);
  EXPECT_EQ(st.step, saved.step);
}

TEST(LrSchedule, WarmupThenStepDecay) {
  TrainConfig c;
  c.lr = 1.0;
  c.lr_decay = 0.5;
  c.steps_per_epoch = 10;
  c.decay_every_epochs = 2;
  c.warmup_epochs = 1;
  EXPECT_DOUBLE_EQ(lr_schedule(0, c), 0.0);
  EXPECT_DOUBLE_EQ(lr_schedule(5, c), 0.5);
  EXPECT_DOUBLE_EQ(lr_schedule(10, c), 1.0);
  EXPECT_DOUBLE_EQ(lr_schedule(29, c), 1.0);
  EXPECT_DOUBLE_EQ(lr_schedule(30, c), 0.5);
  EXPECT_DOUBLE_EQ(lr_schedule(50, c), 0.25);
  c.warmup_epochs = 0;
  EXPECT_DOUBLE_EQ(lr_schedule(0, c), 1.0);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate(true));
  c.epsilon = 0.6;
  EXPECT_THROW(c.validate(true), ConfigError);
  c = TrainConfig{};
  c.alpha = -1;
  EXPECT_THROW(c.validate(false), ConfigError);
  c = TrainConfig{};
  c.batch_size = 31;
  EXPECT_NO_THROW(c.validate(false));
  EXPECT_THROW(c.validate(true), ConfigError);
  c = TrainConfig{};
  c.t_threshold = 1.2;
  EXPECT_THROW(c.validate(false), ConfigError);
  EXPECT_THROW(parse_train_mode("ppo"), ConfigError);
  EXPECT_EQ(parse_train_mode("offpg"), TrainMode::kOffPolicy);
  EXPECT_EQ(parse_baseline_mode("moving_average"), BaselineMode::kMovingAverage);
}

}  // namespace
}  // namespace ratingrl::train
