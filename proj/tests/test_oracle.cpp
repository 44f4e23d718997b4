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

#include "ratingrl/core/errors.hpp"
#include "ratingrl/oracle/oracle.hpp"
#include "ratingrl/trainers/gradients.hpp"
#include "test_util.hpp"

namespace ratingrl::oracle {
namespace {

using testing::random_context;
using testing::random_params;
using testing::random_ratings;
using testing::tiny_dims;

// Order-sensitive rating defined for every caption.
double toy_rating(const Context& ctx, const Caption& c) {
  double r = 0.1 * static_cast<double>(c.content_length());
  for (const TokenId t : c.content()) r += 0.05 * t * (ctx.features[0] + 1.0);
  if (!c.content().empty() && c.content()[0] == 3) r += 0.2;
  return std::min(1.0, r);
}

OracleWorld toy_world(std::size_t n, std::size_t dim) {
  OracleWorld w;
  for (std::size_t i = 0; i < n; ++i) w.contexts.push_back(random_context(50 + i, dim, "w" + std::to_string(i)));
  w.rating = toy_rating;
  return w;
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_captions(Vocabulary::synthetic(2), 2).size(), 6u);
  EXPECT_EQ(enumerate_captions(Vocabulary::synthetic(1), 1).size(), 1u);
  EXPECT_EQ(enumerate_captions(Vocabulary::synthetic(10), 4).size(), 11110u);
  EXPECT_EQ(enumerate_captions(tiny_dims()).size(), 39u);
}

TEST(Enumerate, SortedUniqueAndValid) {
  const Vocabulary v = Vocabulary::synthetic(3);
  const auto all = enumerate_captions(v, 3);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  for (const auto& c : all) EXPECT_TRUE(is_valid_caption(c, v, 3));
}

TEST(Enumerate, SizeGuard) {
  EXPECT_NO_THROW(check_enumerable(10, 6));  // exactly 1e6
  EXPECT_THROW(check_enumerable(10, 7), SizeError);
  EXPECT_THROW(enumerate_captions(Vocabulary::synthetic(40), 4), SizeError);
}

TEST(CaptionLogProbs, AlignedWithEnumeration) {
  const auto d = tiny_dims();
  const auto p = random_params(2, d, 2.0);
  const Context ctx = random_context(2, d.context_dim);
  const auto all = enumerate_captions(d);
  const auto lps = caption_log_probs(p, ctx);
  ASSERT_EQ(lps.size(), all.size());
  double total = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_NEAR(lps[i], model::log_prob(p, ctx, all[i]), 1e-12);
    total += std::exp(lps[i]);
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(ExactObjective, ConstantRatings) {
  const auto d = tiny_dims();
  const auto p = random_params(3, d, 2.0);
  OracleWorld w = toy_world(4, d.context_dim);
  w.rating = [](const Context&, const Caption&) { return 1.0; };
  EXPECT_NEAR(exact_objective(p, w), 1.0, 1e-12);
  w.rating = [](const Context&, const Caption&) { return 0.5; };
  EXPECT_NEAR(exact_objective(p, w), 0.5, 1e-12);
  for (const double g : exact_policy_gradient(p, w, 0.5)) EXPECT_LE(std::abs(g), 1e-10);
}

TEST(ExactObjective, MatchesSerialReference) {
  const auto d = tiny_dims(4, 3);
  const auto w = toy_world(5, d.context_dim);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto p = random_params(s, d, 1.5);
    EXPECT_NEAR(exact_objective(p, w), serial::exact_objective(p, w), 1e-13);
    const auto a = exact_policy_gradient(p, w, 0.2);
    const auto b = serial::exact_policy_gradient(p, w, 0.2);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-13);
  }
}

TEST(ExactObjective, MatchesMonteCarlo) {
  const auto d = tiny_dims();
  const auto p = random_params(4, d, 2.0);
  const auto w = toy_world(1, d.context_dim);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = w.rating(w.contexts[0], model::sample(p, w.contexts[0], derive_seed(5, i)));
    s += r;
    s2 += r * r;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, exact_objective(p, w), 3 * se);
}

TEST(ExactPolicyGradient, EqualsFiniteDifferencesOfObjective) {
  const auto d = tiny_dims();
  const auto w = toy_world(3, d.context_dim);
  const auto p = random_params(6, d, 1.2);
  const auto g = exact_policy_gradient(p, w, 0.0);
  const auto fd = finite_diff(
      [&](std::span<const double> x) {
        return exact_objective(model::ModelParams{d, std::vector<double>(x.begin(), x.end())}, w);
      },
      p.values, 1e-5);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_LE(std::abs(g[k] - fd[k]), 1e-5 * std::max(1.0, std::abs(fd[k]))) << k;
  }
}

TEST(ExactPolicyGradient, BaselineInvariantWithTotalRatings) {
  const auto d = tiny_dims();
  const auto w = toy_world(3, d.context_dim);
  const auto p = random_params(7, d, 2.0);
  const auto a = exact_policy_gradient(p, w, 0.0);
  const auto b = exact_policy_gradient(p, w, 0.37);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
}

TEST(ExactOffPolicy, EqualsOnPolicyWithSubstitutedRewards) {
  const auto d = tiny_dims();
  const auto ratings = random_ratings(3, d, 3, 7);  // partial ratings
  const auto p = random_params(8, d, 1.5);
  for (const double b : {0.0, 0.3, ratings.mean_rating()}) {
    const OracleWorld w{contexts_of(ratings), rating_lookup(ratings, b)};
    const auto on = exact_policy_gradient(p, w, b);
    for (const double eps : {0.05, 0.1, 0.3}) {
      const auto off = exact_offpolicy_expectation(p, ratings, eps, b);
      for (std::size_t k = 0; k < on.size(); ++k) EXPECT_NEAR(off[k], on[k], 1e-10);
    }
  }
}

TEST(ExactOffPolicy, EpsilonIndependent) {
  const auto d = tiny_dims();
  const auto ratings = random_ratings(4, d, 2, 39);
  const auto p = random_params(9, d, 1.5);
  const auto ref = exact_offpolicy_expectation(p, ratings, 0.5, 0.25);
  for (const double eps : {0.01, 0.2, 0.9, 0.999}) {
    const auto g = exact_offpolicy_expectation(p, ratings, eps, 0.25);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], ref[k], 1e-10);
  }
}

TEST(ExactOffPolicy, AllRatedEqualToBaselineIsZero) {
  const auto d = tiny_dims();
  RatingsDataset ratings;
  const Context ctx = random_context(1, d.context_dim);
  std::vector<std::uint8_t> votes(10, 0);
  for (int i = 0; i < 5; ++i) votes[static_cast<std::size_t>(i)] = 1;
  for (const auto& c : enumerate_captions(d)) ratings.add(ctx, RatedCaption::from_votes(c, votes));
  const auto g = exact_offpolicy_expectation(random_params(1, d, 2.0), ratings, 0.1, 0.5);
  for (const double v : g) EXPECT_EQ(v, 0.0);
}

TEST(RatingLookup, StoredOrFallback) {
  const auto d = tiny_dims();
  const auto ratings = random_ratings(5, d, 1, 2);
  const auto& e = ratings.entries()[0];
  const auto fn = rating_lookup(ratings, 0.77);
  EXPECT_EQ(fn(e.context, e.captions[1].caption), e.captions[1].rating);
  const auto all = enumerate_captions(d);
  for (const auto& c : all) {
    if (!e.rating_of(c)) {
      EXPECT_EQ(fn(e.context, c), 0.77);
      break;
    }
  }
  EXPECT_EQ(contexts_of(ratings).size(), 1u);
}

TEST(FiniteDiff, AnalyticFunctions) {
  const std::vector<double> x{0.3, -1.2, 2.5};
  const auto quad = finite_diff(
      [](std::span<const double> v) {
        double s = 0.0;
        for (const double e : v) s += e * e;
        return s;
      },
      x, 1e-5);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(quad[i], 2 * x[i], 1e-8);
  const auto lin = finite_diff(
      [](std::span<const double> v) { return 3 * v[0] - 2 * v[1] + 0.5 * v[2]; }, x, 1e-5);
  EXPECT_NEAR(lin[0], 3.0, 1e-10);
  EXPECT_NEAR(lin[1], -2.0, 1e-10);
  EXPECT_NEAR(lin[2], 0.5, 1e-10);
  EXPECT_THROW(finite_diff([](std::span<const double>) { return std::nan(""); }, x, 1e-5),
               NumericError);
  EXPECT_THROW(finite_diff([](std::span<const double>) { return 0.0; }, x, 0.0), DomainError);
}

}  // namespace
}  // namespace ratingrl::oracle
