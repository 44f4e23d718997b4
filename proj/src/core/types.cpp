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

#include "ratingrl/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "ratingrl/core/errors.hpp"

namespace ratingrl {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id)
    : tokens_(std::move(tokens)), bos_id_(bos_id), eos_id_(eos_id) {
  if (tokens_.size() < 3) {
    throw ValidationError("vocabulary needs BOS, EOS and at least one content token");
  }
  if (!contains(bos_id_) || !contains(eos_id_)) {
    throw ValidationError("vocabulary BOS/EOS id out of range");
  }
  if (bos_id_ == eos_id_) throw ValidationError("vocabulary BOS and EOS ids coincide");
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens_) {
    if (!seen.insert(t).second) throw ValidationError("duplicate vocabulary token '" + t + "'");
  }
  for (TokenId id = 0; id < static_cast<TokenId>(tokens_.size()); ++id) {
    if (id != bos_id_ && id != eos_id_) content_ids_.push_back(id);
  }
}

Vocabulary Vocabulary::synthetic(std::size_t content_tokens) {
  std::vector<std::string> tokens{"<bos>", "<eos>"};
  for (std::size_t i = 0; i < content_tokens; ++i) tokens.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(tokens), 0, 1);
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) return std::nullopt;
  return static_cast<TokenId>(it - tokens_.begin());
}

namespace {

const char* caption_violation(const Caption& caption, const Vocabulary& vocab,
                              std::size_t max_content) noexcept {
  if (caption.tokens.empty()) return "empty caption";
  if (caption.tokens.back() != vocab.eos_id()) return "caption does not end with EOS";
  if (caption.content_length() > max_content) return "caption longer than max_len";
  for (const TokenId t : caption.content()) {
    if (!vocab.contains(t)) return "token id outside vocabulary";
    if (t == vocab.eos_id()) return "EOS before end of caption";
    if (t == vocab.bos_id()) return "BOS inside caption";
  }
  return nullptr;
}

}  // namespace

void validate_caption(const Caption& caption, const Vocabulary& vocab, std::size_t max_content) {
  if (const char* why = caption_violation(caption, vocab, max_content)) {
    throw ValidationError(why);
  }
}

bool is_valid_caption(const Caption& caption, const Vocabulary& vocab,
                      std::size_t max_content) noexcept {
  return caption_violation(caption, vocab, max_content) == nullptr;
}

double quantize_rating(double mean_vote) {
  if (!(mean_vote >= 0.0 && mean_vote <= 1.0)) {
    throw DomainError("quantize_rating: mean vote outside [0, 1]");
  }
  return std::floor(mean_vote * 8.0 + 0.5) / 8.0;
}

bool is_rating_bin(double rating) noexcept {
  const double scaled = rating * 8.0;
  return rating >= 0.0 && rating <= 1.0 && scaled == std::floor(scaled);
}

RatedCaption RatedCaption::from_votes(Caption caption, std::vector<std::uint8_t> votes) {
  if (votes.size() != kVotesPerCaption) {
    throw ValidationError("expected " + std::to_string(kVotesPerCaption) + " votes, got " +
                          std::to_string(votes.size()));
  }
  std::size_t yes = 0;
  for (const auto v : votes) {
    if (v > 1) throw ValidationError("votes must be 0 or 1");
    yes += v;
  }
  RatedCaption out;
  out.rating = quantize_rating(static_cast<double>(yes) / static_cast<double>(votes.size()));
  out.caption = std::move(caption);
  out.votes = std::move(votes);
  return out;
}

std::optional<double> RatedContext::rating_of(const Caption& caption) const noexcept {
  for (const auto& rc : captions) {
    if (rc.caption == caption) return rc.rating;
  }
  return std::nullopt;
}

void RatingsDataset::add(const Context& context, RatedCaption rated) {
  auto it = index_.find(context.id);
  if (it == index_.end()) {
    if (!entries_.empty() && entries_.front().context.features.size() != context.features.size()) {
      throw ValidationError("context '" + context.id + "' feature dimension differs from dataset");
    }
    it = index_.emplace(context.id, entries_.size()).first;
    entries_.push_back(RatedContext{context, {}});
  }
  RatedContext& entry = entries_[it->second];
  if (entry.context.features != context.features) {
    throw ValidationError("context '" + context.id + "' has inconsistent features");
  }
  if (entry.rating_of(rated.caption)) {
    throw ValidationError("duplicate caption for context '" + context.id + "'");
  }
  entry.captions.push_back(std::move(rated));
}

std::size_t RatingsDataset::num_captions() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.captions.size();
  return n;
}

std::optional<std::size_t> RatingsDataset::index_of(std::string_view context_id) const {
  const auto it = index_.find(std::string(context_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const RatedContext* RatingsDataset::find(std::string_view context_id) const {
  const auto idx = index_of(context_id);
  return idx ? &entries_[*idx] : nullptr;
}

double RatingsDataset::mean_rating() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : entries_) {
    for (const auto& rc : e.captions) {
      sum += rc.rating;
      ++n;
    }
  }
  if (n == 0) throw DomainError("mean_rating of an empty ratings dataset");
  return sum / static_cast<double>(n);
}

CaptionSpace::CaptionSpace(const Vocabulary& vocab, std::size_t max_len)
    : CaptionSpace(vocab.content_ids(), vocab.eos_id(), max_len) {}

CaptionSpace::CaptionSpace(std::vector<TokenId> content_ids, TokenId eos_id, std::size_t max_len)
    : content_(std::move(content_ids)), eos_(eos_id), max_len_(max_len) {
  if (max_len_ == 0) throw DomainError("caption space needs max_len >= 1");
  if (content_.empty()) throw DomainError("caption space needs at least one content token");
  const std::uint64_t k = content_.size();
  std::uint64_t count = 1;
  length_offsets_.push_back(0);
  for (std::size_t len = 1; len <= max_len_; ++len) {
    if (count > std::numeric_limits<std::uint64_t>::max() / k) {
      throw SizeError("caption space size overflows 64 bits");
    }
    count *= k;
    size_ += count;
    length_offsets_.push_back(size_);
  }
}

Caption CaptionSpace::at(std::uint64_t index) const {
  if (index >= size_) throw DomainError("caption space index out of range");
  std::size_t len = 1;
  while (index >= length_offsets_[len]) ++len;
  std::uint64_t rest = index - length_offsets_[len - 1];
  const std::uint64_t k = content_.size();
  Caption c;
  c.tokens.assign(len + 1, eos_);
  for (std::size_t pos = len; pos-- > 0;) {
    c.tokens[pos] = content_[rest % k];
    rest /= k;
  }
  return c;
}

}  // namespace ratingrl
