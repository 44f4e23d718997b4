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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ratingrl {

using TokenId = std::int32_t;

// Number of binary votes collected per rated caption.
inline constexpr std::size_t kVotesPerCaption = 10;

class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id);

  // "<bos>", "<eos>", then content tokens "w0".."w{n-1}".
  static Vocabulary synthetic(std::size_t content_tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId bos_id() const noexcept { return bos_id_; }
  TokenId eos_id() const noexcept { return eos_id_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<TokenId> find(std::string_view token) const;

  bool contains(TokenId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  bool is_content(TokenId id) const noexcept {
    return contains(id) && id != bos_id_ && id != eos_id_;
  }
  // Content token ids in increasing order.
  const std::vector<TokenId>& content_ids() const noexcept { return content_ids_; }

  bool operator==(const Vocabulary& other) const = default;

 private:
  std::vector<std::string> tokens_;
  TokenId bos_id_;
  TokenId eos_id_;
  std::vector<TokenId> content_ids_;
};

// Stand-in for an image: a feature vector plus, for synthetic data, the set
// of tokens a perfect caption mentions.
struct Context {
  std::string id;
  std::vector<double> features;
  std::vector<TokenId> target_tokens;  // sorted; empty for external data

  bool operator==(const Context&) const = default;
};

// EOS-terminated token sequence. Ordering is lexicographic on token ids.
struct Caption {
  std::vector<TokenId> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  // Tokens before the terminating EOS.
  std::span<const TokenId> content() const noexcept {
    return tokens.empty() ? std::span<const TokenId>{}
                          : std::span<const TokenId>(tokens).first(tokens.size() - 1);
  }
  std::size_t content_length() const noexcept { return tokens.empty() ? 0 : tokens.size() - 1; }

  auto operator<=>(const Caption&) const = default;
  bool operator==(const Caption&) const = default;
};

// Throws ValidationError unless the caption ends in its only EOS, never uses
// BOS, uses only vocabulary ids, and holds at most max_content content tokens.
void validate_caption(const Caption& caption, const Vocabulary& vocab, std::size_t max_content);
bool is_valid_caption(const Caption& caption, const Vocabulary& vocab,
                      std::size_t max_content) noexcept;

// Nearest value in {0, 1/8, ..., 1}; exact midpoints go to the higher bin.
double quantize_rating(double mean_vote);
bool is_rating_bin(double rating) noexcept;

struct RatedCaption {
  Caption caption;
  std::vector<std::uint8_t> votes;  // kVotesPerCaption binary votes
  double rating = 0.0;              // quantize_rating(mean(votes))

  static RatedCaption from_votes(Caption caption, std::vector<std::uint8_t> votes);
  bool operator==(const RatedCaption&) const = default;
};

struct RatedContext {
  Context context;
  std::vector<RatedCaption> captions;

  // Stored rating of `caption`, if this context rated it.
  std::optional<double> rating_of(const Caption& caption) const noexcept;
  bool operator==(const RatedContext&) const = default;
};

// D_CR: rated captions grouped by context, in insertion order. The empirical
// p_D(c|I) is uniform over a context's rated captions, p_D(I) uniform over
// contexts.
class RatingsDataset {
 public:
  // Appends a rated caption; creates the context entry on first use.
  // Throws ValidationError on a duplicate caption or on a context whose
  // features disagree with an earlier record of the same id.
  void add(const Context& context, RatedCaption rated);

  const std::vector<RatedContext>& entries() const noexcept { return entries_; }
  std::size_t num_contexts() const noexcept { return entries_.size(); }
  std::size_t num_captions() const noexcept;
  bool empty() const noexcept { return entries_.empty(); }

  // Index into entries(), or nullopt when the id is absent.
  std::optional<std::size_t> index_of(std::string_view context_id) const;
  const RatedContext* find(std::string_view context_id) const;

  double mean_rating() const;

  bool operator==(const RatingsDataset& other) const { return entries_ == other.entries_; }

 private:
  std::vector<RatedContext> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct CaptionPair {
  Context context;
  Caption caption;

  bool operator==(const CaptionPair&) const = default;
};

// D_IC: ground-truth (context, caption) pairs.
struct CaptionDataset {
  std::vector<CaptionPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool operator==(const CaptionDataset&) const = default;
};

// C_L: every caption with 1..max_len content tokens, EOS-terminated. Indexes
// the space densely so it can be sampled uniformly without materializing it.
class CaptionSpace {
 public:
  CaptionSpace(const Vocabulary& vocab, std::size_t max_len);
  CaptionSpace(std::vector<TokenId> content_ids, TokenId eos_id, std::size_t max_len);

  std::uint64_t size() const noexcept { return size_; }
  std::size_t max_len() const noexcept { return max_len_; }
  // Bijection [0, size()) -> C_L, shorter captions first.
  Caption at(std::uint64_t index) const;
  const std::vector<TokenId>& content_ids() const noexcept { return content_; }
  TokenId eos_id() const noexcept { return eos_; }

 private:
  std::vector<TokenId> content_;
  TokenId eos_;
  std::size_t max_len_;
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> length_offsets_;  // first index of each content length
};

}  // namespace ratingrl
