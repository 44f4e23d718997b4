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

#include "ratingrl/core/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "ratingrl/core/errors.hpp"

namespace ratingrl {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

json context_fields(const Context& ctx) {
  json j;
  j["context_id"] = ctx.id;
  j["features"] = ctx.features;
  if (!ctx.target_tokens.empty()) j["target_tokens"] = ctx.target_tokens;
  return j;
}

// Reads one JSONL record's context and caption, validating both.
struct RecordReader {
  const std::filesystem::path& path;
  const Vocabulary& vocab;
  std::size_t max_len;
  std::unordered_map<std::string, Context> seen;
  std::size_t feature_dim = 0;

  template <class T>
  T field(const json& j, const char* name, std::size_t line) const {
    if (!j.contains(name)) {
      throw ParseError(path.string(), line, std::string("missing field \"") + name + "\"");
    }
    try {
      return j.at(name).get<T>();
    } catch (const json::exception& e) {
      throw ParseError(path.string(), line, std::string("bad field \"") + name + "\": " + e.what());
    }
  }

  std::pair<Context, Caption> read(const json& j, std::size_t line) {
    Context ctx;
    ctx.id = field<std::string>(j, "context_id", line);
    ctx.features = field<std::vector<double>>(j, "features", line);
    Caption caption{field<std::vector<TokenId>>(j, "caption_tokens", line)};
    if (j.contains("target_tokens")) {
      ctx.target_tokens = field<std::vector<TokenId>>(j, "target_tokens", line);
    }
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    for (const double f : ctx.features) {
      if (!std::isfinite(f)) throw ValidationError(where + "non-finite feature");
    }
    if (seen.empty()) feature_dim = ctx.features.size();
    if (ctx.features.size() != feature_dim) {
      throw ValidationError(where + "feature dimension differs from earlier records");
    }
    for (const TokenId t : ctx.target_tokens) {
      if (!vocab.is_content(t)) throw ValidationError(where + "target token is not a content token");
    }
    try {
      validate_caption(caption, vocab, max_len);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    auto [it, inserted] = seen.emplace(ctx.id, ctx);
    if (!inserted && it->second != ctx) {
      throw ValidationError(where + "context '" + ctx.id + "' redefined with different data");
    }
    return {std::move(ctx), std::move(caption)};
  }
};

template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(path.string(), line, "record is not a JSON object");
    fn(j, line);
  }
}

}  // namespace

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  json j;
  j["tokens"] = vocab.tokens();
  j["bos_id"] = vocab.bos_id();
  j["eos_id"] = vocab.eos_id();
  open_out(path) << j.dump(2) << '\n';
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.at("bos_id").get<TokenId>(),
                      j.at("eos_id").get<TokenId>());
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, std::string("invalid vocabulary: ") + e.what());
  }
}

void save_captions(const std::filesystem::path& path, const CaptionDataset& data) {
  auto out = open_out(path);
  for (const auto& pair : data.pairs) {
    json j = context_fields(pair.context);
    j["caption_tokens"] = pair.caption.tokens;
    out << j.dump() << '\n';
  }
}

CaptionDataset load_captions(const std::filesystem::path& path, const Vocabulary& vocab,
                             std::size_t max_len) {
  CaptionDataset data;
  RecordReader reader{path, vocab, max_len, {}, 0};
  for_each_line(path, [&](const json& j, std::size_t line) {
    auto [ctx, caption] = reader.read(j, line);
    data.pairs.push_back(CaptionPair{std::move(ctx), std::move(caption)});
  });
  return data;
}

void save_ratings(const std::filesystem::path& path, const RatingsDataset& data) {
  auto out = open_out(path);
  for (const auto& entry : data.entries()) {
    for (const auto& rc : entry.captions) {
      json j = context_fields(entry.context);
      j["caption_tokens"] = rc.caption.tokens;
      j["votes"] = rc.votes;
      j["rating"] = rc.rating;
      out << j.dump() << '\n';
    }
  }
}

RatingsDataset load_ratings(const std::filesystem::path& path, const Vocabulary& vocab,
                            std::size_t max_len) {
  RatingsDataset data;
  RecordReader reader{path, vocab, max_len, {}, 0};
  for_each_line(path, [&](const json& j, std::size_t line) {
    auto [ctx, caption] = reader.read(j, line);
    auto votes = reader.field<std::vector<std::uint8_t>>(j, "votes", line);
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    try {
      data.add(ctx, RatedCaption::from_votes(std::move(caption), std::move(votes)));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  });
  return data;
}

}  // namespace ratingrl
