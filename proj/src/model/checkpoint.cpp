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

#include "ratingrl/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ratingrl/core/errors.hpp"

namespace ratingrl {
namespace {

constexpr std::array<char, 8> kMagic{'R', 'R', 'L', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  auto bits = std::bit_cast<U>(value);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(bits & 0xff);
    bits >>= 8;
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw ParseError(path.string(), 0, "truncated checkpoint");
  U bits = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) bits = (bits << 8) | buf[i];
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_flat_checkpoint(const std::filesystem::path& path, const FlatCheckpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::uint32_t>(ckpt.kind));
  put_le(out, static_cast<std::uint32_t>(ckpt.header.size()));
  for (const auto h : ckpt.header) put_le(out, h);
  put_le(out, static_cast<std::uint64_t>(ckpt.values.size()));
  for (const double v : ckpt.values) put_le(out, v);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

FlatCheckpoint read_flat_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open checkpoint");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError(path.string(), 0, "not a checkpoint file");
  FlatCheckpoint c;
  c.kind = static_cast<CheckpointKind>(get_le<std::uint32_t>(in, path));
  const auto n_header = get_le<std::uint32_t>(in, path);
  if (n_header > 64) throw ParseError(path.string(), 0, "implausible checkpoint header");
  for (std::uint32_t i = 0; i < n_header; ++i) c.header.push_back(get_le<std::int64_t>(in, path));
  const auto n_values = get_le<std::uint64_t>(in, path);
  if (n_values > (std::uint64_t{1} << 32)) throw ParseError(path.string(), 0, "implausible size");
  c.values.resize(n_values);
  for (auto& v : c.values) {
    v = get_le<double>(in, path);
    if (!std::isfinite(v)) throw ValidationError(path.string() + ": non-finite checkpoint value");
  }
  return c;
}

namespace model {

void save_params(const std::filesystem::path& path, const ModelParams& params) {
  const auto& d = params.dims;
  FlatCheckpoint c{CheckpointKind::kModel,
                   {static_cast<std::int64_t>(d.vocab_size), static_cast<std::int64_t>(d.embed_dim),
                    static_cast<std::int64_t>(d.hidden_dim), static_cast<std::int64_t>(d.context_dim),
                    static_cast<std::int64_t>(d.max_len), d.bos_id, d.eos_id},
                   params.values};
  write_flat_checkpoint(path, c);
}

ModelParams load_params(const std::filesystem::path& path) {
  FlatCheckpoint c = read_flat_checkpoint(path);
  if (c.kind != CheckpointKind::kModel || c.header.size() != 7) {
    throw ParseError(path.string(), 0, "not a model checkpoint");
  }
  for (const auto h : c.header) {
    if (h < 0) throw ParseError(path.string(), 0, "negative dims in checkpoint");
  }
  ModelDims d;
  d.vocab_size = static_cast<std::size_t>(c.header[0]);
  d.embed_dim = static_cast<std::size_t>(c.header[1]);
  d.hidden_dim = static_cast<std::size_t>(c.header[2]);
  d.context_dim = static_cast<std::size_t>(c.header[3]);
  d.max_len = static_cast<std::size_t>(c.header[4]);
  d.bos_id = static_cast<TokenId>(c.header[5]);
  d.eos_id = static_cast<TokenId>(c.header[6]);
  d.validate();
  if (c.values.size() != d.param_count()) {
    throw ValidationError(path.string() + ": value count does not match dims");
  }
  return ModelParams{d, std::move(c.values)};
}

}  // namespace model
}  // namespace ratingrl
