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

// Serial references against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include "ratingrl/kernels/reduce.hpp"
#include "ratingrl/model/sequence_model.hpp"
#include "ratingrl/oracle/oracle.hpp"
#include "ratingrl/synthworld/world.hpp"

namespace {

using namespace ratingrl;

const synth::World& world() {
  static const synth::World w = synth::gen_world(synth::WorldSpec{});
  return w;
}

const model::ModelParams& params() {
  static const model::ModelParams p = model::init_params(1, model::ModelDims{12, 2, 3, 12, 4, 0, 1});
  return p;
}

const oracle::OracleWorld& oracle_world() {
  static const oracle::OracleWorld o{world().contexts, synth::true_rating};
  return o;
}

// Score-function terms for the first contexts' captions.
template <bool Parallel>
void BM_GradSum(benchmark::State& state) {
  const auto all = oracle::enumerate_captions(world().vocab, 4);
  const auto& ctx = world().contexts[0];
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = params().values.size();
  const auto term = [&](std::size_t i, std::span<double> acc) {
    model::accumulate_grad_log_prob(params(), ctx, all[i % all.size()], 1.0, acc);
  };
  for (auto _ : state) {
    auto g = Parallel ? kernels::ordered_sum(n, dim, term) : kernels::serial::ordered_sum(n, dim, term);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GradSum<false>)->Arg(1024)->Arg(11110);
BENCHMARK(BM_GradSum<true>)->Arg(1024)->Arg(11110);

template <bool Parallel>
void BM_Decode(benchmark::State& state) {
  const auto& ctxs = world().contexts;
  const auto fn = [&](std::size_t i) { return model::beam_search(params(), ctxs[i], 5); };
  for (auto _ : state) {
    auto out = Parallel ? kernels::ordered_map<Caption>(ctxs.size(), fn)
                        : kernels::serial::ordered_map<Caption>(ctxs.size(), fn);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Decode<false>);
BENCHMARK(BM_Decode<true>);

void BM_ExactObjectiveSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(oracle::serial::exact_objective(params(), oracle_world()));
}
void BM_ExactObjectiveParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(oracle::exact_objective(params(), oracle_world()));
}
BENCHMARK(BM_ExactObjectiveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactObjectiveParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
