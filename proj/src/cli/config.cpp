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

#include "ratingrl/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ratingrl/core/errors.hpp"
#include "ratingrl/core/rng.hpp"

namespace ratingrl::cli {
namespace {

using nlohmann::json;

// Reads the known keys of one JSON object; anything left over is an error.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_train(const json& j, const std::string& where, train::TrainConfig& c) {
  ObjectReader r(j, where);
  r.get("alpha", c.alpha);
  r.get("epsilon", c.epsilon);
  r.get("t_threshold", c.t_threshold);
  r.get("batch_size", c.batch_size);
  r.get("lr", c.lr);
  r.get("lr_decay", c.lr_decay);
  r.get("warmup_epochs", c.warmup_epochs);
  r.get("decay_every_epochs", c.decay_every_epochs);
  r.get("steps_per_epoch", c.steps_per_epoch);
  r.get("steps", c.steps);
  std::string b_mode;
  r.get("b_mode", b_mode);
  if (!b_mode.empty()) c.b_mode = train::parse_baseline_mode(b_mode);
  r.get("ma_decay", c.ma_decay);
  r.get("onpg_batch_factor", c.onpg_batch_factor);
  r.get("eta_clip", c.eta_clip);
  r.get("trace_every", c.trace_every);
  r.get("checkpoint_every", c.checkpoint_every);
  r.finish();
}

json write_train(const train::TrainConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["epsilon"] = c.epsilon;
  j["t_threshold"] = c.t_threshold;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["warmup_epochs"] = c.warmup_epochs;
  j["decay_every_epochs"] = c.decay_every_epochs;
  j["steps_per_epoch"] = c.steps_per_epoch;
  j["steps"] = c.steps;
  j["b_mode"] = c.b_mode ? std::string(train::to_string(*c.b_mode)) : std::string();
  j["ma_decay"] = c.ma_decay;
  j["onpg_batch_factor"] = c.onpg_batch_factor;
  j["eta_clip"] = c.eta_clip;
  j["trace_every"] = c.trace_every;
  j["checkpoint_every"] = c.checkpoint_every;
  return j;
}

void validate(const ExperimentConfig& c) {
  try {
    c.world.validate();
    c.model_dims().validate();
    c.estimator_dims().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.baseline.validate(false);
  c.finetune.validate(true);
  if (c.estimator.epochs == 0) throw ConfigError("estimator.epochs must be positive");
  if (!(c.estimator.lr > 0.0)) throw ConfigError("estimator.lr must be positive");
  if (c.goodness.n_raters == 0 || c.sxs.n_raters == 0) throw ConfigError("n_raters must be positive");
  if (c.goodness.beam == 0 || c.sxs.beam == 0) throw ConfigError("beam must be positive");
  if (!(c.goodness.noise >= 0.0) || !(c.sxs.noise >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(c.goodness.level > 0.0 && c.goodness.level < 1.0) ||
      !(c.sxs.level > 0.0 && c.sxs.level < 1.0)) {
    throw ConfigError("level must be in (0, 1)");
  }
  if (c.goodness.resamples == 0 || c.sxs.resamples == 0) throw ConfigError("resamples must be positive");
  for (const double a : c.sweep_alphas) {
    if (!(a >= 0.0)) throw ConfigError("sweep.alphas must be >= 0");
  }
  for (const double t : c.thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds must be in [0, 1]");
  }
}

}  // namespace

model::ModelDims ExperimentConfig::model_dims() const {
  return model::ModelDims{world.vocab_size, embed_dim, hidden_dim, world.context_dim(),
                          world.max_len, 0, 1};
}

estimator::EstimatorDims ExperimentConfig::estimator_dims() const {
  return estimator::EstimatorDims{world.context_dim(), world.vocab_size, estimator.hidden_dim,
                                  world.max_len, 0, 1};
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.seed = 3;
  c.world.seed = c.seed;
  c.hidden_dim = 3;
  c.baseline.steps = 20000;
  c.baseline.lr = 1e-2;
  c.baseline.checkpoint_every = 500;
  c.baseline.trace_every = 1000;
  c.finetune.lr = 2e-2;
  c.finetune.steps = 8000;
  c.finetune.trace_every = 200;
  // The library defaults stop the estimator long before it fits.
  c.estimator.lr = 1e-2;
  c.estimator.epochs = 5000;
  c.estimator.patience = 500;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = default_config();
  ObjectReader top(j, "config");
  top.get("seed", c.seed);
  if (const json* w = top.sub("world")) {
    ObjectReader r(*w, "world");
    r.get("vocab_size", c.world.vocab_size);
    r.get("max_len", c.world.max_len);
    r.get("n_contexts", c.world.n_contexts);
    r.get("targets_per_context", c.world.targets_per_context);
    r.get("rater_noise", c.world.rater_noise);
    r.get("feature_jitter", c.world.feature_jitter);
    r.get("candidates_per_context", c.world.candidates_per_context);
    r.finish();
  }
  if (const json* m = top.sub("model")) {
    ObjectReader r(*m, "model");
    r.get("embed_dim", c.embed_dim);
    r.get("hidden_dim", c.hidden_dim);
    r.finish();
  }
  if (const json* b = top.sub("baseline")) read_train(*b, "baseline", c.baseline);
  if (const json* f = top.sub("finetune")) read_train(*f, "finetune", c.finetune);
  if (const json* e = top.sub("estimator")) {
    ObjectReader r(*e, "estimator");
    r.get("hidden_dim", c.estimator.hidden_dim);
    r.get("lr", c.estimator.lr);
    r.get("epochs", c.estimator.epochs);
    r.get("patience", c.estimator.patience);
    r.get("init_scale", c.estimator.init_scale);
    r.finish();
  }
  if (const json* g = top.sub("goodness")) {
    ObjectReader r(*g, "goodness");
    r.get("n_raters", c.goodness.n_raters);
    r.get("noise", c.goodness.noise);
    r.get("beam", c.goodness.beam);
    r.get("resamples", c.goodness.resamples);
    r.get("level", c.goodness.level);
    r.finish();
  }
  if (const json* s = top.sub("sxs")) {
    ObjectReader r(*s, "sxs");
    r.get("n_raters", c.sxs.n_raters);
    r.get("noise", c.sxs.noise);
    r.get("beam", c.sxs.beam);
    r.get("resamples", c.sxs.resamples);
    r.get("level", c.sxs.level);
    r.finish();
  }
  if (const json* s = top.sub("sweep")) {
    ObjectReader r(*s, "sweep");
    r.get("alphas", c.sweep_alphas);
    std::vector<std::string> modes;
    r.get("modes", modes);
    if (s->contains("modes")) {
      c.sweep_modes.clear();
      for (const auto& m : modes) {
        const auto mode = train::parse_train_mode(m);
        if (mode != train::TrainMode::kOnPolicy && mode != train::TrainMode::kOffPolicy) {
          throw ConfigError("sweep.modes accepts onpg and offpg only");
        }
        c.sweep_modes.push_back(mode);
      }
    }
    r.finish();
  }
  top.get("thresholds", c.thresholds);
  top.finish();
  c.world.seed = c.seed;
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["world"] = {{"vocab_size", c.world.vocab_size},
                {"max_len", c.world.max_len},
                {"n_contexts", c.world.n_contexts},
                {"targets_per_context", c.world.targets_per_context},
                {"rater_noise", c.world.rater_noise},
                {"feature_jitter", c.world.feature_jitter},
                {"candidates_per_context", c.world.candidates_per_context}};
  j["model"] = {{"embed_dim", c.embed_dim}, {"hidden_dim", c.hidden_dim}};
  j["baseline"] = write_train(c.baseline);
  j["finetune"] = write_train(c.finetune);
  j["estimator"] = {{"hidden_dim", c.estimator.hidden_dim},
                    {"lr", c.estimator.lr},
                    {"epochs", c.estimator.epochs},
                    {"patience", c.estimator.patience},
                    {"init_scale", c.estimator.init_scale}};
  j["goodness"] = {{"n_raters", c.goodness.n_raters},
                   {"noise", c.goodness.noise},
                   {"beam", c.goodness.beam},
                   {"resamples", c.goodness.resamples},
                   {"level", c.goodness.level}};
  j["sxs"] = {{"n_raters", c.sxs.n_raters},
              {"noise", c.sxs.noise},
              {"beam", c.sxs.beam},
              {"resamples", c.sxs.resamples},
              {"level", c.sxs.level}};
  std::vector<std::string> modes;
  for (const auto m : c.sweep_modes) modes.emplace_back(train::to_string(m));
  j["sweep"] = {{"alphas", c.sweep_alphas}, {"modes", modes}};
  j["thresholds"] = c.thresholds;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t seed_for(const ExperimentConfig& config, SeedPurpose purpose) {
  return derive_seed(config.seed, 0xc0f1, static_cast<std::uint64_t>(purpose));
}

}  // namespace ratingrl::cli
