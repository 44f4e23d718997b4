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

#include "ratingrl/cli/run.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ratingrl/cli/config.hpp"
#include "ratingrl/core/dataset_io.hpp"
#include "ratingrl/core/errors.hpp"
#include "ratingrl/eval/eval.hpp"
#include "ratingrl/model/checkpoint.hpp"
#include "ratingrl/oracle/oracle.hpp"
#include "ratingrl/synthworld/world.hpp"
#include "ratingrl/trainers/train.hpp"

#ifndef RATINGRL_VERSION
#define RATINGRL_VERSION "unknown"
#endif

namespace ratingrl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using train::TrainMode;

constexpr const char* kBaselineName = "baseline";

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Fixed six decimals keep the CSVs stable across platforms.
std::string num(double v) { return fmt("%.6f", v); }
std::string tag(double v) { return fmt("%g", v); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw ValidationError("missing artifact '" + path.string() + "'");
  }
}

// Shared state of one invocation.
struct Session {
  ExperimentConfig config;
  fs::path out_dir;
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void log(const std::string& msg) const {
    if (!quiet) *err << msg << '\n';
  }
  fs::path path(const fs::path& rel) const { return out_dir / rel; }

  json manifest(const std::string& command, const std::vector<std::string>& artifacts) const {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.seed;
    j["version"] = RATINGRL_VERSION;
    j["artifacts"] = artifacts;
    return j;
  }

  void write_manifest(const std::string& name, const std::string& command,
                      const std::vector<std::string>& artifacts) const {
    write_text(path(fs::path("manifests") / (name + ".json")),
               manifest(command, artifacts).dump(2) + "\n");
  }

  // Artifacts from a different config, seed or build are refused.
  void check_manifest(const std::string& name) const {
    const fs::path p = path(fs::path("manifests") / (name + ".json"));
    require_file(p);
    const json m = read_json(p);
    const json want = manifest("", {});
    for (const char* key : {"config_hash", "seed", "version"}) {
      if (!m.contains(key) || m.at(key) != want.at(key)) {
        throw ValidationError("artifacts in '" + out_dir.string() + "' were produced with a different " +
                              key + " (manifest " + name + ")");
      }
    }
    for (const auto& a : m.value("artifacts", json::array())) require_file(path(a.get<std::string>()));
  }
};

struct WorldArtifacts {
  synth::World world;
  CaptionDataset captions;
  RatingsDataset ratings;
  model::ModelParams baseline;
  oracle::OracleWorld oracle;
};

WorldArtifacts load_world_artifacts(const Session& s) {
  s.check_manifest("gen-world");
  synth::World world = synth::load_world(s.path("world.json"));
  if (!(world.spec == s.config.world)) throw ValidationError("world.json does not match the config");
  const std::size_t max_len = world.spec.max_len;
  CaptionDataset captions = load_captions(s.path("dic.jsonl"), world.vocab, max_len);
  RatingsDataset ratings = load_ratings(s.path("dcr.jsonl"), world.vocab, max_len);
  model::ModelParams baseline = model::load_params(s.path("models/baseline.ckpt"));
  if (!(baseline.dims == s.config.model_dims())) {
    throw ValidationError("baseline checkpoint does not match the config's model dims");
  }
  oracle::OracleWorld ow{world.contexts, synth::true_rating};
  return WorldArtifacts{std::move(world), std::move(captions), std::move(ratings),
                        std::move(baseline), std::move(ow)};
}

model::ModelParams load_model(const Session& s, const fs::path& rel) {
  model::ModelParams p = model::load_params(s.path(rel));
  if (!(p.dims == s.config.model_dims())) {
    throw ValidationError("checkpoint '" + rel.string() + "' does not match the config's model dims");
  }
  return p;
}

// Loads the rating estimator, training and saving it on first use.
estimator::EstimatorParams ensure_estimator(const Session& s, const WorldArtifacts& a) {
  const fs::path ckpt = s.path("estimator/estimator.ckpt");
  if (fs::exists(s.path("manifests/estimator.json"))) {
    s.check_manifest("estimator");
    auto phi = estimator::load_estimator(ckpt);
    if (!(phi.dims == s.config.estimator_dims())) {
      throw ValidationError("estimator checkpoint does not match the config");
    }
    return phi;
  }
  s.log("training rating estimator");
  const auto res = estimator::train_estimator(a.ratings, a.world.vocab, a.world.spec.max_len,
                                              s.config.estimator,
                                              seed_for(s.config, SeedPurpose::kEstimator));
  fs::create_directories(ckpt.parent_path());
  estimator::save_estimator(ckpt, res.params);
  json j;
  j["train_mse"] = res.train_mse;
  j["val_mse"] = res.val_mse;
  j["val_spearman"] = res.val_spearman;
  j["n_train"] = res.n_train;
  j["n_val"] = res.n_val;
  j["epochs_run"] = res.epochs_run;
  j["best_epoch"] = res.best_epoch;
  j["degenerate_split"] = res.degenerate_split;
  write_text(s.path("estimator/estimator.json"), j.dump(2) + "\n");
  s.write_manifest("estimator", "estimator",
                   {"estimator/estimator.ckpt", "estimator/estimator.json"});
  return res.params;
}

std::string run_name(TrainMode mode, const train::TrainConfig& c, bool alpha_given) {
  switch (mode) {
    case TrainMode::kBaseline: return kBaselineName;
    case TrainMode::kBaselinePlus: return "baseline_plus_" + tag(c.t_threshold);
    case TrainMode::kOnPolicy:
    case TrainMode::kOffPolicy: {
      std::string name(train::to_string(mode));
      return alpha_given ? name + "_a" + tag(c.alpha) : name;
    }
  }
  return "model";
}

struct FinetuneOutcome {
  train::TrainResult result;
  double exact = 0.0;
};

// Fine-tunes from the Baseline checkpoint (or retrains the baseline from init).
FinetuneOutcome run_training(const Session& s, const WorldArtifacts& a, TrainMode mode,
                             const train::TrainConfig& config,
                             const estimator::EstimatorParams* phi) {
  train::TrainInputs in;
  in.captions = &a.captions;
  in.ratings = &a.ratings;
  in.estimator = phi;
  in.oracle = &a.oracle;
  FinetuneOutcome o;
  if (mode == TrainMode::kBaseline) {
    train::TrainConfig c = s.config.baseline;
    c.seed = seed_for(s.config, SeedPurpose::kBaselineTrain);
    o.result = train::train(mode, model::init_params(seed_for(s.config, SeedPurpose::kModelInit),
                                                     s.config.model_dims()),
                            in, c);
  } else {
    train::TrainConfig c = config;
    c.seed = seed_for(s.config, SeedPurpose::kFinetune);
    c.checkpoint_every = 0;
    o.result = train::train(mode, a.baseline, in, c);
  }
  o.exact = oracle::exact_objective(o.result.params, a.oracle);
  return o;
}

// --- gen-world -------------------------------------------------------------

int cmd_gen_world(Session& s) {
  const auto& c = s.config;
  s.log("generating world");
  const synth::World world = synth::gen_world(c.world);
  const CaptionDataset captions = synth::ground_truth_captions(world);
  synth::save_world(s.path("world.json"), world);
  save_vocabulary(s.path("vocab.json"), world.vocab);
  save_captions(s.path("dic.jsonl"), captions);

  s.log("training baseline");
  const oracle::OracleWorld ow{world.contexts, synth::true_rating};
  train::TrainInputs in;
  in.captions = &captions;
  in.oracle = &ow;
  train::TrainConfig bc = c.baseline;
  bc.seed = seed_for(c, SeedPurpose::kBaselineTrain);
  const auto base = train::train(
      TrainMode::kBaseline,
      model::init_params(seed_for(c, SeedPurpose::kModelInit), c.model_dims()), in, bc);
  fs::create_directories(s.path("models"));
  fs::create_directories(s.path("traces"));
  model::save_params(s.path("models/baseline.ckpt"), base.params);
  train::write_trace_csv(s.path("traces/baseline.csv"), base.trace);

  std::vector<std::string> artifacts = {"world.json",   "vocab.json",       "dic.jsonl",
                                        "dcr.jsonl",    "models/baseline.ckpt",
                                        "traces/baseline.csv"};
  fs::create_directories(s.path("checkpoints"));
  for (std::size_t i = 0; i < base.checkpoints.size(); ++i) {
    const std::string rel = "checkpoints/baseline-" +
                            std::to_string((i + 1) * c.baseline.checkpoint_every) + ".ckpt";
    model::save_params(s.path(rel), base.checkpoints[i]);
    artifacts.push_back(rel);
  }

  s.log("harvesting rated captions");
  const std::vector<model::ModelParams> candidates =
      base.checkpoints.empty() ? std::vector<model::ModelParams>{base.params} : base.checkpoints;
  const synth::Datasets ds = synth::build_datasets(world, candidates);
  save_ratings(s.path("dcr.jsonl"), ds.ratings);
  s.write_manifest("gen-world", "gen-world", artifacts);

  const double exact = oracle::exact_objective(base.params, ow);
  *s.out << "gen-world: " << world.contexts.size() << " contexts, " << captions.size()
         << " D_IC pairs, " << ds.ratings.num_captions() << " rated captions (mean "
         << num(ds.ratings.mean_rating()) << "), baseline E[r*] " << num(exact) << "\n";
  return kExitOk;
}

// --- train -------------------------------------------------------------------

int cmd_train(Session& s, const std::string& mode_name, std::optional<double> alpha,
              std::optional<double> t) {
  const TrainMode mode = train::parse_train_mode(mode_name);
  const WorldArtifacts a = load_world_artifacts(s);
  train::TrainConfig c = s.config.finetune;
  if (alpha) c.alpha = *alpha;
  if (t) c.t_threshold = *t;
  c.validate(true);

  std::optional<estimator::EstimatorParams> phi;
  if (mode == TrainMode::kOnPolicy) phi = ensure_estimator(s, a);
  const std::string name = run_name(mode, c, alpha.has_value());
  s.log("training " + name);
  const auto o = run_training(s, a, mode, c, phi ? &*phi : nullptr);

  const std::string ckpt = "models/" + name + ".ckpt";
  const std::string trace = "traces/" + name + ".csv";
  fs::create_directories(s.path("models"));
  fs::create_directories(s.path("traces"));
  model::save_params(s.path(ckpt), o.result.params);
  train::write_trace_csv(s.path(trace), o.result.trace);
  std::vector<std::string> artifacts = {ckpt, trace};
  if (phi) artifacts.push_back("estimator/estimator.ckpt");
  s.write_manifest("train-" + name, "train", artifacts);

  const double base = oracle::exact_objective(a.baseline, a.oracle);
  *s.out << "train " << name << ": E[r*] " << num(o.exact) << " (baseline " << num(base)
         << ", " << fmt("%+.2f", 100.0 * (o.exact / base - 1.0)) << "%), eta clips "
         << o.result.eta_clip_count << "\n";
  return kExitOk;
}

// --- eval --------------------------------------------------------------------

std::vector<std::string> model_names(const Session& s) {
  std::vector<std::string> names;
  const fs::path dir = s.path("models");
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".ckpt") {
        names.push_back(e.path().stem().string());
      }
    }
  }
  std::sort(names.begin(), names.end());
  // Baseline first; it is the reference of every comparison.
  const auto it = std::find(names.begin(), names.end(), kBaselineName);
  if (it == names.end()) throw ValidationError("missing artifact 'models/baseline.ckpt'");
  std::rotate(names.begin(), it, it + 1);
  return names;
}

json caption_json(const Vocabulary& vocab, const Caption& c) {
  std::string text;
  for (const TokenId t : c.content()) text += (text.empty() ? "" : " ") + vocab.token(t);
  return text;
}

std::string csv_row(const std::string& model, const std::string& metric, double value,
                    std::optional<eval::Interval> ci) {
  return model + "," + metric + "," + num(value) + "," + (ci ? num(ci->low) : "") + "," +
         (ci ? num(ci->high) : "") + "\n";
}

int cmd_eval(Session& s) {
  const WorldArtifacts a = load_world_artifacts(s);
  const auto names = model_names(s);
  const std::uint64_t seed = seed_for(s.config, SeedPurpose::kEval);
  const auto& contexts = a.world.contexts;

  json goodness = json::array();
  json sxs = json::array();
  std::string goodness_csv = "model,metric,value,ci_low,ci_high\n";
  std::string sxs_csv = "model,metric,value,ci_low,ci_high\n";
  std::vector<std::string> artifacts;
  std::vector<Caption> base_captions;
  for (const auto& name : names) {
    const std::string rel = "models/" + name + ".ckpt";
    if (name != kBaselineName) s.check_manifest("train-" + name);
    artifacts.push_back(rel);
    s.log("evaluating " + name);
    const model::ModelParams p = load_model(s, rel);
    // Same rater seed for every model: comparisons use common random numbers.
    const auto g = eval::goodness_eval(p, contexts, seed, s.config.goodness);
    const double exact = oracle::exact_objective(p, a.oracle);
    const std::size_t distinct = eval::distinct_captions(g.captions);
    json caps = json::array();
    for (const auto& c : g.captions) caps.push_back(caption_json(a.world.vocab, c));
    goodness.push_back({{"model", name},
                        {"average", g.average},
                        {"average_ci", {g.average_ci.low, g.average_ci.high}},
                        {"voting", g.voting},
                        {"voting_ci", {g.voting_ci.low, g.voting_ci.high}},
                        {"exact_expected_rating", exact},
                        {"distinct_captions", distinct},
                        {"captions", caps}});
    goodness_csv += csv_row(name, "average", g.average, g.average_ci);
    goodness_csv += csv_row(name, "voting", g.voting, g.voting_ci);
    goodness_csv += csv_row(name, "exact_expected_rating", exact, std::nullopt);
    goodness_csv += csv_row(name, "distinct_captions", static_cast<double>(distinct), std::nullopt);

    if (name == kBaselineName) {
      base_captions = g.captions;
      continue;
    }
    const auto r = eval::sxs_of_captions(contexts, g.captions, base_captions, seed, s.config.sxs);
    json dims = json::object();
    for (std::size_t d = 0; d < 3; ++d) {
      const auto& dr = r.dims[d];
      dims[eval::kSxsDimensionNames[d]] = {{"score", dr.score},
                                           {"ci", {dr.ci.low, dr.ci.high}},
                                           {"histogram", dr.histogram}};
      sxs_csv += csv_row(name, eval::kSxsDimensionNames[d], dr.score, dr.ci);
    }
    sxs.push_back({{"model", name},
                   {"reference", kBaselineName},
                   {"identical_captions", r.identical_captions},
                   {"dimensions", dims}});
  }

  const json scale = eval::kSxsScale;
  write_text(s.path("eval/goodness.json"), json{{"models", goodness}}.dump(2) + "\n");
  write_text(s.path("eval/goodness.csv"), goodness_csv);
  write_text(s.path("eval/sxs.json"), json{{"scale", scale}, {"comparisons", sxs}}.dump(2) + "\n");
  write_text(s.path("eval/sxs.csv"), sxs_csv);
  for (const char* f : {"eval/goodness.json", "eval/goodness.csv", "eval/sxs.json", "eval/sxs.csv"}) {
    artifacts.emplace_back(f);
  }
  s.write_manifest("eval", "eval", artifacts);
  *s.out << "eval: " << names.size() << " models, baseline average "
         << num(goodness[0]["average"].get<double>()) << "\n";
  return kExitOk;
}

// --- sweep-alpha ---------------------------------------------------------------

int cmd_sweep(Session& s) {
  const WorldArtifacts a = load_world_artifacts(s);
  const auto& c = s.config;
  std::optional<estimator::EstimatorParams> phi;
  if (std::count(c.sweep_modes.begin(), c.sweep_modes.end(), TrainMode::kOnPolicy) > 0) {
    phi = ensure_estimator(s, a);
  }
  const std::uint64_t seed = seed_for(c, SeedPurpose::kEval);
  std::string csv = "mode,alpha,exact_expected_rating,distinct_captions,average,voting\n";
  json rows = json::array();
  std::vector<std::string> artifacts;
  for (const TrainMode mode : c.sweep_modes) {
    for (const double alpha : c.sweep_alphas) {
      train::TrainConfig tc = c.finetune;
      tc.alpha = alpha;
      const std::string name = run_name(mode, tc, true);
      s.log("sweep " + name);
      const auto o = run_training(s, a, mode, tc, phi ? &*phi : nullptr);
      const std::string ckpt = "sweep/models/" + name + ".ckpt";
      const std::string trace = "sweep/traces/" + name + ".csv";
      fs::create_directories(s.path("sweep/models"));
      fs::create_directories(s.path("sweep/traces"));
      model::save_params(s.path(ckpt), o.result.params);
      train::write_trace_csv(s.path(trace), o.result.trace);
      artifacts.push_back(ckpt);
      artifacts.push_back(trace);
      const auto g = eval::goodness_eval(o.result.params, a.world.contexts, seed, c.goodness);
      const std::size_t distinct = eval::distinct_captions(g.captions);
      const std::string mname(train::to_string(mode));
      csv += mname + "," + tag(alpha) + "," + num(o.exact) + "," + std::to_string(distinct) + "," +
             num(g.average) + "," + num(g.voting) + "\n";
      rows.push_back({{"mode", mname},
                      {"alpha", alpha},
                      {"exact_expected_rating", o.exact},
                      {"distinct_captions", distinct},
                      {"average", g.average},
                      {"voting", g.voting}});
    }
  }
  write_text(s.path("sweep/alpha_sweep.csv"), csv);
  write_text(s.path("sweep/alpha_sweep.json"), json{{"rows", rows}}.dump(2) + "\n");
  artifacts.emplace_back("sweep/alpha_sweep.csv");
  artifacts.emplace_back("sweep/alpha_sweep.json");
  if (phi) artifacts.emplace_back("estimator/estimator.ckpt");
  s.write_manifest("sweep-alpha", "sweep-alpha", artifacts);
  *s.out << "sweep-alpha: " << rows.size() << " runs\n";
  return kExitOk;
}

// --- probe-estimator -------------------------------------------------------------

int cmd_probe(Session& s) {
  const WorldArtifacts a = load_world_artifacts(s);
  const auto phi = ensure_estimator(s, a);
  const auto report = estimator::probe_estimator(phi, a.ratings, synth::true_rating);
  std::string csv = "family,count,mean_predicted,mean_true,fraction_above\n";
  json fams = json::array();
  std::size_t flagged = 0;
  for (const auto& f : report.families) {
    csv += f.name + "," + std::to_string(f.count) + "," + num(f.mean_predicted) + "," +
           (f.has_true ? num(f.mean_true) : "") + "," + num(f.fraction_above) + "\n";
    json j = {{"family", f.name},
              {"count", f.count},
              {"mean_predicted", f.mean_predicted},
              {"fraction_above", f.fraction_above}};
    if (f.has_true) j["mean_true"] = f.mean_true;
    fams.push_back(j);
    if (f.has_true && f.mean_predicted > 0.7 && f.mean_true < 0.3) ++flagged;
  }
  write_text(s.path("probe/probe.csv"), csv);
  write_text(s.path("probe/probe.json"),
             json{{"families", fams}, {"total", report.total},
                  {"fraction_above", report.fraction_above}}
                     .dump(2) + "\n");
  s.write_manifest("probe-estimator", "probe-estimator",
                   {"probe/probe.csv", "probe/probe.json", "estimator/estimator.ckpt"});
  *s.out << "probe-estimator: " << report.total << " probes, "
         << num(report.fraction_above) << " predicted above " << tag(estimator::kProbeHighRating)
         << ", " << flagged << " families rated high but truly poor\n";
  return kExitOk;
}

// --- report ----------------------------------------------------------------------

// Every manifest in the directory must come from one config, seed and build.
void check_consistent_manifests(const Session& s, bool have_config) {
  const fs::path dir = s.path("manifests");
  if (!fs::is_directory(dir)) throw ValidationError("missing artifact '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json" && e.path().stem() != "report") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::optional<json> first;
  for (const auto& f : files) {
    const json m = read_json(f);
    for (const char* key : {"config_hash", "seed", "version"}) {
      if (!m.contains(key)) throw ParseError(f.string(), 0, std::string("missing \"") + key + "\"");
    }
    if (have_config && m.at("config_hash") != config_hash(s.config)) {
      throw ValidationError("manifest '" + f.filename().string() + "' was produced with another config");
    }
    if (!first) {
      first = m;
    } else {
      for (const char* key : {"config_hash", "seed", "version"}) {
        if (m.at(key) != first->at(key)) {
          throw ValidationError("refusing to mix artifacts: '" + f.filename().string() +
                                "' differs in " + key);
        }
      }
    }
    for (const auto& a : m.value("artifacts", json::array())) require_file(s.path(a.get<std::string>()));
  }
}

int cmd_report(Session& s, bool have_config) {
  check_consistent_manifests(s, have_config);
  require_file(s.path("manifests/eval.json"));
  const json goodness = read_json(s.path("eval/goodness.json")).at("models");
  const json sxs = read_json(s.path("eval/sxs.json")).at("comparisons");
  if (goodness.empty() || goodness[0].at("model") != kBaselineName) {
    throw ValidationError("eval/goodness.json does not start with the baseline");
  }
  const json& base = goodness[0];
  const double base_avg = base.at("average").get<double>();
  const double base_vote = base.at("voting").get<double>();
  const double base_exact = base.at("exact_expected_rating").get<double>();

  std::string gcsv =
      "model,average,average_ci_low,average_ci_high,average_delta,voting,voting_ci_low,"
      "voting_ci_high,voting_delta,exact_expected_rating,exact_relative_gain\n";
  json gtable = json::array();
  for (const auto& m : goodness) {
    const std::string name = m.at("model");
    const bool is_base = name == kBaselineName;
    const double avg = m.at("average"), vote = m.at("voting"), exact = m.at("exact_expected_rating");
    const auto& aci = m.at("average_ci");
    const auto& vci = m.at("voting_ci");
    gcsv += name + "," + num(avg) + "," + num(aci[0]) + "," + num(aci[1]) + "," +
            (is_base ? "" : num(avg - base_avg)) + "," + num(vote) + "," + num(vci[0]) + "," +
            num(vci[1]) + "," + (is_base ? "" : num(vote - base_vote)) + "," + num(exact) + "," +
            (is_base ? "" : num(exact / base_exact - 1.0)) + "\n";
    json row = {{"model", name},        {"average", avg},  {"average_ci", aci},
                {"voting", vote},       {"voting_ci", vci}, {"exact_expected_rating", exact}};
    if (!is_base) {
      row["average_delta"] = avg - base_avg;
      row["voting_delta"] = vote - base_vote;
      row["exact_relative_gain"] = exact / base_exact - 1.0;
    }
    gtable.push_back(row);
  }

  std::string scsv = "model,informativeness,correctness,fluency\n";
  std::string cicsv = "model,dimension,ci_low,ci_high\n";
  for (const auto& c : sxs) {
    const std::string name = c.at("model");
    const auto& dims = c.at("dimensions");
    scsv += name;
    for (const char* d : eval::kSxsDimensionNames) {
      scsv += "," + num(dims.at(d).at("score"));
      cicsv += name + "," + d + "," + num(dims.at(d).at("ci")[0]) + "," +
               num(dims.at(d).at("ci")[1]) + "\n";
    }
    scsv += "\n";
  }

  std::vector<std::string> artifacts = {"report/goodness_table.csv", "report/goodness_table.json",
                                        "report/sxs_table.csv", "report/sxs_ci.csv",
                                        "report/sxs_table.json"};
  write_text(s.path("report/goodness_table.csv"), gcsv);
  write_text(s.path("report/goodness_table.json"), json{{"rows", gtable}}.dump(2) + "\n");
  write_text(s.path("report/sxs_table.csv"), scsv);
  write_text(s.path("report/sxs_ci.csv"), cicsv);
  write_text(s.path("report/sxs_table.json"), json{{"comparisons", sxs}}.dump(2) + "\n");
  if (fs::exists(s.path("manifests/sweep-alpha.json"))) {
    std::ifstream in(s.path("sweep/alpha_sweep.csv"), std::ios::binary);
    if (!in) throw ValidationError("missing artifact 'sweep/alpha_sweep.csv'");
    std::ostringstream text;
    text << in.rdbuf();
    write_text(s.path("report/alpha_curves.csv"), text.str());
    artifacts.emplace_back("report/alpha_curves.csv");
  }
  // The report inherits the identity of the artifacts it read.
  json m = read_json(s.path("manifests/eval.json"));
  m["command"] = "report";
  m["artifacts"] = artifacts;
  write_text(s.path("manifests/report.json"), m.dump(2) + "\n");
  *s.out << "report: " << goodness.size() << " models, " << sxs.size() << " side-by-side comparisons\n";
  return kExitOk;
}

int category_code(const std::exception_ptr& e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "config error: " << x.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& x) {
    err << "config error: " << x.what() << '\n';
    return kExitConfig;
  } catch (const SizeError& x) {
    err << "config error: " << x.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& x) {
    err << "input error: " << x.what() << '\n';
    return kExitInput;
  } catch (const ValidationError& x) {
    err << "input error: " << x.what() << '\n';
    return kExitInput;
  } catch (const NumericError& x) {
    err << "numeric error: " << x.what() << '\n';
    return kExitNumeric;
  } catch (const GenerationError& x) {
    err << "generation error: " << x.what() << '\n';
    return kExitGeneration;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Caption-model training from ratings on a synthetic world", "ratingrl"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--out", out_dir, "experiment directory");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("--quiet", quiet, "suppress progress messages");

  auto* gen = app.add_subcommand("gen-world", "world, D_IC, baseline and D_CR");
  auto* tr = app.add_subcommand("train", "fine-tune one model from the baseline");
  std::string mode;
  std::optional<double> alpha, t;
  tr->add_option("--mode", mode, "baseline, baseline_plus, onpg or offpg")->required();
  tr->add_option("--alpha", alpha, "overrides finetune.alpha; becomes part of the run name");
  tr->add_option("--t", t, "overrides finetune.t_threshold");
  auto* ev = app.add_subcommand("eval", "goodness and side-by-side evaluation of every model");
  auto* sw = app.add_subcommand("sweep-alpha", "train and score every sweep mode and alpha");
  auto* pr = app.add_subcommand("probe-estimator", "score ill-formed captions with the estimator");
  auto* rp = app.add_subcommand("report", "tables from the evaluation artifacts");
  // Options may follow the subcommand too.
  for (auto* sub : {gen, tr, ev, sw, pr, rp}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    Session s;
    s.out_dir = out_dir;
    const char* env_quiet = std::getenv("RATINGRL_QUIET");
    s.quiet = quiet || (env_quiet != nullptr && *env_quiet != '\0' && std::string(env_quiet) != "0");
    s.out = &out;
    s.err = &err;
    const bool have_config = !config_path.empty();
    if (have_config) {
      s.config = load_config(config_path);
    } else {
      s.config = default_config();
      s.config.world.seed = s.config.seed;
    }
    if (seed) {
      s.config.seed = *seed;
      s.config.world.seed = *seed;
    }
    fs::create_directories(s.out_dir);
    if (gen->parsed()) return cmd_gen_world(s);
    if (tr->parsed()) return cmd_train(s, mode, alpha, t);
    if (ev->parsed()) return cmd_eval(s);
    if (sw->parsed()) return cmd_sweep(s);
    if (pr->parsed()) return cmd_probe(s);
    return cmd_report(s, have_config);
  } catch (...) {
    return category_code(std::current_exception(), err);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ratingrl::cli
