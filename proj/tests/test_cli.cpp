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
#include <sstream>

#include "json.hpp"
#include "ratingrl/cli/config.hpp"
#include "ratingrl/cli/run.hpp"
#include "ratingrl/core/errors.hpp"
#include "test_util.hpp"

namespace ratingrl::cli {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

constexpr const char* kSmallConfig = R"({
  "seed": 3,
  "world": {"vocab_size": 6, "max_len": 3, "n_contexts": 10, "targets_per_context": 2,
            "candidates_per_context": 3},
  "model": {"embed_dim": 2, "hidden_dim": 3},
  "baseline": {"steps": 200, "lr": 0.01, "checkpoint_every": 100, "trace_every": 50},
  "finetune": {"steps": 40, "lr": 0.01, "batch_size": 8, "trace_every": 10},
  "estimator": {"hidden_dim": 4, "epochs": 50, "patience": 20},
  "goodness": {"resamples": 100},
  "sxs": {"resamples": 100}
})";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg = dir / "config.json";
    write_file(cfg, kSmallConfig);
  }

  Result step(const std::string& cmd, std::vector<std::string> extra = {}, const fs::path& out = {}) {
    std::vector<std::string> a{"--config", cfg.string(), "--out", (out.empty() ? exp() : out).string(),
                               "--quiet", cmd};
    a.insert(a.end(), extra.begin(), extra.end());
    return run_cli(a);
  }

  fs::path exp() const { return dir / "exp"; }

  void pipeline(const fs::path& out) {
    ASSERT_EQ(step("gen-world", {}, out).code, 0);
    ASSERT_EQ(step("train", {"--mode", "offpg"}, out).code, 0);
    ASSERT_EQ(step("train", {"--mode", "baseline_plus", "--t", "0.5"}, out).code, 0);
    ASSERT_EQ(step("eval", {}, out).code, 0);
    ASSERT_EQ(step("report", {}, out).code, 0);
  }

  TempDir dir{"cli"};
  fs::path cfg;
};

TEST(Config, DefaultsRoundTripAndHash) {
  const auto c = default_config();
  const auto back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  auto other = c;
  other.seed = 99;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, ShippedFileMatchesDefaults) {
  const auto shipped = load_config(RATINGRL_DEFAULT_CONFIG);
  EXPECT_EQ(to_json(shipped), to_json(default_config()));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("{\"sede\": 1}"), ConfigError);
  EXPECT_THROW(parse_config("{\"seed\": \"one\"}"), ConfigError);
  EXPECT_THROW(parse_config("{\"world\": {\"vocab_size\": 2}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"finetune\": {\"b_mode\": \"sideways\"}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"sweep\": {\"modes\": [\"baseline\"]}}"), ConfigError);
  EXPECT_THROW(parse_config("not json"), ConfigError);
}

TEST_F(CliTest, GenWorldManifest) {
  const auto r = step("gen-world");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("gen-world:"), std::string::npos);
  EXPECT_EQ(lines(r.out), 1u);
  for (const char* f : {"world.json", "vocab.json", "dic.jsonl", "dcr.jsonl", "models/baseline.ckpt",
                        "traces/baseline.csv", "manifests/gen-world.json"}) {
    EXPECT_TRUE(fs::exists(exp() / f)) << f;
  }
  const auto m = nlohmann::json::parse(read_file(exp() / "manifests/gen-world.json"));
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["config_hash"], config_hash(load_config(cfg)));
  EXPECT_FALSE(m["version"].get<std::string>().empty());
  EXPECT_EQ(lines(read_file(exp() / "dic.jsonl")), 10u);
}

TEST_F(CliTest, ExitCodes) {
  // Bad config.
  write_file(dir / "bad.json", "{\"world\": {\"vocab_size\": 1}}");
  EXPECT_EQ(run_cli({"--config", (dir / "bad.json").string(), "--out", exp().string(), "--quiet",
                     "gen-world"})
                .code,
            kExitConfig);
  write_file(dir / "broken.json", "{");
  EXPECT_EQ(run_cli({"--config", (dir / "broken.json").string(), "--quiet", "gen-world"}).code,
            kExitConfig);
  EXPECT_EQ(run_cli({"--nonsense"}).code, kExitConfig);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
  // Missing artifacts.
  EXPECT_EQ(step("train", {"--mode", "offpg"}).code, kExitInput);
  EXPECT_EQ(step("eval").code, kExitInput);
  EXPECT_EQ(step("report").code, kExitInput);
  ASSERT_EQ(step("gen-world").code, 0);
  EXPECT_EQ(step("train", {"--mode", "sideways"}).code, kExitConfig);
  // A different seed no longer matches the world on disk.
  EXPECT_EQ(step("train", {"--mode", "offpg", "--seed", "4"}).code, kExitInput);
}

TEST_F(CliTest, CorruptArtifactIsInputError) {
  ASSERT_EQ(step("gen-world").code, 0);
  write_file(exp() / "dcr.jsonl", "{\"context\":\n");
  EXPECT_EQ(step("train", {"--mode", "offpg"}).code, kExitInput);
}

TEST_F(CliTest, ReportRefusesMixedManifests) {
  pipeline(exp());
  auto m = nlohmann::json::parse(read_file(exp() / "manifests/train-offpg.json"));
  m["seed"] = 12345;
  write_file(exp() / "manifests/train-offpg.json", m.dump(2));
  const auto r = step("report");
  EXPECT_EQ(r.code, kExitInput) << r.err;
}

TEST_F(CliTest, ReportTables) {
  pipeline(exp());
  const std::string good = read_file(exp() / "report/goodness_table.csv");
  std::istringstream in(good);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("model,average,", 0), 0u);
  std::getline(in, row);
  ASSERT_EQ(row.rfind("baseline,", 0), 0u);
  // Delta cells of the baseline row are empty.
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream rs(row);
  while (std::getline(rs, cell, ',')) cells.push_back(cell);
  if (row.back() == ',') cells.emplace_back();
  std::vector<std::string> names;
  std::istringstream hs(header);
  while (std::getline(hs, cell, ',')) names.push_back(cell);
  ASSERT_EQ(cells.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].find("delta") != std::string::npos || names[i] == "exact_relative_gain") {
      EXPECT_TRUE(cells[i].empty()) << names[i];
    }
  }
  EXPECT_EQ(lines(good), 4u);  // header, baseline, offpg, baseline_plus_0.5

  const std::string sxs = read_file(exp() / "report/sxs_table.csv");
  EXPECT_EQ(sxs.substr(0, sxs.find('\n')), "model,informativeness,correctness,fluency");
  EXPECT_EQ(lines(sxs), 3u);
  EXPECT_TRUE(fs::exists(exp() / "report/sxs_ci.csv"));
  EXPECT_TRUE(fs::exists(exp() / "report/goodness_table.json"));

  // Regeneration is idempotent.
  const std::string sxs_json = read_file(exp() / "report/sxs_table.json");
  ASSERT_EQ(step("report").code, 0);
  EXPECT_EQ(read_file(exp() / "report/goodness_table.csv"), good);
  EXPECT_EQ(read_file(exp() / "report/sxs_table.csv"), sxs);
  EXPECT_EQ(read_file(exp() / "report/sxs_table.json"), sxs_json);
}

TEST_F(CliTest, EvalCsvShape) {
  pipeline(exp());
  const std::string csv = read_file(exp() / "eval/goodness.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,metric,value,ci_low,ci_high");
  EXPECT_EQ(lines(csv), 1u + 3u * 4u);
  EXPECT_TRUE(fs::exists(exp() / "eval/goodness.json"));
  EXPECT_TRUE(fs::exists(exp() / "eval/sxs.json"));
}

TEST_F(CliTest, IdenticalRunsGiveIdenticalCsv) {
  pipeline(dir / "a");
  pipeline(dir / "b");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(read_file(e.path()), read_file(dir / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 8u);
}

TEST_F(CliTest, SweepAndProbe) {
  ASSERT_EQ(step("gen-world").code, 0);
  const auto r = step("sweep-alpha");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(exp() / "sweep/alpha_sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mode,alpha,exact_expected_rating,distinct_captions,average,voting");
  EXPECT_EQ(lines(csv), 9u);
  const auto p = step("probe-estimator");
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(fs::exists(exp() / "probe/probe.csv"));
  pipeline(exp());
  EXPECT_TRUE(fs::exists(exp() / "report/alpha_curves.csv"));
}

TEST(CliBinary, PrintsOneSummaryLine) {
  TempDir dir("bin");
  write_file(dir / "config.json", kSmallConfig);
  const std::string cmd = std::string(RATINGRL_CLI_PATH) + " --quiet --config " +
                          (dir / "config.json").string() + " --out " + (dir / "exp").string() +
                          " gen-world > " + (dir / "stdout.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(lines(read_file(dir / "stdout.txt")), 1u);
  const std::string bad = std::string(RATINGRL_CLI_PATH) + " --quiet --out " + (dir / "none").string() +
                          " eval 2>/dev/null";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), kExitInput);
}

}  // namespace
}  // namespace ratingrl::cli
