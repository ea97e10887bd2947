// Copyright 2026-present the rsaa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rsaa_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun cli(const std::string& args, const std::string& env = "") {
  const fs::path err = fs::temp_directory_path() / "rsaa_cli_stderr.txt";
  const std::string cmd = env + " '" RSAA_CLI_PATH "' " + args + " >/dev/null 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json report(const fs::path& out) { return json::parse(slurp(out / "report.json")); }

const json kAvar = {{"kind", "avar"}, {"alpha", 0.5}};

TEST(Cli, OceOnSmallSample) {
  const fs::path dir = scratch("oce");
  const auto cfg = write_config(dir, {{"command", "oce"},
                                      {"problem", {{"divergence", kAvar}, {"sample", {1, 2, 3, 4}}}},
                                      {"out_dir", "out"}});
  const CliRun r = cli("--config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = report(dir / "out");
  EXPECT_NEAR(rep["payload"]["value"].get<double>(), 3.5, 1e-12);
  EXPECT_EQ(rep["tool"], "rsaa");
  EXPECT_EQ(rep["version"], "0.1.0");
  EXPECT_TRUE(rep.contains("rng"));
  EXPECT_TRUE(rep.contains("kernels"));
  EXPECT_FALSE(rep["config"].contains("out_dir"));
  EXPECT_EQ(rep["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, StochasticCommandWithoutSeedIsAConfigError) {
  const fs::path dir = scratch("noseed");
  const auto cfg = write_config(
      dir, {{"command", "clt"},
            {"problem",
             {{"divergence", kAvar},
              {"box", {{"lo", {0}}, {"hi", {1}}}},
              {"goal", {{"type", "holder"}, {"preset", "squared_distance"}}},
              {"distribution", {{"kind", "uniform"}, {"a", 0}, {"b", 1}}}}},
            {"params", {{"n", 10}, {"R", 100}}},
            {"out_dir", "out"}});
  const CliRun r = cli("--config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["exit"], 2);
  EXPECT_EQ(e["error"], "config");
}

TEST(Cli, BoundsExample) {
  const fs::path dir = scratch("bounds");
  const auto cfg = write_config(dir, {{"command", "bounds"},
                                      {"params", {{"kind", "bounded"}, {"V", 2}, {"D", 1}, {"eta", 16}, {"eps", 1}, {"n", {1024}}}},
                                      {"out_dir", "out"}});
  ASSERT_EQ(cli("--config " + cfg.string()).code, 0);
  EXPECT_NEAR(report(dir / "out")["payload"]["bounds"][0]["bound"].get<double>(), 6.70925255805e-4, 1e-12);
}

TEST(Cli, NonUniqueMinimizerIsRefused) {
  const fs::path dir = scratch("refuse");
  // G = -|theta + z| with Z ~ U(-1, 1): theta = -1 and theta = 1 tie.
  const auto cfg = write_config(
      dir, {{"command", "clt"},
            {"problem",
             {{"divergence", {{"kind", "entropic"}, {"gamma", 1}}},
              {"box", {{"lo", {-1}}, {"hi", {1}}}},
              {"goal", json::parse(R"({"type":"pl","m":1,"d":1,"T":[[1]],"regions":[
                  {"Lambda":[-1],"b":0,"conditions":[{"L":[1],"a":0,"closed":true}]},
                  {"Lambda":[1],"b":0,"conditions":[{"L":[-1],"a":0,"closed":false}]}]})")},
              {"distribution", {{"kind", "uniform"}, {"a", -1}, {"b", 1}}},
              {"grid", {{"coarse_per_dim", 9}, {"refine_rounds", 1}}}}},
            {"params", {{"n", 10}, {"R", 100}, {"quad_nodes", 64}}},
            {"master_seed", 1},
            {"out_dir", "out"}});
  const CliRun r = cli("--config " + cfg.string());
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_EQ(json::parse(r.err)["error"], "refusal");
}

TEST(Cli, BadInputsMapToExitCodes) {
  const fs::path dir = scratch("codes");
  EXPECT_EQ(cli("--config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()).code, 2);
  EXPECT_EQ(cli("--bogus").code, 2);
  const auto bad = write_config(dir, {{"command", "oce"},
                                      {"problem", {{"divergence", {{"kind", "avar"}, {"alpha", 1.5}}}, {"sample", {1}}}},
                                      {"out_dir", "out"}});
  EXPECT_EQ(cli("--config " + bad.string()).code, 2);
  const auto overflow =
      write_config(dir, {{"command", "oce"},
                         {"problem", {{"divergence", {{"kind", "entropic"}, {"gamma", 1}}}, {"sample", {1, 2000}}}},
                         {"out_dir", "out"}});
  const CliRun r = cli("--config " + overflow.string());
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(json::parse(r.err)["error"], "numerical");
}

json clt_config() {
  return {{"command", "clt"},
          {"problem",
           {{"divergence", {{"kind", "entropic"}, {"gamma", 1}}},
            {"box", {{"lo", {0}}, {"hi", {1}}}},
            {"goal", {{"type", "holder"}, {"preset", "squared_distance"}}},
            {"distribution", {{"kind", "uniform"}, {"a", 0}, {"b", 1}}},
            {"grid", {{"coarse_per_dim", 9}, {"refine_rounds", 2}}}}},
          {"params", {{"n", 50}, {"R", 100}, {"quad_nodes", 256}}},
          {"master_seed", 2024},
          {"out_dir", "out"}};
}

TEST(Cli, EmbeddedConfigReproducesPayload) {
  const fs::path dir = scratch("replay");
  const auto cfg = write_config(dir, clt_config());
  ASSERT_EQ(cli("--config " + cfg.string()).code, 0);
  const json first = report(dir / "out");
  std::ofstream(dir / "embedded.json") << first["config"].dump();
  const CliRun r = cli("--config " + (dir / "embedded.json").string() + " --out " + (dir / "again").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json second = report(dir / "again");
  EXPECT_EQ(first["payload"], second["payload"]);
  EXPECT_EQ(first["config_hash"], second["config_hash"]);
  EXPECT_EQ(slurp(dir / "out" / "errors.csv"), slurp(dir / "again" / "errors.csv"));
}

TEST(Cli, SeedFlagOverridesAndChangesDraws) {
  const fs::path dir = scratch("seedflag");
  const auto cfg = write_config(dir, clt_config());
  ASSERT_EQ(cli("--config " + cfg.string() + " --seed 7 --out " + (dir / "a").string()).code, 0);
  ASSERT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "b").string()).code, 0);
  EXPECT_EQ(report(dir / "a")["config"]["master_seed"], 7);
  EXPECT_NE(report(dir / "a")["payload"]["errors"], report(dir / "b")["payload"]["errors"]);
}

TEST(Cli, WritesOnlyInsideOutDir) {
  const fs::path dir = scratch("confined");
  const auto cfg = write_config(dir, clt_config());
  ASSERT_EQ(cli("--config " + cfg.string()).code, 0);
  std::size_t outside = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir);
    if (rel != "config.json" && *rel.begin() != "out") ++outside;
  }
  EXPECT_EQ(outside, 0u);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "errors.csv"));
}

TEST(Cli, ThreadCountDoesNotChangeResults) {
  const fs::path dir = scratch("threads");
  const auto cfg = write_config(dir, clt_config());
  ASSERT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "one").string(), "RISK_SAA_THREADS=1").code, 0);
  ASSERT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "four").string() + " --threads 4").code, 0);
  EXPECT_EQ(report(dir / "one")["payload"], report(dir / "four")["payload"]);
  EXPECT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "x").string(), "RISK_SAA_THREADS=zero").code, 2);
}

TEST(Cli, ScalarKernelsAgree) {
  const fs::path dir = scratch("kernels");
  const auto cfg = write_config(dir, clt_config());
  ASSERT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "auto").string()).code, 0);
  ASSERT_EQ(cli("--config " + cfg.string() + " --out " + (dir / "scalar").string(), "RSAA_KERNELS=scalar").code, 0);
  EXPECT_EQ(report(dir / "scalar")["kernels"], "scalar");
  const auto a = report(dir / "auto")["payload"]["errors"].get<std::vector<double>>();
  const auto b = report(dir / "scalar")["payload"]["errors"].get<std::vector<double>>();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Cli, Version) { EXPECT_EQ(cli("--version").code, 0); }

}  // namespace
