#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "naiad/core.hpp"
#include "naiad/jsonl.hpp"

namespace fs = std::filesystem;
using namespace naiad;

namespace {

struct Run {
  int exit_code;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run cli(const std::string& args) {
  const std::string cmd = std::string(NAIAD_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("naiad_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const fs::path kFixtures = NAIAD_FIXTURE_DIR;

const char* kOutputs[] = {"pairs.jsonl",      "clusters.json",    "templates.jsonl", "samples.jsonl",
                          "rejected.jsonl",   "judged.jsonl",     "labels.jsonl",    "anchors.jsonl",
                          "calibrated.jsonl", "calibration_report.json", "pareto.json", "report.json",
                          "keywords.json",    "summary.json"};

}  // namespace

TEST(Cli, TemplatesAreByteIdenticalAcrossRuns) {
  const auto a = cli("templates --n 100 --seed 7");
  const auto b = cli("templates --n 100 --seed 7");
  ASSERT_EQ(a.exit_code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  std::size_t lines = std::count(a.out.begin(), a.out.end(), '\n');
  EXPECT_EQ(lines, 100u);
  EXPECT_NE(cli("templates --n 100 --seed 8").out, a.out);
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const auto r = cli("frobnicate");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("Usage"), std::string::npos) << r.out;
  EXPECT_NE(cli("").exit_code, 0);
}

TEST(Cli, MissingInputIsNamed) {
  const auto r = cli("keywords --samples /nonexistent/samples.jsonl");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("/nonexistent/samples.jsonl"), std::string::npos) << r.out;
}

TEST(Cli, StagesChainThroughFiles) {
  const fs::path dir = scratch("stages");
  auto r = cli("match --queries " + (kFixtures / "queries.jsonl").string() + " --ads " +
               (kFixtures / "ads.jsonl").string() + " --query-emb " + (kFixtures / "query_embeddings.jsonl").string() +
               " --ad-emb " + (kFixtures / "ad_embeddings.jsonl").string() + " --out " + (dir / "pairs.jsonl").string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  r = cli("templates --n 20 --seed 3 --out " + (dir / "t.jsonl").string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  r = cli("synthesize --pairs " + (dir / "pairs.jsonl").string() + " --templates " + (dir / "t.jsonl").string() +
          " --client mock --seed 3 --out " + (dir / "s.jsonl").string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  r = cli("judge --samples " + (dir / "s.jsonl").string() + " --client mock --seed 3 --out " +
          (dir / "j.jsonl").string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto judged = read_jsonl<Sample>(dir / "j.jsonl");
  ASSERT_FALSE(judged.empty());
  for (const auto& s : judged) {
    EXPECT_TRUE(s.judge_raw);
    EXPECT_TRUE(validate_sample(s).empty());
  }
  fs::remove_all(dir);
}

TEST(Cli, PipelineRunIsReproducible) {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const std::string cfg = "--config " + (kFixtures / "pipeline.json").string();
  const auto ra = cli("pipeline run " + cfg + " --out-dir " + a.string());
  ASSERT_EQ(ra.exit_code, 0) << ra.out;
  const auto rb = cli("pipeline run " + cfg + " --out-dir " + b.string() + " --concurrency 1");
  ASSERT_EQ(rb.exit_code, 0) << rb.out;
  for (const char* name : kOutputs) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(read_text(a / name), read_text(b / name)) << name;
  }
  for (const auto& s : read_jsonl<Sample>(a / "calibrated.jsonl")) {
    EXPECT_TRUE(s.calibrated);
    EXPECT_TRUE(validate_sample(s).empty()) << s.sample_id;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, PipelineConfigUnknownKeyFails) {
  const fs::path dir = scratch("badcfg");
  json cfg = json::parse(read_text(kFixtures / "pipeline.json"));
  for (const char* key : {"queries", "ads", "query_embeddings", "ad_embeddings", "bridge_embeddings", "transcripts"}) {
    cfg[key] = (kFixtures / cfg[key].get<std::string>()).string();
  }
  cfg["api_key"] = "sk-should-not-be-here";
  write_text(dir / "p.json", cfg.dump());
  const auto r = cli("pipeline run --config " + (dir / "p.json").string() + " --out-dir " + (dir / "out").string());
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.out.find("api_key"), std::string::npos) << r.out;
  fs::remove_all(dir);
}
