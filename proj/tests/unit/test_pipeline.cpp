#include <filesystem>

#include <gtest/gtest.h>

#include "naiad/mock_client.hpp"
#include "naiad/pipeline.hpp"

using namespace naiad;

namespace {

const std::filesystem::path kFixtures = NAIAD_FIXTURE_DIR;

json base_config() { return json::parse(read_text(kFixtures / "pipeline.json")); }

}  // namespace

TEST(PipelineConfig, ResolvesRelativePaths) {
  const auto c = parse_pipeline_config(base_config(), kFixtures);
  EXPECT_EQ(c.queries, kFixtures / "queries.jsonl");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.cluster.reduce_dim, 8);
}

TEST(PipelineConfig, RejectsUnknownKeysBadSeedsAndMissingFiles) {
  auto j = base_config();
  j["colour"] = "blue";
  EXPECT_THROW(parse_pipeline_config(j, kFixtures), ParseError);
  j = base_config();
  j["seed"] = 1.5;
  EXPECT_THROW(parse_pipeline_config(j, kFixtures), ParseError);
  j = base_config();
  j["ads"] = "missing.jsonl";
  try {
    parse_pipeline_config(j, kFixtures);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("missing.jsonl"), std::string::npos);
  }
  j = base_config();
  j.erase("queries");
  EXPECT_THROW(parse_pipeline_config(j, kFixtures), ParseError);
}

TEST(Stages, MatchPairsJoinsRecords) {
  const auto c = parse_pipeline_config(base_config(), kFixtures);
  const auto pairs = match_pairs(read_jsonl<QueryRecord>(c.queries), read_jsonl<AdMeta>(c.ads),
                                 EmbeddingTable(read_jsonl<EmbeddingEntry>(c.query_embeddings)),
                                 EmbeddingTable(read_jsonl<EmbeddingEntry>(c.ad_embeddings)));
  ASSERT_EQ(pairs.size(), 50u);
  for (const auto& p : pairs) {
    EXPECT_FALSE(p.query.empty());
    EXPECT_FALSE(p.ad.copy.empty());
    EXPECT_TRUE(p.match_tier == "low" || p.match_tier == "medium" || p.match_tier == "high");
  }
}

TEST(Stages, MakeJobsRoundRobin) {
  std::vector<QueryAdPair> pairs(3);
  for (int i = 0; i < 3; ++i) pairs[i].query_id = "q" + std::to_string(i);
  const auto t = sample_templates(7, 0.5, 1);
  const auto jobs = make_jobs(pairs, t, 8, 5);
  ASSERT_EQ(jobs.size(), 7u);
  EXPECT_EQ(jobs[4].job_id, "s00004");
  EXPECT_EQ(jobs[4].pair.query_id, "q1");
  EXPECT_EQ(jobs[4].strategy_id, 1);
  EXPECT_EQ(jobs[5].strategy_id, 2);
  EXPECT_THROW(make_jobs({}, t, 8, 5), InvalidArgument);
}

TEST(Stages, SimulatedAnnotationExportsConsensus) {
  Rng rng(3);
  std::vector<Sample> judged;
  for (int i = 0; i < 30; ++i) {
    Sample s;
    s.sample_id = "s" + std::to_string(i);
    s.query = "q";
    s.ad = {"a", "n", "i", "c", {}};
    s.response = "<ad>x</ad>";
    s.strategy_id = 1;
    s.judge_raw = ScoreVector(3, 3.5, 2, 4);
    judged.push_back(s);
  }
  SimulatedRaters sim;
  sim.anchors = 20;
  sim.noise_sd = 0.0;
  const auto anchors = simulate_annotation(judged, sim);
  ASSERT_EQ(anchors.size(), 20u);
  for (const auto& a : anchors) EXPECT_EQ(a.human, ScoreVector(2.5, 3, 1.5, 3.5));
}

TEST(Stages, ReportsRequireScores) {
  EXPECT_THROW(pareto_report(std::vector<Sample>{}, ScoreVector(3, 3, 3, 3)), InvalidArgument);
  EXPECT_THROW(keyword_report(std::vector<Sample>{}, "max_front", 5), InvalidArgument);
  Sample s;
  s.logical_bridge = "x";
  s.judge_raw = ScoreVector(3, 3, 3, 3);
  EXPECT_THROW(keyword_report(std::vector<Sample>{s}, "middle", 5), InvalidArgument);
}

TEST(Stages, LoadReferenceAcceptsVectorOrAnchors) {
  const auto dir = std::filesystem::temp_directory_path();
  write_text(dir / "naiad_ref.json", R"({"q1":3,"q2":3.5,"q3":2,"q4":4})");
  EXPECT_EQ(load_reference(dir / "naiad_ref.json"), ScoreVector(3, 3.5, 2, 4));
  const std::vector<AnchorRecord> anchors{{"a", ScoreVector(2, 2, 2, 2), ScoreVector(3, 3, 3, 3), std::nullopt, {}},
                                          {"b", ScoreVector(4, 3, 2, 1), ScoreVector(3, 3, 3, 3), std::nullopt, {}}};
  write_jsonl(dir / "naiad_ref.jsonl", anchors);
  EXPECT_EQ(load_reference(dir / "naiad_ref.jsonl"), ScoreVector(3, 2.5, 2, 1.5));
}
