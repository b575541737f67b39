#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "../support/gen.hpp"
#include "naiad/core.hpp"
#include "naiad/jsonl.hpp"
#include "naiad/parallel.hpp"

using namespace naiad;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& field, const std::string& rule) {
  for (const auto& x : v) {
    if (x.field == field && x.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST(AdSpans, CountsWellFormedSpans) {
  EXPECT_EQ(count_ad_spans("plain text"), 0);
  EXPECT_EQ(count_ad_spans("a <ad>b</ad> c"), 1);
  EXPECT_EQ(count_ad_spans("<ad>b</ad><ad>c</ad>"), 2);
  EXPECT_EQ(count_ad_spans("<ad>open only"), std::nullopt);
  EXPECT_EQ(count_ad_spans("close only</ad>"), std::nullopt);
  EXPECT_EQ(count_ad_spans("<ad><ad>x</ad></ad>"), std::nullopt);
  EXPECT_EQ(ad_span_text("x <ad>Brand copy</ad> y"), "Brand copy");
  EXPECT_EQ(ad_span_text("no span"), "");
}

TEST(Validation, SyntheticSampleNeedsExactlyOneSpan) {
  Rng rng(1);
  Sample s = gen::valid_sample(rng, 0);
  s.source = SampleSource::synthetic;
  s.strategy_id = 2;
  s.response = "no markers";
  EXPECT_TRUE(has_violation(validate_sample(s), "response", "missing ad span"));
  s.response = "<ad>a</ad> and <ad>b</ad>";
  EXPECT_TRUE(has_violation(validate_sample(s), "response", "multiple ad spans"));
  s.response = "<ad>a";
  EXPECT_TRUE(has_violation(validate_sample(s), "response", "malformed ad span"));
}

TEST(Validation, StrategyRules) {
  Rng rng(2);
  Sample s = gen::valid_sample(rng, 0);
  s.source = SampleSource::synthetic;
  s.response = "<ad>x</ad>";
  s.strategy_id.reset();
  EXPECT_TRUE(has_violation(validate_sample(s), "strategy_id", "required for synthetic source"));
  s.strategy_id = 5;
  EXPECT_TRUE(has_violation(validate_sample(s), "strategy_id", "out of {1..4}"));

  Sample t = s;
  t.source = SampleSource::human_transcript;
  t.strategy_id = 1;
  t.self_eval = ScoreVector(3, 3, 3, 3);
  const auto v = validate_sample(t);
  EXPECT_TRUE(has_violation(v, "strategy_id", "must be absent for human_transcript source"));
  EXPECT_TRUE(has_violation(v, "self_eval", "must be absent for human_transcript source"));
}

TEST(Validation, ScoreBoundsNameTheField) {
  Rng rng(3);
  Sample s = gen::valid_sample(rng, 0);
  s.judge_raw = ScoreVector(3, 5.5, 3, 3);
  EXPECT_TRUE(has_violation(validate_sample(s), "judge_raw.q2", "out of [1,5]"));
  s.judge_raw = ScoreVector(3, 3, std::nan(""), 3);
  EXPECT_TRUE(has_violation(validate_sample(s), "judge_raw.q3", "out of [1,5]"));

  AnchorRecord a{"a1", ScoreVector(0.5, 3, 3, 3), ScoreVector(3, 3, 3, 3), std::nullopt, {}};
  EXPECT_TRUE(has_violation(validate_anchor(a), "human.q1", "out of [1,5]"));
}

TEST(Validation, BoundaryScoresAreValid) {
  EXPECT_TRUE(in_score_range(1.0));
  EXPECT_TRUE(in_score_range(5.0));
  EXPECT_FALSE(in_score_range(0.999999));
  EXPECT_FALSE(in_score_range(5.000001));
  EXPECT_EQ(clamp_scores(ScoreVector(0, 6, 2.5, 5)), ScoreVector(1, 5, 2.5, 5));
}

TEST(Json, MissingKeyIsNamed) {
  const json j = json::parse(R"({"sample_id":"x","ad":{"ad_id":"a","ad_name":"n","copy":"c"},"response":"r"})");
  try {
    (void)j.get<Sample>();
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("\"query\""), std::string::npos);
  }
}

TEST(Json, ScoreVectorRejectsNonNumbers) {
  EXPECT_THROW((void)json::parse(R"({"q1":1,"q2":"2","q3":3,"q4":4})").get<ScoreVector>(), ParseError);
  EXPECT_THROW((void)json::parse(R"({"q1":1,"q2":2,"q3":3})").get<ScoreVector>(), ParseError);
}

TEST(Dimensions, KeysRoundTrip) {
  for (Dimension d : kAllDimensions) EXPECT_EQ(parse_dimension(dimension_key(d)), d);
  EXPECT_THROW(parse_dimension("q5"), InvalidArgument);
}

// Property: generated valid samples pass validation and survive a JSON round trip.
TEST(CoreProperty, ValidSamplesRoundTrip) {
  Rng rng(42);
  for (std::size_t i = 0; i < 500; ++i) {
    const Sample s = gen::valid_sample(rng, i);
    EXPECT_TRUE(validate_sample(s).empty()) << json(s).dump();
    const Sample back = json::parse(json(s).dump()).get<Sample>();
    EXPECT_EQ(back, s);
  }
}

// Property: analysis scores are calibrated when present, else judge_raw.
TEST(CoreProperty, AnalysisScoresPreferCalibrated) {
  Rng rng(43);
  for (std::size_t i = 0; i < 200; ++i) {
    const Sample s = gen::valid_sample(rng, i);
    const auto a = analysis_scores(s);
    if (s.calibrated) {
      EXPECT_EQ(a, s.calibrated);
    } else {
      EXPECT_EQ(a, s.judge_raw);
    }
  }
}

TEST(Jsonl, ErrorsCarryPathAndLine) {
  const auto path = std::filesystem::temp_directory_path() / "naiad_core_bad.jsonl";
  write_text(path, R"({"query_id":"a","query":"x","category":"c"})" "\n\n" "{broken\n");
  try {
    (void)read_jsonl<QueryRecord>(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(path.string() + ":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Random, DerivedStreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  // FNV-1a 64 reference value for "a".
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Random, UniformIntCoversRangeEvenly) {
  Rng rng(5);
  std::array<int, 5> counts{};
  for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_int(1, 5) - 1];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Parallel, OrderIndependentOfWidth) {
  auto square = [](std::size_t i) { return static_cast<int>(i * i); };
  EXPECT_EQ(parallel_map(100, 1, square), parallel_map(100, 8, square));
}

TEST(Parallel, LowestFailingIndexWins) {
  try {
    (void)parallel_map(50, 4, [](std::size_t i) -> int {
      if (i == 7 || i == 30) throw InvalidArgument("fail " + std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "fail 7");
  }
}
