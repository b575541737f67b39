#include <gtest/gtest.h>

#include "../support/gen.hpp"
#include "../support/oracles.hpp"
#include "naiad/analytics.hpp"

using namespace naiad;

namespace {

std::vector<ScoredPoint> random_points(Rng& rng, std::size_t n, bool coarse) {
  std::vector<ScoredPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    ScoreVector v;
    for (std::size_t d = 0; d < 4; ++d) v[d] = coarse ? rng.uniform_int(1, 5) : gen::score(rng);
    pts.push_back({"p" + std::to_string(i), v});
  }
  return pts;
}

}  // namespace

TEST(Dominance, Strictness) {
  EXPECT_TRUE(dominates(ScoreVector(2, 2, 2, 2), ScoreVector(2, 2, 2, 1)));
  EXPECT_FALSE(dominates(ScoreVector(2, 2, 2, 2), ScoreVector(2, 2, 2, 2)));
  EXPECT_FALSE(dominates(ScoreVector(3, 1, 2, 2), ScoreVector(2, 2, 2, 2)));
}

TEST(Pareto, MatchesQuadraticOracle) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto pts = random_points(rng, 300, t % 2 == 0);
    std::vector<ScoreVector> v, neg;
    for (const auto& p : pts) {
      v.push_back(p.scores);
      neg.push_back(ScoreVector(-p.scores[0], -p.scores[1], -p.scores[2], -p.scores[3]));
    }
    std::vector<std::string> max_o, min_o;
    for (auto i : oracle::pareto_max(v)) max_o.push_back(pts[i].id);
    for (auto i : oracle::pareto_max(neg)) min_o.push_back(pts[i].id);
    const auto f = pareto_fronts(pts);
    EXPECT_EQ(f.max_front, max_o);
    EXPECT_EQ(f.min_front, min_o);
  }
}

TEST(Pareto, DuplicatesBothStay) {
  const std::vector<ScoredPoint> pts{{"a", ScoreVector(5, 5, 5, 5)}, {"b", ScoreVector(5, 5, 5, 5)},
                                     {"c", ScoreVector(1, 1, 1, 1)}};
  const auto f = pareto_fronts(pts);
  EXPECT_EQ(f.max_front, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(f.min_front, (std::vector<std::string>{"c"}));
}

TEST(Superiority, StrictlyGreaterThanReference) {
  const std::vector<ScoredPoint> pts{{"a", ScoreVector(3, 4, 1, 5)}, {"b", ScoreVector(2, 4, 2, 5)},
                                     {"c", ScoreVector(4, 1, 3, 5)}};
  EXPECT_EQ(superiority_ratio(pts, ScoreVector(3, 3, 2, 5)), ScoreVector(1.0 / 3, 2.0 / 3, 1.0 / 3, 0));
}

TEST(MacroRate, Definition) {
  const std::vector<double> s{2.952};
  EXPECT_NEAR(macro_rate(s), 59.04, 1e-9);
  const std::vector<double> full{1, 5};
  EXPECT_DOUBLE_EQ(macro_rate(full), 60.0);
  EXPECT_THROW(macro_rate(std::vector<double>{}), InvalidArgument);
}

TEST(CohensD, MeanOverSampleSd) {
  const std::vector<double> d{1, 2, 3, 4};
  EXPECT_NEAR(cohens_d(d), 2.5 / std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_THROW(cohens_d(std::vector<double>{1, 1, 1}), DegenerateError);
}

TEST(Wilcoxon, AllPositiveTen) {
  const std::vector<double> d(10, 1.0);
  const auto r = wilcoxon_signed_rank(d);
  EXPECT_DOUBLE_EQ(r.w_plus, 55.0);
  EXPECT_DOUBLE_EQ(r.w_minus, 0.0);
  // all |d| tied: var = 10*11*21/24 - (1000-10)/48 = 75.625
  const double z = (27.5 - 0.5) / std::sqrt(75.625);
  EXPECT_NEAR(r.p_value, std::erfc(z / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(r.p_value, 0.0019, 5e-5);
}

TEST(Wilcoxon, MatchesCountingOracle) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> d;
    const std::size_t n = 5 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) d.push_back(std::round(rng.normal(0.2, 1.0) * 4) / 4);
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0; })) continue;
    const auto r = wilcoxon_signed_rank(d);
    const auto o = oracle::wilcoxon(d);
    EXPECT_NEAR(r.w_plus, o.w_plus, 1e-9);
    EXPECT_NEAR(r.w_minus, o.w_minus, 1e-9);
    EXPECT_NEAR(r.p_value, o.p, 1e-12);
  }
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{0, 0}), DegenerateError);
}

TEST(AccAt, InclusiveThreshold) {
  const std::vector<ScoreVector> a{ScoreVector(3.5, 3, 3, 3), ScoreVector(4, 3, 3, 3)};
  const std::vector<ScoreVector> t{ScoreVector(3, 3, 3, 3), ScoreVector(3, 3, 3, 4)};
  EXPECT_EQ(acc_at(0.5, a, t), ScoreVector(0.5, 1, 1, 0.5));
}

TEST(Tokenize, LettersOnlyLowercasedStopwordsDropped) {
  EXPECT_EQ(tokenize("The Brand's 2 new Shoes, and RUNNING!"),
            (std::vector<std::string>{"brand", "new", "shoes", "running"}));
  // non-ASCII letters are kept as part of words
  EXPECT_EQ(tokenize("café crème"), (std::vector<std::string>{"café", "crème"}));
}

TEST(Tfidf, MatchesHandComputation) {
  const std::vector<std::string> docs{"alpha beta beta", "beta gamma", "gamma gamma delta"};
  const auto w = tfidf(docs);
  const auto idf = [](double df) { return std::log(4.0 / (1.0 + df)) + 1.0; };
  EXPECT_NEAR(w[0].at("beta"), 2 * idf(2), 1e-12);
  EXPECT_NEAR(w[0].at("alpha"), idf(1), 1e-12);
  EXPECT_NEAR(w[2].at("gamma"), 2 * idf(2), 1e-12);
  const std::vector<std::size_t> part{0, 1};
  const auto top = tfidf_keywords(docs, part, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].term, "beta");
  EXPECT_NEAR(top[0].weight, 3 * idf(2), 1e-12);
  // alpha idf(1) and gamma idf(2): alpha wins
  EXPECT_EQ(top[1].term, "alpha");
}

TEST(Tfidf, TiesBreakAlphabetically) {
  const std::vector<std::string> docs{"zebra apple mango"};
  const auto top = tfidf_keywords(docs, 3);
  EXPECT_EQ(top[0].term, "apple");
  EXPECT_EQ(top[1].term, "mango");
  EXPECT_EQ(top[2].term, "zebra");
}

TEST(ComparePaired, RowsAndPairing) {
  std::vector<ScoredPoint> before{{"a", ScoreVector(2, 2, 2, 2)}, {"b", ScoreVector(3, 3, 3, 3)},
                                  {"c", ScoreVector(4, 4, 4, 4)}};
  std::vector<ScoredPoint> after{{"c", ScoreVector(5, 4, 4, 4)}, {"a", ScoreVector(3, 2, 2, 2)},
                                 {"b", ScoreVector(3.5, 3, 3, 3)}, {"z", ScoreVector(1, 1, 1, 1)}};
  const auto rows = compare_paired(before, after);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].first, "q1");
  EXPECT_EQ(rows[4].first, "average");
  EXPECT_NEAR(rows[0].second.mean_diff, 2.5 / 3, 1e-12);
  EXPECT_FALSE(rows[1].second.cohens_d);
  EXPECT_FALSE(rows[1].second.wilcoxon);
  EXPECT_NEAR(rows[4].second.mean_diff, 2.5 / 12, 1e-12);
}
