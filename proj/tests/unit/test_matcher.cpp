#include <cmath>

#include <gtest/gtest.h>

#include "naiad/matcher.hpp"
#include "naiad/random.hpp"

using namespace naiad;

namespace {

EmbeddingTable random_table(Rng& rng, const std::string& prefix, std::size_t n, std::size_t dim) {
  std::vector<EmbeddingEntry> e;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    e.push_back({prefix + std::to_string(i), v});
  }
  return EmbeddingTable(std::move(e));
}

// Oracle in extended precision.
double cosine_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

}  // namespace

TEST(Cosine, KnownValues) {
  const std::vector<double> x{1, 0}, y{0, 1}, z{1, 1}, w{-2, 0};
  EXPECT_NEAR(cosine_similarity(x, y), 0.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(x, z), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(x, w), -1.0, 1e-15);
  EXPECT_THROW(cosine_similarity(x, std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(Cosine, ScaleInvariantProperty) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const double c = cosine_similarity(a, b);
    EXPECT_NEAR(c, cosine_oracle(a, b), 1e-12);
    auto a2 = a;
    for (auto& v : a2) v *= 3.7;
    EXPECT_NEAR(cosine_similarity(a2, b), c, 1e-12);
    EXPECT_LE(std::abs(c), 1.0 + 1e-12);
  }
}

TEST(EmbeddingTable, RejectsBadInput) {
  EXPECT_THROW(EmbeddingTable({{"a", {1, 2}}, {"b", {1}}}), InvalidArgument);
  EXPECT_THROW(EmbeddingTable({{"a", {0, 0}}}), InvalidArgument);
  EXPECT_THROW(EmbeddingTable({{"a", {1, 0}}, {"a", {0, 1}}}), InvalidArgument);
  EXPECT_THROW(EmbeddingTable(std::vector<EmbeddingEntry>{{"a", {}}}), InvalidArgument);
}

TEST(BestMatch, AgreesWithBruteForce) {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto ads = random_table(rng, "ad", 40, 6);
    std::vector<double> q(6);
    for (auto& x : q) x = rng.normal();
    std::string best;
    double best_s = -2;
    for (const auto& e : ads.entries()) {
      const double s = cosine_oracle(q, e.vec);
      if (s > best_s) {
        best_s = s;
        best = e.id;
      }
    }
    const auto m = best_match(q, ads);
    EXPECT_EQ(m.ad_id, best);
    EXPECT_NEAR(m.similarity, best_s, 1e-12);
  }
}

TEST(BestMatch, TiesGoToLowestId) {
  const EmbeddingTable ads({{"zeta", {1, 0}}, {"alpha", {2, 0}}, {"mid", {0, 1}}});
  EXPECT_EQ(best_match(std::vector<double>{1, 0}, ads).ad_id, "alpha");
}

TEST(MatchCorpus, TercilesSplitSimilarity) {
  Rng rng(13);
  const auto queries = random_table(rng, "q", 60, 5);
  const auto ads = random_table(rng, "ad", 20, 5);
  const auto rows = match_corpus(queries, ads);
  ASSERT_EQ(rows.size(), 60u);
  std::array<int, 3> counts{};
  double max_low = -2, min_high = 2;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].query_id, queries.entries()[i].id);
    ++counts[static_cast<int>(rows[i].tier)];
    if (rows[i].tier == MatchTier::low) max_low = std::max(max_low, rows[i].similarity);
    if (rows[i].tier == MatchTier::high) min_high = std::min(min_high, rows[i].similarity);
  }
  EXPECT_LT(max_low, min_high);
  for (int c : counts) EXPECT_NEAR(c, 20, 1);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> s{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(sorted_quantile(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(s, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sorted_quantile(s, 1.0 / 3.0), 2.0);
}
