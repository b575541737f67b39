#include <gtest/gtest.h>

#include "naiad/clustering.hpp"

using namespace naiad;

namespace {

PointSet blobs(std::uint64_t seed, int k, int per, int dim, double spread, double sd) {
  Rng rng(seed);
  Eigen::MatrixXd centers(k, dim);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < dim; ++j) centers(c, j) = rng.normal(0.0, spread);
  }
  PointSet x(k * per, dim);
  for (int i = 0; i < k * per; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = centers(i % k, j) + rng.normal(0.0, sd);
  }
  return x;
}

// Oracle: silhouette by explicit per-point loops, O(n^2) per point.
double silhouette_oracle(const PointSet& x, const std::vector<int>& a) {
  const auto n = x.rows();
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> by;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      auto& e = by[a[j]];
      e.first += (x.row(i) - x.row(j)).norm();
      e.second += 1;
    }
    if (!by.count(a[i])) continue;
    const double ai = by[a[i]].first / by[a[i]].second;
    double bi = 1e300;
    for (auto& [c, e] : by) {
      if (c != a[i]) bi = std::min(bi, e.first / e.second);
    }
    total += (bi - ai) / std::max(ai, bi);
  }
  return total / n;
}

}  // namespace

TEST(Pca, VarianceFractionKeepsSmallestSufficientPrefix) {
  Rng rng(1);
  PointSet x(300, 5);
  const double scales[] = {5, 3, 1, 0.5, 0.1};
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.normal(0.0, scales[j]);
  }
  const auto m = pca_fit(x, VarianceFraction{0.85});
  const double kept = m.explained_variance.head(m.output_dim()).sum();
  EXPECT_GE(kept / m.total_variance, 0.85);
  if (m.output_dim() > 1) {
    EXPECT_LT(m.explained_variance.head(m.output_dim() - 1).sum() / m.total_variance, 0.85);
  }
  // components orthonormal
  const Eigen::MatrixXd g = m.components * m.components.transpose();
  EXPECT_TRUE(g.isIdentity(1e-9));
}

TEST(Pca, FullRankReconstructionIsExact) {
  Rng rng(2);
  PointSet x(50, 4);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
  }
  const auto m = pca_fit(x, FixedDim{4});
  EXPECT_TRUE(pca_reconstruct(m, pca_project(m, x)).isApprox(x, 1e-9));
}

TEST(Pca, TwoStageCapsSecondStage) {
  const PointSet x = blobs(3, 4, 25, 12, 4.0, 0.5);
  const auto r = reduce_two_stage(x, 0.85, 30);
  EXPECT_LE(r.fixed_stage.output_dim(), r.variance_stage.output_dim());
  EXPECT_EQ(r.reduced.cols(), r.fixed_stage.output_dim());
  EXPECT_EQ(r.reduced.rows(), 100);
}

TEST(Silhouette, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointSet x = blobs(seed, 3, 15, 3, 2.0, 1.0);
    Rng rng(seed + 100);
    std::vector<int> a(x.rows());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<int>(i % 3);
    rng.shuffle(a);
    EXPECT_NEAR(silhouette(x, a), silhouette_oracle(x, a), 1e-12);
  }
}

TEST(Silhouette, RejectsEmptyClusterAndSingleCluster) {
  PointSet x(4, 1);
  x << 0, 1, 2, 3;
  EXPECT_THROW(silhouette(x, {0, 0, 2, 2}), InvalidArgument);
  EXPECT_THROW(silhouette(x, {0, 0, 0, 0}), InvalidArgument);
}

TEST(KMeans, SseIsSumOfSquaredDistancesToAssignedCentroid) {
  const PointSet x = blobs(4, 3, 20, 2, 5.0, 0.5);
  const auto r = kmeans(x, 3, 9);
  double sse = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sse += (x.row(i) - r.centroids.row(r.assignments[i])).squaredNorm();
  EXPECT_NEAR(r.sse, sse, 1e-9);
  // every point is assigned to its nearest centroid
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double own = (x.row(i) - r.centroids.row(r.assignments[i])).squaredNorm();
    for (int c = 0; c < 3; ++c) EXPECT_LE(own, (x.row(i) - r.centroids.row(c)).squaredNorm() + 1e-12);
  }
}

TEST(KMeans, DeterministicForSeed) {
  const PointSet x = blobs(5, 4, 10, 3, 3.0, 1.0);
  EXPECT_EQ(kmeans(x, 4, 77).assignments, kmeans(x, 4, 77).assignments);
}

TEST(KMeans, ArgumentChecks) {
  PointSet x(3, 1);
  x << 0, 1, 2;
  EXPECT_THROW(kmeans(x, 4, 0), InvalidArgument);
  EXPECT_THROW(kmeans(x, 0, 0), InvalidArgument);
}

TEST(SelectK, FindsBlobCount) {
  const PointSet x = blobs(6, 4, 30, 10, 6.0, 1.0);
  const auto r = select_k(x, 2, 8, 1);
  EXPECT_EQ(r.best_k, 4);
  ASSERT_EQ(r.curve.size(), 7u);
  // SSE is non-increasing in K on well-separated data
  for (std::size_t i = 1; i < r.curve.size(); ++i) EXPECT_LE(r.curve[i].sse, r.curve[i - 1].sse * 1.0001);
  EXPECT_THROW(select_k(x, 1, 5, 0), InvalidArgument);
  EXPECT_THROW(select_k(x, 2, 200, 0), InvalidArgument);
}
