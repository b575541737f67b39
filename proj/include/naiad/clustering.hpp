#pragma once

// Strategy discovery: PCA reduction of bridge embeddings, k-means, silhouette
// scoring and silhouette-peak selection of K.
//
// Point sets are row-major: one point per row.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "naiad/error.hpp"
#include "naiad/random.hpp"

namespace naiad {

using PointSet = Eigen::MatrixXd;

struct VarianceFraction {
  double value = 0.85;
};

struct FixedDim {
  int value = 30;
};

using PcaTarget = std::variant<VarianceFraction, FixedDim>;

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // rows are unit principal directions
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(components.rows()); }
};

/// Eigendecomposition of the sample covariance (divisor n-1). Each component
/// is signed so its largest-magnitude entry is positive.
inline PcaModel pca_fit(const PointSet& x, PcaTarget target) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw InvalidArgument("pca_fit needs at least 2 points");
  if (d < 1) throw InvalidArgument("pca_fit needs dimension >= 1");

  PcaModel m;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DegenerateError("covariance eigendecomposition failed");

  // Eigen returns ascending order.
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  m.total_variance = values.sum();

  Eigen::Index keep = 0;
  if (const auto* f = std::get_if<VarianceFraction>(&target)) {
    if (!(f->value > 0.0 && f->value <= 1.0)) throw InvalidArgument("variance fraction must lie in (0,1]");
    if (m.total_variance <= 0.0) throw DegenerateError("zero-variance data cannot meet a variance target");
    double cum = 0.0;
    // Relative slack so f = 1.0 is reachable despite rounding in the eigenvalues.
    const double goal = f->value * m.total_variance * (1.0 - 1e-12);
    while (keep < d) {
      cum += values[keep];
      ++keep;
      if (cum >= goal) break;
    }
  } else {
    const int r = std::get<FixedDim>(target).value;
    if (r < 1 || r > d) throw InvalidArgument("fixed_dim must lie in [1, input dimension]");
    keep = r;
  }

  m.components = vectors.leftCols(keep).transpose();
  m.explained_variance = values.head(keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    Eigen::Index arg = 0;
    m.components.row(k).cwiseAbs().maxCoeff(&arg);
    if (m.components(k, arg) < 0.0) m.components.row(k) *= -1.0;
  }
  return m;
}

inline PointSet pca_project(const PcaModel& m, const PointSet& x) {
  if (x.cols() != m.mean.size()) {
    throw InvalidArgument("dimension mismatch: model expects " + std::to_string(m.mean.size()) + ", got " +
                          std::to_string(x.cols()));
  }
  return (x.rowwise() - m.mean.transpose()) * m.components.transpose();
}

inline PointSet pca_reconstruct(const PcaModel& m, const PointSet& z) {
  return (z * m.components).rowwise() + m.mean.transpose();
}

/// Variance-target stage followed by a fixed-dimension stage; the second stage
/// is capped at whatever the first retained.
struct TwoStageReduction {
  PcaModel variance_stage;
  PcaModel fixed_stage;
  PointSet reduced;
};

inline TwoStageReduction reduce_two_stage(const PointSet& x, double variance_fraction, int reduce_dim) {
  TwoStageReduction out;
  out.variance_stage = pca_fit(x, VarianceFraction{variance_fraction});
  const PointSet mid = pca_project(out.variance_stage, x);
  const int dim = std::min<int>(reduce_dim, static_cast<int>(mid.cols()));
  out.fixed_stage = pca_fit(mid, FixedDim{dim});
  out.reduced = pca_project(out.fixed_stage, mid);
  return out;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  int restarts = 10;
  double tol = 1e-6;
  int max_iter = 300;
};

struct ClusteringResult {
  int k = 0;
  Eigen::MatrixXd centroids;  // k x d
  std::vector<int> assignments;
  double sse = 0.0;
  std::optional<double> silhouette;  // defined only for k >= 2 with no empty cluster
  int iterations = 0;
};

namespace detail {

inline int nearest_centroid(const PointSet& x, Eigen::Index i, const Eigen::MatrixXd& c, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    const double dd = (x.row(i) - c.row(k)).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = static_cast<int>(k);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

inline Eigen::MatrixXd kmeanspp_init(const PointSet& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (x.row(i) - c.row(0)).squaredNorm();
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = n - 1;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > r && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    c.row(j) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (x.row(i) - c.row(j)).squaredNorm());
  }
  return c;
}

inline ClusteringResult lloyd(const PointSet& x, Eigen::MatrixXd centroids, const KMeansOptions& opt) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  std::vector<int> assign(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) assign[i] = nearest_centroid(x, i, centroids);

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    // Repair empty clusters by moving in the point farthest from its centroid.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assign) ++counts[a];
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        const double dd = (x.row(i) - centroids.row(assign[i])).squaredNorm();
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      if (far < 0) break;
      --counts[assign[far]];
      assign[far] = j;
      counts[j] = 1;
    }

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(assign[i]) += x.row(i);
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        next.row(j) /= static_cast<double>(counts[j]);
      } else {
        next.row(j) = centroids.row(j);
      }
    }
    double shift = 0.0;
    for (int j = 0; j < k; ++j) shift = std::max(shift, (next.row(j) - centroids.row(j)).norm());
    centroids = std::move(next);

    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = nearest_centroid(x, i, centroids);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed || shift < opt.tol) {
      // The final assignment must not leave a cluster empty.
      std::vector<int> c2(static_cast<std::size_t>(k), 0);
      for (int a : assign) ++c2[a];
      if (std::find(c2.begin(), c2.end(), 0) == c2.end()) {
        ++iter;
        break;
      }
    }
  }

  ClusteringResult r;
  r.k = k;
  r.iterations = iter;
  r.centroids = std::move(centroids);
  r.assignments = std::move(assign);
  for (Eigen::Index i = 0; i < n; ++i) r.sse += (x.row(i) - r.centroids.row(r.assignments[i])).squaredNorm();
  return r;
}

}  // namespace detail

/// Mean silhouette with Euclidean distances. Singleton-cluster members score 0.
inline double silhouette(const PointSet& x, const std::vector<int>& assignments) {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(assignments.size()) != n) {
    throw InvalidArgument("assignment count does not match point count");
  }
  if (n == 0) throw InvalidArgument("silhouette of empty point set");
  const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  if (*std::min_element(assignments.begin(), assignments.end()) < 0) throw InvalidArgument("negative cluster index");
  if (k < 2) throw InvalidArgument("silhouette needs at least 2 clusters");
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++counts[a];
  for (int j = 0; j < k; ++j) {
    if (counts[j] == 0) throw InvalidArgument("cluster " + std::to_string(j) + " is empty");
  }

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = assignments[i];
    if (counts[own] == 1) continue;  // s(i) = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[assignments[j]] += (x.row(i) - x.row(j)).norm();
    }
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

/// k-means++ seeding, Lloyd iterations, best of `restarts` by SSE.
inline ClusteringResult kmeans(const PointSet& x, int k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw InvalidArgument("kmeans on empty input");
  if (k < 1 || k > n) throw InvalidArgument("K must lie in [1, number of points]");
  std::optional<ClusteringResult> best;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto res = detail::lloyd(x, detail::kmeanspp_init(x, k, rng), opt);
    if (!best || res.sse < best->sse) best = std::move(res);
  }
  if (k >= 2) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : best->assignments) ++counts[a];
    if (std::find(counts.begin(), counts.end(), 0) == counts.end()) {
      best->silhouette = silhouette(x, best->assignments);
    }
  }
  return *best;
}

struct KCurvePoint {
  int k = 0;
  double sse = 0.0;
  double silhouette = 0.0;
};

struct SelectKResult {
  int best_k = 0;
  std::vector<KCurvePoint> curve;
  ClusteringResult best;
};

/// K* = argmax silhouette over [k_min, k_max]; ties go to the smaller K.
inline SelectKResult select_k(const PointSet& x, int k_min, int k_max, std::uint64_t seed,
                              const KMeansOptions& opt = {}) {
  const auto n = static_cast<int>(x.rows());
  if (k_min < 2 || k_max < k_min || k_max > n - 1) {
    throw InvalidArgument("k range must satisfy 2 <= k_min <= k_max <= n-1");
  }
  SelectKResult out;
  double best_s = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    auto res = kmeans(x, k, derive_seed(seed, static_cast<std::uint64_t>(k)), opt);
    const double s = res.silhouette.value_or(-1.0);
    out.curve.push_back({k, res.sse, s});
    if (s > best_s) {
      best_s = s;
      out.best_k = k;
      out.best = std::move(res);
    }
  }
  return out;
}

}  // namespace naiad
