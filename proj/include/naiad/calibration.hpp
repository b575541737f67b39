#pragma once

// Per-dimension judge rectification against human anchors: OLS polynomial
// rectifiers scored by BIC, stratified regression-tree rectifiers scored by
// VRR, Wasserstein-routed selection, and variance-calibrated application.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "naiad/core.hpp"
#include "naiad/parallel.hpp"
#include "naiad/random.hpp"

namespace naiad {

// ---------------------------------------------------------------------------
// Per-dimension points and features

/// One anchor or unlabeled record projected onto a single dimension.
struct CalPoint {
  double judge = 0.0;
  std::optional<double> self_eval;
  DomainLabels domain;
  double human = 0.0;  // unused for unlabeled points
};

inline std::vector<CalPoint> anchor_points(std::span<const AnchorRecord> anchors, Dimension d) {
  std::vector<CalPoint> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) {
    CalPoint p{a.judge_raw[d], std::nullopt, a.domain_labels, a.human[d]};
    if (a.self_eval) p.self_eval = (*a.self_eval)[d];
    out.push_back(std::move(p));
  }
  return out;
}

inline CalPoint sample_point(const Sample& s, Dimension d) {
  if (!s.judge_raw) throw InvalidArgument("sample " + s.sample_id + " has no judge_raw");
  CalPoint p{(*s.judge_raw)[d], std::nullopt, domain_labels_of(s), 0.0};
  if (s.self_eval) p.self_eval = (*s.self_eval)[d];
  return p;
}

struct FeatureRow {
  double s_c = 0.0;
  double g_c = 0.0;
  DomainLabels domain;
};

/// Centering constants fitted on anchors and reused verbatim on new points.
struct FeatureExtractor {
  double judge_mean = 0.0;
  double gap_mean = 0.0;

  FeatureRow apply(const CalPoint& p) const {
    FeatureRow r;
    r.s_c = p.judge - judge_mean;
    r.g_c = p.self_eval ? (*p.self_eval - p.judge) - gap_mean : 0.0;
    r.domain = p.domain;
    return r;
  }
};

/// Anchors without a self-evaluation get g_c = 0; the gap mean is taken over
/// the anchors that have one.
inline FeatureExtractor fit_extractor(std::span<const CalPoint> anchors) {
  if (anchors.empty()) throw InvalidArgument("empty anchor set");
  FeatureExtractor fx;
  double gap_sum = 0.0;
  std::size_t gap_n = 0;
  for (const auto& p : anchors) {
    fx.judge_mean += p.judge;
    if (p.self_eval) {
      gap_sum += *p.self_eval - p.judge;
      ++gap_n;
    }
  }
  fx.judge_mean /= static_cast<double>(anchors.size());
  fx.gap_mean = gap_n ? gap_sum / static_cast<double>(gap_n) : 0.0;
  return fx;
}

struct FeatureTable {
  FeatureExtractor extractor;
  std::vector<FeatureRow> rows;
};

inline FeatureTable extract_features(std::span<const CalPoint> anchors) {
  FeatureTable t{fit_extractor(anchors), {}};
  t.rows.reserve(anchors.size());
  for (const auto& p : anchors) t.rows.push_back(t.extractor.apply(p));
  return t;
}

inline FeatureTable extract_features(std::span<const AnchorRecord> anchors, Dimension d) {
  const auto pts = anchor_points(anchors, d);
  return extract_features(std::span<const CalPoint>(pts));
}

// ---------------------------------------------------------------------------
// Moments

inline double mean_of(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population standard deviation (divisor n).
inline double pop_sd(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

inline double pop_var(std::span<const double> x) {
  const double sd = pop_sd(x);
  return sd * sd;
}

// ---------------------------------------------------------------------------
// OLS rectifiers

enum class OlsFormula { null, linear, linear_interact, quadratic, cubic };

inline constexpr std::array<OlsFormula, 5> kAllFormulas{OlsFormula::null, OlsFormula::linear,
                                                       OlsFormula::linear_interact, OlsFormula::quadratic,
                                                       OlsFormula::cubic};

inline std::string_view to_string(OlsFormula f) {
  switch (f) {
    case OlsFormula::null: return "null";
    case OlsFormula::linear: return "linear";
    case OlsFormula::linear_interact: return "linear_interact";
    case OlsFormula::quadratic: return "quadratic";
    case OlsFormula::cubic: return "cubic";
  }
  return "?";
}

inline OlsFormula parse_formula(std::string_view s) {
  for (OlsFormula f : kAllFormulas) {
    if (to_string(f) == s) return f;
  }
  throw InvalidArgument("unknown formula '" + std::string(s) + "'");
}

enum class Term { intercept, s, s2, s3, g, sg };

inline std::string_view term_name(Term t) {
  switch (t) {
    case Term::intercept: return "intercept";
    case Term::s: return "s_c";
    case Term::s2: return "s_c^2";
    case Term::s3: return "s_c^3";
    case Term::g: return "g_c";
    case Term::sg: return "s_c*g_c";
  }
  return "?";
}

/// Design columns of a formula. Without the gap feature the g terms are
/// dropped, which makes linear_interact identical to linear.
inline std::vector<Term> formula_terms(OlsFormula f, bool use_gap = true) {
  std::vector<Term> t;
  switch (f) {
    case OlsFormula::null: t = {Term::intercept}; break;
    case OlsFormula::linear: t = {Term::intercept, Term::s, Term::g}; break;
    case OlsFormula::linear_interact: t = {Term::intercept, Term::s, Term::g, Term::sg}; break;
    case OlsFormula::quadratic: t = {Term::intercept, Term::s, Term::s2, Term::g, Term::sg}; break;
    case OlsFormula::cubic: t = {Term::intercept, Term::s, Term::s2, Term::s3, Term::g, Term::sg}; break;
  }
  if (!use_gap) std::erase_if(t, [](Term x) { return x == Term::g || x == Term::sg; });
  return t;
}

inline double term_value(Term t, const FeatureRow& r) {
  switch (t) {
    case Term::intercept: return 1.0;
    case Term::s: return r.s_c;
    case Term::s2: return r.s_c * r.s_c;
    case Term::s3: return r.s_c * r.s_c * r.s_c;
    case Term::g: return r.g_c;
    case Term::sg: return r.s_c * r.g_c;
  }
  return 0.0;
}

inline Eigen::MatrixXd design_matrix(std::span<const FeatureRow> rows, std::span<const Term> terms) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(terms.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = term_value(terms[j], rows[i]);
    }
  }
  return x;
}

struct OlsRectifier {
  OlsFormula formula = OlsFormula::null;
  bool use_gap = true;
  std::vector<Term> terms;
  std::vector<double> beta;
  double rss = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;

  double predict(const FeatureRow& r) const {
    double y = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) y += beta[j] * term_value(terms[j], r);
    return y;
  }
};

namespace detail {

inline std::string join_terms(std::span<const Term> terms) {
  std::string out;
  for (Term t : terms) {
    if (!out.empty()) out += ", ";
    out += term_name(t);
  }
  return out;
}

/// First column whose addition fails to raise the rank, with its predecessors.
inline std::string collinearity_message(const Eigen::MatrixXd& x, std::span<const Term> terms) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
    qr.setThreshold(1e-10);
    if (qr.rank() <= j) {
      const auto idx = static_cast<std::size_t>(j);
      if (idx == 0) return "rank-deficient design: column " + std::string(term_name(terms[0])) + " is zero";
      return "rank-deficient design: column " + std::string(term_name(terms[idx])) + " is collinear with [" +
             join_terms(terms.first(idx)) + "]";
    }
  }
  return "rank-deficient design";
}

}  // namespace detail

inline OlsRectifier fit_ols(std::span<const FeatureRow> rows, std::span<const double> human, OlsFormula formula,
                            bool use_gap = true) {
  if (rows.size() != human.size()) throw InvalidArgument("fit_ols: feature/target length mismatch");
  OlsRectifier r;
  r.formula = formula;
  r.use_gap = use_gap;
  r.terms = formula_terms(formula, use_gap);
  r.n = rows.size();
  r.k = r.terms.size();
  if (r.n <= r.k) {
    throw InvalidArgument("fit_ols: need n > " + std::to_string(r.k) + " rows, have " + std::to_string(r.n));
  }
  const Eigen::MatrixXd x = design_matrix(rows, r.terms);
  const Eigen::Map<const Eigen::VectorXd> y(human.data(), static_cast<Eigen::Index>(human.size()));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) throw DegenerateError(detail::collinearity_message(x, r.terms));
  const Eigen::VectorXd beta = qr.solve(y);
  r.beta.assign(beta.data(), beta.data() + beta.size());
  r.rss = (y - x * beta).squaredNorm();
  return r;
}

/// Gaussian-profile BIC: n ln(RSS/n) + k ln n. Lower is better.
inline double bic(const OlsRectifier& r) {
  if (r.rss <= 0.0) throw DegenerateError("degenerate fit");
  const double n = static_cast<double>(r.n);
  return n * std::log(r.rss / n) + static_cast<double>(r.k) * std::log(n);
}

// ---------------------------------------------------------------------------
// Stratified (regression-tree) rectifiers

enum class Subspace { domain_only, unified, cognitive_conflict, full_unified };

inline constexpr std::array<Subspace, 4> kAllSubspaces{Subspace::domain_only, Subspace::unified,
                                                      Subspace::cognitive_conflict, Subspace::full_unified};

inline std::string_view to_string(Subspace s) {
  switch (s) {
    case Subspace::domain_only: return "domain_only";
    case Subspace::unified: return "unified";
    case Subspace::cognitive_conflict: return "cognitive_conflict";
    case Subspace::full_unified: return "full_unified";
  }
  return "?";
}

inline Subspace parse_subspace(std::string_view s) {
  for (Subspace x : kAllSubspaces) {
    if (to_string(x) == s) return x;
  }
  throw InvalidArgument("unknown subspace '" + std::string(s) + "'");
}

enum class Feature { s_c, g_c, query_category, ad_industry };

inline bool is_categorical(Feature f) { return f == Feature::query_category || f == Feature::ad_industry; }

inline std::vector<Feature> subspace_features(Subspace s) {
  switch (s) {
    case Subspace::domain_only: return {Feature::query_category, Feature::ad_industry};
    case Subspace::unified: return {Feature::s_c, Feature::query_category, Feature::ad_industry};
    case Subspace::cognitive_conflict: return {Feature::s_c, Feature::g_c};
    case Subspace::full_unified: return {Feature::s_c, Feature::g_c, Feature::query_category, Feature::ad_industry};
  }
  return {};
}

inline double numeric_feature(Feature f, const FeatureRow& r) { return f == Feature::s_c ? r.s_c : r.g_c; }

inline const std::string& categorical_feature(Feature f, const FeatureRow& r) {
  return f == Feature::query_category ? r.domain.query_category : r.domain.ad_industry;
}

struct TreeNode {
  std::optional<Feature> feature;  // nullopt for a leaf
  double threshold = 0.0;          // numeric: value <= threshold goes left
  std::string category;            // categorical: value == category goes left
  int left = -1;
  int right = -1;
  double delta = 0.0;              // mean residual of training points here
  std::size_t count = 0;
};

struct TreeConfig {
  int max_depth = 3;
  std::size_t min_leaf = 20;
  bool operator==(const TreeConfig&) const = default;
};

inline const std::vector<TreeConfig>& default_tree_grid() {
  static const std::vector<TreeConfig> grid{{2, 40}, {2, 20}, {3, 40}, {3, 20}, {4, 40}, {4, 20}};
  return grid;
}

struct StratifiedRectifier {
  Subspace subspace = Subspace::cognitive_conflict;
  TreeConfig config;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_of(const FeatureRow& r) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      const bool go_left = is_categorical(*n.feature) ? categorical_feature(*n.feature, r) == n.category
                                                      : numeric_feature(*n.feature, r) <= n.threshold;
      i = go_left ? n.left : n.right;
    }
    return i;
  }

  double delta(const FeatureRow& r) const { return nodes[static_cast<std::size_t>(leaf_of(r))].delta; }
  double predict(const FeatureRow& r, double judge) const { return judge + delta(r); }

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].feature) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

namespace detail {

struct SplitChoice {
  double gain = 0.0;
  Feature feature = Feature::s_c;
  double threshold = 0.0;
  std::string category;
};

inline double sse(double sum, double sumsq, double n) { return n > 0 ? sumsq - sum * sum / n : 0.0; }

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureRow> rows, std::span<const double> residual, Subspace subspace, TreeConfig cfg)
      : rows_(rows), res_(residual), features_(subspace_features(subspace)), cfg_(cfg) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> idx(rows_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    grow(idx, 0);
    return std::move(nodes_);
  }

 private:
  int grow(const std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i : idx) {
      sum += res_[i];
      sumsq += res_[i] * res_[i];
    }
    const double n = static_cast<double>(idx.size());
    nodes_[static_cast<std::size_t>(id)].delta = sum / n;
    nodes_[static_cast<std::size_t>(id)].count = idx.size();
    if (depth >= cfg_.max_depth || idx.size() < 2 * cfg_.min_leaf) return id;

    const double parent = sse(sum, sumsq, n);
    std::optional<SplitChoice> best;
    const double min_gain = 1e-10 * (1.0 + parent);
    for (Feature f : features_) {
      auto cand = is_categorical(f) ? best_categorical(idx, f) : best_numeric(idx, f);
      if (!cand) continue;
      cand->gain = parent - cand->gain;  // candidates carry child SSE until here
      if (cand->gain > min_gain && (!best || cand->gain > best->gain + 1e-12 * (1.0 + parent))) best = cand;
    }
    if (!best) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      const bool go_left = is_categorical(best->feature) ? categorical_feature(best->feature, rows_[i]) == best->category
                                                         : numeric_feature(best->feature, rows_[i]) <= best->threshold;
      (go_left ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best->feature;
    node.threshold = best->threshold;
    node.category = best->category;
    node.left = l;
    node.right = r;
    return id;
  }

  // Returns the split with the smallest child SSE (stored in .gain).
  std::optional<SplitChoice> best_numeric(std::vector<std::size_t> idx, Feature f) const {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return numeric_feature(f, rows_[a]) < numeric_feature(f, rows_[b]);
    });
    double tot = 0.0, totsq = 0.0;
    for (std::size_t i : idx) {
      tot += res_[i];
      totsq += res_[i] * res_[i];
    }
    const std::size_t n = idx.size();
    std::optional<SplitChoice> best;
    double ls = 0.0, lsq = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
      const double r = res_[idx[m - 1]];
      ls += r;
      lsq += r * r;
      if (m < cfg_.min_leaf || n - m < cfg_.min_leaf) continue;
      const double lo = numeric_feature(f, rows_[idx[m - 1]]);
      const double hi = numeric_feature(f, rows_[idx[m]]);
      if (!(lo < hi)) continue;
      const double child = sse(ls, lsq, static_cast<double>(m)) +
                           sse(tot - ls, totsq - lsq, static_cast<double>(n - m));
      if (!best || child < best->gain) best = SplitChoice{child, f, lo + (hi - lo) / 2.0, {}};
    }
    return best;
  }

  std::optional<SplitChoice> best_categorical(const std::vector<std::size_t>& idx, Feature f) const {
    struct Acc {
      double sum = 0.0, sumsq = 0.0;
      std::size_t n = 0;
    };
    std::map<std::string, Acc> groups;
    double tot = 0.0, totsq = 0.0;
    for (std::size_t i : idx) {
      Acc& a = groups[categorical_feature(f, rows_[i])];
      a.sum += res_[i];
      a.sumsq += res_[i] * res_[i];
      ++a.n;
      tot += res_[i];
      totsq += res_[i] * res_[i];
    }
    if (groups.size() < 2) return std::nullopt;
    const std::size_t n = idx.size();
    std::optional<SplitChoice> best;
    for (const auto& [value, a] : groups) {
      if (a.n < cfg_.min_leaf || n - a.n < cfg_.min_leaf) continue;
      const double child = sse(a.sum, a.sumsq, static_cast<double>(a.n)) +
                           sse(tot - a.sum, totsq - a.sumsq, static_cast<double>(n - a.n));
      if (!best || child < best->gain) best = SplitChoice{child, f, 0.0, value};
    }
    return best;
  }

  std::span<const FeatureRow> rows_;
  std::span<const double> res_;
  std::vector<Feature> features_;
  TreeConfig cfg_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Grow a variance-reduction tree on residual = human - judge.
inline StratifiedRectifier fit_tree(std::span<const FeatureRow> rows, std::span<const double> judge,
                                    std::span<const double> human, Subspace subspace, TreeConfig cfg) {
  if (rows.empty()) throw InvalidArgument("fit_tree: empty anchor set");
  if (rows.size() != judge.size() || rows.size() != human.size()) {
    throw InvalidArgument("fit_tree: length mismatch");
  }
  if (cfg.max_depth < 0 || cfg.min_leaf < 1) throw InvalidArgument("fit_tree: need max_depth >= 0, min_leaf >= 1");
  std::vector<double> residual(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) residual[i] = human[i] - judge[i];
  StratifiedRectifier r;
  r.subspace = subspace;
  r.config = cfg;
  r.nodes = detail::TreeBuilder(rows, residual, subspace, cfg).build();
  return r;
}

/// 1 - Var(Y* - Yhat) / Var(Y*).
inline double vrr(std::span<const double> predictions, std::span<const double> human) {
  if (predictions.size() != human.size() || human.empty()) throw InvalidArgument("vrr: length mismatch");
  const double vh = pop_var(human);
  if (vh <= 0.0) throw DegenerateError("vrr: human scores have zero variance");
  std::vector<double> resid(human.size());
  for (std::size_t i = 0; i < human.size(); ++i) resid[i] = human[i] - predictions[i];
  return 1.0 - pop_var(resid) / vh;
}

// ---------------------------------------------------------------------------
// Wasserstein-1 between empirical distributions

/// Exact W1 = integral of |F_x - F_y|. Equal sizes reduce to the mean absolute
/// difference of sorted samples.
inline double wasserstein1(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InvalidArgument("wasserstein1: empty sample");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
  }
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double total = 0.0;
  double prev = std::min(a[0], b[0]);
  while (i < a.size() || j < b.size()) {
    const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    const double fa = static_cast<double>(i) / na, fb = static_cast<double>(j) / nb;
    total += std::abs(fa - fb) * (next - prev);
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
    prev = next;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Cross-validation and routing

/// Fold index per point from a seeded shuffle; fold sizes differ by at most one.
inline std::vector<int> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> out(n);
  for (std::size_t pos = 0; pos < n; ++pos) out[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return out;
}

/// A rectification pipeline of one of the three families.
struct PipelineSpec {
  enum class Kind { baseline, ols, stratified } kind = Kind::baseline;
  OlsFormula formula = OlsFormula::null;
  bool use_gap = true;
  Subspace subspace = Subspace::cognitive_conflict;
  TreeConfig tree;

  std::string id() const {
    switch (kind) {
      case Kind::baseline: return "baseline";
      case Kind::ols: return "ols:" + std::string(to_string(formula));
      case Kind::stratified:
        return "dt:" + std::string(to_string(subspace)) + ":depth" + std::to_string(tree.max_depth) + ":leaf" +
               std::to_string(tree.min_leaf);
    }
    return "?";
  }
};

/// A pipeline fitted on a set of anchors, ready to predict.
struct FittedPipeline {
  PipelineSpec spec;
  FeatureExtractor extractor;
  std::optional<OlsRectifier> ols;
  std::optional<StratifiedRectifier> tree;

  double predict(const CalPoint& p) const {
    switch (spec.kind) {
      case PipelineSpec::Kind::baseline: return p.judge;
      case PipelineSpec::Kind::ols: return ols->predict(extractor.apply(p));
      case PipelineSpec::Kind::stratified: return tree->predict(extractor.apply(p), p.judge);
    }
    return p.judge;
  }
};

inline FittedPipeline fit_pipeline(const PipelineSpec& spec, std::span<const CalPoint> anchors) {
  FittedPipeline out{spec, fit_extractor(anchors), std::nullopt, std::nullopt};
  if (spec.kind == PipelineSpec::Kind::baseline) return out;
  std::vector<FeatureRow> rows;
  std::vector<double> judge, human;
  for (const auto& p : anchors) {
    rows.push_back(out.extractor.apply(p));
    judge.push_back(p.judge);
    human.push_back(p.human);
  }
  if (spec.kind == PipelineSpec::Kind::ols) {
    out.ols = fit_ols(rows, human, spec.formula, spec.use_gap);
  } else {
    out.tree = fit_tree(rows, judge, human, spec.subspace, spec.tree);
  }
  return out;
}

/// Held-out predictions for every anchor: each fold is predicted by a
/// pipeline fitted on the other folds.
inline std::vector<double> cross_predict(const PipelineSpec& spec, std::span<const CalPoint> anchors,
                                         std::span<const int> fold_of, int folds) {
  std::vector<double> out(anchors.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<CalPoint> train;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      if (fold_of[i] != f) train.push_back(anchors[i]);
    }
    const FittedPipeline fp = fit_pipeline(spec, train);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      if (fold_of[i] == f) out[i] = fp.predict(anchors[i]);
    }
  }
  return out;
}

struct OlsTableRow {
  OlsFormula formula;
  std::optional<double> rss;
  std::optional<double> bic;  // -inf for an exact fit
  std::string error;
};

struct DtTableRow {
  Subspace subspace;
  TreeConfig config;
  std::optional<double> cv_vrr;
};

struct RouteCandidate {
  std::string id;
  PipelineSpec spec;
  double w = 0.0;
  std::optional<double> bic;
  std::optional<double> vrr;
};

struct RoutingDecision {
  Dimension dimension = Dimension::q1;
  std::vector<RouteCandidate> candidates;
  std::size_t chosen = 0;  // index into candidates
  double mu_h = 0.0;
  double sigma_h = 0.0;
  std::optional<double> mu_route;
  std::optional<double> sigma_route;
  double clamped_fraction = 0.0;
  bool use_gap = true;
  std::vector<OlsTableRow> ols_table;
  std::vector<DtTableRow> dt_table;

  const RouteCandidate& chosen_candidate() const { return candidates.at(chosen); }
};

struct RouteOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<TreeConfig> grid = default_tree_grid();
  std::vector<Subspace> subspaces{kAllSubspaces.begin(), kAllSubspaces.end()};
};

/// Widest OLS design; route needs folds x this many anchors.
inline constexpr std::size_t kMaxDesignWidth = 6;

inline RoutingDecision route(std::span<const CalPoint> anchors, Dimension d, const RouteOptions& opt = {}) {
  const std::size_t need = static_cast<std::size_t>(opt.folds) * kMaxDesignWidth;
  if (opt.folds < 2) throw InvalidArgument("folds must be >= 2");
  if (anchors.size() < need) {
    throw InvalidArgument("insufficient anchors for " + std::string(dimension_key(d)) + ": need >= " +
                          std::to_string(need) + ", have " + std::to_string(anchors.size()));
  }
  RoutingDecision dec;
  dec.dimension = d;
  std::vector<double> human;
  for (const auto& p : anchors) human.push_back(p.human);
  dec.mu_h = mean_of(human);
  dec.sigma_h = pop_sd(human);

  const FeatureTable full = extract_features(anchors);
  dec.use_gap = std::any_of(full.rows.begin(), full.rows.end(), [](const FeatureRow& r) { return std::abs(r.g_c) > 1e-12; });

  // OLS: formula chosen by BIC on the full anchor set; ties go to the simpler formula.
  std::optional<OlsFormula> best_formula;
  double best_bic = std::numeric_limits<double>::infinity();
  for (OlsFormula f : kAllFormulas) {
    if (!dec.use_gap && f == OlsFormula::linear_interact) continue;
    OlsTableRow row{f, std::nullopt, std::nullopt, {}};
    try {
      const OlsRectifier r = fit_ols(full.rows, human, f, dec.use_gap);
      row.rss = r.rss;
      row.bic = r.rss > 0.0 ? bic(r) : -std::numeric_limits<double>::infinity();
      if (*row.bic < best_bic) {
        best_bic = *row.bic;
        best_formula = f;
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    dec.ols_table.push_back(std::move(row));
  }

  const std::vector<int> fold_of = make_folds(anchors.size(), opt.folds, opt.seed);

  // Stratified: configuration chosen by pooled held-out VRR on the shared folds.
  std::optional<PipelineSpec> best_tree;
  double best_vrr = -std::numeric_limits<double>::infinity();
  const bool human_varies = dec.sigma_h > 0.0;
  for (Subspace s : opt.subspaces) {
    for (const TreeConfig& cfg : opt.grid) {
      PipelineSpec spec;
      spec.kind = PipelineSpec::Kind::stratified;
      spec.subspace = s;
      spec.tree = cfg;
      DtTableRow row{s, cfg, std::nullopt};
      if (human_varies) {
        row.cv_vrr = vrr(cross_predict(spec, anchors, fold_of, opt.folds), human);
        if (*row.cv_vrr > best_vrr + 1e-12) {
          best_vrr = *row.cv_vrr;
          best_tree = spec;
        }
      } else if (!best_tree) {
        best_tree = spec;
      }
      dec.dt_table.push_back(row);
    }
  }

  auto add_candidate = [&](const PipelineSpec& spec, std::optional<double> b, std::optional<double> v) {
    try {
      const auto pred = cross_predict(spec, anchors, fold_of, opt.folds);
      dec.candidates.push_back({spec.id(), spec, wasserstein1(pred, human), b, v});
    } catch (const DegenerateError&) {
      // a fold-level collinearity drops the candidate
    } catch (const InvalidArgument&) {
    }
  };
  add_candidate(PipelineSpec{}, std::nullopt, std::nullopt);
  if (best_formula) {
    PipelineSpec spec;
    spec.kind = PipelineSpec::Kind::ols;
    spec.formula = *best_formula;
    spec.use_gap = dec.use_gap;
    add_candidate(spec, best_bic, std::nullopt);
  }
  if (best_tree) {
    add_candidate(*best_tree, std::nullopt,
                  std::isfinite(best_vrr) ? std::optional<double>(best_vrr) : std::nullopt);
  }

  // Candidates are ordered baseline < OLS < stratified, so a strict improvement is
  // needed to displace a simpler pipeline.
  for (std::size_t i = 1; i < dec.candidates.size(); ++i) {
    if (dec.candidates[i].w < dec.candidates[dec.chosen].w - 1e-12) dec.chosen = i;
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Variance calibration

struct VcResult {
  std::vector<double> values;     // clamped to [1,5]
  std::vector<double> pre_clamp;
  double mu_route = 0.0;
  double sigma_route = 0.0;
  double clamped_fraction = 0.0;
};

/// Affine moment match of predictions to (mu_h, sigma_h), then clamp to [1,5].
inline VcResult variance_calibrate(std::span<const double> predictions, double mu_h, double sigma_h) {
  if (predictions.empty()) throw InvalidArgument("variance_calibrate: no predictions");
  VcResult r;
  r.mu_route = mean_of(predictions);
  r.sigma_route = pop_sd(predictions);
  if (!(r.sigma_route > 0.0)) throw DegenerateError("degenerate prediction spread");
  std::size_t clamped = 0;
  const double scale = sigma_h / r.sigma_route;
  for (double y : predictions) {
    const double v = mu_h + (y - r.mu_route) * scale;
    r.pre_clamp.push_back(v);
    const double c = std::clamp(v, kScoreMin, kScoreMax);
    if (c != v) ++clamped;
    r.values.push_back(c);
  }
  r.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(predictions.size());
  return r;
}

// ---------------------------------------------------------------------------
// Whole-dataset calibration

struct CalibrationOptions {
  RouteOptions route;
  std::size_t concurrency = 1;
};

struct CalibrationResult {
  std::vector<Sample> samples;
  std::array<RoutingDecision, kDimensions> decisions;
};

/// Route and calibrate each dimension. Samples that are themselves anchors
/// (same sample_id) take the human score; the rest get VC-PPI output.
inline CalibrationResult calibrate_dataset(std::span<const AnchorRecord> anchors, std::span<const Sample> judged,
                                           const CalibrationOptions& opt = {}) {
  if (anchors.empty()) throw InvalidArgument("empty anchor set");
  std::map<std::string, const AnchorRecord*> anchor_by_id;
  for (const auto& a : anchors) anchor_by_id.emplace(a.sample_id, &a);
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < judged.size(); ++i) {
    if (!judged[i].judge_raw) throw InvalidArgument("sample " + judged[i].sample_id + " has no judge_raw");
    if (!anchor_by_id.count(judged[i].sample_id)) unlabeled.push_back(i);
  }

  struct DimOut {
    RoutingDecision decision;
    std::vector<double> values;
  };
  auto run_dim = [&](std::size_t di) {
    const Dimension d = kAllDimensions[di];
    const auto pts = anchor_points(anchors, d);
    DimOut out{route(pts, d, opt.route), {}};
    if (unlabeled.empty()) return out;
    const FittedPipeline fp = fit_pipeline(out.decision.chosen_candidate().spec, pts);
    std::vector<double> pred;
    pred.reserve(unlabeled.size());
    for (std::size_t i : unlabeled) pred.push_back(fp.predict(sample_point(judged[i], d)));
    VcResult vc;
    try {
      vc = variance_calibrate(pred, out.decision.mu_h, out.decision.sigma_h);
    } catch (const DegenerateError& e) {
      throw DegenerateError(std::string(dimension_key(d)) + ": " + e.what());
    }
    out.decision.mu_route = vc.mu_route;
    out.decision.sigma_route = vc.sigma_route;
    out.decision.clamped_fraction = vc.clamped_fraction;
    out.values = std::move(vc.values);
    return out;
  };
  auto dims = parallel_map(kDimensions, opt.concurrency, run_dim);

  CalibrationResult res;
  res.samples.assign(judged.begin(), judged.end());
  for (auto& s : res.samples) {
    if (auto it = anchor_by_id.find(s.sample_id); it != anchor_by_id.end()) s.calibrated = clamp_scores(it->second->human);
  }
  for (std::size_t di = 0; di < kDimensions; ++di) {
    for (std::size_t u = 0; u < unlabeled.size(); ++u) {
      Sample& s = res.samples[unlabeled[u]];
      if (!s.calibrated) s.calibrated = ScoreVector{};
      (*s.calibrated)[di] = dims[di].values[u];
    }
    res.decisions[di] = std::move(dims[di].decision);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Report encoding

namespace detail {

inline json finite_or_null(std::optional<double> v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v < 0 ? "-inf" : "inf";
  return *v;
}

}  // namespace detail

inline json to_json(const RoutingDecision& d) {
  json cands = json::array();
  for (const auto& c : d.candidates) {
    json j{{"id", c.id}, {"W", c.w}};
    if (c.bic) j["bic"] = detail::finite_or_null(c.bic);
    if (c.vrr) j["vrr"] = *c.vrr;
    cands.push_back(std::move(j));
  }
  json ols = json::array();
  for (const auto& r : d.ols_table) {
    json j{{"formula", to_string(r.formula)}};
    if (r.rss) j["rss"] = *r.rss;
    if (r.bic) j["bic"] = detail::finite_or_null(r.bic);
    if (!r.error.empty()) j["error"] = r.error;
    ols.push_back(std::move(j));
  }
  json dt = json::array();
  for (const auto& r : d.dt_table) {
    json j{{"subspace", to_string(r.subspace)}, {"max_depth", r.config.max_depth}, {"min_leaf", r.config.min_leaf}};
    j["vrr"] = detail::finite_or_null(r.cv_vrr);
    dt.push_back(std::move(j));
  }
  json out{{"candidates", cands},
           {"chosen", d.chosen_candidate().id},
           {"mu_H", d.mu_h},
           {"sigma_H", d.sigma_h},
           {"clamped_fraction", d.clamped_fraction},
           {"gap_feature", d.use_gap},
           {"ols_bic", ols},
           {"dt_vrr", dt}};
  out["mu_route"] = d.mu_route ? json(*d.mu_route) : json(nullptr);
  out["sigma_route"] = d.sigma_route ? json(*d.sigma_route) : json(nullptr);
  return out;
}

inline json report_json(const CalibrationResult& r) {
  json out = json::object();
  for (std::size_t i = 0; i < kDimensions; ++i) out[std::string(dimension_key(kAllDimensions[i]))] = to_json(r.decisions[i]);
  return out;
}

}  // namespace naiad
