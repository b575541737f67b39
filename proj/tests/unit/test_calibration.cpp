#include <gtest/gtest.h>

#include "../support/gen.hpp"
#include "../support/oracles.hpp"
#include "naiad/calibration.hpp"

using namespace naiad;

namespace {

std::vector<FeatureRow> rows_from(const std::vector<double>& s, const std::vector<double>& g) {
  std::vector<FeatureRow> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], g[i], {}});
  return out;
}

std::vector<CalPoint> shifted_points(std::uint64_t seed, std::size_t n, double shift, double noise = 0.0) {
  Rng rng(seed);
  std::vector<CalPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = rng.uniform(1.5, 4.0);
    out.push_back({std::clamp(h + shift + rng.normal(0.0, noise), 1.0, 5.0), std::nullopt, {"c", "i"}, h});
  }
  return out;
}

}  // namespace

TEST(Features, CenteringUsesAnchorMeans) {
  const std::vector<CalPoint> pts{{2.0, 3.0, {}, 0}, {4.0, std::nullopt, {}, 0}, {3.0, 2.0, {}, 0}};
  const auto fx = fit_extractor(pts);
  EXPECT_DOUBLE_EQ(fx.judge_mean, 3.0);
  EXPECT_DOUBLE_EQ(fx.gap_mean, 0.0);  // gaps +1 and -1
  const auto r = fx.apply(pts[0]);
  EXPECT_DOUBLE_EQ(r.s_c, -1.0);
  EXPECT_DOUBLE_EQ(r.g_c, 1.0);
  EXPECT_DOUBLE_EQ(fx.apply(pts[1]).g_c, 0.0);
}

TEST(Ols, CoefficientsMatchNormalEquations) {
  Rng rng(1);
  for (OlsFormula f : kAllFormulas) {
    const auto s = gen::normals(rng, 200), g = gen::normals(rng, 200);
    const auto rows = rows_from(s, g);
    std::vector<double> y;
    for (std::size_t i = 0; i < 200; ++i) y.push_back(3 + 0.5 * s[i] - 0.2 * s[i] * s[i] + 0.3 * g[i] + rng.normal(0, 0.1));
    const auto fit = fit_ols(rows, y, f);
    std::vector<std::vector<double>> x;
    for (const auto& r : rows) {
      std::vector<double> row;
      for (Term t : fit.terms) row.push_back(term_value(t, r));
      x.push_back(row);
    }
    const auto beta = oracle::normal_equations(x, y);
    ASSERT_EQ(beta.size(), fit.beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) EXPECT_NEAR(fit.beta[j], beta[j], 1e-9) << to_string(f);
    double rss = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) rss += std::pow(y[i] - fit.predict(rows[i]), 2);
    EXPECT_NEAR(fit.rss, rss, 1e-9);
    EXPECT_NEAR(bic(fit), 200 * std::log(rss / 200) + static_cast<double>(fit.k) * std::log(200.0), 1e-9);
  }
}

TEST(Ols, TermLayouts) {
  EXPECT_EQ(formula_terms(OlsFormula::null).size(), 1u);
  EXPECT_EQ(formula_terms(OlsFormula::linear).size(), 3u);
  EXPECT_EQ(formula_terms(OlsFormula::linear_interact).size(), 4u);
  EXPECT_EQ(formula_terms(OlsFormula::quadratic).size(), 5u);
  EXPECT_EQ(formula_terms(OlsFormula::cubic).size(), 6u);
  EXPECT_EQ(formula_terms(OlsFormula::cubic, false).size(), 4u);
  for (OlsFormula f : kAllFormulas) EXPECT_EQ(parse_formula(to_string(f)), f);
}

TEST(Ols, CollinearColumnIsNamed) {
  Rng rng(2);
  const auto s = gen::normals(rng, 50);
  const auto rows = rows_from(s, s);  // g identical to s
  const auto y = gen::normals(rng, 50);
  try {
    fit_ols(rows, y, OlsFormula::linear);
    FAIL();
  } catch (const DegenerateError& e) {
    EXPECT_NE(std::string(e.what()).find("column g_c is collinear with [intercept, s_c]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(fit_ols(rows_from({1, 2}, {0, 0}), std::vector<double>{1, 2}, OlsFormula::linear), InvalidArgument);
}

TEST(Ols, ExactFitBicIsDegenerate) {
  const auto rows = rows_from({-1, 0, 1, 2}, {0, 0, 0, 0});
  const std::vector<double> y{1, 2, 3, 4};
  const auto fit = fit_ols(rows, y, OlsFormula::linear, false);
  EXPECT_NEAR(fit.rss, 0.0, 1e-20);
  if (fit.rss <= 0.0) EXPECT_THROW(bic(fit), DegenerateError);
}

TEST(Tree, RecoversQuadrantBiases) {
  Rng rng(3);
  const double bias[2][2] = {{-1.0, 0.5}, {0.0, 1.0}};  // [s>0][g>0]
  std::vector<FeatureRow> rows;
  std::vector<double> judge, human;
  for (int i = 0; i < 2000; ++i) {
    const double s = rng.uniform(-1, 1), g = rng.uniform(-1, 1);
    rows.push_back({s, g, {}});
    const double j = rng.uniform(2, 4);
    judge.push_back(j);
    human.push_back(j + bias[s > 0][g > 0] + rng.normal(0, 0.1));
  }
  const auto tree = fit_tree(rows, judge, human, Subspace::cognitive_conflict, {2, 20});
  EXPECT_EQ(tree.leaves().size(), 4u);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const FeatureRow probe{a ? 0.5 : -0.5, b ? 0.5 : -0.5, {}};
      EXPECT_NEAR(tree.delta(probe), bias[a][b], 0.05);
    }
  }
}

TEST(Tree, RespectsDepthAndLeafSize) {
  Rng rng(4);
  std::vector<FeatureRow> rows;
  std::vector<double> judge, human;
  for (int i = 0; i < 300; ++i) {
    rows.push_back({rng.normal(), rng.normal(), {"c" + std::to_string(i % 3), "i" + std::to_string(i % 2)}});
    judge.push_back(3);
    human.push_back(3 + rng.normal());
  }
  for (Subspace sub : kAllSubspaces) {
    for (const auto& cfg : default_tree_grid()) {
      const auto tree = fit_tree(rows, judge, human, sub, cfg);
      std::map<int, std::size_t> counts;
      for (const auto& r : rows) ++counts[tree.leaf_of(r)];
      for (const auto& [leaf, c] : counts) {
        EXPECT_GE(c, cfg.min_leaf);
        EXPECT_EQ(c, tree.nodes[static_cast<std::size_t>(leaf)].count);
      }
      EXPECT_LE(tree.leaves().size(), std::size_t{1} << cfg.max_depth);
    }
  }
}

TEST(Tree, DomainSplitFindsCategory) {
  std::vector<FeatureRow> rows;
  std::vector<double> judge, human;
  for (int i = 0; i < 200; ++i) {
    const std::string cat = i % 4 == 0 ? "finance" : "other" + std::to_string(i % 3);
    rows.push_back({0, 0, {cat, "x"}});
    judge.push_back(3);
    human.push_back(cat == "finance" ? 2.0 : 3.5);
  }
  const auto tree = fit_tree(rows, judge, human, Subspace::domain_only, {1, 10});
  EXPECT_NEAR(tree.delta({0, 0, {"finance", "x"}}), -1.0, 1e-12);
  EXPECT_NEAR(tree.delta({0, 0, {"other1", "x"}}), 0.5, 1e-12);
}

TEST(Vrr, Extremes) {
  const std::vector<double> h{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(vrr(h, h), 1.0);
  EXPECT_NEAR(vrr(std::vector<double>(5, 3.0), h), 0.0, 1e-15);
  EXPECT_THROW(vrr(h, std::vector<double>(5, 2.0)), DegenerateError);
}

TEST(Wasserstein, IdentityAndShift) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto x = gen::normals(rng, 100 + rng.below(50));
    EXPECT_EQ(wasserstein1(x, x), 0.0);
    const double c = rng.uniform(-2, 2);
    auto y = x;
    for (auto& v : y) v += c;
    EXPECT_NEAR(wasserstein1(x, y), std::abs(c), 1e-9);
  }
}

TEST(Wasserstein, UnequalSizesMatchTransportOracle) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const auto x = gen::normals(rng, 1 + rng.below(40));
    const auto y = gen::normals(rng, 1 + rng.below(40), 0.5, 2.0);
    EXPECT_NEAR(wasserstein1(x, y), oracle::transport_w1(x, y), 1e-9);
    EXPECT_NEAR(wasserstein1(x, y), wasserstein1(y, x), 1e-12);
  }
  // with ties
  const std::vector<double> a{1, 1, 2}, b{1, 2, 2, 2, 3};
  EXPECT_NEAR(wasserstein1(a, b), oracle::transport_w1(a, b), 1e-12);
}

TEST(Folds, BalancedAndDeterministic) {
  const auto f = make_folds(103, 5, 9);
  EXPECT_EQ(f, make_folds(103, 5, 9));
  std::array<int, 5> counts{};
  for (int x : f) ++counts[x];
  EXPECT_EQ(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1);
  EXPECT_THROW(make_folds(10, 1, 0), InvalidArgument);
}

TEST(Route, NeedsEnoughAnchors) {
  const auto pts = shifted_points(1, 29, 0.5);
  EXPECT_THROW(route(pts, Dimension::q1), InvalidArgument);
}

TEST(Route, UnbiasedJudgeKeepsBaseline) {
  const auto pts = shifted_points(2, 200, 0.0);
  const auto d = route(pts, Dimension::q1);
  EXPECT_EQ(d.chosen_candidate().id, "baseline");
  EXPECT_EQ(d.candidates[0].w, 0.0);
  EXPECT_FALSE(d.use_gap);
}

TEST(Route, ShiftedJudgeLeavesBaseline) {
  for (double c : {-1.0, 0.5, 1.0}) {
    const auto pts = shifted_points(3, 300, c, 0.05);
    const auto d = route(pts, Dimension::q2);
    EXPECT_NE(d.chosen_candidate().spec.kind, PipelineSpec::Kind::baseline) << c;
    EXPECT_GT(d.candidates[0].w, 0.3);
    for (const auto& cand : d.candidates) EXPECT_LE(d.chosen_candidate().w, cand.w);
  }
}

TEST(Route, CandidateWIsHeldOutDistance) {
  const auto pts = shifted_points(4, 120, 0.7, 0.2);
  RouteOptions opt;
  opt.seed = 11;
  const auto d = route(pts, Dimension::q3, opt);
  const auto folds = make_folds(pts.size(), opt.folds, opt.seed);
  std::vector<double> human;
  for (const auto& p : pts) human.push_back(p.human);
  for (const auto& c : d.candidates) {
    const auto pred = cross_predict(c.spec, pts, folds, opt.folds);
    EXPECT_NEAR(c.w, oracle::transport_w1(pred, human), 1e-9) << c.id;
  }
}

TEST(VarianceCalibrate, MomentsExactBeforeClamp) {
  Rng rng(7);
  const auto pred = gen::normals(rng, 1000, 3.0, 0.3);
  const auto r = variance_calibrate(pred, 3.2, 0.8);
  EXPECT_NEAR(mean_of(r.pre_clamp), 3.2, 1e-9);
  EXPECT_NEAR(pop_sd(r.pre_clamp), 0.8, 1e-9);
  for (double v : r.values) EXPECT_TRUE(in_score_range(v));
  EXPECT_THROW(variance_calibrate(std::vector<double>(10, 2.0), 3, 1), DegenerateError);
}

TEST(VarianceCalibrate, ClampFractionCounted) {
  const std::vector<double> pred{1, 2, 3, 4, 5};
  const auto r = variance_calibrate(pred, 3.0, 3.0);
  const double expect = static_cast<double>(std::count_if(r.pre_clamp.begin(), r.pre_clamp.end(),
                                                          [](double v) { return v < 1 || v > 5; })) / 5.0;
  EXPECT_DOUBLE_EQ(r.clamped_fraction, expect);
  EXPECT_GT(r.clamped_fraction, 0.0);
}

TEST(CalibrateDataset, AnchorsKeepHumanAndOthersStayInRange) {
  Rng rng(8);
  std::vector<AnchorRecord> anchors;
  std::vector<Sample> judged;
  for (int i = 0; i < 150; ++i) {
    Sample s = gen::valid_sample(rng, static_cast<std::size_t>(i));
    s.calibrated.reset();
    ScoreVector h = gen::scores(rng), j;
    for (std::size_t d = 0; d < 4; ++d) j[d] = std::clamp(h[d] + 0.6 + rng.normal(0, 0.2), 1.0, 5.0);
    s.judge_raw = j;
    judged.push_back(s);
    if (i < 60) anchors.push_back({s.sample_id, h, j, s.self_eval, domain_labels_of(s)});
  }
  CalibrationOptions opt;
  opt.concurrency = 4;
  const auto res = calibrate_dataset(anchors, judged, opt);
  ASSERT_EQ(res.samples.size(), judged.size());
  for (std::size_t i = 0; i < res.samples.size(); ++i) {
    ASSERT_TRUE(res.samples[i].calibrated);
    EXPECT_TRUE(validate_sample(res.samples[i]).empty());
    if (i < 60) EXPECT_EQ(*res.samples[i].calibrated, anchors[i].human);
  }
  const json rep = report_json(res);
  for (const char* k : {"q1", "q2", "q3", "q4"}) {
    EXPECT_TRUE(rep[k].contains("chosen"));
    EXPECT_TRUE(rep[k]["mu_route"].is_number());
  }
  // concurrency does not change results
  opt.concurrency = 1;
  EXPECT_EQ(calibrate_dataset(anchors, judged, opt).samples, res.samples);
}

TEST(CalibrateDataset, RejectsUnjudgedSamples) {
  Rng rng(9);
  std::vector<AnchorRecord> anchors{{"a", ScoreVector(3, 3, 3, 3), ScoreVector(3, 3, 3, 3), std::nullopt, {}}};
  Sample s = gen::valid_sample(rng, 1);
  s.judge_raw.reset();
  EXPECT_THROW(calibrate_dataset(anchors, std::vector<Sample>{s}, {}), InvalidArgument);
}
