#pragma once

// Downstream statistics over scored samples: Pareto fronts, superiority
// ratios, macro rates, paired effect sizes and tests, target-hit accuracy,
// and TF-IDF keywords.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naiad/core.hpp"

namespace naiad {

struct ScoredPoint {
  std::string id;
  ScoreVector scores;
};

/// a >= b everywhere and a > b somewhere.
inline bool dominates(const ScoreVector& a, const ScoreVector& b) {
  bool strict = false;
  for (std::size_t i = 0; i < kDimensions; ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

namespace detail {

/// Non-dominated subset under `dom`. Points are visited in decreasing order of
/// coordinate sum, so no later point can dominate an earlier one; each point is
/// checked only against the front found so far.
template <typename Dom>
std::vector<std::size_t> nondominated(std::span<const ScoredPoint> pts, Dom dom, bool descending) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto sum = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t d = 0; d < kDimensions; ++d) s += pts[i].scores[d];
    return s;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? sum(a) > sum(b) : sum(a) < sum(b);
  });
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    const bool beaten = std::any_of(front.begin(), front.end(), [&](std::size_t f) { return dom(pts[f].scores, pts[i].scores); });
    if (!beaten) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

}  // namespace detail

struct ParetoFronts {
  std::vector<std::string> max_front;
  std::vector<std::string> min_front;
};

/// Fronts in input order. Exact duplicates of a front member are all kept.
inline ParetoFronts pareto_fronts(std::span<const ScoredPoint> pts) {
  if (pts.empty()) throw InvalidArgument("pareto_fronts: no points");
  ParetoFronts out;
  for (std::size_t i : detail::nondominated(pts, dominates, true)) out.max_front.push_back(pts[i].id);
  auto dominated_by = [](const ScoreVector& a, const ScoreVector& b) { return dominates(b, a); };
  for (std::size_t i : detail::nondominated(pts, dominated_by, false)) out.min_front.push_back(pts[i].id);
  return out;
}

/// Per dimension, fraction of points strictly above the reference.
inline ScoreVector superiority_ratio(std::span<const ScoredPoint> pts, const ScoreVector& reference) {
  if (pts.empty()) throw InvalidArgument("superiority_ratio: no points");
  ScoreVector out;
  for (std::size_t d = 0; d < kDimensions; ++d) {
    std::size_t above = 0;
    for (const auto& p : pts) above += p.scores[d] > reference[d] ? 1 : 0;
    out[d] = static_cast<double>(above) / static_cast<double>(pts.size());
  }
  return out;
}

inline ScoreVector mean_scores(std::span<const ScoredPoint> pts) {
  if (pts.empty()) throw InvalidArgument("mean_scores: no points");
  ScoreVector m;
  for (const auto& p : pts) {
    for (std::size_t d = 0; d < kDimensions; ++d) m[d] += p.scores[d];
  }
  for (std::size_t d = 0; d < kDimensions; ++d) m[d] /= static_cast<double>(pts.size());
  return m;
}

/// Mean score as a percentage of the scale maximum.
inline double macro_rate(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("macro_rate: empty list");
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  return 100.0 * mean / kScoreMax;
}

/// Sample standard deviation (divisor n - 1).
inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("sample_sd: need n >= 2");
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double cohens_d(std::span<const double> diffs) {
  const double sd = sample_sd(diffs);
  if (!(sd > 0.0)) throw DegenerateError("cohens_d: zero standard deviation");
  const double m = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  return m / sd;
}

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  // min(W+, W-)
  std::size_t n = 0;       // nonzero pairs
  double z = 0.0;
  double p_value = 1.0;
};

/// Signed-rank test, normal approximation with tie-corrected variance and a
/// 0.5 continuity correction, two-sided.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
  std::vector<double> nz;
  for (double d : diffs) {
    if (d != 0.0) nz.push_back(d);
  }
  if (nz.empty()) throw DegenerateError("no informative pairs");
  std::vector<std::size_t> order(nz.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(nz[a]) < std::abs(nz[b]); });

  WilcoxonResult r;
  r.n = nz.size();
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && std::abs(nz[order[j]]) == std::abs(nz[order[i]])) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) (nz[order[k]] > 0 ? r.w_plus : r.w_minus) += rank;
    i = j;
  }
  const double n = static_cast<double>(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  r.statistic = std::min(r.w_plus, r.w_minus);
  if (var <= 0.0) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double dev = std::max(0.0, std::abs(r.w_plus - mean) - 0.5);
  r.z = (r.w_plus >= mean ? 1.0 : -1.0) * dev / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
  return r;
}

/// Per dimension, fraction of pairs with |achieved - target| <= threshold.
inline ScoreVector acc_at(double threshold, std::span<const ScoreVector> achieved, std::span<const ScoreVector> targets) {
  if (achieved.size() != targets.size()) throw InvalidArgument("acc_at: length mismatch");
  if (achieved.empty()) throw InvalidArgument("acc_at: no pairs");
  ScoreVector out;
  for (std::size_t d = 0; d < kDimensions; ++d) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < achieved.size(); ++i) hits += std::abs(achieved[i][d] - targets[i][d]) <= threshold ? 1 : 0;
    out[d] = static_cast<double>(hits) / static_cast<double>(achieved.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// TF-IDF keywords

inline const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words{
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as", "at",
      "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did",
      "do", "does", "doing", "down", "during", "each", "even", "few", "for", "from", "further", "get", "gets",
      "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "however", "if", "in", "into", "is", "it", "its", "itself", "just", "let", "like", "make", "makes", "may",
      "me", "might", "more", "most", "much", "must", "my", "myself", "no", "nor", "not", "now", "of", "off", "on",
      "once", "one", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "shall",
      "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves",
      "then", "there", "these", "they", "this", "those", "through", "thus", "to", "too", "under", "until", "up",
      "upon", "us", "very", "via", "was", "we", "well", "were", "what", "when", "where", "whether", "which",
      "while", "who", "whom", "whose", "why", "will", "with", "within", "without", "would", "yet", "you", "your",
      "yours", "yourself", "yourselves", "ll", "re", "ve", "don", "doesn", "isn", "aren", "won", "cannot"};
  return words;
}

namespace detail {

/// Decode one UTF-8 code point at s[i], advancing i; malformed bytes map to U+FFFD.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b >> 6) != 0x2) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

/// ASCII letters plus non-ASCII code points outside the common punctuation,
/// symbol and space blocks.
inline bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (c < 0xC0) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // general punctuation through misc symbols
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  if (c == 0xFFFD) return false;
  return true;
}

inline void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

}  // namespace detail

/// Maximal letter runs, ASCII-lowercased, at least two code points long,
/// stopwords removed.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t len = 0;
  auto flush = [&] {
    if (len >= 2 && !stopwords().count(cur)) out.push_back(cur);
    cur.clear();
    len = 0;
  };
  for (std::size_t i = 0; i < text.size();) {
    char32_t c = detail::next_code_point(text, i);
    if (detail::is_letter(c)) {
      if (c >= 'A' && c <= 'Z') c = c - 'A' + 'a';
      detail::append_utf8(cur, c);
      ++len;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

struct TermWeight {
  std::string term;
  double weight = 0.0;
};

/// Per-document tf-idf with idf = ln((1+N)/(1+df)) + 1 and raw counts as tf.
inline std::vector<std::map<std::string, double>> tfidf(std::span<const std::string> docs) {
  if (docs.empty()) throw InvalidArgument("tfidf: empty corpus");
  std::vector<std::map<std::string, double>> tf(docs.size());
  std::map<std::string, double> df;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (auto& t : tokenize(docs[i])) tf[i][std::move(t)] += 1.0;
    for (const auto& [t, _] : tf[i]) df[t] += 1.0;
  }
  const double n = static_cast<double>(docs.size());
  for (auto& doc : tf) {
    for (auto& [t, w] : doc) w *= std::log((1.0 + n) / (1.0 + df[t])) + 1.0;
  }
  return tf;
}

/// Top terms by tf-idf weight summed over the documents in `partition`
/// (indices into docs, weights computed over the whole corpus). Ties break
/// alphabetically.
inline std::vector<TermWeight> tfidf_keywords(std::span<const std::string> docs, std::span<const std::size_t> partition,
                                              std::size_t top_k) {
  const auto weights = tfidf(docs);
  std::map<std::string, double> sum;
  for (std::size_t i : partition) {
    if (i >= docs.size()) throw InvalidArgument("tfidf_keywords: partition index out of range");
    for (const auto& [t, w] : weights[i]) sum[t] += w;
  }
  std::vector<TermWeight> out;
  for (auto& [t, w] : sum) out.push_back({t, w});
  std::stable_sort(out.begin(), out.end(), [](const TermWeight& a, const TermWeight& b) { return a.weight > b.weight; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

inline std::vector<TermWeight> tfidf_keywords(std::span<const std::string> docs, std::size_t top_k) {
  std::vector<std::size_t> all(docs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return tfidf_keywords(docs, all, top_k);
}

// ---------------------------------------------------------------------------
// Before/after comparison report

struct DimensionComparison {
  double mean_before = 0.0;
  double mean_after = 0.0;
  double macro_before = 0.0;
  double macro_after = 0.0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  std::optional<double> cohens_d;
  std::optional<WilcoxonResult> wilcoxon;
};

/// Paired comparison by sample_id. Rows: q1..q4 then the per-sample average.
inline std::vector<std::pair<std::string, DimensionComparison>> compare_paired(std::span<const ScoredPoint> before,
                                                                              std::span<const ScoredPoint> after) {
  std::map<std::string, const ScoreVector*> by_id;
  for (const auto& p : before) by_id.emplace(p.id, &p.scores);
  std::vector<std::pair<ScoreVector, ScoreVector>> pairs;
  for (const auto& p : after) {
    if (auto it = by_id.find(p.id); it != by_id.end()) pairs.emplace_back(*it->second, p.scores);
  }
  if (pairs.size() < 2) throw InvalidArgument("compare_paired: need >= 2 paired samples");

  auto summarize = [&](auto value_of) {
    std::vector<double> b, a, diff;
    for (const auto& [x, y] : pairs) {
      b.push_back(value_of(x));
      a.push_back(value_of(y));
      diff.push_back(value_of(y) - value_of(x));
    }
    DimensionComparison c;
    c.mean_before = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    c.mean_after = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    c.macro_before = macro_rate(b);
    c.macro_after = macro_rate(a);
    c.mean_diff = c.mean_after - c.mean_before;
    c.sd_diff = sample_sd(diff);
    if (c.sd_diff > 0.0) c.cohens_d = cohens_d(diff);
    if (std::any_of(diff.begin(), diff.end(), [](double d) { return d != 0.0; })) c.wilcoxon = wilcoxon_signed_rank(diff);
    return c;
  };
  std::vector<std::pair<std::string, DimensionComparison>> rows;
  for (Dimension d : kAllDimensions) {
    rows.emplace_back(std::string(dimension_key(d)), summarize([d](const ScoreVector& v) { return v[d]; }));
  }
  rows.emplace_back("average", summarize([](const ScoreVector& v) { return (v[0] + v[1] + v[2] + v[3]) / 4.0; }));
  return rows;
}

inline json to_json(const WilcoxonResult& w) {
  return json{{"w_plus", w.w_plus}, {"w_minus", w.w_minus}, {"statistic", w.statistic},
              {"n", w.n},           {"z", w.z},             {"p_value", w.p_value}};
}

inline json to_json(const DimensionComparison& c) {
  json j{{"mean_before", c.mean_before}, {"mean_after", c.mean_after}, {"macro_rate_before", c.macro_before},
         {"macro_rate_after", c.macro_after}, {"mean_diff", c.mean_diff}, {"sd_diff", c.sd_diff}};
  j["cohens_d"] = c.cohens_d ? json(*c.cohens_d) : json(nullptr);
  j["wilcoxon"] = c.wilcoxon ? to_json(*c.wilcoxon) : json(nullptr);
  return j;
}

}  // namespace naiad
