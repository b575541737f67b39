#pragma once

// Shared domain types and their JSON-lines encodings.
//
// Encoding rules: snake_case field names, absent optionals are omitted (never
// null), scores are plain JSON numbers written at full double precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "naiad/error.hpp"

namespace naiad {

using json = nlohmann::json;

inline constexpr double kScoreMin = 1.0;
inline constexpr double kScoreMax = 5.0;
inline constexpr std::size_t kDimensions = 4;

/// Fixed order: relevance, coherence, ad effectiveness, click-through intent.
enum class Dimension { q1 = 0, q2 = 1, q3 = 2, q4 = 3 };

inline constexpr std::array<Dimension, kDimensions> kAllDimensions{
    Dimension::q1, Dimension::q2, Dimension::q3, Dimension::q4};

inline std::size_t index_of(Dimension d) { return static_cast<std::size_t>(d); }

inline std::string_view dimension_key(Dimension d) {
  static constexpr std::array<std::string_view, kDimensions> keys{"q1", "q2", "q3", "q4"};
  return keys[index_of(d)];
}

inline Dimension parse_dimension(std::string_view key) {
  for (Dimension d : kAllDimensions) {
    if (dimension_key(d) == key) return d;
  }
  throw InvalidArgument("unknown dimension '" + std::string(key) + "'");
}

struct ScoreVector {
  std::array<double, kDimensions> q{};

  ScoreVector() = default;
  ScoreVector(double q1, double q2, double q3, double q4) : q{q1, q2, q3, q4} {}

  double& operator[](std::size_t i) { return q[i]; }
  double operator[](std::size_t i) const { return q[i]; }
  double& operator[](Dimension d) { return q[index_of(d)]; }
  double operator[](Dimension d) const { return q[index_of(d)]; }

  bool operator==(const ScoreVector&) const = default;
};

inline bool in_score_range(double x) { return x >= kScoreMin && x <= kScoreMax; }

inline bool in_score_range(const ScoreVector& v) {
  for (double x : v.q) {
    if (!in_score_range(x)) return false;
  }
  return true;
}

inline double clamp_score(double x) {
  if (!std::isfinite(x)) throw BoundError("non-finite score");
  return std::min(kScoreMax, std::max(kScoreMin, x));
}

inline ScoreVector clamp_scores(const ScoreVector& v) {
  ScoreVector out;
  for (std::size_t i = 0; i < kDimensions; ++i) out[i] = clamp_score(v[i]);
  return out;
}

enum class QualityTier { high, mid, low };
enum class SampleSource { synthetic, human_transcript };

inline std::string_view to_string(QualityTier t) {
  switch (t) {
    case QualityTier::high: return "high";
    case QualityTier::mid: return "mid";
    case QualityTier::low: return "low";
  }
  return "mid";
}

inline QualityTier parse_quality_tier(std::string_view s) {
  if (s == "high") return QualityTier::high;
  if (s == "mid") return QualityTier::mid;
  if (s == "low") return QualityTier::low;
  throw ParseError("quality_tier: unknown value '" + std::string(s) + "'");
}

inline std::string_view to_string(SampleSource s) {
  return s == SampleSource::synthetic ? "synthetic" : "human_transcript";
}

inline SampleSource parse_source(std::string_view s) {
  if (s == "synthetic") return SampleSource::synthetic;
  if (s == "human_transcript") return SampleSource::human_transcript;
  throw ParseError("source: unknown value '" + std::string(s) + "'");
}

struct AdMeta {
  std::string ad_id;
  std::string ad_name;
  std::string industry;
  std::string copy;
  std::vector<std::string> keywords;

  bool operator==(const AdMeta&) const = default;
};

struct Sample {
  std::string sample_id;
  std::string query;
  std::optional<std::string> query_category;
  AdMeta ad;
  std::optional<int> strategy_id;
  std::optional<QualityTier> quality_tier;
  std::optional<std::string> logical_bridge;
  std::string response;
  std::optional<ScoreVector> self_eval;
  std::optional<ScoreVector> judge_raw;
  std::optional<ScoreVector> calibrated;
  // Generation provenance: the template target and the attempt it was accepted on.
  std::optional<ScoreVector> target;
  std::optional<int> attempts;
  SampleSource source = SampleSource::synthetic;

  bool operator==(const Sample&) const = default;
};

struct DomainLabels {
  std::string query_category;
  std::string ad_industry;

  bool operator==(const DomainLabels&) const = default;
};

struct AnchorRecord {
  std::string sample_id;
  ScoreVector human;
  ScoreVector judge_raw;
  std::optional<ScoreVector> self_eval;
  DomainLabels domain_labels;

  bool operator==(const AnchorRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Ad span sentinels

inline constexpr std::string_view kAdOpen = "<ad>";
inline constexpr std::string_view kAdClose = "</ad>";

/// Number of well-formed <ad>...</ad> spans, or nullopt when the markers are
/// unbalanced or nested.
inline std::optional<int> count_ad_spans(std::string_view text) {
  int spans = 0;
  bool open = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t o = text.find(kAdOpen, pos);
    const std::size_t c = text.find(kAdClose, pos);
    if (o == std::string_view::npos && c == std::string_view::npos) break;
    if (o < c) {
      if (open) return std::nullopt;
      open = true;
      pos = o + kAdOpen.size();
    } else {
      if (!open) return std::nullopt;
      open = false;
      ++spans;
      pos = c + kAdClose.size();
    }
  }
  if (open) return std::nullopt;
  return spans;
}

/// Text between the first <ad> and its </ad>; empty if there is none.
inline std::string_view ad_span_text(std::string_view text) {
  const std::size_t o = text.find(kAdOpen);
  if (o == std::string_view::npos) return {};
  const std::size_t start = o + kAdOpen.size();
  const std::size_t c = text.find(kAdClose, start);
  if (c == std::string_view::npos) return {};
  return text.substr(start, c - start);
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string field;
  std::string rule;

  std::string str() const { return field + ": " + rule; }
  bool operator==(const Violation&) const = default;
};

namespace detail {
inline void check_scores(std::vector<Violation>& out, std::string_view name,
                         const std::optional<ScoreVector>& v) {
  if (!v) return;
  for (Dimension d : kAllDimensions) {
    const double x = (*v)[d];
    if (!std::isfinite(x) || !in_score_range(x)) {
      out.push_back({std::string(name) + "." + std::string(dimension_key(d)), "out of [1,5]"});
    }
  }
}
}  // namespace detail

inline std::vector<Violation> validate_sample(const Sample& s) {
  std::vector<Violation> out;
  if (s.sample_id.empty()) out.push_back({"sample_id", "empty"});
  if (s.ad.ad_id.empty()) out.push_back({"ad.ad_id", "empty"});
  if (s.ad.copy.empty()) out.push_back({"ad.copy", "empty"});

  const bool synthetic = s.source == SampleSource::synthetic;
  if (synthetic) {
    const auto spans = count_ad_spans(s.response);
    if (!spans) {
      out.push_back({"response", "malformed ad span"});
    } else if (*spans == 0) {
      out.push_back({"response", "missing ad span"});
    } else if (*spans > 1) {
      out.push_back({"response", "multiple ad spans"});
    }
    if (!s.strategy_id) {
      out.push_back({"strategy_id", "required for synthetic source"});
    } else if (*s.strategy_id < 1 || *s.strategy_id > 4) {
      out.push_back({"strategy_id", "out of {1..4}"});
    }
  } else {
    if (s.strategy_id) out.push_back({"strategy_id", "must be absent for human_transcript source"});
    if (s.self_eval) out.push_back({"self_eval", "must be absent for human_transcript source"});
  }

  detail::check_scores(out, "self_eval", s.self_eval);
  detail::check_scores(out, "judge_raw", s.judge_raw);
  detail::check_scores(out, "calibrated", s.calibrated);
  detail::check_scores(out, "target", s.target);
  if (s.attempts && *s.attempts < 1) out.push_back({"attempts", "must be >= 1"});
  return out;
}

inline std::vector<Violation> validate_anchor(const AnchorRecord& a) {
  std::vector<Violation> out;
  if (a.sample_id.empty()) out.push_back({"sample_id", "empty"});
  detail::check_scores(out, "human", a.human);
  detail::check_scores(out, "judge_raw", a.judge_raw);
  detail::check_scores(out, "self_eval", a.self_eval);
  return out;
}

// ---------------------------------------------------------------------------
// JSON encoding

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing key \"") + key + "\"");
  return *it;
}

template <typename T>
T get_as(const json& j, const char* key) {
  const json& v = require(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("key \"") + key + "\" has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("key \"") + key + "\" has the wrong type");
  }
}

}  // namespace detail

inline void to_json(json& j, const ScoreVector& v) {
  j = json::object();
  for (Dimension d : kAllDimensions) j[std::string(dimension_key(d))] = v[d];
}

inline void from_json(const json& j, ScoreVector& v) {
  for (Dimension d : kAllDimensions) {
    const std::string key(dimension_key(d));
    const json& x = detail::require(j, key.c_str());
    if (!x.is_number()) throw ParseError("key \"" + key + "\" must be a number");
    v[d] = x.get<double>();
  }
}

inline void to_json(json& j, const AdMeta& a) {
  j = json{{"ad_id", a.ad_id}, {"ad_name", a.ad_name}, {"industry", a.industry}, {"copy", a.copy},
           {"keywords", a.keywords}};
}

inline void from_json(const json& j, AdMeta& a) {
  a.ad_id = detail::get_as<std::string>(j, "ad_id");
  a.ad_name = detail::get_as<std::string>(j, "ad_name");
  a.industry = detail::get_opt<std::string>(j, "industry").value_or("");
  a.copy = detail::get_as<std::string>(j, "copy");
  a.keywords = detail::get_opt<std::vector<std::string>>(j, "keywords").value_or(std::vector<std::string>{});
}

inline void to_json(json& j, const Sample& s) {
  j = json{{"sample_id", s.sample_id}, {"query", s.query}, {"ad", s.ad}, {"response", s.response},
           {"source", to_string(s.source)}};
  if (s.query_category) j["query_category"] = *s.query_category;
  if (s.strategy_id) j["strategy_id"] = *s.strategy_id;
  if (s.quality_tier) j["quality_tier"] = to_string(*s.quality_tier);
  if (s.logical_bridge) j["logical_bridge"] = *s.logical_bridge;
  if (s.self_eval) j["self_eval"] = *s.self_eval;
  if (s.judge_raw) j["judge_raw"] = *s.judge_raw;
  if (s.calibrated) j["calibrated"] = *s.calibrated;
  if (s.target) j["target"] = *s.target;
  if (s.attempts) j["attempts"] = *s.attempts;
}

inline void from_json(const json& j, Sample& s) {
  s.sample_id = detail::get_as<std::string>(j, "sample_id");
  s.query = detail::get_as<std::string>(j, "query");
  s.query_category = detail::get_opt<std::string>(j, "query_category");
  s.ad = detail::require(j, "ad").get<AdMeta>();
  s.strategy_id = detail::get_opt<int>(j, "strategy_id");
  if (auto t = detail::get_opt<std::string>(j, "quality_tier")) s.quality_tier = parse_quality_tier(*t);
  s.logical_bridge = detail::get_opt<std::string>(j, "logical_bridge");
  s.response = detail::get_as<std::string>(j, "response");
  s.self_eval = detail::get_opt<ScoreVector>(j, "self_eval");
  s.judge_raw = detail::get_opt<ScoreVector>(j, "judge_raw");
  s.calibrated = detail::get_opt<ScoreVector>(j, "calibrated");
  s.target = detail::get_opt<ScoreVector>(j, "target");
  s.attempts = detail::get_opt<int>(j, "attempts");
  s.source = parse_source(detail::get_as<std::string>(j, "source"));
}

inline void to_json(json& j, const DomainLabels& d) {
  j = json{{"query_category", d.query_category}, {"ad_industry", d.ad_industry}};
}

inline void from_json(const json& j, DomainLabels& d) {
  d.query_category = detail::get_opt<std::string>(j, "query_category").value_or("");
  d.ad_industry = detail::get_opt<std::string>(j, "ad_industry").value_or("");
}

inline void to_json(json& j, const AnchorRecord& a) {
  j = json{{"sample_id", a.sample_id}, {"human", a.human}, {"judge_raw", a.judge_raw},
           {"domain_labels", a.domain_labels}};
  if (a.self_eval) j["self_eval"] = *a.self_eval;
}

inline void from_json(const json& j, AnchorRecord& a) {
  a.sample_id = detail::get_as<std::string>(j, "sample_id");
  a.human = detail::require(j, "human").get<ScoreVector>();
  a.judge_raw = detail::require(j, "judge_raw").get<ScoreVector>();
  a.self_eval = detail::get_opt<ScoreVector>(j, "self_eval");
  if (auto it = j.find("domain_labels"); it != j.end()) a.domain_labels = it->get<DomainLabels>();
}

// ---------------------------------------------------------------------------
// Query pool and matched pairs

struct QueryRecord {
  std::string query_id;
  std::string query;
  std::string category;

  bool operator==(const QueryRecord&) const = default;
};

inline void to_json(json& j, const QueryRecord& q) {
  j = json{{"query_id", q.query_id}, {"query", q.query}, {"category", q.category}};
}

inline void from_json(const json& j, QueryRecord& q) {
  q.query_id = detail::get_as<std::string>(j, "query_id");
  q.query = detail::get_as<std::string>(j, "query");
  q.category = detail::get_opt<std::string>(j, "category").value_or("");
}

/// One matcher output row, carrying enough context for generation.
struct QueryAdPair {
  std::string query_id;
  std::string query;
  std::string query_category;
  AdMeta ad;
  double similarity = 0.0;
  std::string match_tier = "medium";

  bool operator==(const QueryAdPair&) const = default;
};

inline void to_json(json& j, const QueryAdPair& p) {
  j = json{{"query_id", p.query_id}, {"query", p.query},         {"query_category", p.query_category},
           {"ad_id", p.ad.ad_id},    {"ad", p.ad},               {"similarity", p.similarity},
           {"match_tier", p.match_tier}};
}

inline void from_json(const json& j, QueryAdPair& p) {
  p.query_id = detail::get_as<std::string>(j, "query_id");
  p.query = detail::get_as<std::string>(j, "query");
  p.query_category = detail::get_opt<std::string>(j, "query_category").value_or("");
  p.ad = detail::require(j, "ad").get<AdMeta>();
  p.similarity = detail::get_opt<double>(j, "similarity").value_or(0.0);
  p.match_tier = detail::get_opt<std::string>(j, "match_tier").value_or("medium");
}

/// A raw sponsorship transcript awaiting inverse query synthesis.
struct TranscriptRecord {
  std::string transcript_id;
  std::string text;
  std::string category;
  AdMeta ad;
};

inline void to_json(json& j, const TranscriptRecord& t) {
  j = json{{"transcript_id", t.transcript_id}, {"text", t.text}, {"category", t.category}, {"ad", t.ad}};
}

inline void from_json(const json& j, TranscriptRecord& t) {
  t.transcript_id = detail::get_as<std::string>(j, "transcript_id");
  t.text = detail::get_as<std::string>(j, "text");
  t.category = detail::get_opt<std::string>(j, "category").value_or("");
  t.ad = detail::require(j, "ad").get<AdMeta>();
}

/// Domain labels of a sample as carried into anchors and rectifier features.
inline DomainLabels domain_labels_of(const Sample& s) {
  return {s.query_category.value_or(""), s.ad.industry};
}

/// Scores used for downstream analysis: calibrated when present, else raw judge.
inline std::optional<ScoreVector> analysis_scores(const Sample& s) {
  if (s.calibrated) return s.calibrated;
  return s.judge_raw;
}

}  // namespace naiad
