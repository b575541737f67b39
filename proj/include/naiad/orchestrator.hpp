#pragma once

// Generation with tolerance-based rejection, inverse query synthesis and
// single-dimension judging, all through the LlmClient boundary.

#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/llm_client.hpp"
#include "naiad/parallel.hpp"
#include "naiad/prompts.hpp"
#include "naiad/random.hpp"
#include "naiad/templates.hpp"

namespace naiad {

struct ParsedGeneration {
  std::string logical_bridge;
  std::string response;
  ScoreVector self_eval;
  std::vector<std::string> keywords;
};

namespace detail {

/// The outermost {...} of a model reply, tolerating code fences and chatter.
inline std::string_view json_payload(std::string_view raw) {
  const std::size_t open = raw.find('{');
  const std::size_t close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ParseError("no JSON object in model output");
  }
  return raw.substr(open, close - open + 1);
}

inline json parse_payload(std::string_view raw) {
  try {
    return json::parse(json_payload(raw));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline std::string text_field(const json& j, const char* key) {
  const json& v = require(j, key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += "\n";
      out += item.is_string() ? item.get<std::string>() : item.dump();
    }
    return out;
  }
  throw ParseError(std::string("key \"") + key + "\" must be text");
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Extract bridge, response, self-evaluation and keywords from a generator reply.
/// Throws ParseError, StructureError (ad span count != 1) or BoundError.
inline ParsedGeneration parse_generation(std::string_view raw) {
  const json j = detail::parse_payload(raw);
  if (!j.is_object()) throw ParseError("model output is not a JSON object");
  ParsedGeneration out;
  out.logical_bridge = detail::text_field(j, "logic_bridge");
  out.response = detail::text_field(j, "response");
  const json& se = detail::require(j, "self_evaluation");
  out.self_eval = se.get<ScoreVector>();
  if (auto it = j.find("ad_keywords"); it != j.end() && it->is_array()) {
    for (const auto& k : *it) {
      if (k.is_string()) out.keywords.push_back(k.get<std::string>());
    }
  }
  const auto spans = count_ad_spans(out.response);
  if (!spans) throw StructureError("response: malformed ad span");
  if (*spans == 0) throw StructureError("response: missing ad span");
  if (*spans > 1) throw StructureError("response: multiple ad spans");
  for (Dimension d : kAllDimensions) {
    const double x = out.self_eval[d];
    if (!std::isfinite(x) || !in_score_range(x)) {
      throw BoundError("self_evaluation." + std::string(dimension_key(d)) + ": out of [1,5]");
    }
  }
  return out;
}

struct Exhausted {
  int attempts = 0;
  std::string last_failure;
};

using GenerationOutcome = std::variant<Sample, Exhausted>;

struct GenerationOptions {
  ToleranceBand band;
  DecodeParams decode;
  RetryPolicy retry;
};

/// Prompt, complete, parse, accept; up to job.retry_budget attempts. Attempt k
/// decodes with seed derive_seed(job.seed, k) so a pure mock can vary per attempt.
inline GenerationOutcome generate_with_rejection(const LlmClient& client, const GenerationJob& job,
                                                 const GenerationOptions& opt = {}) {
  if (!client.has(Capability::generator)) throw InvalidArgument(client.name() + " lacks generator capability");
  const std::string prompt = build_generation_prompt(job);
  std::string last_failure = "no attempts";
  for (int attempt = 1; attempt <= job.retry_budget; ++attempt) {
    DecodeParams params = opt.decode;
    params.seed = derive_seed(job.seed, static_cast<std::uint64_t>(attempt));
    const std::string raw = complete_with_retry(client, prompt, params, opt.retry);
    ParsedGeneration parsed;
    try {
      parsed = parse_generation(raw);
    } catch (const Error& e) {
      last_failure = e.what();
      continue;
    }
    if (!accept(parsed.self_eval, job.score_template.target, opt.band)) {
      last_failure = "rejected: self_eval outside tolerance band of target";
      continue;
    }
    Sample s;
    s.sample_id = job.job_id;
    s.query = job.pair.query;
    if (!job.pair.query_category.empty()) s.query_category = job.pair.query_category;
    s.ad = job.pair.ad;
    if (s.ad.keywords.empty()) s.ad.keywords = parsed.keywords;
    s.strategy_id = job.strategy_id;
    s.quality_tier = job.score_template.quality_tier;
    s.logical_bridge = parsed.logical_bridge;
    s.response = parsed.response;
    s.self_eval = parsed.self_eval;
    s.target = job.score_template.target;
    s.attempts = attempt;
    s.source = SampleSource::synthetic;
    return s;
  }
  return Exhausted{job.retry_budget, last_failure};
}

inline std::vector<GenerationOutcome> generate_all(const LlmClient& client, std::span<const GenerationJob> jobs,
                                                   std::size_t concurrency, const GenerationOptions& opt = {}) {
  return parallel_map(jobs.size(), concurrency, [&](std::size_t i) { return generate_with_rejection(client, jobs[i], opt); });
}

/// Keep at most the first two sentences of s.
inline std::string first_sentences(std::string_view s, int max_sentences) {
  int seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' || c == '?' || c == '!') {
      const bool boundary = i + 1 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 1]));
      if (boundary && ++seen == max_sentences) return detail::trim(s.substr(0, i + 1));
    }
  }
  return detail::trim(s);
}

/// Reconstruct a standalone user query from a sponsorship transcript.
inline std::string synthesize_inverse_query(const LlmClient& client, std::string_view transcript,
                                            const DecodeParams& params = {}, const RetryPolicy& retry = {}) {
  if (!client.has(Capability::synthesizer)) throw InvalidArgument(client.name() + " lacks synthesizer capability");
  if (detail::trim(transcript).empty()) throw InvalidArgument("empty transcript");
  const std::string raw = complete_with_retry(client, build_inverse_query_prompt(transcript), params, retry);
  std::string q = detail::trim(raw);
  if (q.size() >= 2 && q.front() == '"' && q.back() == '"') q = detail::trim(std::string_view(q).substr(1, q.size() - 2));
  if (q.empty()) throw Error("empty synthesis");
  return first_sentences(q, 2);
}

inline Sample transcript_sample(const TranscriptRecord& t, std::string query) {
  Sample s;
  s.sample_id = t.transcript_id;
  s.query = std::move(query);
  if (!t.category.empty()) s.query_category = t.category;
  s.ad = t.ad;
  s.response = t.text;
  s.source = SampleSource::human_transcript;
  return s;
}

struct JudgeVerdict {
  Dimension dimension = Dimension::q1;
  std::string evidence;
  std::string logic;
  double score = 0.0;
};

inline JudgeVerdict parse_verdict(std::string_view raw, Dimension d) {
  const json j = detail::parse_payload(raw);
  if (!j.is_object()) throw ParseError("verdict is not a JSON object");
  JudgeVerdict v;
  v.dimension = d;
  v.evidence = detail::text_field(j, "evidence");
  v.logic = detail::text_field(j, "logic");
  const json& s = detail::require(j, "score");
  if (!s.is_number()) throw ParseError("key \"score\" must be a number");
  v.score = s.get<double>();
  if (!std::isfinite(v.score) || !in_score_range(v.score)) {
    throw BoundError("score " + format_score(v.score) + " out of [1,5]");
  }
  return v;
}

/// Score one dimension of one sample. With no shots the bundled exemplar is used.
inline JudgeVerdict judge_sample(const LlmClient& client, const Sample& sample, Dimension d,
                                 std::span<const FewShotExample> shots = {}, const DecodeParams& params = {},
                                 const RetryPolicy& retry = {}) {
  if (!client.has(Capability::judge)) throw InvalidArgument(client.name() + " lacks judge capability");
  const std::string raw = complete_with_retry(client, build_judge_prompt(sample, d, shots), params, retry);
  return parse_verdict(raw, d);
}

/// Judge every requested dimension; untouched dimensions of an existing
/// judge_raw are kept, missing ones default to the scale midpoint.
inline Sample judge_dimensions(const LlmClient& client, Sample sample, std::span<const Dimension> dims,
                               std::span<const FewShotExample> shots = {}, const DecodeParams& params = {},
                               const RetryPolicy& retry = {}) {
  ScoreVector scores = sample.judge_raw.value_or(ScoreVector(3, 3, 3, 3));
  for (Dimension d : dims) {
    DecodeParams p = params;
    p.seed = derive_seed(params.seed, index_of(d));
    scores[d] = judge_sample(client, sample, d, shots, p, retry).score;
  }
  sample.judge_raw = scores;
  return sample;
}

}  // namespace naiad
