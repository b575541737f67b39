#pragma once

#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/prompt_assets.hpp"
#include "naiad/templates.hpp"

namespace naiad {

using Substitution = std::pair<std::string_view, std::string>;

/// Replace each `{name}` whose name is listed; other braces are left alone.
/// Single pass, so substituted text is never rescanned.
inline std::string fill_placeholders(std::string_view tmpl, std::span<const Substitution> subs) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string_view name = tmpl.substr(i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [key, value] : subs) {
          if (key == name) {
            out += value;
            replaced = true;
            break;
          }
        }
        if (replaced) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

inline std::string format_score(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string_view strategy_text(int strategy_id) {
  switch (strategy_id) {
    case 1: return assets::kStrategy1;
    case 2: return assets::kStrategy2;
    case 3: return assets::kStrategy3;
    case 4: return assets::kStrategy4;
    default: throw InvalidArgument("unknown strategy_id " + std::to_string(strategy_id));
  }
}

inline std::string_view strategy_name(int strategy_id) {
  if (strategy_id < 1 || strategy_id > 4) throw InvalidArgument("unknown strategy_id " + std::to_string(strategy_id));
  return assets::kStrategyNames[static_cast<std::size_t>(strategy_id - 1)];
}

inline std::string_view criterion_text(Dimension d) {
  switch (d) {
    case Dimension::q1: return assets::kCriterionQ1;
    case Dimension::q2: return assets::kCriterionQ2;
    case Dimension::q3: return assets::kCriterionQ3;
    case Dimension::q4: return assets::kCriterionQ4;
  }
  return assets::kCriterionQ1;
}

inline std::string criteria_block() {
  std::string out(assets::kCriteriaHeader);
  for (Dimension d : kAllDimensions) {
    out += "\n\n";
    out += criterion_text(d);
  }
  return out;
}

/// Tier block (or the decoupled block for hard negatives) followed by the
/// exact per-dimension target profile.
inline std::string quality_instruction(const ScoreTemplate& t) {
  std::string out;
  if (t.discordant) {
    out = assets::kQualityDecoupled;
  } else {
    switch (t.quality_tier.value_or(QualityTier::mid)) {
      case QualityTier::high: out = assets::kQualityHigh; break;
      case QualityTier::mid: out = assets::kQualityMid; break;
      case QualityTier::low: out = assets::kQualityLow; break;
    }
  }
  const Substitution subs[] = {{"q1", format_score(t.target[Dimension::q1])},
                               {"q2", format_score(t.target[Dimension::q2])},
                               {"q3", format_score(t.target[Dimension::q3])},
                               {"q4", format_score(t.target[Dimension::q4])}};
  out += "\n\n";
  out += fill_placeholders(assets::kTargetProfile, subs);
  return out;
}

/// A scored reference response rendered in the bundled few-shot layout.
struct FewShotExample {
  std::string query;
  std::string ad_name;
  std::string llm_response;
  ScoreVector standard_scores;
  std::string comment;
};

inline std::string format_few_shot(const FewShotExample& ex) {
  auto quoted = [](const std::string& s) { return json(s).dump(); };
  std::string scores = "[";
  for (std::size_t i = 0; i < kDimensions; ++i) {
    if (i) scores += ",";
    scores += format_score(ex.standard_scores[i]);
  }
  scores += "]";
  return "    \"query\": " + quoted(ex.query) + ", \n    \"ad_name\": " + quoted(ex.ad_name) +
         ", \n    \"llm_response\": " + quoted(ex.llm_response) + ", \n    \"standard_scores\": " + scores +
         ", \n    \"comment\": " + quoted(ex.comment);
}

inline std::string few_shot_block(std::span<const FewShotExample> shots) {
  if (shots.empty()) return std::string(assets::kFewShotKelly);
  std::string out;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    if (i) out += "\n\n";
    out += format_few_shot(shots[i]);
  }
  return out;
}

struct GenerationJob {
  std::string job_id;
  QueryAdPair pair;
  ScoreTemplate score_template;
  int strategy_id = 1;
  int retry_budget = 8;
  std::uint64_t seed = 0;
};

inline std::string build_generation_prompt(const GenerationJob& job) {
  if (job.retry_budget < 1) throw InvalidArgument("retry_budget must be >= 1");
  const Substitution subs[] = {
      {"strategy_text", std::string(strategy_text(job.strategy_id))},
      {"quality_instruction", quality_instruction(job.score_template)},
      {"match_tier", job.pair.match_tier},
      {"Q1_Q4_criteria", criteria_block()},
      {"JSON_SCHEMA", std::string(assets::kJsonSchema)},
      {"few_shot_sample", std::string(assets::kFewShotKelly)},
  };
  const Substitution input[] = {
      {"query", job.pair.query},
      {"ad_name", job.pair.ad.ad_name},
      {"ad_industry", job.pair.ad.industry},
      {"ad_copy", job.pair.ad.copy},
  };
  return fill_placeholders(assets::kGenerationMain, subs) + "\n\n" + fill_placeholders(assets::kGenerationInput, input);
}

inline std::string build_judge_prompt(const Sample& sample, Dimension d, std::span<const FewShotExample> shots) {
  const Substitution subs[] = {
      {"few_shot_sample", few_shot_block(shots)},
      {"query", sample.query},
      {"response", sample.response},
      {"targeting_dimension_criterion", std::string(criterion_text(d))},
  };
  return fill_placeholders(assets::kJudgeMain, subs);
}

inline std::string build_inverse_query_prompt(std::string_view transcript) {
  const Substitution subs[] = {{"transcript", std::string(transcript)}};
  return fill_placeholders(assets::kInverseQuery, subs);
}

}  // namespace naiad
