#pragma once

// Offline stand-in for all three model roles. It reads the prompt it is given
// (target profile, input block, dimension, transcript) and produces a
// plausible, well-formed reply. Output is a pure function of (prompt, seed).

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/llm_client.hpp"
#include "naiad/prompt_assets.hpp"
#include "naiad/random.hpp"

namespace naiad {

namespace mock {

/// Text following the last occurrence of `key` up to the end of that line.
inline std::string line_after(std::string_view text, std::string_view key) {
  const std::size_t at = text.rfind(key);
  if (at == std::string_view::npos) return {};
  const std::size_t start = at + key.size();
  const std::size_t end = text.find('\n', start);
  return std::string(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

inline std::vector<std::string> words(std::string_view s, std::size_t max_words) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-') {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
      if (out.size() == max_words) return out;
    }
  }
  if (!cur.empty() && out.size() < max_words) out.push_back(std::move(cur));
  return out;
}

inline std::string join(const std::vector<std::string>& w, std::string_view sep = " ") {
  std::string out;
  for (const auto& x : w) {
    if (!out.empty()) out += sep;
    out += x;
  }
  return out;
}

inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

inline int strategy_of(std::string_view prompt) {
  const std::string name = line_after(prompt, "### Ad Integration Strategy: ");
  for (std::size_t i = 0; i < assets::kStrategyNames.size(); ++i) {
    if (assets::kStrategyNames[i] == name) return static_cast<int>(i) + 1;
  }
  return 1;
}

inline const std::vector<std::string>& word_bank(int strategy) {
  static const std::vector<std::vector<std::string>> banks{
      {"values", "mission", "vision", "principle", "commitment", "purpose", "integrity", "long-term"},
      {"style", "aesthetic", "lifestyle", "taste", "design", "elegance", "everyday", "mood"},
      {"feeling", "anxiety", "relief", "confidence", "comfort", "stress", "reassurance", "belonging"},
      {"method", "process", "framework", "system", "step", "structure", "workflow", "principle"}};
  return banks[static_cast<std::size_t>(std::clamp(strategy, 1, 4) - 1)];
}

inline bool parse_profile(std::string_view prompt, ScoreVector& out) {
  const std::string line = line_after(prompt, "### Target Score Profile\n");
  if (line.empty()) return false;
  for (Dimension d : kAllDimensions) {
    const std::string key = "Q" + std::to_string(index_of(d) + 1) + "=";
    const std::size_t at = line.find(key);
    if (at == std::string::npos) return false;
    try {
      out[d] = std::stod(line.substr(at + key.size()));
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

inline std::string generate(std::string_view prompt, const DecodeParams& params) {
  Rng rng(fnv1a(prompt) ^ params.seed);
  ScoreVector target(3, 3, 3, 3);
  parse_profile(prompt, target);
  const std::string query = line_after(prompt, "User query: ");
  const std::string ad_name = line_after(prompt, "ad_name: ");
  const std::string copy = line_after(prompt, "ad_copy: ");
  const int strategy = strategy_of(prompt);
  const auto& bank = word_bank(strategy);

  json self;
  for (Dimension d : kAllDimensions) {
    self[std::string(dimension_key(d))] = std::clamp(round1(target[d] + rng.uniform(-1.0, 1.0)), kScoreMin, kScoreMax);
  }
  const auto qwords = words(query, 6);
  std::vector<std::string> bridge_words;
  for (int i = 0; i < 3; ++i) bridge_words.push_back(bank[rng.below(bank.size())]);
  const std::string bridge = "The question about " + join(qwords) + " shares its " + join(bridge_words, " and ") +
                             " with what " + ad_name + " offers.";
  const auto cwords = words(copy, 12);
  std::string response = "On " + join(qwords) + ": start from the " + bridge_words[0] +
                         " behind it and work outward. ";
  // One reply in ten forgets the ad markers, which the caller must reject.
  if (rng.below(10) == 0) {
    response += ad_name + " " + join(cwords) + ".";
  } else {
    response += "<ad>" + ad_name + " brings " + join(cwords) + ".</ad> ";
    response += "That keeps the " + bridge_words[1] + " in view.";
  }
  json out{{"ad_keywords", words(copy, 3)},
           {"keyword_source", "extracted"},
           {"logic_bridge", bridge},
           {"response", response},
           {"self_evaluation", self}};
  return "```json\n" + out.dump(2) + "\n```";
}

inline std::string judge(std::string_view prompt, const DecodeParams& params) {
  const std::size_t turn = prompt.rfind("[Target Turn]");
  const std::string_view body = turn == std::string_view::npos ? prompt : prompt.substr(turn);
  Rng rng(fnv1a(body) ^ params.seed);
  const double score = std::clamp(round1(1.0 + 4.0 * (rng.uniform() + rng.uniform()) / 2.0), kScoreMin, kScoreMax);
  const std::string dim = line_after(prompt, "[Dimension to score]\n");
  json out{{"evidence", json::array({"mock evidence for " + dim})},
           {"logic", "compared against the provided shot"},
           {"score", score}};
  return out.dump();
}

inline std::string inverse_query(std::string_view prompt) {
  const std::size_t at = prompt.rfind("[Transcript]\n");
  const std::string_view text = at == std::string_view::npos ? prompt : prompt.substr(at + 13);
  const auto w = words(text, 6);
  if (w.empty()) return "";
  return "What should I know about " + join(w) + "?";
}

}  // namespace mock

/// Mock holding every capability and dispatching on the prompt family.
inline MockClient make_synthetic_mock(std::uint64_t seed = 0) {
  return MockClient("mock", {Capability::generator, Capability::judge, Capability::synthesizer},
                    [seed](std::string_view prompt, const DecodeParams& params) {
                      DecodeParams p = params;
                      p.seed ^= seed;
                      if (prompt.find("Native Advertising Architect") != std::string_view::npos) return mock::generate(prompt, p);
                      if (prompt.find("decoupled AI evaluator") != std::string_view::npos) return mock::judge(prompt, p);
                      if (prompt.find("[Transcript]") != std::string_view::npos) return mock::inverse_query(prompt);
                      throw TransportError("mock: unrecognized prompt");
                    });
}

}  // namespace naiad
