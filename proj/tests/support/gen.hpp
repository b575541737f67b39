#pragma once

// Hand-rolled generators shared by the property tests.

#include <string>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/random.hpp"

namespace naiad::gen {

inline double score(Rng& rng) { return std::round(rng.uniform(1.0, 5.0) * 10.0) / 10.0; }

inline ScoreVector scores(Rng& rng) { return {score(rng), score(rng), score(rng), score(rng)}; }

inline std::string word(Rng& rng, std::size_t max_len = 8) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyz";
  std::string w;
  const std::size_t len = 1 + rng.below(max_len);
  for (std::size_t i = 0; i < len; ++i) w += alphabet[rng.below(26)];
  return w;
}

inline std::string sentence(Rng& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += word(rng);
  }
  return s;
}

inline AdMeta ad(Rng& rng) {
  static const std::vector<std::string> industries{"travel", "finance", "food", "education"};
  return {"ad-" + word(rng, 5), word(rng) + " Co", industries[rng.below(industries.size())], sentence(rng, 8),
          {word(rng), word(rng)}};
}

/// A sample satisfying every validation rule.
inline Sample valid_sample(Rng& rng, std::size_t id) {
  Sample s;
  s.sample_id = "s" + std::to_string(id);
  s.query = sentence(rng, 6) + "?";
  if (rng.below(2)) s.query_category = word(rng);
  s.ad = ad(rng);
  if (rng.below(4) == 0) {
    s.source = SampleSource::human_transcript;
    s.response = sentence(rng, 20);
  } else {
    s.source = SampleSource::synthetic;
    s.strategy_id = static_cast<int>(1 + rng.below(4));
    s.logical_bridge = sentence(rng, 10);
    s.response = sentence(rng, 5) + " <ad>" + sentence(rng, 4) + "</ad> " + sentence(rng, 3);
    s.self_eval = scores(rng);
    s.target = ScoreVector(double(rng.uniform_int(1, 5)), double(rng.uniform_int(1, 5)),
                           double(rng.uniform_int(1, 5)), double(rng.uniform_int(1, 5)));
    s.attempts = static_cast<int>(1 + rng.below(8));
    static constexpr std::array<QualityTier, 3> tiers{QualityTier::high, QualityTier::mid, QualityTier::low};
    if (rng.below(2)) s.quality_tier = tiers[rng.below(3)];
  }
  if (rng.below(3)) s.judge_raw = scores(rng);
  if (rng.below(3) == 0) s.calibrated = scores(rng);
  return s;
}

inline std::vector<double> normals(Rng& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> out(n);
  for (auto& x : out) x = rng.normal(mean, sd);
  return out;
}

}  // namespace naiad::gen
