#pragma once

// Decoupled score templates and tolerance-band acceptance.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/random.hpp"

namespace naiad {

/// Nearest integer, halves rounded away from zero (3.5 -> 4).
inline double round_half_away(double x) { return std::round(x); }

/// The Q4 support: clamp(round(mean(q1..q3)) + eps) for eps in {-1, 0, 1},
/// ascending with duplicates collapsed.
inline std::vector<int> q4_candidates(const std::array<double, 3>& q123) {
  for (double x : q123) {
    if (!std::isfinite(x) || !in_score_range(x)) throw BoundError("q4_candidates: input out of [1,5]");
  }
  const double mean = (q123[0] + q123[1] + q123[2]) / 3.0;
  const int centre = static_cast<int>(round_half_away(mean));
  std::vector<int> out;
  for (int eps = -1; eps <= 1; ++eps) {
    const int v = std::clamp(centre + eps, 1, 5);
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

inline int q4_for(const std::array<double, 3>& q123, int epsilon) {
  const double mean = (q123[0] + q123[1] + q123[2]) / 3.0;
  return std::clamp(static_cast<int>(round_half_away(mean)) + epsilon, 1, 5);
}

/// max(q1..q3) >= 4 and min(q1..q3) <= 2.
inline bool is_discordant_triple(const std::array<int, 3>& t) {
  const auto [lo, hi] = std::minmax({t[0], t[1], t[2]});
  return hi >= 4 && lo <= 2;
}

struct ScoreTemplate {
  ScoreVector target;
  int epsilon = 0;
  bool discordant = false;
  std::optional<QualityTier> quality_tier;  // set for concordant draws only

  bool operator==(const ScoreTemplate&) const = default;
};

/// Integer band a concordant template of the given tier draws each of q1..q3 from.
inline std::vector<int> tier_band(QualityTier tier) {
  switch (tier) {
    case QualityTier::high: return {4, 5};
    case QualityTier::mid: return {2, 3, 4};
    case QualityTier::low: return {1, 2};
  }
  return {2, 3, 4};
}

/// Discordant: uniform over the valid cells of {1..5}^3 by rejection.
/// Concordant: uniform over tier_band(tier)^3. Then eps ~ U{-1,0,1}.
inline ScoreTemplate sample_template(Rng& rng, bool discordant, QualityTier tier = QualityTier::mid) {
  std::array<int, 3> t{};
  if (discordant) {
    do {
      for (int& x : t) x = rng.uniform_int(1, 5);
    } while (!is_discordant_triple(t));
  } else {
    const auto band = tier_band(tier);
    for (int& x : t) x = band[rng.below(band.size())];
  }
  ScoreTemplate out;
  out.epsilon = rng.uniform_int(-1, 1);
  out.discordant = discordant;
  if (!discordant) out.quality_tier = tier;
  const std::array<double, 3> q123{double(t[0]), double(t[1]), double(t[2])};
  out.target = ScoreVector(q123[0], q123[1], q123[2], q4_for(q123, out.epsilon));
  return out;
}

inline ScoreTemplate sample_template(std::uint64_t seed, bool discordant, QualityTier tier = QualityTier::mid) {
  Rng rng(seed);
  return sample_template(rng, discordant, tier);
}

/// `n` templates; template i is discordant with probability `discordant_frac`,
/// otherwise concordant with a uniformly chosen tier. Each index has its own stream.
inline std::vector<ScoreTemplate> sample_templates(std::size_t n, double discordant_frac, std::uint64_t seed) {
  if (!(discordant_frac >= 0.0 && discordant_frac <= 1.0)) {
    throw InvalidArgument("discordant fraction must lie in [0,1]");
  }
  std::vector<ScoreTemplate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    const bool disc = rng.uniform() < discordant_frac;
    static constexpr std::array<QualityTier, 3> tiers{QualityTier::high, QualityTier::mid, QualityTier::low};
    const QualityTier tier = tiers[rng.below(3)];
    out.push_back(sample_template(rng, disc, tier));
  }
  return out;
}

/// Violations of the template invariants; empty when valid.
inline std::vector<std::string> validate_template(const ScoreTemplate& t) {
  std::vector<std::string> out;
  for (Dimension d : kAllDimensions) {
    const double x = t.target[d];
    if (!in_score_range(x) || x != std::round(x)) {
      out.push_back("target." + std::string(dimension_key(d)) + ": not an integer in [1,5]");
    }
  }
  if (t.epsilon < -1 || t.epsilon > 1) out.push_back("epsilon: out of {-1,0,1}");
  if (!out.empty()) return out;
  const std::array<int, 3> tri{int(t.target.q[0]), int(t.target.q[1]), int(t.target.q[2])};
  if (t.discordant && !is_discordant_triple(tri)) out.push_back("target: discordance constraint violated");
  const auto cands = q4_candidates({t.target.q[0], t.target.q[1], t.target.q[2]});
  if (std::find(cands.begin(), cands.end(), int(t.target.q[3])) == cands.end()) {
    out.push_back("target.q4: not in the Q4 candidate set");
  }
  return out;
}

struct ToleranceBand {
  double max_abs = 0.8;   // Chebyshev bound
  double mean_abs = 0.5;  // (1/4) * L1 bound
};

/// Scores are decimals; this slack keeps a deviation sitting exactly on a
/// bound inside it despite binary rounding.
inline constexpr double kAcceptSlack = 1e-9;

/// True iff ||a - b||_inf <= max_abs and ||a - b||_1 / 4 <= mean_abs.
inline bool accept(const ScoreVector& self_eval, const ScoreVector& target, const ToleranceBand& band = {}) {
  double linf = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < kDimensions; ++i) {
    const double d = std::abs(self_eval[i] - target[i]);
    linf = std::max(linf, d);
    l1 += d;
  }
  return linf <= band.max_abs + kAcceptSlack && l1 / 4.0 <= band.mean_abs + kAcceptSlack;
}

inline void to_json(json& j, const ScoreTemplate& t) {
  j = json{{"target", t.target}, {"epsilon", t.epsilon}, {"discordant", t.discordant}};
  if (t.quality_tier) j["quality_tier"] = to_string(*t.quality_tier);
}

inline void from_json(const json& j, ScoreTemplate& t) {
  t.target = detail::require(j, "target").get<ScoreVector>();
  t.epsilon = detail::get_as<int>(j, "epsilon");
  t.discordant = detail::get_as<bool>(j, "discordant");
  if (auto tier = detail::get_opt<std::string>(j, "quality_tier")) t.quality_tier = parse_quality_tier(*tier);
}

}  // namespace naiad
