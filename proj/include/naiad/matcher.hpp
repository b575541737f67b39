#pragma once

// Query-ad pairing by maximum cosine similarity over ingested embeddings.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "naiad/error.hpp"

namespace naiad {

struct EmbeddingEntry {
  std::string id;
  std::vector<double> vec;
};

inline void from_json(const nlohmann::json& j, EmbeddingEntry& e) {
  if (!j.is_object() || !j.contains("id") || !j.contains("vec")) {
    throw ParseError("embedding record needs \"id\" and \"vec\"");
  }
  e.id = j.at("id").get<std::string>();
  e.vec = j.at("vec").get<std::vector<double>>();
}

inline void to_json(nlohmann::json& j, const EmbeddingEntry& e) { j = {{"id", e.id}, {"vec", e.vec}}; }

/// id -> vector, one shared dimension, unique ids, no zero vectors.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  explicit EmbeddingTable(std::vector<EmbeddingEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.vec.empty()) throw InvalidArgument("embedding '" + e.id + "' has dimension 0");
      if (i == 0) dim_ = e.vec.size();
      if (e.vec.size() != dim_) {
        throw InvalidArgument("embedding '" + e.id + "' has dimension " + std::to_string(e.vec.size()) +
                              ", expected " + std::to_string(dim_));
      }
      double sq = 0.0;
      for (double x : e.vec) {
        if (!std::isfinite(x)) throw InvalidArgument("embedding '" + e.id + "' has a non-finite value");
        sq += x * x;
      }
      if (sq == 0.0) throw InvalidArgument("embedding '" + e.id + "' is the zero vector");
      if (!index_.emplace(e.id, i).second) throw InvalidArgument("duplicate embedding id '" + e.id + "'");
    }
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<EmbeddingEntry>& entries() const { return entries_; }

  const std::vector<double>* find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second].vec;
  }

 private:
  std::vector<EmbeddingEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
};

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DegenerateError("zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

struct Match {
  std::string ad_id;
  double similarity = 0.0;
};

/// Argmax cosine similarity; exact ties go to the lexicographically lowest ad_id.
inline Match best_match(std::span<const double> query, const EmbeddingTable& ads) {
  if (ads.empty()) throw InvalidArgument("empty ad table");
  const EmbeddingEntry* best = nullptr;
  double best_sim = 0.0;
  for (const auto& e : ads.entries()) {
    const double s = cosine_similarity(query, e.vec);
    if (!best || s > best_sim || (s == best_sim && e.id < best->id)) {
      best = &e;
      best_sim = s;
    }
  }
  return {best->id, best_sim};
}

enum class MatchTier { low, medium, high };

inline const char* to_string(MatchTier t) {
  switch (t) {
    case MatchTier::low: return "low";
    case MatchTier::medium: return "medium";
    case MatchTier::high: return "high";
  }
  return "medium";
}

struct MatchRow {
  std::string query_id;
  std::string ad_id;
  double similarity = 0.0;
  MatchTier tier = MatchTier::medium;
};

/// Linear-interpolation quantile of an ascending-sorted sample (numpy's default rule).
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// One row per query in input order. Tiers are similarity terciles over this
/// corpus: low below the 1/3 quantile, high above the 2/3 quantile.
inline std::vector<MatchRow> match_corpus(const EmbeddingTable& queries, const EmbeddingTable& ads) {
  std::vector<MatchRow> rows;
  rows.reserve(queries.size());
  for (const auto& q : queries.entries()) {
    auto m = best_match(q.vec, ads);
    rows.push_back({q.id, std::move(m.ad_id), m.similarity, MatchTier::medium});
  }
  if (rows.empty()) return rows;
  std::vector<double> sims;
  sims.reserve(rows.size());
  for (const auto& r : rows) sims.push_back(r.similarity);
  std::sort(sims.begin(), sims.end());
  const double t1 = sorted_quantile(sims, 1.0 / 3.0);
  const double t2 = sorted_quantile(sims, 2.0 / 3.0);
  for (auto& r : rows) {
    if (r.similarity < t1) {
      r.tier = MatchTier::low;
    } else if (r.similarity > t2) {
      r.tier = MatchTier::high;
    } else {
      r.tier = MatchTier::medium;
    }
  }
  return rows;
}

}  // namespace naiad
