#pragma once

// Annotation task pool: serves tasks to raters, records labels in an
// append-only log, flags disagreement, tracks gold drift and exports the
// consensus anchor set.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <shared_mutex>
#include <string>
#include <vector>

#include "naiad/core.hpp"
#include "naiad/jsonl.hpp"
#include "naiad/prompts.hpp"
#include "naiad/random.hpp"

namespace naiad {

struct AnnotationTask {
  std::string task_id;
  Sample sample;
  bool is_gold = false;
  std::optional<ScoreVector> gold_scores;
};

inline void to_json(json& j, const AnnotationTask& t) {
  j = json{{"task_id", t.task_id}, {"sample", t.sample}, {"is_gold", t.is_gold}};
  if (t.gold_scores) j["gold_scores"] = *t.gold_scores;
}

/// Accepts either a task record or a bare Sample (task_id = sample_id).
inline void from_json(const json& j, AnnotationTask& t) {
  if (!j.contains("sample")) {
    t.sample = j.get<Sample>();
    t.task_id = t.sample.sample_id;
    t.is_gold = false;
    t.gold_scores.reset();
    return;
  }
  t.sample = j.at("sample").get<Sample>();
  t.task_id = detail::get_opt<std::string>(j, "task_id").value_or(t.sample.sample_id);
  t.gold_scores = detail::get_opt<ScoreVector>(j, "gold_scores");
  t.is_gold = detail::get_opt<bool>(j, "is_gold").value_or(t.gold_scores.has_value());
  if (t.is_gold && !t.gold_scores) throw ParseError("task " + t.task_id + ": gold task without gold_scores");
}

struct RubricEntry {
  Dimension dimension;
  std::string title;
  std::string criterion;
  std::string hint;
};

inline std::vector<RubricEntry> rubric() {
  static const std::array<const char*, kDimensions> titles{"Response Relevance", "Expression Coherence",
                                                          "Ad Effectiveness", "Click-Through Intent"};
  static const std::array<const char*, kDimensions> hints{
      "Read the query first, then the whole response. Score how well the response still answers the question; "
      "an ad that crowds out the answer lowers this score.",
      "Check the sentences just before and after the highlighted ad. A smooth bridge scores high; an abrupt "
      "topic jump scores low.",
      "Judge the highlighted ad itself: is the product clearly described and is the benefit to this user concrete?",
      "Imagine you asked this question. Would you actually want to click? Score your own intent, not the ad's "
      "polish."};
  std::vector<RubricEntry> out;
  for (Dimension d : kAllDimensions) {
    out.push_back({d, titles[index_of(d)], std::string(criterion_text(d)), hints[index_of(d)]});
  }
  return out;
}

inline json rubric_json() {
  json arr = json::array();
  for (const auto& r : rubric()) {
    arr.push_back({{"dimension", dimension_key(r.dimension)}, {"title", r.title}, {"criterion", r.criterion},
                   {"hint", r.hint}});
  }
  return json{{"dimensions", arr}, {"scale", {{"min", kScoreMin}, {"max", kScoreMax}, {"step", 0.5}}}};
}

/// What a rater may see: no scores of any kind and no gold marker.
inline json rater_payload(const AnnotationTask& t) {
  const Sample& s = t.sample;
  json sample{{"sample_id", s.sample_id},
              {"query", s.query},
              {"ad", {{"ad_id", s.ad.ad_id}, {"ad_name", s.ad.ad_name}, {"industry", s.ad.industry}, {"copy", s.ad.copy}}},
              {"response", s.response},
              {"source", to_string(s.source)}};
  return json{{"task_id", t.task_id}, {"sample", sample}, {"rubric", rubric_json()["dimensions"]}};
}

struct Label {
  std::string task_id;
  std::string annotator_id;
  ScoreVector scores;
  double elapsed = 0.0;
  std::string submitted_at;
  int version = 1;

  bool operator==(const Label&) const = default;
};

inline void to_json(json& j, const Label& l) {
  j = json{{"task_id", l.task_id},   {"annotator_id", l.annotator_id}, {"scores", l.scores},
           {"elapsed", l.elapsed},   {"submitted_at", l.submitted_at}, {"version", l.version}};
}

inline void from_json(const json& j, Label& l) {
  l.task_id = detail::get_as<std::string>(j, "task_id");
  l.annotator_id = detail::get_as<std::string>(j, "annotator_id");
  l.scores = detail::require(j, "scores").get<ScoreVector>();
  l.elapsed = detail::get_opt<double>(j, "elapsed").value_or(0.0);
  l.submitted_at = detail::get_opt<std::string>(j, "submitted_at").value_or("");
  l.version = detail::get_opt<int>(j, "version").value_or(1);
}

/// A label as submitted by a client; version is assigned when omitted.
struct LabelSubmission {
  std::string task_id;
  std::string annotator_id;
  ScoreVector scores;
  double elapsed = 0.0;
  std::optional<int> version;
};

inline LabelSubmission parse_submission(const json& j) {
  LabelSubmission s;
  s.task_id = detail::get_as<std::string>(j, "task_id");
  s.annotator_id = detail::get_as<std::string>(j, "annotator_id");
  s.scores = detail::require(j, "scores").get<ScoreVector>();
  s.elapsed = detail::get_opt<double>(j, "elapsed").value_or(0.0);
  s.version = detail::get_opt<int>(j, "version");
  return s;
}

struct AnnotationConfig {
  double variance_threshold = 1.0;
  double gold_rate = 0.05;
  std::size_t drift_window = 3;
  double deviation_bound = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> annotators;
};

struct FlaggedTask {
  std::string task_id;
  ScoreVector variance;  // per dimension, divisor n - 1
  std::vector<Label> labels;
};

struct DriftReport {
  std::string annotator_id;
  std::size_t window = 0;
  double deviation_bound = 0.0;
  std::vector<std::string> gold_tasks;  // most recent last
  std::optional<ScoreVector> mean_abs_deviation;
  bool alert = false;
};

inline json to_json(const DriftReport& r) {
  json j{{"annotator_id", r.annotator_id}, {"window", r.window}, {"deviation_bound", r.deviation_bound},
         {"gold_tasks", r.gold_tasks},     {"alert", r.alert}};
  j["mean_abs_deviation"] = r.mean_abs_deviation ? json(*r.mean_abs_deviation) : json(nullptr);
  return j;
}

/// ISO-8601 UTC timestamp from the system clock.
inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Per-dimension sample variance (divisor n - 1) of a label set.
inline ScoreVector label_variance(const std::vector<Label>& labels) {
  ScoreVector var;
  if (labels.size() < 2) return var;
  const double n = static_cast<double>(labels.size());
  for (std::size_t d = 0; d < kDimensions; ++d) {
    double m = 0.0;
    for (const auto& l : labels) m += l.scores[d];
    m /= n;
    double ss = 0.0;
    for (const auto& l : labels) ss += (l.scores[d] - m) * (l.scores[d] - m);
    var[d] = ss / (n - 1.0);
  }
  return var;
}

class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  /// With a log path, existing events are replayed and new ones appended.
  AnnotationStore(std::vector<AnnotationTask> tasks, AnnotationConfig cfg,
                  std::optional<std::filesystem::path> log_path = std::nullopt, Clock clock = utc_now)
      : tasks_(std::move(tasks)), cfg_(std::move(cfg)), log_path_(std::move(log_path)), clock_(std::move(clock)) {
    if (cfg_.gold_rate < 0.0 || cfg_.gold_rate > 1.0) throw InvalidArgument("gold_rate must be in [0,1]");
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (!task_index_.emplace(tasks_[i].task_id, i).second) {
        throw InvalidArgument("duplicate task_id " + tasks_[i].task_id);
      }
      if (tasks_[i].is_gold && !tasks_[i].gold_scores) throw InvalidArgument("gold task " + tasks_[i].task_id + " lacks gold_scores");
    }
    for (const auto& a : cfg_.annotators) annotators_.insert(a);
    if (log_path_) replay();
  }

  const AnnotationConfig& config() const { return cfg_; }

  void register_annotator(const std::string& id) {
    if (id.empty()) throw InvalidArgument("annotator id must be non-empty");
    std::unique_lock lock(mu_);
    if (!annotators_.insert(id).second) return;
    append({{"type", "annotator"}, {"annotator_id", id}});
  }

  bool has_annotator(const std::string& id) const {
    std::shared_lock lock(mu_);
    return annotators_.count(id) > 0;
  }

  const AnnotationTask* task(const std::string& task_id) const {
    auto it = task_index_.find(task_id);
    return it == task_index_.end() ? nullptr : &tasks_[it->second];
  }

  /// Whether the annotator's next task is drawn from the gold pool. A pure
  /// function of (seed, annotator, submissions so far).
  bool gold_turn(const std::string& annotator, std::size_t submissions) const {
    Rng rng(derive_seed(derive_seed(cfg_.seed, fnv1a(annotator)), submissions));
    return rng.uniform() < cfg_.gold_rate;
  }

  std::optional<AnnotationTask> next_task(const std::string& annotator) const {
    std::shared_lock lock(mu_);
    if (!annotators_.count(annotator)) throw NotFound("unknown annotator " + annotator);
    auto sub = submissions_.find(annotator);
    const std::size_t n_sub = sub == submissions_.end() ? 0 : sub->second;
    const bool want_gold = gold_turn(annotator, n_sub);
    const AnnotationTask* regular = least_labeled(annotator, false);
    const AnnotationTask* gold = least_labeled(annotator, true);
    const AnnotationTask* pick = want_gold && gold ? gold : regular ? regular : gold;
    if (!pick) return std::nullopt;
    return *pick;
  }

  /// Append a label. Re-sending an identical (task, annotator, version) is a
  /// no-op that returns the stored label.
  Label submit_label(const LabelSubmission& s, bool* replayed = nullptr) {
    if (replayed) *replayed = false;
    const AnnotationTask* t = task(s.task_id);
    if (!t) throw NotFound("unknown task " + s.task_id);
    for (Dimension d : kAllDimensions) {
      const double x = s.scores[d];
      if (!std::isfinite(x) || !in_score_range(x)) {
        throw BoundError("scores." + std::string(dimension_key(d)) + ": out of [1,5]");
      }
    }
    if (!std::isfinite(s.elapsed) || s.elapsed < 0.0) throw InvalidArgument("elapsed must be a non-negative number");
    std::unique_lock lock(mu_);
    if (!annotators_.count(s.annotator_id)) throw NotFound("unknown annotator " + s.annotator_id);
    auto& versions = labels_[s.task_id][s.annotator_id];
    const int latest = versions.empty() ? 0 : versions.back().version;
    if (s.version) {
      if (*s.version >= 1 && *s.version <= latest) {
        const Label& prior = versions[static_cast<std::size_t>(*s.version - 1)];
        if (prior.scores == s.scores && prior.elapsed == s.elapsed) {
          if (replayed) *replayed = true;
          return prior;
        }
        throw Conflict("version " + std::to_string(*s.version) + " of " + s.task_id + " by " + s.annotator_id +
                       " already stored with different content");
      }
      if (*s.version != latest + 1) {
        throw Conflict("expected version " + std::to_string(latest + 1) + ", got " + std::to_string(*s.version));
      }
    }
    Label l{s.task_id, s.annotator_id, s.scores, s.elapsed, clock_(), latest + 1};
    json ev = l;
    ev["type"] = "label";
    append(ev);
    apply(l);
    return l;
  }

  /// Every stored version for a task, in submission order.
  std::vector<Label> labels(const std::string& task_id) const {
    std::shared_lock lock(mu_);
    std::vector<Label> out;
    for (const auto& l : log_) {
      if (l.task_id == task_id) out.push_back(l);
    }
    return out;
  }

  std::vector<Label> latest_labels(const std::string& task_id) const {
    std::shared_lock lock(mu_);
    return latest_locked(task_id);
  }

  std::vector<FlaggedTask> flag_discrepancies(std::optional<double> threshold = std::nullopt) const {
    const double thr = threshold.value_or(cfg_.variance_threshold);
    std::shared_lock lock(mu_);
    std::vector<FlaggedTask> out;
    for (const auto& t : tasks_) {
      auto latest = latest_locked(t.task_id);
      if (latest.size() < 2) continue;
      const ScoreVector var = label_variance(latest);
      if (std::any_of(var.q.begin(), var.q.end(), [&](double v) { return v > thr; })) {
        out.push_back({t.task_id, var, std::move(latest)});
      }
    }
    return out;
  }

  DriftReport gold_drift(const std::string& annotator, std::optional<std::size_t> window = std::nullopt,
                         std::optional<double> bound = std::nullopt) const {
    DriftReport r{annotator, window.value_or(cfg_.drift_window), bound.value_or(cfg_.deviation_bound), {}, {}, false};
    std::shared_lock lock(mu_);
    if (!annotators_.count(annotator)) throw NotFound("unknown annotator " + annotator);
    // Gold tasks ordered by the time of the annotator's latest label on them.
    std::vector<std::pair<std::size_t, const Label*>> seen;
    for (const auto& t : tasks_) {
      if (!t.is_gold) continue;
      auto it = labels_.find(t.task_id);
      if (it == labels_.end()) continue;
      auto jt = it->second.find(annotator);
      if (jt == it->second.end() || jt->second.empty()) continue;
      const Label& l = jt->second.back();
      seen.emplace_back(seq_by_key_.at({l.task_id, l.annotator_id, l.version}), &l);
    }
    std::sort(seen.begin(), seen.end());
    if (seen.empty() || r.window == 0) return r;
    const std::size_t start = seen.size() > r.window ? seen.size() - r.window : 0;
    ScoreVector dev;
    for (std::size_t i = start; i < seen.size(); ++i) {
      const Label& l = *seen[i].second;
      r.gold_tasks.push_back(l.task_id);
      const ScoreVector& g = *task(l.task_id)->gold_scores;
      for (std::size_t d = 0; d < kDimensions; ++d) dev[d] += std::abs(l.scores[d] - g[d]);
    }
    for (std::size_t d = 0; d < kDimensions; ++d) dev[d] /= static_cast<double>(seen.size() - start);
    r.mean_abs_deviation = dev;
    r.alert = std::any_of(dev.q.begin(), dev.q.end(), [&](double v) { return v > r.deviation_bound; });
    return r;
  }

  /// Consensus anchors: mean of latest labels per task. Gold tasks, flagged
  /// tasks and tasks whose sample lacks judge_raw are skipped.
  std::vector<AnchorRecord> export_anchors(std::size_t min_labels = 1) const {
    std::set<std::string> flagged;
    for (const auto& f : flag_discrepancies()) flagged.insert(f.task_id);
    std::shared_lock lock(mu_);
    std::vector<AnchorRecord> out;
    for (const auto& t : tasks_) {
      if (t.is_gold || flagged.count(t.task_id) || !t.sample.judge_raw) continue;
      const auto latest = latest_locked(t.task_id);
      if (latest.empty() || latest.size() < min_labels) continue;
      ScoreVector mean;
      for (const auto& l : latest) {
        for (std::size_t d = 0; d < kDimensions; ++d) mean[d] += l.scores[d];
      }
      for (std::size_t d = 0; d < kDimensions; ++d) mean[d] /= static_cast<double>(latest.size());
      out.push_back({t.sample.sample_id, clamp_scores(mean), *t.sample.judge_raw, t.sample.self_eval,
                     domain_labels_of(t.sample)});
    }
    return out;
  }

 private:
  const AnnotationTask* least_labeled(const std::string& annotator, bool gold) const {
    const AnnotationTask* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& t : tasks_) {
      if (t.is_gold != gold) continue;
      std::size_t count = 0;
      if (auto it = labels_.find(t.task_id); it != labels_.end()) {
        if (it->second.count(annotator)) continue;
        count = it->second.size();
      }
      if (!best || count < best_count) {
        best = &t;
        best_count = count;
      }
    }
    return best;
  }

  std::vector<Label> latest_locked(const std::string& task_id) const {
    std::vector<Label> out;
    auto it = labels_.find(task_id);
    if (it == labels_.end()) return out;
    for (const auto& [_, versions] : it->second) {
      if (!versions.empty()) out.push_back(versions.back());
    }
    return out;
  }

  void apply(const Label& l) {
    labels_[l.task_id][l.annotator_id].push_back(l);
    seq_by_key_[{l.task_id, l.annotator_id, l.version}] = log_.size();
    log_.push_back(l);
    ++submissions_[l.annotator_id];
  }

  void append(const json& event) {
    if (!log_path_) return;
    if (log_path_->has_parent_path()) std::filesystem::create_directories(log_path_->parent_path());
    std::ofstream out(*log_path_, std::ios::app);
    if (!out) throw Error("cannot append to " + log_path_->string());
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("write failed on " + log_path_->string());
  }

  void replay() {
    if (!std::filesystem::exists(*log_path_)) return;
    std::ifstream in(*log_path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json ev;
      try {
        ev = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(log_path_->string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      const std::string type = ev.value("type", "");
      if (type == "annotator") {
        annotators_.insert(ev.at("annotator_id").get<std::string>());
      } else if (type == "label") {
        Label l = ev.get<Label>();
        if (!task_index_.count(l.task_id)) continue;  // task removed from the pool since
        annotators_.insert(l.annotator_id);
        apply(l);
      }
    }
  }

  struct Key {
    std::string task_id, annotator_id;
    int version;
    bool operator<(const Key& o) const {
      return std::tie(task_id, annotator_id, version) < std::tie(o.task_id, o.annotator_id, o.version);
    }
  };

  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  AnnotationConfig cfg_;
  std::optional<std::filesystem::path> log_path_;
  Clock clock_;

  mutable std::shared_mutex mu_;
  std::set<std::string> annotators_;
  std::map<std::string, std::map<std::string, std::vector<Label>>> labels_;  // task -> annotator -> versions
  std::vector<Label> log_;  // submission order
  std::map<Key, std::size_t> seq_by_key_;
  std::map<std::string, std::size_t> submissions_;
};

}  // namespace naiad
