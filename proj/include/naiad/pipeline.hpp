#pragma once

// Stage functions shared by the CLI subcommands and `pipeline run`, plus the
// pipeline config file.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naiad/analytics.hpp"
#include "naiad/annotation.hpp"
#include "naiad/calibration.hpp"
#include "naiad/clustering.hpp"
#include "naiad/core.hpp"
#include "naiad/jsonl.hpp"
#include "naiad/matcher.hpp"
#include "naiad/orchestrator.hpp"
#include "naiad/templates.hpp"

namespace naiad {

// ---------------------------------------------------------------------------
// match

inline std::vector<QueryAdPair> match_pairs(std::span<const QueryRecord> queries, std::span<const AdMeta> ads,
                                            const EmbeddingTable& query_emb, const EmbeddingTable& ad_emb) {
  std::map<std::string, const QueryRecord*> qby;
  for (const auto& q : queries) qby.emplace(q.query_id, &q);
  std::map<std::string, const AdMeta*> aby;
  for (const auto& a : ads) {
    if (!aby.emplace(a.ad_id, &a).second) throw InvalidArgument("duplicate ad_id " + a.ad_id);
  }
  for (const auto& e : ad_emb.entries()) {
    if (!aby.count(e.id)) throw InvalidArgument("ad embedding '" + e.id + "' has no ad record");
  }
  std::vector<QueryAdPair> out;
  for (const auto& row : match_corpus(query_emb, ad_emb)) {
    auto q = qby.find(row.query_id);
    if (q == qby.end()) throw InvalidArgument("query embedding '" + row.query_id + "' has no query record");
    out.push_back({row.query_id, q->second->query, q->second->category, *aby.at(row.ad_id), row.similarity,
                   to_string(row.tier)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterOptions {
  double variance = 0.85;
  int reduce_dim = 30;
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 0;
};

inline json cluster_bridges(const EmbeddingTable& bridges, const ClusterOptions& opt) {
  if (bridges.size() < 3) throw InvalidArgument("need at least 3 bridge embeddings to cluster");
  PointSet x(static_cast<Eigen::Index>(bridges.size()), static_cast<Eigen::Index>(bridges.dim()));
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    for (std::size_t j = 0; j < bridges.dim(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bridges.entries()[i].vec[j];
    }
  }
  const auto red = reduce_two_stage(x, opt.variance, opt.reduce_dim);
  const int k_max = std::min(opt.k_max, static_cast<int>(bridges.size()) - 1);
  const auto sel = select_k(red.reduced, opt.k_min, k_max, opt.seed);
  json curve = json::array();
  for (const auto& p : sel.curve) curve.push_back({{"k", p.k}, {"sse", p.sse}, {"silhouette", p.silhouette}});
  json labels = json::array();
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    labels.push_back({{"id", bridges.entries()[i].id}, {"cluster", sel.best.assignments[i]}});
  }
  return json{{"best_k", sel.best_k},
              {"variance_fraction", opt.variance},
              {"variance_stage_dim", red.variance_stage.output_dim()},
              {"reduced_dim", red.fixed_stage.output_dim()},
              {"curve", curve},
              {"assignments", labels}};
}

// ---------------------------------------------------------------------------
// synthesize / judge

/// Job i pairs template i with pair i mod |pairs| and strategy (i mod 4) + 1.
inline std::vector<GenerationJob> make_jobs(std::span<const QueryAdPair> pairs, std::span<const ScoreTemplate> templates,
                                            int retry_budget, std::uint64_t seed) {
  if (pairs.empty()) throw InvalidArgument("no query-ad pairs");
  std::vector<GenerationJob> jobs;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", i);
    jobs.push_back({id, pairs[i % pairs.size()], templates[i], static_cast<int>(i % 4) + 1, retry_budget,
                    derive_seed(seed, i)});
  }
  return jobs;
}

struct SynthesisResult {
  std::vector<Sample> samples;
  std::vector<json> exhausted;  // {job_id, attempts, last_failure}
};

inline SynthesisResult synthesize(const LlmClient& client, std::span<const GenerationJob> jobs, std::size_t concurrency,
                                  const GenerationOptions& opt = {}) {
  SynthesisResult r;
  const auto outcomes = generate_all(client, jobs, concurrency, opt);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (const auto* s = std::get_if<Sample>(&outcomes[i])) {
      r.samples.push_back(*s);
    } else {
      const auto& e = std::get<Exhausted>(outcomes[i]);
      r.exhausted.push_back({{"job_id", jobs[i].job_id}, {"attempts", e.attempts}, {"last_failure", e.last_failure}});
    }
  }
  return r;
}

inline std::vector<Sample> synthesize_transcripts(const LlmClient& client, std::span<const TranscriptRecord> transcripts,
                                                  std::size_t concurrency, std::uint64_t seed) {
  return parallel_map(transcripts.size(), concurrency, [&](std::size_t i) {
    DecodeParams p;
    p.seed = derive_seed(seed, i);
    return transcript_sample(transcripts[i], synthesize_inverse_query(client, transcripts[i].text, p));
  });
}

inline std::vector<Sample> judge_all(const LlmClient& client, std::span<const Sample> samples,
                                     std::span<const Dimension> dims, std::size_t concurrency, std::uint64_t seed) {
  return parallel_map(samples.size(), concurrency, [&](std::size_t i) {
    DecodeParams p;
    p.seed = derive_seed(seed, fnv1a(samples[i].sample_id));
    return judge_dimensions(client, samples[i], dims, {}, p);
  });
}

// ---------------------------------------------------------------------------
// simulated annotation (offline stand-in for human raters)

struct SimulatedRaters {
  std::size_t anchors = 48;
  std::vector<std::string> annotators{"rater-a", "rater-b"};
  double bias = -0.4;       // human = judge + bias + noise
  double noise_sd = 0.3;
  std::uint64_t seed = 0;
};

/// Pick a seeded subset of judged samples, have each simulated rater label it
/// through an AnnotationStore and export the consensus anchors.
inline std::vector<AnchorRecord> simulate_annotation(std::span<const Sample> judged, const SimulatedRaters& sim,
                                                     std::optional<std::filesystem::path> log_path = std::nullopt) {
  std::vector<std::size_t> idx(judged.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng pick(derive_seed(sim.seed, 1));
  pick.shuffle(idx);
  idx.resize(std::min(sim.anchors, idx.size()));
  std::sort(idx.begin(), idx.end());

  std::vector<AnnotationTask> tasks;
  for (std::size_t i : idx) tasks.push_back({judged[i].sample_id, judged[i], false, std::nullopt});
  AnnotationConfig cfg;
  cfg.gold_rate = 0.0;
  cfg.seed = sim.seed;
  cfg.annotators = sim.annotators;
  if (log_path) std::filesystem::remove(*log_path);
  AnnotationStore store(std::move(tasks), cfg, log_path, [] { return std::string("1970-01-01T00:00:00Z"); });

  for (std::size_t a = 0; a < sim.annotators.size(); ++a) {
    Rng noise(derive_seed(sim.seed, 100 + a));
    while (auto t = store.next_task(sim.annotators[a])) {
      LabelSubmission s{t->task_id, sim.annotators[a], {}, 30.0, std::nullopt};
      for (std::size_t d = 0; d < kDimensions; ++d) {
        const double h = (*t->sample.judge_raw)[d] + sim.bias + noise.normal(0.0, sim.noise_sd);
        s.scores[d] = std::clamp(std::round(h * 2.0) / 2.0, kScoreMin, kScoreMax);
      }
      store.submit_label(s);
    }
  }
  return store.export_anchors(sim.annotators.size());
}

// ---------------------------------------------------------------------------
// pareto / report / keywords

inline std::vector<ScoredPoint> scored_points(std::span<const Sample> samples) {
  std::vector<ScoredPoint> out;
  for (const auto& s : samples) {
    if (auto sc = analysis_scores(s)) out.push_back({s.sample_id, *sc});
  }
  return out;
}

inline json pareto_report(std::span<const Sample> samples, const ScoreVector& reference) {
  const auto pts = scored_points(samples);
  if (pts.empty()) throw InvalidArgument("no scored samples");
  const auto fronts = pareto_fronts(pts);
  return json{{"n", pts.size()},
              {"reference", reference},
              {"max_front", fronts.max_front},
              {"min_front", fronts.min_front},
              {"superiority_ratio", superiority_ratio(pts, reference)}};
}

/// Reference means: a single ScoreVector object, or the mean human score of an anchor JSONL file.
inline ScoreVector load_reference(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    const json j = json::parse(text);
    if (j.is_object() && j.contains("q1")) return j.get<ScoreVector>();
  } catch (const json::parse_error&) {
  }
  const auto anchors = read_jsonl<AnchorRecord>(path);
  if (anchors.empty()) throw InvalidArgument(path.string() + ": no anchors");
  std::vector<ScoredPoint> pts;
  for (const auto& a : anchors) pts.push_back({a.sample_id, a.human});
  return mean_scores(pts);
}

/// before: scores from judge_raw; after: analysis scores (calibrated when present).
inline json comparison_report(std::span<const Sample> before, std::span<const Sample> after) {
  std::vector<ScoredPoint> b, a;
  for (const auto& s : before) {
    if (s.judge_raw) b.push_back({s.sample_id, *s.judge_raw});
  }
  for (const auto& s : after) {
    if (auto sc = analysis_scores(s)) a.push_back({s.sample_id, *sc});
  }
  json rows = json::object();
  for (const auto& [name, cmp] : compare_paired(b, a)) rows[name] = to_json(cmp);
  json out{{"rows", rows}};
  std::vector<ScoreVector> achieved, targets;
  for (const auto& s : after) {
    if (s.target && analysis_scores(s)) {
      achieved.push_back(*analysis_scores(s));
      targets.push_back(*s.target);
    }
  }
  if (!achieved.empty()) out["acc_at_0.5"] = acc_at(0.5, achieved, targets);
  return out;
}

inline json keyword_report(std::span<const Sample> samples, const std::string& partition, std::size_t top_k) {
  if (partition != "max_front" && partition != "min_front") {
    throw InvalidArgument("partition must be max_front or min_front");
  }
  std::vector<std::string> docs;
  std::vector<ScoredPoint> pts;
  for (const auto& s : samples) {
    auto sc = analysis_scores(s);
    if (!s.logical_bridge || !sc) continue;
    docs.push_back(*s.logical_bridge);
    pts.push_back({std::to_string(docs.size() - 1), *sc});
  }
  if (docs.empty()) throw InvalidArgument("no scored samples with a logical bridge");
  const auto fronts = pareto_fronts(pts);
  std::vector<std::size_t> part;
  for (const auto& id : partition == "max_front" ? fronts.max_front : fronts.min_front) part.push_back(std::stoul(id));
  json terms = json::array();
  for (const auto& t : tfidf_keywords(docs, part, top_k)) terms.push_back({{"term", t.term}, {"weight", t.weight}});
  return json{{"partition", partition}, {"documents", part.size()}, {"terms", terms}};
}

// ---------------------------------------------------------------------------
// pipeline config

struct PipelineConfig {
  std::filesystem::path queries, ads, query_embeddings, ad_embeddings, bridge_embeddings, transcripts;
  std::filesystem::path out_dir = "pipeline_out";
  std::uint64_t seed = 7;
  std::size_t templates = 120;
  double discordant_frac = 0.5;
  ToleranceBand tolerance;
  int retry_budget = 8;
  int folds = 5;
  std::size_t concurrency = 1;
  std::string client = "mock";
  std::size_t anchors = 48;
  ClusterOptions cluster;
  std::size_t top_k = 30;
};

/// Relative paths resolve against `base` (the config file's directory).
inline PipelineConfig parse_pipeline_config(const json& j, const std::filesystem::path& base) {
  static const std::set<std::string> known{"queries",      "ads",        "query_embeddings", "ad_embeddings",
                                           "bridge_embeddings", "transcripts", "out_dir", "seed",
                                           "templates",    "discordant_frac", "tolerance", "retry_budget",
                                           "folds",        "concurrency", "client",    "anchors",
                                           "cluster",      "top_k"};
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!known.count(k)) throw ParseError("config: unknown key \"" + k + "\"");
  }
  PipelineConfig c;
  auto path = [&](const char* key, bool required) {
    auto v = detail::get_opt<std::string>(j, key);
    if (!v) {
      if (required) throw ParseError(std::string("config: missing key \"") + key + "\"");
      return std::filesystem::path();
    }
    std::filesystem::path p(*v);
    return p.is_absolute() ? p : base / p;
  };
  c.queries = path("queries", true);
  c.ads = path("ads", true);
  c.query_embeddings = path("query_embeddings", true);
  c.ad_embeddings = path("ad_embeddings", true);
  c.bridge_embeddings = path("bridge_embeddings", false);
  c.transcripts = path("transcripts", false);
  if (auto o = detail::get_opt<std::string>(j, "out_dir")) c.out_dir = *o;
  if (j.contains("seed") && !j["seed"].is_number_integer()) throw ParseError("config: seed must be an integer");
  c.seed = detail::get_opt<std::uint64_t>(j, "seed").value_or(c.seed);
  c.templates = detail::get_opt<std::size_t>(j, "templates").value_or(c.templates);
  c.discordant_frac = detail::get_opt<double>(j, "discordant_frac").value_or(c.discordant_frac);
  if (auto t = j.find("tolerance"); t != j.end()) {
    c.tolerance.max_abs = detail::get_opt<double>(*t, "max_abs").value_or(c.tolerance.max_abs);
    c.tolerance.mean_abs = detail::get_opt<double>(*t, "mean_abs").value_or(c.tolerance.mean_abs);
  }
  c.retry_budget = detail::get_opt<int>(j, "retry_budget").value_or(c.retry_budget);
  c.folds = detail::get_opt<int>(j, "folds").value_or(c.folds);
  c.concurrency = detail::get_opt<std::size_t>(j, "concurrency").value_or(c.concurrency);
  c.client = detail::get_opt<std::string>(j, "client").value_or(c.client);
  c.anchors = detail::get_opt<std::size_t>(j, "anchors").value_or(c.anchors);
  c.top_k = detail::get_opt<std::size_t>(j, "top_k").value_or(c.top_k);
  if (auto cl = j.find("cluster"); cl != j.end()) {
    c.cluster.variance = detail::get_opt<double>(*cl, "variance").value_or(c.cluster.variance);
    c.cluster.reduce_dim = detail::get_opt<int>(*cl, "reduce_dim").value_or(c.cluster.reduce_dim);
    c.cluster.k_min = detail::get_opt<int>(*cl, "k_min").value_or(c.cluster.k_min);
    c.cluster.k_max = detail::get_opt<int>(*cl, "k_max").value_or(c.cluster.k_max);
  }
  for (const auto* p : {&c.queries, &c.ads, &c.query_embeddings, &c.ad_embeddings, &c.bridge_embeddings, &c.transcripts}) {
    if (!p->empty() && !std::filesystem::exists(*p)) throw InvalidArgument("config: file not found: " + p->string());
  }
  return c;
}

/// Every stage in order, each writing its artifact under out_dir. Logs go to `log`.
inline json run_pipeline(const PipelineConfig& c, const LlmClient& client, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);
  const auto out = [&](const char* name) { return c.out_dir / name; };
  json summary = json::object();

  const auto queries = read_jsonl<QueryRecord>(c.queries);
  const auto ads = read_jsonl<AdMeta>(c.ads);
  const EmbeddingTable qe(read_jsonl<EmbeddingEntry>(c.query_embeddings));
  const EmbeddingTable ae(read_jsonl<EmbeddingEntry>(c.ad_embeddings));
  const auto pairs = match_pairs(queries, ads, qe, ae);
  write_jsonl(out("pairs.jsonl"), pairs);
  summary["pairs"] = pairs.size();
  log << "match: " << pairs.size() << " pairs\n";

  if (!c.bridge_embeddings.empty()) {
    ClusterOptions co = c.cluster;
    co.seed = derive_seed(c.seed, 2);
    const json clusters = cluster_bridges(EmbeddingTable(read_jsonl<EmbeddingEntry>(c.bridge_embeddings)), co);
    write_json(out("clusters.json"), clusters);
    summary["best_k"] = clusters["best_k"];
    log << "cluster: K* = " << clusters["best_k"] << "\n";
  }

  const auto templates = sample_templates(c.templates, c.discordant_frac, derive_seed(c.seed, 3));
  write_jsonl(out("templates.jsonl"), templates);

  const auto jobs = make_jobs(pairs, templates, c.retry_budget, derive_seed(c.seed, 4));
  GenerationOptions gopt;
  gopt.band = c.tolerance;
  gopt.retry.initial_backoff = std::chrono::milliseconds(client.name() == "mock" ? 0 : 200);
  auto synth = synthesize(client, jobs, c.concurrency, gopt);
  if (!c.transcripts.empty()) {
    const auto tr = read_jsonl<TranscriptRecord>(c.transcripts);
    for (auto& s : synthesize_transcripts(client, tr, c.concurrency, derive_seed(c.seed, 5))) synth.samples.push_back(std::move(s));
  }
  write_jsonl(out("samples.jsonl"), synth.samples);
  write_jsonl(out("rejected.jsonl"), synth.exhausted);
  summary["samples"] = synth.samples.size();
  summary["exhausted"] = synth.exhausted.size();
  log << "synthesize: " << synth.samples.size() << " accepted, " << synth.exhausted.size() << " exhausted\n";

  const auto judged = judge_all(client, synth.samples, kAllDimensions, c.concurrency, derive_seed(c.seed, 6));
  write_jsonl(out("judged.jsonl"), judged);

  SimulatedRaters sim;
  sim.anchors = c.anchors;
  sim.seed = derive_seed(c.seed, 7);
  const auto anchors = simulate_annotation(judged, sim, out("labels.jsonl"));
  write_jsonl(out("anchors.jsonl"), anchors);
  summary["anchors"] = anchors.size();
  log << "annotate: " << anchors.size() << " anchors\n";

  CalibrationOptions copt;
  copt.route.folds = c.folds;
  copt.route.seed = derive_seed(c.seed, 8);
  copt.concurrency = c.concurrency;
  const auto cal = calibrate_dataset(anchors, judged, copt);
  write_jsonl(out("calibrated.jsonl"), cal.samples);
  write_json(out("calibration_report.json"), report_json(cal));
  for (const auto& d : cal.decisions) log << "calibrate " << dimension_key(d.dimension) << ": " << d.chosen_candidate().id << "\n";

  std::vector<ScoredPoint> human;
  for (const auto& a : anchors) human.push_back({a.sample_id, a.human});
  write_json(out("pareto.json"), pareto_report(cal.samples, mean_scores(human)));
  write_json(out("report.json"), comparison_report(judged, cal.samples));
  write_json(out("keywords.json"), json{{"max_front", keyword_report(cal.samples, "max_front", c.top_k)},
                                        {"min_front", keyword_report(cal.samples, "min_front", c.top_k)}});
  write_json(out("summary.json"), summary);
  return summary;
}

}  // namespace naiad
