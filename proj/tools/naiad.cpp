// naiad: command-line entry point for every pipeline stage.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "naiad/annotation_server.hpp"
#include "naiad/http_client.hpp"
#include "naiad/mock_client.hpp"
#include "naiad/pipeline.hpp"

namespace {

using namespace naiad;

std::unique_ptr<LlmClient> make_client(const std::string& name, std::uint64_t seed) {
  if (name == "mock") return std::make_unique<MockClient>(make_synthetic_mock(seed));
  return std::make_unique<HttpChatClient>(HttpChatClient::from_env(name));
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

void emit_json(const std::string& out, const json& j) { emit(out, j.dump(2) + "\n"); }

std::vector<Dimension> parse_dims(const std::string& csv) {
  std::vector<Dimension> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_dimension(item));
  }
  if (out.empty()) throw InvalidArgument("--dims: no dimensions given");
  return out;
}

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NaiAD toolkit: matching, clustering, constrained generation, judging, calibration and analytics"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // match
  auto* match = app.add_subcommand("match", "Pair each query with its most similar ad");
  std::string m_queries, m_ads, m_qemb, m_aemb, m_out;
  match->add_option("--queries", m_queries, "Query pool JSONL")->required()->check(CLI::ExistingFile);
  match->add_option("--ads", m_ads, "Ad pool JSONL")->required()->check(CLI::ExistingFile);
  match->add_option("--query-emb", m_qemb, "Query embeddings JSONL")->required()->check(CLI::ExistingFile);
  match->add_option("--ad-emb", m_aemb, "Ad embeddings JSONL")->required()->check(CLI::ExistingFile);
  match->add_option("--out", m_out, "Output pairs JSONL (default stdout)");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "PCA + k-means over logical-bridge embeddings");
  std::string c_emb, c_out;
  ClusterOptions c_opt;
  cluster->add_option("--bridges-emb", c_emb, "Bridge embeddings JSONL")->required()->check(CLI::ExistingFile);
  cluster->add_option("--variance", c_opt.variance, "Variance fraction for the first PCA stage")->capture_default_str();
  cluster->add_option("--reduce-dim", c_opt.reduce_dim, "Dimension of the second PCA stage")->capture_default_str();
  cluster->add_option("--k-min", c_opt.k_min, "Smallest K")->capture_default_str();
  cluster->add_option("--k-max", c_opt.k_max, "Largest K")->capture_default_str();
  cluster->add_option("--seed", c_opt.seed, "Seed")->capture_default_str();
  cluster->add_option("--out", c_out, "Report JSON (default stdout)");

  // templates
  auto* templates = app.add_subcommand("templates", "Sample score templates");
  std::size_t t_n = 100;
  double t_frac = 0.5;
  std::uint64_t t_seed = 0;
  std::string t_out;
  templates->add_option("--n", t_n, "Number of templates")->capture_default_str();
  templates->add_option("--discordant-frac", t_frac, "Fraction of discordant (hard negative) templates")
      ->capture_default_str();
  templates->add_option("--seed", t_seed, "Seed")->capture_default_str();
  templates->add_option("--out", t_out, "Output JSONL (default stdout)");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Generate ad-embedded responses with rejection sampling");
  std::string s_pairs, s_templates, s_client = "mock", s_out, s_transcripts;
  int s_budget = 8;
  std::size_t s_conc = 1;
  std::uint64_t s_seed = 0;
  ToleranceBand s_band;
  synth->add_option("--pairs", s_pairs, "Matched pairs JSONL")->required()->check(CLI::ExistingFile);
  synth->add_option("--templates", s_templates, "Score templates JSONL")->required()->check(CLI::ExistingFile);
  synth->add_option("--transcripts", s_transcripts, "Sponsorship transcripts JSONL for inverse query synthesis")
      ->check(CLI::ExistingFile);
  synth->add_option("--client", s_client, "Client: mock or a model name")->capture_default_str();
  synth->add_option("--budget", s_budget, "Attempts per template")->capture_default_str();
  synth->add_option("--concurrency", s_conc, "Parallel requests")->capture_default_str();
  synth->add_option("--seed", s_seed, "Seed")->capture_default_str();
  synth->add_option("--max-abs", s_band.max_abs, "Acceptance bound on max |self - target|")->capture_default_str();
  synth->add_option("--mean-abs", s_band.mean_abs, "Acceptance bound on mean |self - target|")->capture_default_str();
  synth->add_option("--out", s_out, "Accepted samples JSONL (default stdout)");

  // judge
  auto* judge = app.add_subcommand("judge", "Score samples one dimension at a time");
  std::string j_samples, j_client = "mock", j_dims = "q1,q2,q3,q4", j_out;
  std::size_t j_conc = 1;
  std::uint64_t j_seed = 0;
  judge->add_option("--samples", j_samples, "Samples JSONL")->required()->check(CLI::ExistingFile);
  judge->add_option("--client", j_client, "Client: mock or a model name")->capture_default_str();
  judge->add_option("--dims", j_dims, "Comma-separated dimensions")->capture_default_str();
  judge->add_option("--concurrency", j_conc, "Parallel requests")->capture_default_str();
  judge->add_option("--seed", j_seed, "Seed")->capture_default_str();
  judge->add_option("--out", j_out, "Scored samples JSONL (default stdout)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Route and apply per-dimension VC-PPI calibration");
  std::string k_anchors, k_judged, k_out, k_report;
  int k_folds = 5;
  std::uint64_t k_seed = 0;
  std::size_t k_conc = 1;
  calibrate->add_option("--anchors", k_anchors, "Anchor JSONL")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--judged", k_judged, "Judged samples JSONL")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--folds", k_folds, "Cross-validation folds")->capture_default_str();
  calibrate->add_option("--seed", k_seed, "Seed")->capture_default_str();
  calibrate->add_option("--concurrency", k_conc, "Dimensions calibrated in parallel")->capture_default_str();
  calibrate->add_option("--out", k_out, "Calibrated samples JSONL (default stdout)");
  calibrate->add_option("--report", k_report, "Routing report JSON");

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Pareto fronts and superiority ratios");
  std::string p_samples, p_ref, p_out;
  pareto->add_option("--samples", p_samples, "Scored samples JSONL")->required()->check(CLI::ExistingFile);
  pareto->add_option("--reference", p_ref, "Reference means: ScoreVector JSON or anchor JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  pareto->add_option("--out", p_out, "Report JSON (default stdout)");

  // report
  auto* report = app.add_subcommand("report", "Paired before/after statistics");
  std::string r_before, r_after, r_out;
  report->add_option("--before", r_before, "Samples scored before (judge_raw)")->required()->check(CLI::ExistingFile);
  report->add_option("--after", r_after, "Samples scored after (calibrated, else judge_raw)")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out", r_out, "Report JSON (default stdout)");

  // keywords
  auto* keywords = app.add_subcommand("keywords", "TF-IDF keywords of logical bridges on a Pareto front");
  std::string w_samples, w_partition = "max_front", w_out;
  std::size_t w_top = 30;
  keywords->add_option("--samples", w_samples, "Scored samples JSONL")->required()->check(CLI::ExistingFile);
  keywords->add_option("--partition", w_partition, "max_front or min_front")
      ->check(CLI::IsMember({"max_front", "min_front"}))
      ->capture_default_str();
  keywords->add_option("--top", w_top, "Number of terms")->capture_default_str();
  keywords->add_option("--out", w_out, "Output JSON (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  std::string v_tasks, v_host = "127.0.0.1", v_data, v_static, v_annotators;
  int v_port = 8080;
  AnnotationConfig v_cfg;
  serve->add_option("--tasks", v_tasks, "Task pool JSONL (task records or bare samples)")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--host", v_host, "Bind address")->capture_default_str();
  serve->add_option("--port", v_port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--data-dir", v_data, "Label log directory (default $NAIAD_DATA_DIR or ./annotation_data)");
  serve->add_option("--static", v_static, "Directory of UI assets served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--annotators", v_annotators, "Comma-separated annotator ids to pre-register");
  serve->add_option("--variance-threshold", v_cfg.variance_threshold, "Flagging threshold")->capture_default_str();
  serve->add_option("--gold-rate", v_cfg.gold_rate, "Probability of serving a gold task")->capture_default_str();
  serve->add_option("--drift-window", v_cfg.drift_window, "Gold tasks in the drift window")->capture_default_str();
  serve->add_option("--deviation-bound", v_cfg.deviation_bound, "Drift alert bound")->capture_default_str();
  serve->add_option("--seed", v_cfg.seed, "Seed for gold interleaving")->capture_default_str();

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "Chain every stage");
  pipeline->require_subcommand(1);
  auto* run = pipeline->add_subcommand("run", "Run all stages from a config file");
  std::string x_config, x_out, x_client;
  std::optional<std::uint64_t> x_seed;
  std::optional<std::size_t> x_conc, x_templates;
  std::optional<int> x_folds;
  run->add_option("--config", x_config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", x_out, "Override out_dir");
  run->add_option("--client", x_client, "Override client");
  run->add_option("--seed", x_seed, "Override seed");
  run->add_option("--concurrency", x_conc, "Override concurrency");
  run->add_option("--templates", x_templates, "Override template count");
  run->add_option("--folds", x_folds, "Override CV folds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return 2;
  }

  try {
    if (*match) {
      const auto pairs = match_pairs(read_jsonl<QueryRecord>(m_queries), read_jsonl<AdMeta>(m_ads),
                                     EmbeddingTable(read_jsonl<EmbeddingEntry>(m_qemb)),
                                     EmbeddingTable(read_jsonl<EmbeddingEntry>(m_aemb)));
      emit(m_out, to_jsonl(pairs));
      std::cerr << "match: " << pairs.size() << " pairs\n";
    } else if (*cluster) {
      const json rep = cluster_bridges(EmbeddingTable(read_jsonl<EmbeddingEntry>(c_emb)), c_opt);
      emit_json(c_out, rep);
      std::cerr << "cluster: K* = " << rep["best_k"] << "\n";
    } else if (*templates) {
      emit(t_out, to_jsonl(sample_templates(t_n, t_frac, t_seed)));
    } else if (*synth) {
      const auto client = make_client(s_client, s_seed);
      const auto pairs = read_jsonl<QueryAdPair>(s_pairs);
      const auto tmpl = read_jsonl<ScoreTemplate>(s_templates);
      const auto jobs = make_jobs(pairs, tmpl, s_budget, s_seed);
      GenerationOptions opt;
      opt.band = s_band;
      if (s_client == "mock") opt.retry.initial_backoff = std::chrono::milliseconds(0);
      auto res = synthesize(*client, jobs, s_conc, opt);
      if (!s_transcripts.empty()) {
        for (auto& s : synthesize_transcripts(*client, read_jsonl<TranscriptRecord>(s_transcripts), s_conc,
                                              derive_seed(s_seed, 1))) {
          res.samples.push_back(std::move(s));
        }
      }
      emit(s_out, to_jsonl(res.samples));
      for (const auto& e : res.exhausted) std::cerr << "exhausted: " << e.dump() << "\n";
      std::cerr << "synthesize: " << res.samples.size() << " accepted, " << res.exhausted.size() << " exhausted\n";
    } else if (*judge) {
      const auto client = make_client(j_client, j_seed);
      const auto dims = parse_dims(j_dims);
      const auto samples = read_jsonl<Sample>(j_samples);
      emit(j_out, to_jsonl(judge_all(*client, samples, dims, j_conc, j_seed)));
    } else if (*calibrate) {
      CalibrationOptions opt;
      opt.route.folds = k_folds;
      opt.route.seed = k_seed;
      opt.concurrency = k_conc;
      const auto res = calibrate_dataset(read_jsonl<AnchorRecord>(k_anchors), read_jsonl<Sample>(k_judged), opt);
      emit(k_out, to_jsonl(res.samples));
      if (!k_report.empty()) write_json(k_report, report_json(res));
      for (const auto& d : res.decisions) {
        std::cerr << "calibrate " << dimension_key(d.dimension) << ": " << d.chosen_candidate().id << "\n";
      }
    } else if (*pareto) {
      emit_json(p_out, pareto_report(read_jsonl<Sample>(p_samples), load_reference(p_ref)));
    } else if (*report) {
      emit_json(r_out, comparison_report(read_jsonl<Sample>(r_before), read_jsonl<Sample>(r_after)));
    } else if (*keywords) {
      emit_json(w_out, keyword_report(read_jsonl<Sample>(w_samples), w_partition, w_top));
    } else if (*serve) {
      if (v_data.empty()) {
        const char* env = std::getenv("NAIAD_DATA_DIR");
        v_data = env && *env ? env : "annotation_data";
      }
      v_cfg.annotators = parse_list(v_annotators);
      AnnotationStore store(read_jsonl<AnnotationTask>(v_tasks), v_cfg,
                            std::filesystem::path(v_data) / "labels.jsonl");
      AnnotationServer server(store, v_static.empty() ? std::nullopt : std::optional<std::string>(v_static));
      const int port = server.bind(v_host, v_port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serve: listening on http://" << v_host << ":" << port << "\n";
      server.serve();
      g_server = nullptr;
    } else if (*run) {
      const std::filesystem::path cfg_path(x_config);
      PipelineConfig cfg = parse_pipeline_config(json::parse(read_text(cfg_path)), cfg_path.parent_path());
      if (!x_out.empty()) cfg.out_dir = x_out;
      if (!x_client.empty()) cfg.client = x_client;
      if (x_seed) cfg.seed = *x_seed;
      if (x_conc) cfg.concurrency = *x_conc;
      if (x_templates) cfg.templates = *x_templates;
      if (x_folds) cfg.folds = *x_folds;
      const auto client = make_client(cfg.client, cfg.seed);
      run_pipeline(cfg, *client, std::cerr);
      std::cerr << "pipeline: outputs in " << cfg.out_dir.string() << "\n";
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
