// crawlsim: simulate influence-driven web crawling over a stored graph
// snapshot, plus the baselines and the analyses that compare them.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "crawlsim/crawlsim.hpp"

namespace fs = std::filesystem;
using namespace crawlsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::int64_t> seed_override;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--seed", args.seed_override, "override the run's primary rng seed");
  cmd->add_flag("--force", args.force, "allow writing into a non-empty output directory");
}

unsigned thread_budget() {
  const char* env = std::getenv("CRAWLSIM_THREADS");
  if (env == nullptr) return 0;  // auto
  const auto v = parse_u64(env);
  if (!v) throw ConfigError("CRAWLSIM_THREADS must be a non-negative integer");
  return static_cast<unsigned>(*v);
}

RunManifest make_manifest(const std::string& subcommand, const CommonArgs& args,
                          const RunConfig& config) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.config_path = args.config_path;
  manifest.input_digests.emplace_back(args.config_path, file_digest(args.config_path));
  for (const auto& [key, value] : config.entries()) manifest.parameters[key] = value;
  return manifest;
}

void add_input_digest(RunManifest& manifest, const std::string& path) {
  manifest.input_digests.emplace_back(path, file_digest(path));
}

std::uint64_t resolve_seed(const RunConfig& config, const CommonArgs& args, const std::string& key,
                           std::optional<std::uint64_t> fallback = std::nullopt) {
  if (args.seed_override) return static_cast<std::uint64_t>(*args.seed_override);
  if (config.has(key)) return config.get_u64(key);
  if (fallback) return *fallback;
  throw ConfigError("missing config key: " + key);
}

// ---------------------------------------------------------------------------

struct Corpus {
  WebGraph graph;
  DocumentStore store;
};

Corpus load_corpus(const RunConfig& config, const std::string& ns, RunManifest& manifest) {
  const std::string edges = config.get_string(ns + ".edges");
  const std::string docs = config.get_string(ns + ".docs");
  add_input_digest(manifest, edges);
  add_input_digest(manifest, docs);
  Corpus corpus;
  std::optional<std::uint64_t> expected;
  if (config.has(ns + ".expected_nodes")) expected = config.get_u64(ns + ".expected_nodes");
  corpus.graph = ingest_edges(edges, expected);
  corpus.store = ingest_documents(docs);
  return corpus;
}

ScorerPolicy load_policy(const RunConfig& config, const std::string& ns, const WebGraph* graph,
                         std::uint64_t default_seed, RunManifest& manifest) {
  const std::string kind = config.get_string(ns + ".kind");
  if (kind == "classifier") {
    const std::string model = config.get_string(ns + ".model");
    add_input_digest(manifest, model);
    return ClassifierPolicy{load_classifier(model)};
  }
  if (kind == "table") {
    const std::string table = config.get_string(ns + ".table");
    add_input_digest(manifest, table);
    return TablePolicy{load_score_table(table)};
  }
  if (kind == "indegree") {
    if (graph == nullptr) throw ConfigError(ns + ".kind=indegree needs a graph");
    return IndegreePolicy{graph};
  }
  if (kind == "random") return RandomPolicy{config.get_u64_or(ns + ".seed", default_seed)};
  throw ConfigError(ns + ".kind must be one of classifier|table|indegree|random");
}

std::vector<NodeId> load_seeds(const RunConfig& config, const std::string& ns,
                               RunManifest& manifest) {
  if (config.has(ns + ".seeds")) return config.get_id_list(ns + ".seeds");
  if (config.has(ns + ".seeds_file")) {
    const std::string path = config.get_string(ns + ".seeds_file");
    add_input_digest(manifest, path);
    return read_selection(path);
  }
  throw ConfigError("provide " + ns + ".seeds or " + ns + ".seeds_file");
}

CrawlConfig build_crawl_config(const RunConfig& config, const CommonArgs& args,
                               const Corpus& corpus, RunManifest& manifest) {
  CrawlConfig crawl;
  crawl.seeds = load_seeds(config, "crawl", manifest);
  crawl.total_pages = config.get_u64("crawl.total_pages");
  crawl.per_iteration = config.get_u64_or("crawl.per_iteration", 1);
  crawl.checkpoint_every =
      config.get_u64_or("crawl.checkpoint_every", std::max<std::uint64_t>(1, crawl.total_pages / 100));
  crawl.rng_seed = resolve_seed(config, args, "crawl.rng_seed", 0);
  crawl.policy = load_policy(config, "scorer", &corpus.graph, crawl.rng_seed, manifest);
  manifest.seeds.emplace_back("crawl", crawl.rng_seed);
  manifest.parameters["resolved.per_iteration"] = std::to_string(crawl.per_iteration);
  manifest.parameters["resolved.checkpoint_every"] = std::to_string(crawl.checkpoint_every);
  manifest.parameters["resolved.seed_count"] = std::to_string(crawl.seeds.size());
  return crawl;
}

// ---------------------------------------------------------------------------

int cmd_synth(const CommonArgs& args) {
  const RunConfig config = RunConfig::load(args.config_path);
  SynthConfig synth;
  synth.node_count = config.get_u64("synth.node_count");
  synth.out_degree_mean = config.get_double_or("synth.out_degree_mean", 8.0);
  synth.attachment_exponent = config.get_double_or("synth.attachment_exponent", 1.0);
  synth.quality_link_correlation = config.get_double_or("synth.quality_link_correlation", 0.0);
  synth.vocab.clean_vocab = static_cast<std::uint32_t>(config.get_u64_or("synth.clean_vocab", 200));
  synth.vocab.noisy_vocab = static_cast<std::uint32_t>(config.get_u64_or("synth.noisy_vocab", 200));
  synth.vocab.tokens_per_doc =
      static_cast<std::uint32_t>(config.get_u64_or("synth.tokens_per_doc", 100));
  if (!args.seed_override && !config.has("synth.rng_seed"))
    throw ConfigError("missing config key: synth.rng_seed");
  synth.rng_seed = resolve_seed(config, args, "synth.rng_seed");

  RunManifest manifest = make_manifest("synth", args, config);
  manifest.seeds.emplace_back("synth", synth.rng_seed);
  manifest.parameters["resolved.rng_seed"] = std::to_string(synth.rng_seed);

  prepare_output_dir(args.out_dir, args.force);
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

  const SynthCorpus corpus = generate(synth);
  emit(corpus, args.out_dir);
  std::cout << "nodes=" << corpus.graph.node_count() << " edges=" << corpus.graph.edge_count()
            << " documents=" << corpus.store.size() << '\n';
  return kExitOk;
}

int cmd_crawl(const CommonArgs& args) {
  const RunConfig config = RunConfig::load(args.config_path);
  RunManifest manifest = make_manifest("crawl", args, config);
  const Corpus corpus = load_corpus(config, "crawl", manifest);
  const CrawlConfig crawl = build_crawl_config(config, args, corpus, manifest);

  prepare_output_dir(args.out_dir, args.force);
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

  const CrawlResult result = run_crawl(crawl, corpus.graph, corpus.store, thread_budget());
  write_crawl_result(result, crawl, fs::path(args.out_dir) / "crawl_result.tsv");
  std::cout << "crawled=" << result.crawled.size() << " visited=" << result.visited_count
            << " terminated_by=" << to_string(result.terminated_by) << '\n';
  return kExitOk;
}

int cmd_select(const CommonArgs& args) {
  const RunConfig config = RunConfig::load(args.config_path);
  const std::string mode = config.get_string("select.mode");
  RunManifest manifest = make_manifest("select", args, config);

  if (mode == "oracle") {
    const std::string docs = config.get_string("select.docs");
    add_input_digest(manifest, docs);
    const DocumentStore store = ingest_documents(docs);

    // Content-free selectors (table/random) are allowed; indegree needs the graph.
    std::optional<WebGraph> graph;
    if (config.get_string("selector.kind") == "indegree") {
      const std::string edges = config.get_string("select.edges");
      add_input_digest(manifest, edges);
      graph = ingest_edges(edges);
    }
    const std::uint64_t rng_seed = resolve_seed(config, args, "select.rng_seed", 0);
    const ScorerPolicy selector =
        load_policy(config, "selector", graph ? &*graph : nullptr, rng_seed, manifest);
    const std::uint64_t target = config.get_u64("select.target");
    const double top_fraction = config.get_double("select.top_fraction");
    manifest.seeds.emplace_back("select", rng_seed);

    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const SelectionResult sel =
        oracle_select(store, selector, target, top_fraction, rng_seed, thread_budget());
    write_selection(sel.selected, fs::path(args.out_dir) / "selection.txt");
    std::cout << "selected=" << sel.selected.size() << " pool=" << sel.pool_size
              << " multiplier=" << format_double(sel.pool_size_multiplier) << '\n';
    return kExitOk;
  }

  if (mode == "crawl_then_select") {
    const Corpus corpus = load_corpus(config, "crawl", manifest);
    const CrawlConfig crawl = build_crawl_config(config, args, corpus, manifest);
    const double multiplier = config.get_double("select.multiplier");
    const std::uint64_t target = config.get_u64("select.target");
    const ScorerPolicy selector =
        load_policy(config, "selector", &corpus.graph, crawl.rng_seed, manifest);

    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const CrawlThenSelectResult out =
        crawl_then_select(crawl, multiplier, selector, target, corpus.graph, corpus.store,
                          thread_budget());
    CrawlConfig echoed = crawl;
    echoed.total_pages =
        static_cast<std::uint64_t>(std::llround(multiplier * static_cast<double>(target)));
    write_crawl_result(out.crawl, echoed, fs::path(args.out_dir) / "crawl_result.tsv");
    write_selection(out.selection.selected, fs::path(args.out_dir) / "selection.txt");
    std::cout << "selected=" << out.selection.selected.size() << " pool=" << out.selection.pool_size
              << " exhausted=" << (out.selection.pool_exhausted ? 1 : 0) << '\n';
    return kExitOk;
  }

  throw ConfigError("select.mode must be oracle or crawl_then_select");
}

int cmd_analyze(const CommonArgs& args) {
  const RunConfig config = RunConfig::load(args.config_path);
  const std::string task = config.get_string("analyze.task");
  RunManifest manifest = make_manifest("analyze", args, config);

  const auto print_metric = [](std::string_view name, double value) {
    std::cout << "metric=" << name << " value=" << format_double(value) << '\n';
  };

  if (task == "coverage") {
    const std::string result_path = config.get_string("analyze.result");
    const std::string oracle_path = config.get_string("analyze.oracle");
    add_input_digest(manifest, result_path);
    add_input_digest(manifest, oracle_path);
    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const CrawlResultFile run = read_crawl_result(result_path);
    const std::vector<NodeId> oracle = read_selection(oracle_path);
    const CoverageCurve curve = coverage_curve(run.result, oracle);
    write_coverage_csv(curve, fs::path(args.out_dir) / "coverage.csv");
    print_metric("final_precision", curve.points.back().precision);
    print_metric("final_recall", curve.points.back().recall);
    return kExitOk;
  }

  if (task == "spearman") {
    const std::string x_path = config.get_string("analyze.x_table");
    const std::string y_path = config.get_string("analyze.y_table");
    add_input_digest(manifest, x_path);
    add_input_digest(manifest, y_path);
    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const ScoreTable xs = load_score_table(x_path);
    const ScoreTable ys = load_score_table(y_path);
    std::vector<double> x, y;
    for (NodeId u : xs.ids_ascending()) {
      if (const double* v = ys.find(u)) {
        x.push_back(xs.at(u));
        y.push_back(*v);
      }
    }
    std::ofstream out(fs::path(args.out_dir) / "correlation.csv", std::ios::binary);
    out << "metric,value\n";
    try {
      const double rho = spearman(x, y);
      out << "spearman," << format_double(rho) << '\n';
      print_metric("spearman", rho);
    } catch (const UndefinedCorrelationError&) {
      out << "spearman,NA\n";
      std::cout << "metric=spearman value=NA\n";
    }
    return kExitOk;
  }

  if (task == "hop_correlation") {
    const std::string edges = config.get_string("analyze.edges");
    const std::string scores_path = config.get_string("analyze.scores");
    add_input_digest(manifest, edges);
    add_input_digest(manifest, scores_path);
    const auto hop = static_cast<unsigned>(config.get_u64_or("analyze.hop", 1));
    const std::uint64_t sample = config.get_u64_or("analyze.sample", 2000);
    const std::uint64_t rng_seed = resolve_seed(config, args, "analyze.rng_seed", 0);
    manifest.seeds.emplace_back("analyze", rng_seed);
    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const WebGraph graph = ingest_edges(edges);
    const ScoreTable scores = load_score_table(scores_path);
    const std::string name = "hop_" + std::to_string(hop);
    std::ofstream out(fs::path(args.out_dir) / "correlation.csv", std::ios::binary);
    out << "metric,value\n";
    try {
      const double rho = hop_score_correlation(graph, scores, hop, sample, rng_seed);
      out << name << ',' << format_double(rho) << '\n';
      print_metric(name, rho);
    } catch (const UndefinedCorrelationError&) {
      out << name << ",NA\n";
      std::cout << "metric=" << name << " value=NA\n";
    }
    return kExitOk;
  }

  if (task == "efficiency") {
    const std::string a_path = config.get_string("analyze.run_a");
    const std::string b_path = config.get_string("analyze.run_b");
    add_input_digest(manifest, a_path);
    add_input_digest(manifest, b_path);
    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const CrawlResultFile a = read_crawl_result(a_path);
    const CrawlResultFile b = read_crawl_result(b_path);
    const EfficiencyReport report = efficiency_report(a.result, b.result);
    write_efficiency_csv(report, fs::path(args.out_dir) / "efficiency.csv");
    print_metric("crawled_ratio", report.crawled_ratio);
    print_metric("visited_ratio", report.visited_ratio);
    return kExitOk;
  }

  if (task == "pagerank") {
    const std::string edges = config.get_string("analyze.edges");
    add_input_digest(manifest, edges);
    const double damping = config.get_double_or("analyze.damping", 0.85);
    const std::uint64_t iterations = config.get_u64_or("analyze.iterations", 100);
    prepare_output_dir(args.out_dir, args.force);
    write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

    const WebGraph graph = ingest_edges(edges);
    const std::vector<double> ranks = pagerank(graph, damping, iterations);
    ScoreTable table;
    double sum = 0.0;
    for (NodeId u = 0; u < ranks.size(); ++u) {
      table.set(u, ranks[u]);
      sum += ranks[u];
    }
    save_score_table(table, fs::path(args.out_dir) / "pagerank.tsv");
    print_metric("pagerank_sum", sum);
    return kExitOk;
  }

  throw ConfigError(
      "analyze.task must be one of coverage|spearman|hop_correlation|efficiency|pagerank");
}

int cmd_train(const CommonArgs& args) {
  const RunConfig config = RunConfig::load(args.config_path);
  RunManifest manifest = make_manifest("train", args, config);

  const std::string pos_path = config.get_string("train.positives");
  const std::string neg_path = config.get_string("train.negatives");
  add_input_digest(manifest, pos_path);
  add_input_digest(manifest, neg_path);

  TrainConfig train;
  train.hash_dim = static_cast<std::uint32_t>(config.get_u64_or("train.hash_dim", 1u << 16));
  train.ngram_orders = config.get_order_list_or("train.orders", {1, 2});
  train.epochs = static_cast<std::uint32_t>(config.get_u64_or("train.epochs", 5));
  train.learning_rate = config.get_double_or("train.learning_rate", 0.1);
  train.seed = resolve_seed(config, args, "train.seed", 0);
  const double holdout = config.get_double_or("train.holdout_fraction", 0.2);
  if (holdout < 0.0 || holdout >= 1.0)
    throw ConfigError("train.holdout_fraction must lie in [0, 1)");
  manifest.seeds.emplace_back("train", train.seed);

  prepare_output_dir(args.out_dir, args.force);
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.txt");

  const DocumentStore pos_store = ingest_documents(pos_path);
  const DocumentStore neg_store = ingest_documents(neg_path);
  if (pos_store.size() == 0 || neg_store.size() == 0)
    throw ConfigError("both training classes must be non-empty");

  // Deterministic holdout split per class.
  const auto split_class = [&](const DocumentStore& store, std::uint64_t salt,
                               std::vector<Document>& train_docs,
                               std::vector<Document>& holdout_docs) {
    std::vector<NodeId> ids = store.present_ids();
    Rng rng(hash_mix(train.seed, salt));
    rng.shuffle(ids);
    const auto holdout_count = static_cast<std::size_t>(holdout * static_cast<double>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Document* doc = store.find(ids[i]);
      (i < holdout_count ? holdout_docs : train_docs).push_back(*doc);
    }
  };
  std::vector<Document> train_pos, train_neg, held_pos, held_neg;
  split_class(pos_store, 11, train_pos, held_pos);
  split_class(neg_store, 12, train_neg, held_neg);
  if (train_pos.empty() || train_neg.empty())
    throw ConfigError("holdout fraction leaves an empty training class");

  const TrainedClassifier clf = train_classifier(train_pos, train_neg, train);
  save_classifier(clf, fs::path(args.out_dir) / "classifier.clf");

  std::uint64_t correct = 0, total = 0;
  for (const Document& d : held_pos) {
    if (clf.score_text(d.text) >= 0.5) ++correct;
    ++total;
  }
  for (const Document& d : held_neg) {
    if (clf.score_text(d.text) < 0.5) ++correct;
    ++total;
  }
  if (total > 0)
    std::cout << "metric=holdout_accuracy value="
              << format_double(static_cast<double>(correct) / static_cast<double>(total)) << '\n';
  else
    std::cout << "metric=holdout_accuracy value=NA\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"web-crawl scheduling simulator"};
  app.require_subcommand(1);

  CommonArgs synth_args, crawl_args, select_args, analyze_args, train_args;
  add_common(app.add_subcommand("synth", "generate a synthetic corpus"), synth_args);
  add_common(app.add_subcommand("crawl", "run a crawl over a corpus"), crawl_args);
  add_common(app.add_subcommand("select", "oracle or crawl-then-select selection"), select_args);
  add_common(app.add_subcommand("analyze", "coverage, correlations, efficiency, pagerank"),
             analyze_args);
  add_common(app.add_subcommand("train", "train the influence classifier"), train_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("synth")) return cmd_synth(synth_args);
    if (app.got_subcommand("crawl")) return cmd_crawl(crawl_args);
    if (app.got_subcommand("select")) return cmd_select(select_args);
    if (app.got_subcommand("analyze")) return cmd_analyze(analyze_args);
    if (app.got_subcommand("train")) return cmd_train(train_args);
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
