#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/frontier.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/scorers.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

struct CrawlConfig {
  std::vector<NodeId> seeds;
  std::uint64_t total_pages = 0;      // overall crawl budget
  std::uint64_t per_iteration = 1;    // sources dequeued per iteration
  ScorerPolicy policy = RandomPolicy{};
  std::uint64_t checkpoint_every = 1;
  std::uint64_t rng_seed = 0;
};

struct IterationTrace {
  std::uint64_t iteration_index = 0;
  std::vector<NodeId> sources;
  std::vector<NodeId> fetched;
  std::uint64_t discovered = 0;     // unique outlink targets this iteration
  std::uint64_t enqueued_new = 0;   // of those, not yet visited
};

// Snapshot taken the moment the crawled count crosses a checkpoint_every
// multiple; visited_count is the value at that instant (scoring of the
// current batch's outlinks may still follow).
struct Checkpoint {
  std::uint64_t crawled_count = 0;
  std::uint64_t visited_count = 0;
  std::vector<NodeId> new_members;  // crawled since the previous checkpoint, in crawl order
};

enum class Termination { budget_reached, frontier_exhausted };

inline std::string_view to_string(Termination t) {
  return t == Termination::budget_reached ? "budget_reached" : "frontier_exhausted";
}

struct CrawlResult {
  std::vector<NodeId> crawled;         // fetch order, duplicate-free
  std::uint64_t visited_count = 0;     // seeds plus every node ever enqueued
  std::vector<IterationTrace> iterations;
  std::vector<Checkpoint> checkpoints;
  std::uint64_t fetch_count_crawl = 0;  // == crawled.size()
  std::uint64_t fetch_count_score = 0;  // == visited_count - seed count
  Termination terminated_by = Termination::frontier_exhausted;
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Scores nodes[i] into scores[i]. Safe to parallelize: every scorer is
// read-only and each slot is written by exactly one worker, so the result is
// independent of scheduling.
template <typename ScoreFn>
void score_batch(std::span<const NodeId> nodes, std::vector<double>& scores,
                 unsigned threads, ScoreFn&& fn) {
  scores.resize(nodes.size());
  threads = std::min<std::size_t>(resolve_threads(threads), nodes.size());
  if (threads <= 1 || nodes.size() < 512) {
    for (std::size_t i = 0; i < nodes.size(); ++i) scores[i] = fn(nodes[i]);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> failures(threads);
  const std::size_t chunk = (nodes.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(nodes.size(), begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) scores[i] = fn(nodes[i]);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// Scoring fetch: contentless pages are unscoreable for content-based policies
// and get the -inf sentinel; other policies score from the node id alone.
inline double score_for_enqueue(const ScorerPolicy& policy, NodeId v, const DocumentStore& store) {
  const Document* doc = store.find(v);
  if (!doc && requires_content(policy)) return kScoreSentinel;
  return score_document(policy, v, doc);
}

/// Runs the influence-driven crawl over the snapshot.
///
/// Iteration 0 fetches the seeds unconditionally; every later iteration
/// fetches the nodes dequeued at the end of the previous one. Each iteration:
/// fetch the sources into the crawled set, gather their unique outlink
/// targets, score the unvisited ones, enqueue them in ascending node id
/// order, then dequeue up to per_iteration sources (truncated so the crawled
/// set lands on total_pages exactly). Stops when the budget is reached or the
/// frontier empties. Deterministic given the config.
// Structural invariants every run shares, independent of the corpus.
inline void validate(const CrawlConfig& config) {
  if (config.per_iteration == 0) throw ConfigError("per_iteration must be >= 1");
  if (config.checkpoint_every == 0) throw ConfigError("checkpoint_every must be >= 1");
  if (config.total_pages < config.seeds.size())
    throw ConfigError("total_pages must cover the seed set");
}

inline CrawlResult run_crawl(const CrawlConfig& config, const WebGraph& graph,
                             const DocumentStore& store, unsigned threads = 1) {
  validate(config);
  for (NodeId s : config.seeds)
    if (s >= graph.node_count())
      throw ConfigError("seed node " + std::to_string(s) + " is not in the graph");

  Frontier frontier(config.seeds);  // throws on duplicate seeds
  CrawlResult result;
  std::vector<NodeId> pending_members;  // crawled since the last checkpoint

  std::vector<NodeId> sources = config.seeds;
  std::vector<NodeId> fresh;
  std::vector<double> scores;
  std::uint64_t iteration = 0;

  while (true) {
    if (result.crawled.size() >= config.total_pages) {
      result.terminated_by = Termination::budget_reached;
      break;
    }
    if (sources.empty()) {
      result.terminated_by = Termination::frontier_exhausted;
      break;
    }

    IterationTrace trace;
    trace.iteration_index = iteration;
    trace.sources = sources;

    for (NodeId u : sources) {
      // Second fetch of an already-scored page still costs; contentless pages
      // join the crawled set with empty text.
      try {
        (void)fetch_page(store, u, result.fetch_count_crawl);
      } catch (const ContentMissingError&) {
      }
      result.crawled.push_back(u);
      pending_members.push_back(u);
      if (result.crawled.size() % config.checkpoint_every == 0) {
        result.checkpoints.push_back(Checkpoint{result.crawled.size(), frontier.visited_count(),
                                                std::move(pending_members)});
        pending_members.clear();
      }
    }
    trace.fetched = sources;

    // Unique outlink targets of the batch, ascending; enqueue order (and so
    // seq assignment) never depends on discovery or scoring order.
    fresh.clear();
    for (NodeId u : sources)
      for (NodeId v : graph.outlinks(u)) fresh.push_back(v);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    trace.discovered = fresh.size();

    std::erase_if(fresh, [&](NodeId v) { return frontier.is_visited(v); });
    trace.enqueued_new = fresh.size();

    detail::score_batch(fresh, scores, threads,
                        [&](NodeId v) { return score_for_enqueue(config.policy, v, store); });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      frontier.enqueue_if_new(fresh[i], scores[i]);
      ++result.fetch_count_score;
    }
    result.iterations.push_back(std::move(trace));

    if (result.crawled.size() >= config.total_pages) {
      result.terminated_by = Termination::budget_reached;
      break;
    }
    const std::uint64_t want =
        std::min<std::uint64_t>(config.per_iteration, config.total_pages - result.crawled.size());
    sources = frontier.dequeue_top(want);
    ++iteration;
  }

  if (!result.crawled.empty() &&
      (result.checkpoints.empty() || result.checkpoints.back().crawled_count != result.crawled.size())) {
    result.checkpoints.push_back(
        Checkpoint{result.crawled.size(), frontier.visited_count(), std::move(pending_members)});
    pending_members.clear();
  }
  result.visited_count = frontier.visited_count();
  return result;
}

// ---------------------------------------------------------------------------
// Selection

struct SelectionResult {
  std::vector<NodeId> selected;   // ascending
  double pool_size_multiplier = 0.0;
  ScoreTable selection_scores;    // selector scores over the evaluated pool
  std::uint64_t pool_size = 0;
  bool pool_exhausted = false;    // the crawl ended below the selection target
};

struct CrawlThenSelectResult {
  SelectionResult selection;
  CrawlResult crawl;
};

namespace detail {

// (score desc, id asc) — the deterministic selection order.
inline std::vector<NodeId> top_k_by_score(std::vector<std::pair<double, NodeId>> pool,
                                          std::uint64_t k) {
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (pool.size() > k) pool.resize(k);
  std::vector<NodeId> ids;
  ids.reserve(pool.size());
  for (const auto& [s, u] : pool) ids.push_back(u);
  return ids;
}

}  // namespace detail

/// Crawl-then-select baseline: crawl multiplier x target pages with the
/// config's (conventional) policy, then keep the top target by selector
/// score, ties broken by ascending id. A crawl that exhausts below the target
/// selects whatever was crawled and sets pool_exhausted.
inline CrawlThenSelectResult crawl_then_select(const CrawlConfig& base_config, double multiplier,
                                               const ScorerPolicy& selector, std::uint64_t target,
                                               const WebGraph& graph, const DocumentStore& store,
                                               unsigned threads = 1) {
  if (multiplier <= 0.0) throw ConfigError("multiplier must be positive");
  CrawlConfig config = base_config;
  config.total_pages = static_cast<std::uint64_t>(std::llround(multiplier * static_cast<double>(target)));
  if (config.total_pages < config.seeds.size())
    throw ConfigError("selection pool smaller than the seed set");

  CrawlThenSelectResult out;
  out.crawl = run_crawl(config, graph, store, threads);

  std::vector<double> scores;
  detail::score_batch(out.crawl.crawled, scores, threads,
                      [&](NodeId v) { return score_for_enqueue(selector, v, store); });

  std::vector<std::pair<double, NodeId>> pool;
  pool.reserve(out.crawl.crawled.size());
  for (std::size_t i = 0; i < out.crawl.crawled.size(); ++i) {
    pool.emplace_back(scores[i], out.crawl.crawled[i]);
    out.selection.selection_scores.set(out.crawl.crawled[i], scores[i]);
  }

  out.selection.pool_size = pool.size();
  out.selection.pool_size_multiplier = multiplier;
  out.selection.pool_exhausted = pool.size() < target;
  out.selection.selected = detail::top_k_by_score(std::move(pool), target);
  std::sort(out.selection.selected.begin(), out.selection.selected.end());
  return out;
}

/// Oracle selection: score the entire corpus, take the top
/// ceil(top_fraction * corpus) by score, and uniformly sample `target` of
/// them. Selecting from the full snapshot is the bound no crawler can beat.
inline SelectionResult oracle_select(const DocumentStore& store, const ScorerPolicy& scorer,
                                     std::uint64_t target, double top_fraction,
                                     std::uint64_t rng_seed, unsigned threads = 1) {
  if (!(top_fraction > 0.0) || top_fraction > 1.0)
    throw ConfigError("top_fraction must lie in (0, 1]");

  const std::vector<NodeId> corpus = store.present_ids();
  const auto bucket_size = static_cast<std::uint64_t>(
      std::ceil(top_fraction * static_cast<double>(corpus.size()) - 1e-9));
  if (target > bucket_size)
    throw ConfigError("oracle target " + std::to_string(target) + " exceeds the top bucket (" +
                      std::to_string(bucket_size) + ")");

  std::vector<double> scores;
  detail::score_batch(corpus, scores, threads,
                      [&](NodeId v) { return score_document(scorer, v, store.find(v)); });

  SelectionResult result;
  std::vector<std::pair<double, NodeId>> pool;
  pool.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    pool.emplace_back(scores[i], corpus[i]);
    result.selection_scores.set(corpus[i], scores[i]);
  }

  std::vector<NodeId> bucket = detail::top_k_by_score(std::move(pool), bucket_size);
  Rng rng(rng_seed);
  rng.partial_shuffle(bucket, target);
  bucket.resize(target);
  std::sort(bucket.begin(), bucket.end());

  result.selected = std::move(bucket);
  result.pool_size = corpus.size();
  result.pool_size_multiplier =
      target == 0 ? 0.0 : static_cast<double>(corpus.size()) / static_cast<double>(target);
  return result;
}

// ---------------------------------------------------------------------------
// Files

/// Crawl result file: `# key=value` header lines (config echo, termination,
/// counters), then one `crawled<TAB>visited<TAB>ids,comma` row per checkpoint.
/// Checkpoint deltas concatenate to the crawled set in crawl order.
inline void write_crawl_result(const CrawlResult& result, const CrawlConfig& config,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write crawl result: " + path.string());
  out << "# crawlsim crawl result v1\n";
  out << "# seeds=" << join_u64(config.seeds, ',') << '\n';
  out << "# total_pages=" << config.total_pages << '\n';
  out << "# per_iteration=" << config.per_iteration << '\n';
  out << "# checkpoint_every=" << config.checkpoint_every << '\n';
  out << "# policy=" << policy_kind(config.policy) << '\n';
  out << "# rng_seed=" << config.rng_seed << '\n';
  out << "# terminated_by=" << to_string(result.terminated_by) << '\n';
  out << "# crawled=" << result.crawled.size() << '\n';
  out << "# visited=" << result.visited_count << '\n';
  out << "# fetch_count_crawl=" << result.fetch_count_crawl << '\n';
  out << "# fetch_count_score=" << result.fetch_count_score << '\n';
  for (const Checkpoint& cp : result.checkpoints)
    out << cp.crawled_count << '\t' << cp.visited_count << '\t' << join_u64(cp.new_members, ',')
        << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

struct CrawlResultFile {
  CrawlResult result;  // crawled reconstructed from checkpoint deltas; iterations not stored
  std::map<std::string, std::string> header;
};

inline CrawlResultFile read_crawl_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open crawl result: " + path.string());

  CrawlResultFile file;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      const std::string_view body = trim(sv.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string_view::npos)
        file.header[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      continue;
    }
    const auto fields = split(sv, '\t');
    if (fields.size() != 3) throw ParseError(path.string(), lineno, "expected 3 tab-separated fields");
    const auto crawled = parse_u64(fields[0]);
    const auto visited = parse_u64(fields[1]);
    if (!crawled || !visited) throw ParseError(path.string(), lineno, "bad checkpoint counts");
    Checkpoint cp{*crawled, *visited, {}};
    if (!fields[2].empty()) {
      for (std::string_view part : split(fields[2], ',')) {
        const auto id = parse_u64(part);
        if (!id) throw ParseError(path.string(), lineno, "bad member id");
        cp.new_members.push_back(*id);
        file.result.crawled.push_back(*id);
      }
    }
    file.result.checkpoints.push_back(std::move(cp));
  }

  const auto header_u64 = [&](const char* key) -> std::uint64_t {
    auto it = file.header.find(key);
    if (it == file.header.end()) throw ParseError(path.string(), 0, std::string("missing header ") + key);
    const auto v = parse_u64(it->second);
    if (!v) throw ParseError(path.string(), 0, std::string("bad header ") + key);
    return *v;
  };
  file.result.visited_count = header_u64("visited");
  file.result.fetch_count_crawl = header_u64("fetch_count_crawl");
  file.result.fetch_count_score = header_u64("fetch_count_score");
  if (header_u64("crawled") != file.result.crawled.size())
    throw ParseError(path.string(), 0, "checkpoint members disagree with the crawled count");
  auto term = file.header.find("terminated_by");
  file.result.terminated_by = (term != file.header.end() && term->second == "frontier_exhausted")
                                  ? Termination::frontier_exhausted
                                  : Termination::budget_reached;
  return file;
}

/// Selection file: one node id per line, ascending.
inline void write_selection(std::span<const NodeId> selected, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write selection: " + path.string());
  for (NodeId u : selected) out << u << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<NodeId> read_selection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open selection: " + path.string());
  std::vector<NodeId> ids;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const auto id = parse_u64(sv);
    if (!id) throw ParseError(path.string(), lineno, "expected one node id per line");
    ids.push_back(*id);
  }
  return ids;
}

}  // namespace crawlsim
