#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "crawlsim/crawl.hpp"
#include "crawlsim/errors.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/scorers.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

/// Average ranks (1-based); tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });

  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of positions i..j, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation: Pearson correlation of average-tie ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw UndefinedCorrelationError("length mismatch: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
  if (x.size() < 2) throw UndefinedCorrelationError("need at least two points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw UndefinedCorrelationError("non-finite input");

  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;  // ranks always average to this

  double num = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    num += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0)
    throw UndefinedCorrelationError("constant input has no rank variance");
  return std::clamp(num / std::sqrt(var_x * var_y), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// PageRank

/// Power iteration with uniform start and uniform redistribution of dangling
/// mass. Per-node contributions are summed in sorted value order, so the
/// output is bit-identical under any relabeling of the nodes and independent
/// of scheduling.
inline std::vector<double> pagerank(const WebGraph& graph, double damping = 0.85,
                                    std::uint64_t max_iterations = 100, double tol = 1e-10) {
  const std::uint64_t n = graph.node_count();
  if (n == 0) throw ConfigError("pagerank needs a non-empty graph");
  if (!(damping > 0.0) || !(damping < 1.0)) throw ConfigError("damping must lie in (0, 1)");

  // Transpose for gather-style iteration.
  std::vector<std::uint64_t> in_offsets(n + 1, 0);
  for (NodeId v = 0; v < n; ++v) in_offsets[v + 1] = in_offsets[v] + graph.indegree(v);
  std::vector<NodeId> in_sources(graph.edge_count());
  {
    std::vector<std::uint64_t> cursor(in_offsets.begin(), in_offsets.end() - 1);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v : graph.outlinks(u)) in_sources[cursor[v]++] = u;
  }

  std::vector<NodeId> dangling;
  for (NodeId u = 0; u < n; ++u)
    if (graph.outdegree(u) == 0) dangling.push_back(u);

  const auto sorted_sum = [](std::vector<double>& buf) {
    std::sort(buf.begin(), buf.end());
    double acc = 0.0;
    for (double v : buf) acc += v;
    return acc;
  };

  std::vector<double> cur(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  std::vector<double> share(n, 0.0);
  std::vector<double> buf;

  for (std::uint64_t iter = 0; iter < max_iterations; ++iter) {
    for (NodeId u = 0; u < n; ++u) {
      const std::uint64_t deg = graph.outdegree(u);
      share[u] = deg == 0 ? 0.0 : cur[u] / static_cast<double>(deg);
    }
    buf.clear();
    for (NodeId u : dangling) buf.push_back(cur[u]);
    const double dangling_mass = sorted_sum(buf);
    const double base =
        (1.0 - damping) / static_cast<double>(n) + damping * dangling_mass / static_cast<double>(n);

    for (NodeId v = 0; v < n; ++v) {
      buf.clear();
      for (std::uint64_t k = in_offsets[v]; k < in_offsets[v + 1]; ++k)
        buf.push_back(share[in_sources[k]]);
      next[v] = base + damping * sorted_sum(buf);
    }

    buf.clear();
    for (NodeId v = 0; v < n; ++v) buf.push_back(std::fabs(next[v] - cur[v]));
    const double delta = sorted_sum(buf);
    cur.swap(next);
    if (delta < tol) break;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Coverage

struct CoveragePoint {
  std::uint64_t crawled_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double recall_upper_bound = 0.0;  // always crawling oracle documents first
};

struct CoverageCurve {
  std::vector<CoveragePoint> points;
};

/// Precision/recall of the oracle set along the crawl's checkpoints.
inline CoverageCurve coverage_curve(const CrawlResult& result, std::span<const NodeId> oracle) {
  if (oracle.empty()) throw ConfigError("oracle set is empty");
  if (result.checkpoints.empty()) throw ConfigError("crawl result has no checkpoints");

  const std::unordered_set<NodeId> oracle_set(oracle.begin(), oracle.end());
  const double oracle_size = static_cast<double>(oracle_set.size());

  CoverageCurve curve;
  std::uint64_t hits = 0;
  for (const Checkpoint& cp : result.checkpoints) {
    for (NodeId u : cp.new_members)
      if (oracle_set.count(u)) ++hits;
    CoveragePoint p;
    p.crawled_count = cp.crawled_count;
    p.precision = static_cast<double>(hits) / static_cast<double>(cp.crawled_count);
    p.recall = static_cast<double>(hits) / oracle_size;
    p.recall_upper_bound =
        std::min(static_cast<double>(cp.crawled_count), oracle_size) / oracle_size;
    curve.points.push_back(p);
  }
  return curve;
}

inline CoverageCurve coverage_curve(const CrawlResult& result, const SelectionResult& oracle) {
  return coverage_curve(result, std::span<const NodeId>(oracle.selected));
}

inline void write_coverage_csv(const CoverageCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write coverage curve: " + path.string());
  out << "crawled_count,precision,recall,recall_upper_bound\n";
  for (const CoveragePoint& p : curve.points)
    out << p.crawled_count << ',' << format_double(p.precision) << ',' << format_double(p.recall)
        << ',' << format_double(p.recall_upper_bound) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Hop-neighborhood score correlation

/// Correlation between a node's own score and the mean score over its hop-1
/// or hop-2 outlink set (deduplicated, excluding the node itself). Nodes are
/// drawn from a seeded permutation until `sample` with non-empty
/// neighborhoods are found.
inline double hop_score_correlation(const WebGraph& graph, const ScoreTable& scores, unsigned hop,
                                    std::uint64_t sample, std::uint64_t rng_seed) {
  if (hop != 1 && hop != 2) throw ConfigError("hop must be 1 or 2");
  if (sample < 2) throw ConfigError("sample must be >= 2");

  std::vector<NodeId> candidates(graph.node_count());
  std::iota(candidates.begin(), candidates.end(), NodeId{0});
  Rng rng(rng_seed);
  rng.shuffle(candidates);

  std::vector<double> own, neighborhood;
  std::vector<NodeId> hop_set;
  for (NodeId u : candidates) {
    if (own.size() >= sample) break;
    hop_set.clear();
    if (hop == 1) {
      for (NodeId v : graph.outlinks(u)) hop_set.push_back(v);
    } else {
      for (NodeId v : graph.outlinks(u))
        for (NodeId w : graph.outlinks(v)) hop_set.push_back(w);
    }
    std::sort(hop_set.begin(), hop_set.end());
    hop_set.erase(std::unique(hop_set.begin(), hop_set.end()), hop_set.end());
    std::erase(hop_set, u);
    if (hop_set.empty()) continue;

    double acc = 0.0;
    for (NodeId v : hop_set) acc += scores.at(v);
    own.push_back(scores.at(u));
    neighborhood.push_back(acc / static_cast<double>(hop_set.size()));
  }

  if (own.size() < 2)
    throw UndefinedCorrelationError("fewer than two nodes with a non-empty hop set");
  return spearman(own, neighborhood);
}

// ---------------------------------------------------------------------------
// Efficiency

struct EfficiencyReport {
  double crawled_ratio = 0.0;  // |crawled A| / |crawled B|
  double visited_ratio = 0.0;  // |visited A| / |visited B|
  std::uint64_t crawled_a = 0, visited_a = 0, fetch_crawl_a = 0, fetch_score_a = 0;
  std::uint64_t crawled_b = 0, visited_b = 0, fetch_crawl_b = 0, fetch_score_b = 0;
};

inline EfficiencyReport efficiency_report(const CrawlResult& run_a, const CrawlResult& run_b) {
  if (run_b.crawled.empty() || run_b.visited_count == 0)
    throw ConfigError("efficiency report needs non-zero denominators");
  EfficiencyReport r;
  r.crawled_a = run_a.crawled.size();
  r.visited_a = run_a.visited_count;
  r.fetch_crawl_a = run_a.fetch_count_crawl;
  r.fetch_score_a = run_a.fetch_count_score;
  r.crawled_b = run_b.crawled.size();
  r.visited_b = run_b.visited_count;
  r.fetch_crawl_b = run_b.fetch_count_crawl;
  r.fetch_score_b = run_b.fetch_count_score;
  r.crawled_ratio = static_cast<double>(r.crawled_a) / static_cast<double>(r.crawled_b);
  r.visited_ratio = static_cast<double>(r.visited_a) / static_cast<double>(r.visited_b);
  return r;
}

inline void write_efficiency_csv(const EfficiencyReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write efficiency report: " + path.string());
  out << "crawled_ratio,visited_ratio,crawled_a,visited_a,fetch_crawl_a,fetch_score_a,"
         "crawled_b,visited_b,fetch_crawl_b,fetch_score_b\n";
  out << format_double(r.crawled_ratio) << ',' << format_double(r.visited_ratio) << ','
      << r.crawled_a << ',' << r.visited_a << ',' << r.fetch_crawl_a << ',' << r.fetch_score_a
      << ',' << r.crawled_b << ',' << r.visited_b << ',' << r.fetch_crawl_b << ','
      << r.fetch_score_b << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace crawlsim
