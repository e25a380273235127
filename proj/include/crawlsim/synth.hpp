#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/scorers.hpp"

namespace crawlsim {

// Maps planted quality to the generated token distribution: each document is
// tokens_per_doc draws, each from the clean vocabulary with probability equal
// to the node's quality, otherwise from the disjoint noisy vocabulary.
struct VocabProfile {
  std::uint32_t clean_vocab = 200;
  std::uint32_t noisy_vocab = 200;
  std::uint32_t tokens_per_doc = 100;
};

struct SynthConfig {
  std::uint64_t node_count = 0;
  double out_degree_mean = 8.0;
  double attachment_exponent = 1.0;
  double quality_link_correlation = 0.0;  // probability a link is redrawn quality-similar
  VocabProfile vocab;
  std::uint64_t rng_seed = 0;
};

// Ground-truth pretraining influence per node, Beta(2,5) so high quality is scarce.
struct PlantedTruth {
  std::vector<double> quality;
};

struct SynthCorpus {
  WebGraph graph;
  DocumentStore store;
  PlantedTruth truth;
};

namespace detail {

// Fenwick tree over attachment weights; supports prefix-sum sampling in
// O(log n) so preferential attachment stays fast at any exponent.
class FenwickTree {
 public:
  explicit FenwickTree(std::size_t n) : tree_(n + 1, 0.0), size_(n) {}

  void add(std::size_t i, double delta) {
    for (++i; i <= size_; i += i & (0 - i)) tree_[i] += delta;
  }

  double total() const {
    double acc = 0.0;
    for (std::size_t i = size_; i > 0; i -= i & (0 - i)) acc += tree_[i];
    return acc;
  }

  // Smallest index whose prefix sum exceeds mass; mass must lie in [0, total).
  std::size_t sample(double mass) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while ((step << 1) <= size_) step <<= 1;
    for (; step > 0; step >>= 1) {
      if (pos + step <= size_ && tree_[pos + step] <= mass) {
        pos += step;
        mass -= tree_[pos];
      }
    }
    return pos;  // 0-based
  }

 private:
  std::vector<double> tree_;
  std::size_t size_;
};

}  // namespace detail

/// Deterministic synthetic web corpus: preferential-attachment link structure
/// (heavy-tailed indegrees, independent of quality by construction), with
/// each link redrawn toward a quality-similar node with probability
/// quality_link_correlation, and document text sampled from a two-vocabulary
/// mixture weighted by the node's planted quality.
inline SynthCorpus generate(const SynthConfig& config) {
  if (config.node_count < 2) throw ConfigError("node_count must be >= 2");
  if (!(config.out_degree_mean > 0.0)) throw ConfigError("out_degree_mean must be positive");
  if (config.attachment_exponent < 0.0) throw ConfigError("attachment_exponent must be >= 0");
  if (config.quality_link_correlation < 0.0 || config.quality_link_correlation > 1.0)
    throw ConfigError("quality_link_correlation must lie in [0, 1]");
  if (config.vocab.clean_vocab == 0 || config.vocab.noisy_vocab == 0 ||
      config.vocab.tokens_per_doc == 0)
    throw ConfigError("vocab profile fields must be >= 1");

  const std::uint64_t n = config.node_count;
  SynthCorpus corpus;

  Rng quality_rng(hash_mix(config.rng_seed, 1));
  corpus.truth.quality.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    corpus.truth.quality.push_back(quality_rng.next_beta_int(2, 5));
  const std::vector<double>& quality = corpus.truth.quality;

  // Rank order by quality; the similar-quality redraw picks within a narrow
  // window of this order.
  std::vector<NodeId> by_quality(n);
  std::iota(by_quality.begin(), by_quality.end(), NodeId{0});
  std::sort(by_quality.begin(), by_quality.end(), [&](NodeId a, NodeId b) {
    if (quality[a] != quality[b]) return quality[a] < quality[b];
    return a < b;
  });
  std::vector<std::uint64_t> quality_pos(n);
  for (std::uint64_t i = 0; i < n; ++i) quality_pos[by_quality[i]] = i;
  const std::uint64_t window = std::max<std::uint64_t>(1, n / 100);

  Rng graph_rng(hash_mix(config.rng_seed, 2));
  detail::FenwickTree attachment(n);
  std::vector<std::uint64_t> inlinks(n, 0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(static_cast<double>(n) * config.out_degree_mean * 1.2));

  const auto weight = [&](std::uint64_t indeg) {
    return std::pow(static_cast<double>(indeg + 1), config.attachment_exponent);
  };

  for (NodeId i = 0; i < n; ++i) {
    const std::uint64_t fanout = std::max<std::uint64_t>(1, graph_rng.next_poisson(config.out_degree_mean));
    for (std::uint64_t e = 0; e < fanout; ++e) {
      NodeId target = i;
      if (graph_rng.next_double() < config.quality_link_correlation) {
        // Quality-similar target: a nearby rank in the quality order.
        for (int attempt = 0; attempt < 8 && target == i; ++attempt) {
          const auto raw = static_cast<std::int64_t>(graph_rng.next_below(2 * window));
          const std::int64_t offset = raw < static_cast<std::int64_t>(window)
                                          ? raw - static_cast<std::int64_t>(window)
                                          : raw - static_cast<std::int64_t>(window) + 1;
          const auto pos = std::clamp<std::int64_t>(
              static_cast<std::int64_t>(quality_pos[i]) + offset, 0,
              static_cast<std::int64_t>(n) - 1);
          target = by_quality[static_cast<std::uint64_t>(pos)];
        }
        if (target == i) continue;
      } else {
        // Preferential attachment among already-born nodes.
        if (i == 0) continue;
        const double total = attachment.total();
        target = attachment.sample(graph_rng.next_double() * total);
      }
      edges.emplace_back(i, target);
      if (target < i) attachment.add(target, weight(inlinks[target] + 1) - weight(inlinks[target]));
      ++inlinks[target];
    }
    attachment.add(i, weight(inlinks[i]));  // node i joins the attachment pool
  }

  corpus.graph = WebGraph::from_edges(n, std::move(edges));

  Rng text_rng(hash_mix(config.rng_seed, 3));
  for (NodeId i = 0; i < n; ++i) {
    std::string text;
    text.reserve(config.vocab.tokens_per_doc * 6);
    for (std::uint32_t t = 0; t < config.vocab.tokens_per_doc; ++t) {
      if (t > 0) text.push_back(' ');
      if (text_rng.next_double() < quality[i]) {
        text += "clean";
        text += std::to_string(text_rng.next_below(config.vocab.clean_vocab));
      } else {
        text += "noise";
        text += std::to_string(text_rng.next_below(config.vocab.noisy_vocab));
      }
    }
    corpus.store.insert(Document{i, "synth://node/" + std::to_string(i), std::move(text)});
  }
  return corpus;
}

struct EmittedFiles {
  std::filesystem::path edges;
  std::filesystem::path documents;
  std::filesystem::path truth;
};

/// Writes edges.tsv, docs.jsonl, and truth.tsv in the standard ingestion
/// formats; re-ingestion round-trips exactly.
inline EmittedFiles emit(const SynthCorpus& corpus, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());

  EmittedFiles files;
  files.edges = out_dir / "edges.tsv";
  files.documents = out_dir / "docs.jsonl";
  files.truth = out_dir / "truth.tsv";

  write_edges(corpus.graph, files.edges);
  write_documents(corpus.store, files.documents);

  ScoreTable truth_table;
  for (NodeId u = 0; u < corpus.truth.quality.size(); ++u)
    truth_table.set(u, corpus.truth.quality[u]);
  save_score_table(truth_table, files.truth);
  return files;
}

/// Uniform sample of crawl seeds from the mid-quality band, so runs start
/// neither inside nor hopelessly far from the oracle set.
inline std::vector<NodeId> sample_mid_quality_seeds(const PlantedTruth& truth, std::uint64_t count,
                                                    std::uint64_t rng_seed, double lo = 0.3,
                                                    double hi = 0.7) {
  std::vector<NodeId> eligible;
  for (NodeId u = 0; u < truth.quality.size(); ++u)
    if (truth.quality[u] >= lo && truth.quality[u] <= hi) eligible.push_back(u);
  if (eligible.size() < count)
    throw ConfigError("only " + std::to_string(eligible.size()) + " nodes in quality band [" +
                      format_double(lo) + ", " + format_double(hi) + "], need " +
                      std::to_string(count));
  Rng rng(rng_seed);
  rng.partial_shuffle(eligible, count);
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

}  // namespace crawlsim
