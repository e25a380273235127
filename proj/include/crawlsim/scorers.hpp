#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

inline constexpr double kScoreSentinel = -std::numeric_limits<double>::infinity();

// Sparse L2-normalized feature vector; entries sorted by index, deduplicated.
using FeatureVector = std::vector<std::pair<std::uint32_t, double>>;

namespace detail {

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// FNV-1a over the n-gram's tokens with a separator byte between them.
inline std::uint64_t hash_ngram(std::span<const std::string> tokens, std::size_t first,
                                std::size_t order) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t k = 0; k < order; ++k) {
    if (k > 0) h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(tokens[first + k], h);
  }
  return h;
}

}  // namespace detail

// Whitespace tokenization with ASCII lowercase folding.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc == ' ' || uc == '\t' || uc == '\n' || uc == '\r' || uc == '\v' || uc == '\f') {
      if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
      continue;
    }
    current.push_back(uc >= 'A' && uc <= 'Z' ? static_cast<char>(uc - 'A' + 'a') : c);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Hashed bag of token n-grams, L2-normalized. Indices land in [0, hash_dim)
/// via 64-bit FNV-1a masked to hash_dim - 1; hash_dim must be a power of two.
inline FeatureVector featurize(std::string_view text, std::uint32_t hash_dim,
                               std::span<const unsigned> ngram_orders) {
  if (!detail::is_power_of_two(hash_dim)) throw ConfigError("hash_dim must be a power of two");
  if (ngram_orders.empty()) throw ConfigError("ngram_orders must be non-empty");

  const std::vector<std::string> tokens = tokenize(text);
  std::unordered_map<std::uint32_t, double> counts;
  for (unsigned order : ngram_orders) {
    if (order == 0) throw ConfigError("ngram order must be >= 1");
    if (tokens.size() < order) continue;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      const auto idx = static_cast<std::uint32_t>(detail::hash_ngram(tokens, i, order) & (hash_dim - 1));
      counts[idx] += 1.0;
    }
  }

  FeatureVector features(counts.begin(), counts.end());
  std::sort(features.begin(), features.end());
  double norm_sq = 0.0;
  for (const auto& [idx, v] : features) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [idx, v] : features) v *= inv;
  }
  return features;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct TrainingMeta {
  std::uint32_t epochs = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Linear classifier over hashed n-gram features; scores are sigmoid(w.x + b).
struct TrainedClassifier {
  std::uint32_t hash_dim = 0;
  std::vector<double> weights;  // hash_dim entries
  double bias = 0.0;
  std::vector<unsigned> ngram_orders = {1, 2};
  TrainingMeta training_meta;

  double score_features(const FeatureVector& features) const {
    double z = bias;
    for (const auto& [idx, v] : features) z += weights[idx] * v;
    return sigmoid(z);
  }

  double score_text(std::string_view text) const {
    return score_features(featurize(text, hash_dim, ngram_orders));
  }
};

struct TrainConfig {
  std::uint32_t hash_dim = 1u << 16;
  std::vector<unsigned> ngram_orders = {1, 2};
  std::uint32_t epochs = 5;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Logistic loss, plain SGD, fixed epoch count. The per-epoch example order
/// is a seeded Fisher-Yates shuffle, so training is bit-reproducible.
inline TrainedClassifier train_classifier(std::span<const Document> positives,
                                          std::span<const Document> negatives,
                                          const TrainConfig& config) {
  if (positives.empty() || negatives.empty())
    throw ConfigError("training requires at least one positive and one negative document");
  if (!detail::is_power_of_two(config.hash_dim)) throw ConfigError("hash_dim must be a power of two");
  if (config.ngram_orders.empty()) throw ConfigError("ngram_orders must be non-empty");

  struct Example {
    FeatureVector features;
    double label;
  };
  std::vector<Example> examples;
  examples.reserve(positives.size() + negatives.size());
  for (const Document& d : positives)
    examples.push_back({featurize(d.text, config.hash_dim, config.ngram_orders), 1.0});
  for (const Document& d : negatives)
    examples.push_back({featurize(d.text, config.hash_dim, config.ngram_orders), 0.0});

  TrainedClassifier clf;
  clf.hash_dim = config.hash_dim;
  clf.ngram_orders = config.ngram_orders;
  clf.weights.assign(config.hash_dim, 0.0);
  clf.training_meta = {config.epochs, config.learning_rate, config.seed};

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(hash_mix(config.seed, 0x747261696eULL));
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const Example& ex = examples[i];
      const double p = clf.score_features(ex.features);
      const double g = config.learning_rate * (p - ex.label);
      for (const auto& [idx, v] : ex.features) clf.weights[idx] -= g * v;
      clf.bias -= g;
    }
  }
  return clf;
}

// ---------------------------------------------------------------------------
// Score table

/// NodeId -> score map for injecting externally computed scores.
class ScoreTable {
 public:
  void set(NodeId u, double score) { scores_[u] = score; }

  double at(NodeId u) const {
    auto it = scores_.find(u);
    if (it == scores_.end())
      throw LookupError("score table has no entry for node " + std::to_string(u));
    return it->second;
  }

  const double* find(NodeId u) const noexcept {
    auto it = scores_.find(u);
    return it == scores_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return scores_.size(); }
  std::uint64_t duplicate_count = 0;  // last-wins collisions seen during load

  std::vector<NodeId> ids_ascending() const {
    std::vector<NodeId> ids;
    ids.reserve(scores_.size());
    for (const auto& [u, s] : scores_) ids.push_back(u);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  std::unordered_map<NodeId, double> scores_;
};

/// Score table file: `id<TAB>score` per line. Duplicate ids: last wins,
/// counted in duplicate_count.
inline ScoreTable load_score_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open score table: " + file.string());

  ScoreTable table;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;

    const std::size_t tab = sv.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError(file.string(), lineno, "expected `id<TAB>score`");
    const auto id = parse_u64(sv.substr(0, tab));
    const auto score = parse_double(sv.substr(tab + 1));
    if (!id || !score)
      throw ParseError(file.string(), lineno, "expected `id<TAB>score`");
    if (table.find(*id)) ++table.duplicate_count;
    table.set(*id, *score);
  }
  return table;
}

inline void save_score_table(const ScoreTable& table, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write score table: " + file.string());
  for (NodeId u : table.ids_ascending()) out << u << '\t' << format_double(table.at(u)) << '\n';
  if (!out) throw IoError("write failed: " + file.string());
}

// ---------------------------------------------------------------------------
// Policy

struct ClassifierPolicy {
  TrainedClassifier model;
};
struct TablePolicy {
  ScoreTable table;
};
struct IndegreePolicy {
  const WebGraph* graph = nullptr;
};
struct RandomPolicy {
  std::uint64_t seed = 0;
};

/// The pluggable scoring function: a trained classifier, an injected table,
/// global indegree, or seeded random.
using ScorerPolicy = std::variant<ClassifierPolicy, TablePolicy, IndegreePolicy, RandomPolicy>;

inline bool requires_content(const ScorerPolicy& policy) {
  return std::holds_alternative<ClassifierPolicy>(policy);
}

inline std::string_view policy_kind(const ScorerPolicy& policy) {
  switch (policy.index()) {
    case 0: return "classifier";
    case 1: return "table";
    case 2: return "indegree";
    default: return "random";
  }
}

// Pure function of (seed, u); order-independent and replayable.
inline double random_score(std::uint64_t seed, NodeId u) {
  return to_unit_interval(hash_mix(seed, u));
}

inline double score_document(const ScorerPolicy& policy, NodeId u, const Document* doc) {
  if (const auto* clf = std::get_if<ClassifierPolicy>(&policy)) {
    if (!doc) throw ContentMissingError("classifier scoring needs content for node " + std::to_string(u));
    return clf->model.score_text(doc->text);
  }
  if (const auto* table = std::get_if<TablePolicy>(&policy)) return table->table.at(u);
  if (const auto* deg = std::get_if<IndegreePolicy>(&policy)) {
    if (!deg->graph) throw ConfigError("indegree policy has no graph");
    return static_cast<double>(deg->graph->indegree(u));
  }
  return random_score(std::get<RandomPolicy>(policy).seed, u);
}

// ---------------------------------------------------------------------------
// Classifier file: header `CW4L-CLF v1 hash_dim=<d> orders=<..> bias=<b>`,
// then one weight per line. Text keeps the files diffable.

inline void save_classifier(const TrainedClassifier& clf, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write classifier: " + file.string());
  out << "CW4L-CLF v1 hash_dim=" << clf.hash_dim << " orders=";
  for (std::size_t i = 0; i < clf.ngram_orders.size(); ++i) {
    if (i > 0) out << ',';
    out << clf.ngram_orders[i];
  }
  out << " bias=" << format_double(clf.bias) << '\n';
  for (double w : clf.weights) out << format_double(w) << '\n';
  if (!out) throw IoError("write failed: " + file.string());
}

inline TrainedClassifier load_classifier(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open classifier: " + file.string());

  std::string header;
  if (!std::getline(in, header)) throw ParseError(file.string(), 1, "missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  TrainedClassifier clf;
  const auto fields = split(header, ' ');
  if (fields.size() != 5 || fields[0] != "CW4L-CLF" || fields[1] != "v1" ||
      !fields[2].starts_with("hash_dim=") || !fields[3].starts_with("orders=") ||
      !fields[4].starts_with("bias="))
    throw ParseError(file.string(), 1, "bad classifier header");

  const auto dim = parse_u64(fields[2].substr(9));
  if (!dim || !detail::is_power_of_two(*dim) || *dim > (1ull << 30))
    throw ParseError(file.string(), 1, "bad hash_dim");
  clf.hash_dim = static_cast<std::uint32_t>(*dim);

  clf.ngram_orders.clear();
  for (std::string_view part : split(fields[3].substr(7), ',')) {
    const auto order = parse_u64(part);
    if (!order || *order == 0) throw ParseError(file.string(), 1, "bad orders list");
    clf.ngram_orders.push_back(static_cast<unsigned>(*order));
  }

  const auto bias = parse_double(fields[4].substr(5));
  if (!bias) throw ParseError(file.string(), 1, "bad bias");
  clf.bias = *bias;

  clf.weights.reserve(clf.hash_dim);
  std::string line;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty()) continue;
    const auto w = parse_double(sv);
    if (!w || !std::isfinite(*w)) throw ParseError(file.string(), lineno, "bad weight");
    clf.weights.push_back(*w);
  }
  if (clf.weights.size() != clf.hash_dim)
    throw ParseError(file.string(), lineno,
                     "expected " + std::to_string(clf.hash_dim) + " weights, found " +
                         std::to_string(clf.weights.size()));
  return clf;
}

}  // namespace crawlsim
