#pragma once

#include <cassert>
#include <cstdint>
#include <queue>
#include <span>
#include <unordered_set>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/graph_store.hpp"

namespace crawlsim {

struct ScoredUrl {
  NodeId node = 0;
  double score = 0.0;
  std::uint64_t seq = 0;  // insertion order, strictly increasing per frontier
};

/// Max-priority queue over (score desc, seq asc) plus the visited set.
/// A node is scored and enqueued at most once: enqueue implies membership in
/// the visited set, and visited nodes are never rescored. Seeds start visited
/// but not queued. Scores are immutable after enqueue (no decrease-key).
class Frontier {
 public:
  Frontier() = default;

  explicit Frontier(std::span<const NodeId> seeds) {
    for (NodeId s : seeds) {
      if (!visited_.insert(s).second)
        throw ConfigError("duplicate seed node " + std::to_string(s));
    }
    seed_count_ = seeds.size();
  }

  // True if v was new: v enters both the queue and the visited set.
  // A -inf score is legal (contentless pages); it sits at the back of the
  // queue so accounting of the visited set stays faithful.
  bool enqueue_if_new(NodeId v, double score) {
    assert(!(score != score));  // NaN has no place in a priority queue
    if (!visited_.insert(v).second) return false;
    queue_.push(ScoredUrl{v, score, next_seq_++});
    return true;
  }

  // Up to n nodes, best score first, ties broken by earlier insertion.
  // Dequeued nodes leave the queue but remain visited. An empty result means
  // the frontier is exhausted.
  std::vector<NodeId> dequeue_top(std::size_t n) {
    std::vector<NodeId> out;
    out.reserve(std::min(n, queue_.size()));
    while (out.size() < n && !queue_.empty()) {
      out.push_back(queue_.top().node);
      queue_.pop();
    }
    return out;
  }

  bool is_visited(NodeId v) const { return visited_.count(v) != 0; }
  std::size_t queue_size() const noexcept { return queue_.size(); }
  std::size_t visited_count() const noexcept { return visited_.size(); }
  std::size_t seed_count() const noexcept { return seed_count_; }

 private:
  struct Worse {
    bool operator()(const ScoredUrl& a, const ScoredUrl& b) const {
      if (a.score != b.score) return a.score < b.score;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<ScoredUrl, std::vector<ScoredUrl>, Worse> queue_;
  std::unordered_set<NodeId> visited_;
  std::uint64_t next_seq_ = 0;
  std::size_t seed_count_ = 0;
};

inline Frontier init_frontier(std::span<const NodeId> seeds) { return Frontier(seeds); }

}  // namespace crawlsim
