#pragma once

// Naive re-implementation of the crawl loop, used only as a test oracle.
// A flat vector re-sorted on every dequeue stands in for the priority queue
// and std::set for the visited set; no frontier or engine code is shared.
// Mirrors the engine's documented bindings: iteration 0 fetches the seeds,
// outlink targets are deduplicated and enqueued in ascending id order, the
// final dequeue is truncated so the crawled count lands exactly on budget,
// and the whole batch is scored even when it fills the budget.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "crawlsim/graph_store.hpp"

namespace testutil {

struct ReferenceOutcome {
  std::vector<crawlsim::NodeId> crawled;
  std::uint64_t visited_count = 0;
  bool exhausted = false;
};

inline ReferenceOutcome reference_crawl(const crawlsim::WebGraph& graph,
                                        const std::vector<crawlsim::NodeId>& seeds,
                                        std::uint64_t total_pages, std::uint64_t per_iteration,
                                        const std::function<double(crawlsim::NodeId)>& score) {
  struct Pending {
    crawlsim::NodeId node;
    double score;
    std::uint64_t seq;
  };

  std::set<crawlsim::NodeId> visited(seeds.begin(), seeds.end());
  std::vector<Pending> pending;
  std::uint64_t seq = 0;

  ReferenceOutcome out;
  std::vector<crawlsim::NodeId> sources = seeds;

  while (true) {
    if (out.crawled.size() >= total_pages) break;
    if (sources.empty()) {
      out.exhausted = true;
      break;
    }

    for (crawlsim::NodeId u : sources) out.crawled.push_back(u);

    std::set<crawlsim::NodeId> targets;
    for (crawlsim::NodeId u : sources)
      for (crawlsim::NodeId v : graph.outlinks(u)) targets.insert(v);
    for (crawlsim::NodeId v : targets) {
      if (visited.insert(v).second) pending.push_back(Pending{v, score(v), seq++});
    }

    if (out.crawled.size() >= total_pages) break;

    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.seq < b.seq;
    });
    const std::uint64_t want =
        std::min<std::uint64_t>(per_iteration, total_pages - out.crawled.size());
    sources.clear();
    for (std::uint64_t i = 0; i < want && i < pending.size(); ++i)
      sources.push_back(pending[i].node);
    pending.erase(pending.begin(),
                  pending.begin() + static_cast<std::ptrdiff_t>(sources.size()));
  }

  out.visited_count = visited.size();
  return out;
}

}  // namespace testutil
