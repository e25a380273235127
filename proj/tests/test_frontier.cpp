#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <limits>
#include <vector>

#include "crawlsim/frontier.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/scorers.hpp"

using namespace crawlsim;

TEST_CASE("seeds start visited but not queued") {
  const std::vector<NodeId> seeds{0, 1, 2};
  Frontier f(seeds);
  CHECK(f.visited_count() == 3);
  CHECK(f.queue_size() == 0);

  Frontier empty{};
  CHECK(empty.visited_count() == 0);
  CHECK(empty.queue_size() == 0);

  const std::vector<NodeId> dup{0, 0};
  CHECK_THROWS_AS(Frontier(std::span<const NodeId>(dup)), ConfigError);
}

TEST_CASE("enqueue_if_new honors the visited set") {
  const std::vector<NodeId> seeds{5};
  Frontier f(seeds);

  CHECK(f.enqueue_if_new(1, 0.4));
  CHECK_FALSE(f.enqueue_if_new(1, 0.9));  // already visited, never rescored
  CHECK_FALSE(f.enqueue_if_new(5, 1.0));  // seeds are pre-visited
  CHECK(f.enqueue_if_new(2, 0.4));        // equal scores both live in the queue
  CHECK(f.queue_size() == 2);
  CHECK(f.visited_count() == 3);
}

TEST_CASE("dequeue_top orders by score then insertion") {
  Frontier f;
  f.enqueue_if_new(10, 0.9);
  f.enqueue_if_new(11, 0.5);
  f.enqueue_if_new(12, 0.7);
  CHECK(f.dequeue_top(2) == std::vector<NodeId>{10, 12});
  CHECK(f.queue_size() == 1);
  CHECK(f.visited_count() == 3);  // dequeued nodes stay visited

  Frontier ties;
  ties.enqueue_if_new(3, 0.5);
  ties.enqueue_if_new(1, 0.5);
  CHECK(ties.dequeue_top(2) == std::vector<NodeId>{3, 1});

  Frontier empty;
  CHECK(empty.dequeue_top(10).empty());
}

TEST_CASE("sentinel scores are legal and dequeue last") {
  Frontier f;
  f.enqueue_if_new(1, kScoreSentinel);
  f.enqueue_if_new(2, 0.0);
  f.enqueue_if_new(3, kScoreSentinel);
  CHECK(f.dequeue_top(3) == std::vector<NodeId>{2, 1, 3});
}

TEST_CASE("quiescent dequeues yield non-increasing scores") {
  Rng rng(99);
  Frontier f;
  for (NodeId v = 0; v < 200; ++v) f.enqueue_if_new(v, rng.next_double());
  double last = std::numeric_limits<double>::infinity();
  // recover each node's score via a parallel map for the check
  Rng replay(99);
  std::vector<double> score(200);
  for (NodeId v = 0; v < 200; ++v) score[v] = replay.next_double();
  while (true) {
    auto batch = f.dequeue_top(7);
    if (batch.empty()) break;
    for (NodeId v : batch) {
      REQUIRE(score[v] <= last);
      last = score[v];
    }
  }
}

// Reference model: pending list sorted by (-score, seq) on demand.
TEST_CASE("random operation sequences match the brute-force reference") {
  Rng rng(20240601);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint64_t universe = 2 + rng.next_below(60);
    Frontier f;
    struct Entry {
      NodeId node;
      double score;
      std::uint64_t seq;
    };
    std::vector<Entry> pending;
    std::vector<bool> visited(universe, false);
    std::uint64_t seq = 0;
    std::vector<NodeId> all_dequeued;

    const std::uint64_t ops = 50 + rng.next_below(200);
    for (std::uint64_t op = 0; op < ops; ++op) {
      if (rng.next_below(3) != 0) {
        const NodeId v = rng.next_below(universe);
        const double s = static_cast<double>(rng.next_below(8));  // coarse scores force ties
        const bool enq = f.enqueue_if_new(v, s);
        REQUIRE(enq == !visited[v]);
        if (!visited[v]) {
          visited[v] = true;
          pending.push_back({v, s, seq++});
        }
      } else {
        const std::size_t n = 1 + rng.next_below(5);
        const auto got = f.dequeue_top(n);
        std::stable_sort(pending.begin(), pending.end(), [](const Entry& a, const Entry& b) {
          if (a.score != b.score) return a.score > b.score;
          return a.seq < b.seq;
        });
        std::vector<NodeId> expected;
        for (std::size_t i = 0; i < n && i < pending.size(); ++i) expected.push_back(pending[i].node);
        REQUIRE(got == expected);
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(expected.size()));
        for (NodeId v : got) all_dequeued.push_back(v);
      }
    }

    // at-most-once across the whole history
    std::sort(all_dequeued.begin(), all_dequeued.end());
    CHECK(std::adjacent_find(all_dequeued.begin(), all_dequeued.end()) == all_dequeued.end());

    // |visited| == seeds + successful enqueues (no seeds here)
    const auto enqueued = static_cast<std::size_t>(std::count(visited.begin(), visited.end(), true));
    CHECK(f.visited_count() == enqueued);
  }
}
