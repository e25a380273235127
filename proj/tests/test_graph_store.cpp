#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"
#include "test_util.hpp"

using namespace crawlsim;
using testutil::TempDir;

TEST_CASE("ingest_edges builds adjacency and indegrees") {
  TempDir dir("edges");
  testutil::write_file(dir.file("g.tsv"), "0\t1\n0\t2\n1\t2\n");
  const WebGraph g = ingest_edges(dir.file("g.tsv"));

  REQUIRE(g.node_count() == 3);
  REQUIRE(g.edge_count() == 3);
  // hand count: node 1 <- {0}, node 2 <- {0, 1}
  CHECK(g.indegree(0) == 0);
  CHECK(g.indegree(1) == 1);
  CHECK(g.indegree(2) == 2);
}

TEST_CASE("ingest_edges empty file") {
  TempDir dir("edges");
  testutil::write_file(dir.file("g.tsv"), "");
  const WebGraph g = ingest_edges(dir.file("g.tsv"));
  CHECK(g.node_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("ingest_edges drops self-loops and duplicates") {
  TempDir dir("edges");
  testutil::write_file(dir.file("g.tsv"), "0\t1\n0\t1\n1\t1\n");
  const WebGraph g = ingest_edges(dir.file("g.tsv"));
  CHECK(g.edge_count() == 1);
  CHECK(std::vector<NodeId>(g.outlinks(0).begin(), g.outlinks(0).end()) == std::vector<NodeId>{1});
  CHECK(g.outlinks(1).empty());
}

TEST_CASE("ingest_edges skips comments and reports malformed lines") {
  TempDir dir("edges");
  testutil::write_file(dir.file("ok.tsv"), "# header\n0\t1\n\n2\t0\n");
  CHECK(ingest_edges(dir.file("ok.tsv")).edge_count() == 2);

  testutil::write_file(dir.file("bad.tsv"), "0\t1\nnope\n");
  try {
    ingest_edges(dir.file("bad.tsv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  testutil::write_file(dir.file("bad2.tsv"), "0\t1\t2\n");
  CHECK_THROWS_AS(ingest_edges(dir.file("bad2.tsv")), ParseError);
}

TEST_CASE("ingest_edges range checks against expected_nodes") {
  TempDir dir("edges");
  testutil::write_file(dir.file("g.tsv"), "0\t1\n0\t7\n");
  CHECK_THROWS_AS(ingest_edges(dir.file("g.tsv"), 4), RangeError);

  const WebGraph g = ingest_edges(dir.file("g.tsv"), 4, /*drop_out_of_range=*/true);
  CHECK(g.node_count() == 4);
  CHECK(g.edge_count() == 1);
  CHECK(g.dropped_edge_count() == 1);
}

TEST_CASE("outlinks reads stored adjacency") {
  const WebGraph g = WebGraph::from_edges(3, {{0, 1}, {0, 2}});
  CHECK(std::vector<NodeId>(g.outlinks(0).begin(), g.outlinks(0).end()) ==
        std::vector<NodeId>{1, 2});
  CHECK(g.outlinks(2).empty());
  CHECK_THROWS_AS(g.outlinks(3), RangeError);
}

TEST_CASE("indegree is the global count") {
  const WebGraph g = WebGraph::from_edges(3, {{0, 2}, {1, 2}});
  CHECK(g.indegree(2) == 2);
  CHECK(g.indegree(0) == 0);

  // star: 5 leaves pointing at node 0
  const WebGraph star = WebGraph::from_edges(6, {{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  CHECK(star.indegree(0) == 5);
  CHECK_THROWS_AS(star.indegree(6), RangeError);
}

TEST_CASE("indegree recount property on random graphs") {
  Rng rng(20240616);
  for (int trial = 0; trial < 25; ++trial) {
    const WebGraph g = testutil::random_graph(rng, 200, 4.0);
    std::vector<std::uint64_t> counted(g.node_count(), 0);
    std::uint64_t out_total = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      out_total += g.outdegree(u);
      for (NodeId v : g.outlinks(u)) ++counted[v];
    }
    std::uint64_t in_total = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      REQUIRE(g.indegree(v) == counted[v]);
      in_total += g.indegree(v);
    }
    REQUIRE(in_total == g.edge_count());
    REQUIRE(out_total == g.edge_count());
  }
}

TEST_CASE("edge file round trip") {
  Rng rng(7);
  const WebGraph g = testutil::random_graph(rng, 100, 3.0);
  TempDir dir("roundtrip");
  write_edges(g, dir.file("g.tsv"));
  // node count survives via the expected_nodes hint (isolated tail nodes
  // leave no trace in the edge list)
  const WebGraph back = ingest_edges(dir.file("g.tsv"), g.node_count());
  CHECK(back == g);
}

TEST_CASE("binary cache round trip") {
  Rng rng(8);
  const WebGraph g = testutil::random_graph(rng, 150, 3.0);
  TempDir dir("cache");
  save_graph_cache(g, dir.file("g.bin"));
  const WebGraph back = load_graph_cache(dir.file("g.bin"));
  CHECK(back == g);
  for (NodeId v = 0; v < g.node_count(); ++v) REQUIRE(back.indegree(v) == g.indegree(v));

  testutil::write_file(dir.file("junk.bin"), "NOTMAGIC--------");
  CHECK_THROWS_AS(load_graph_cache(dir.file("junk.bin")), IngestError);
}

TEST_CASE("ingest_documents happy path and edge cases") {
  TempDir dir("docs");
  testutil::write_file(dir.file("d.jsonl"),
                       R"({"id": 0, "url": "a", "text": "hello world"})"
                       "\n"
                       R"({"id": 1, "url": "b", "text": ""})"
                       "\n"
                       R"({"id": 5, "url": "c", "text": "tail"})"
                       "\n");
  const DocumentStore store = ingest_documents(dir.file("d.jsonl"));
  REQUIRE(store.size() == 3);
  CHECK(store.find(1)->text.empty());
  CHECK(store.find(2) == nullptr);  // contentless
  CHECK(store.find(5)->url == "c");
}

TEST_CASE("ingest_documents rejects duplicates and malformed records") {
  TempDir dir("docs");
  testutil::write_file(dir.file("dup.jsonl"),
                       R"({"id": 7, "url": "a", "text": "x"})"
                       "\n"
                       R"({"id": 7, "url": "b", "text": "y"})"
                       "\n");
  try {
    ingest_documents(dir.file("dup.jsonl"));
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }

  testutil::write_file(dir.file("bad.jsonl"), "{\"id\": 0, \"url\": \"a\"\n");
  try {
    ingest_documents(dir.file("bad.jsonl"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  testutil::write_file(dir.file("missing.jsonl"), R"({"id": 0, "url": "a"})"
                                                  "\n");
  CHECK_THROWS_AS(ingest_documents(dir.file("missing.jsonl")), ParseError);
}

TEST_CASE("document file round trip") {
  DocumentStore store;
  store.insert({0, "u0", "text zero"});
  store.insert({3, "u3", "quotes \" and \\ slashes\nnewline"});
  TempDir dir("docrt");
  write_documents(store, dir.file("d.jsonl"));
  const DocumentStore back = ingest_documents(dir.file("d.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back.find(3)->text == store.find(3)->text);
  CHECK(back.find(3)->url == "u3");
}

TEST_CASE("fetch_page counts and errors") {
  DocumentStore store;
  store.insert({0, "u", "body"});
  std::uint64_t fetches = 0;

  const Document& doc = fetch_page(store, 0, fetches);
  CHECK(doc.text == "body");
  CHECK(fetches == 1);

  const Document& again = fetch_page(store, 0, fetches);
  CHECK(again.text == doc.text);  // store is immutable
  CHECK(fetches == 2);

  CHECK_THROWS_AS(fetch_page(store, 9, fetches), ContentMissingError);
  CHECK(fetches == 3);  // the failed fetch still cost a request
}
