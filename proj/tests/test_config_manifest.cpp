#include <catch2/catch_amalgamated.hpp>

#include "crawlsim/config.hpp"
#include "crawlsim/manifest.hpp"
#include "test_util.hpp"

using namespace crawlsim;
using testutil::TempDir;

TEST_CASE("config parsing") {
  TempDir dir("cfg");
  testutil::write_file(dir.file("run.cfg"),
                       "# comment\n"
                       "crawl.total_pages = 20\n"
                       "scorer.kind=random\n"
                       "\n"
                       "crawl.seeds = 0, 5, 9\n"
                       "synth.out_degree_mean = 2.5\n");
  const RunConfig config = RunConfig::load(dir.file("run.cfg"));

  CHECK(config.get_u64("crawl.total_pages") == 20);
  CHECK(config.get_string("scorer.kind") == "random");
  CHECK(config.get_id_list("crawl.seeds") == std::vector<NodeId>{0, 5, 9});
  CHECK(config.get_double("synth.out_degree_mean") == 2.5);
  CHECK(config.get_u64_or("crawl.per_iteration", 7) == 7);
  CHECK_FALSE(config.has("missing.key"));
  CHECK_THROWS_AS(config.get_u64("missing.key"), ConfigError);
  CHECK_THROWS_AS(config.get_u64("scorer.kind"), ConfigError);  // not an integer
}

TEST_CASE("long id lists with spaces parse intact") {
  // long enough to force heap allocation of the value string
  std::string line = "crawl.seeds = ";
  std::vector<NodeId> expected;
  for (NodeId u = 0; u < 200; ++u) {
    if (u > 0) line += ", ";
    line += std::to_string(u * 31);
    expected.push_back(u * 31);
  }
  TempDir dir("cfg_ids");
  testutil::write_file(dir.file("ids.cfg"), line + "\n");
  CHECK(RunConfig::load(dir.file("ids.cfg")).get_id_list("crawl.seeds") == expected);
}

TEST_CASE("config rejects lines without an equals sign") {
  TempDir dir("cfg");
  testutil::write_file(dir.file("bad.cfg"), "crawl.total_pages\n");
  try {
    RunConfig::load(dir.file("bad.cfg"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("file digests are content addressed") {
  TempDir dir("digest");
  testutil::write_file(dir.file("a.txt"), "identical content");
  testutil::write_file(dir.file("b.txt"), "identical content");
  testutil::write_file(dir.file("c.txt"), "different content");

  CHECK(file_digest(dir.file("a.txt")) == file_digest(dir.file("b.txt")));
  CHECK(file_digest(dir.file("a.txt")) != file_digest(dir.file("c.txt")));
  CHECK(file_digest(dir.file("a.txt")).starts_with("fnv1a64:"));
  CHECK_THROWS_AS(file_digest(dir.file("missing.txt")), IoError);
}

TEST_CASE("manifest writing is deterministic") {
  RunManifest manifest;
  manifest.subcommand = "crawl";
  manifest.config_path = "run.cfg";
  manifest.parameters["crawl.total_pages"] = "20";
  manifest.parameters["scorer.kind"] = "random";
  manifest.seeds.emplace_back("crawl", 42);
  manifest.input_digests.emplace_back("run.cfg", "fnv1a64:0000000000000000");

  TempDir dir("manifest");
  write_manifest(manifest, dir.file("m1.txt"));
  write_manifest(manifest, dir.file("m2.txt"));
  const std::string text = testutil::read_file(dir.file("m1.txt"));
  CHECK(text == testutil::read_file(dir.file("m2.txt")));
  CHECK(text.find("subcommand=crawl") != std::string::npos);
  CHECK(text.find("seed.crawl=42") != std::string::npos);
}

TEST_CASE("output directory guard") {
  TempDir dir("outguard");
  const auto out = dir.file("run1");

  prepare_output_dir(out, false);  // fresh: fine
  CHECK(std::filesystem::is_directory(out));
  prepare_output_dir(out, false);  // empty: still fine

  testutil::write_file(out / "artifact.txt", "x");
  CHECK_THROWS_AS(prepare_output_dir(out, false), ConfigError);
  prepare_output_dir(out, true);  // force allows reuse
}
