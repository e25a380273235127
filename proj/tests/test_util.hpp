#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "crawlsim/graph_store.hpp"
#include "crawlsim/rng.hpp"

namespace testutil {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("crawlsim_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Random directed graph: node count in [1, max_nodes], around edge_factor
// outlinks per node.
inline crawlsim::WebGraph random_graph(crawlsim::Rng& rng, std::uint64_t max_nodes,
                                       double edge_factor = 3.0) {
  const std::uint64_t n = 1 + rng.next_below(max_nodes);
  std::vector<std::pair<crawlsim::NodeId, crawlsim::NodeId>> edges;
  const auto edge_target = static_cast<std::uint64_t>(static_cast<double>(n) * edge_factor);
  for (std::uint64_t e = 0; e < edge_target; ++e)
    edges.emplace_back(rng.next_below(n), rng.next_below(n));
  return crawlsim::WebGraph::from_edges(n, std::move(edges));
}

}  // namespace testutil
