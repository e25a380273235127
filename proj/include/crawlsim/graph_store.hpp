#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crawlsim/errors.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

using NodeId = std::uint64_t;

/// Immutable snapshot of the link graph. Adjacency lives in a single
/// offsets+targets (CSR) layout; per-node target lists are sorted ascending
/// and duplicate-free. Indegrees are global, counted over the whole snapshot.
class WebGraph {
 public:
  WebGraph() = default;

  // Normalizes the edge list: self-loops dropped, parallel edges deduplicated,
  // targets sorted per node. `dropped` carries the count of edges discarded
  // upstream (out-of-range targets in drop mode).
  static WebGraph from_edges(std::uint64_t node_count,
                             std::vector<std::pair<NodeId, NodeId>> edges,
                             std::uint64_t dropped = 0) {
    for (const auto& [src, dst] : edges)
      if (src >= node_count || dst >= node_count)
        throw RangeError("edge (" + std::to_string(src) + ", " + std::to_string(dst) +
                         ") outside node count " + std::to_string(node_count));
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    WebGraph g;
    g.node_count_ = node_count;
    g.dropped_edge_count_ = dropped;
    g.offsets_.assign(node_count + 1, 0);
    g.targets_.reserve(edges.size());
    g.indegree_.assign(node_count, 0);
    for (const auto& [src, dst] : edges) {
      g.offsets_[src + 1]++;
      g.indegree_[dst]++;
    }
    for (std::uint64_t v = 0; v < node_count; ++v) g.offsets_[v + 1] += g.offsets_[v];
    for (const auto& [src, dst] : edges) g.targets_.push_back(dst);
    return g;
  }

  std::uint64_t node_count() const noexcept { return node_count_; }
  std::uint64_t edge_count() const noexcept { return targets_.size(); }
  std::uint64_t dropped_edge_count() const noexcept { return dropped_edge_count_; }

  std::span<const NodeId> outlinks(NodeId u) const {
    check_node(u);
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }

  std::uint64_t outdegree(NodeId u) const {
    check_node(u);
    return offsets_[u + 1] - offsets_[u];
  }

  std::uint64_t indegree(NodeId u) const {
    check_node(u);
    return indegree_[u];
  }

  bool operator==(const WebGraph& other) const {
    return node_count_ == other.node_count_ && offsets_ == other.offsets_ &&
           targets_ == other.targets_;
  }

  const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& targets() const noexcept { return targets_; }

 private:
  void check_node(NodeId u) const {
    if (u >= node_count_)
      throw RangeError("node id " + std::to_string(u) + " out of range (node count " +
                       std::to_string(node_count_) + ")");
  }

  std::uint64_t node_count_ = 0;
  std::uint64_t dropped_edge_count_ = 0;
  std::vector<std::uint64_t> offsets_ = {0};
  std::vector<NodeId> targets_;
  std::vector<std::uint64_t> indegree_;
};

inline std::span<const NodeId> outlinks(const WebGraph& g, NodeId u) { return g.outlinks(u); }
inline std::uint64_t indegree(const WebGraph& g, NodeId u) { return g.indegree(u); }

/// Edge file: one `src<TAB>dst` per line, `#` comment lines ignored.
/// With `expected_nodes` set, ids at or beyond it raise RangeError, unless
/// `drop_out_of_range` is set, in which case such edges are skipped and
/// counted in the graph's dropped_edge_count.
inline WebGraph ingest_edges(const std::filesystem::path& edge_file,
                             std::optional<std::uint64_t> expected_nodes = std::nullopt,
                             bool drop_out_of_range = false) {
  std::ifstream in(edge_file);
  if (!in) throw IoError("cannot open edge file: " + edge_file.string());

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::uint64_t dropped = 0;
  std::uint64_t max_id = 0;
  bool any_node = false;

  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;

    const std::size_t tab = sv.find('\t');
    if (tab == std::string_view::npos || sv.find('\t', tab + 1) != std::string_view::npos)
      throw ParseError(edge_file.string(), lineno, "expected exactly one tab separator");
    const auto src = parse_u64(sv.substr(0, tab));
    const auto dst = parse_u64(sv.substr(tab + 1));
    if (!src || !dst)
      throw ParseError(edge_file.string(), lineno, "expected `src<TAB>dst` with non-negative integers");

    if (expected_nodes && (*src >= *expected_nodes || *dst >= *expected_nodes)) {
      if (drop_out_of_range) {
        ++dropped;
        continue;
      }
      throw RangeError(edge_file.string() + ":" + std::to_string(lineno) + ": node id " +
                       std::to_string(std::max(*src, *dst)) + " >= declared node count " +
                       std::to_string(*expected_nodes));
    }
    max_id = std::max({max_id, *src, *dst});
    any_node = true;
    edges.emplace_back(*src, *dst);
  }

  const std::uint64_t node_count = expected_nodes ? *expected_nodes : (any_node ? max_id + 1 : 0);
  return WebGraph::from_edges(node_count, std::move(edges), dropped);
}

inline void write_edges(const WebGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write edge file: " + path.string());
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v : g.outlinks(u)) out << u << '\t' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Binary cache: magic `CW4Lv1`, then little-endian u64 node_count, edge_count,
// offsets array (node_count + 1), targets array (edge_count).

namespace detail {

inline void put_u64_le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

inline std::uint64_t get_u64_le(std::istream& in, const std::string& what) {
  char buf[8];
  in.read(buf, 8);
  if (in.gcount() != 8) throw IngestError("graph cache truncated: " + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace detail

inline constexpr char kGraphCacheMagic[6] = {'C', 'W', '4', 'L', 'v', '1'};

inline void save_graph_cache(const WebGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write graph cache: " + path.string());
  out.write(kGraphCacheMagic, sizeof(kGraphCacheMagic));
  detail::put_u64_le(out, g.node_count());
  detail::put_u64_le(out, g.edge_count());
  for (std::uint64_t off : g.offsets()) detail::put_u64_le(out, off);
  for (NodeId t : g.targets()) detail::put_u64_le(out, t);
  if (!out) throw IoError("write failed: " + path.string());
}

inline WebGraph load_graph_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open graph cache: " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (in.gcount() != 6 || !std::equal(magic, magic + 6, kGraphCacheMagic))
    throw IngestError("bad graph cache magic: " + path.string());

  const std::uint64_t node_count = detail::get_u64_le(in, "node_count");
  const std::uint64_t edge_count = detail::get_u64_le(in, "edge_count");
  std::vector<std::uint64_t> offsets(node_count + 1);
  for (auto& off : offsets) off = detail::get_u64_le(in, "offsets");
  if (offsets.front() != 0 || offsets.back() != edge_count ||
      !std::is_sorted(offsets.begin(), offsets.end()))
    throw IngestError("corrupt graph cache offsets: " + path.string());

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(edge_count);
  std::uint64_t src = 0;
  for (std::uint64_t i = 0; i < edge_count; ++i) {
    while (offsets[src + 1] <= i) ++src;
    const NodeId dst = detail::get_u64_le(in, "targets");
    if (dst >= node_count) throw IngestError("corrupt graph cache target: " + path.string());
    edges.emplace_back(src, dst);
  }
  return WebGraph::from_edges(node_count, std::move(edges));
}

// ---------------------------------------------------------------------------
// Documents

struct Document {
  NodeId id = 0;
  std::string url;
  std::string text;
};

/// id -> document map; ids absent from the backing file are contentless.
class DocumentStore {
 public:
  void insert(Document doc) {
    if (doc.id >= present_.size()) {
      present_.resize(doc.id + 1, 0);
      slots_.resize(doc.id + 1);
    }
    if (present_[doc.id])
      throw IngestError("duplicate document id " + std::to_string(doc.id));
    present_[doc.id] = 1;
    slots_[doc.id] = std::move(doc);
    ++size_;
  }

  const Document* find(NodeId u) const noexcept {
    if (u >= present_.size() || !present_[u]) return nullptr;
    return &slots_[u];
  }

  bool contains(NodeId u) const noexcept { return find(u) != nullptr; }
  std::size_t size() const noexcept { return size_; }

  std::vector<NodeId> present_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(size_);
    for (NodeId u = 0; u < present_.size(); ++u)
      if (present_[u]) ids.push_back(u);
    return ids;
  }

 private:
  std::vector<Document> slots_;
  std::vector<std::uint8_t> present_;
  std::size_t size_ = 0;
};

/// Simulated page fetch. Fetching is the unit of crawl cost, so the counter
/// advances even when the id turns out to be contentless.
inline const Document& fetch_page(const DocumentStore& store, NodeId u,
                                  std::uint64_t& fetch_counter) {
  ++fetch_counter;
  const Document* doc = store.find(u);
  if (!doc) throw ContentMissingError("no content for node " + std::to_string(u));
  return *doc;
}

/// Document file: one JSON object per line with keys `id` (integer),
/// `url` (string), `text` (string).
inline DocumentStore ingest_documents(const std::filesystem::path& doc_file) {
  std::ifstream in(doc_file);
  if (!in) throw IoError("cannot open document file: " + doc_file.string());

  DocumentStore store;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty()) continue;

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(sv);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(doc_file.string(), lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("url") || !rec.contains("text") ||
        !rec["id"].is_number_integer() || !rec["url"].is_string() || !rec["text"].is_string() ||
        (rec["id"].is_number_integer() && rec["id"].get<std::int64_t>() < 0))
      throw ParseError(doc_file.string(), lineno,
                       "record must carry integer `id` >= 0, string `url`, string `text`");

    Document doc;
    doc.id = rec["id"].get<std::uint64_t>();
    doc.url = rec["url"].get<std::string>();
    doc.text = rec["text"].get<std::string>();
    try {
      store.insert(std::move(doc));
    } catch (const IngestError& e) {
      throw IngestError(doc_file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return store;
}

inline void write_documents(const DocumentStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write document file: " + path.string());
  for (NodeId u : store.present_ids()) {
    const Document* doc = store.find(u);
    nlohmann::json rec{{"id", doc->id}, {"url", doc->url}, {"text", doc->text}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace crawlsim
