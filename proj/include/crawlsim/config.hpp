#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

/// Flat `key=value` run configuration with `#` comments. Keys are namespaced
/// per module (crawl.n, scorer.kind, synth.node_count, ...).
class RunConfig {
 public:
  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    RunConfig config;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string_view sv = trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      const std::size_t eq = sv.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(path.string(), lineno, "expected `key = value`");
      const std::string key(trim(sv.substr(0, eq)));
      if (key.empty()) throw ParseError(path.string(), lineno, "empty key");
      config.entries_[key] = std::string(trim(sv.substr(eq + 1)));
    }
    return config;
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

  std::string get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  std::string get_string_or(const std::string& key, std::string fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? std::move(fallback) : it->second;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const auto v = parse_u64(get_string(key));
    if (!v) throw ConfigError("config key " + key + " must be a non-negative integer");
    return *v;
  }

  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const auto v = parse_double(get_string(key));
    if (!v) throw ConfigError("config key " + key + " must be a number");
    return *v;
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::vector<NodeId> get_id_list(const std::string& key) const {
    const std::string value = get_string(key);  // the views below point into it
    std::vector<NodeId> ids;
    for (std::string_view part : split(value, ',')) {
      part = trim(part);
      if (part.empty()) continue;
      const auto id = parse_u64(part);
      if (!id) throw ConfigError("config key " + key + " must be a comma-separated id list");
      ids.push_back(*id);
    }
    return ids;
  }

  std::vector<unsigned> get_order_list_or(const std::string& key,
                                          std::vector<unsigned> fallback) const {
    if (!has(key)) return fallback;
    const std::string value = get_string(key);
    std::vector<unsigned> orders;
    for (std::string_view part : split(value, ',')) {
      part = trim(part);
      const auto v = parse_u64(part);
      if (!v || *v == 0) throw ConfigError("config key " + key + " must list n-gram orders >= 1");
      orders.push_back(static_cast<unsigned>(*v));
    }
    return orders;
  }

  // Sorted, so config echoes are deterministic.
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace crawlsim
