#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crawlsim/errors.hpp"
#include "crawlsim/util.hpp"

namespace crawlsim {

inline constexpr std::string_view kToolName = "crawlsim";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Reproducibility record written before any other output: the subcommand,
/// the resolved parameters, digests of every input file, and the seeds in
/// effect. Re-running with the same manifest reproduces outputs bit for bit,
/// so nothing time- or host-dependent belongs here.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::map<std::string, std::string> parameters;                // resolved echo
  std::vector<std::pair<std::string, std::string>> input_digests;  // (path, digest)
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
};

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot digest missing file: " + path.string());
  std::uint64_t state = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    state = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), state);
  char hex[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) hex[i] = digits[(state >> (60 - 4 * i)) & 0xf];
  hex[16] = '\0';
  return std::string("fnv1a64:") + hex;
}

inline void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << "# " << kToolName << " run manifest\n";
  out << "tool=" << kToolName << ' ' << kToolVersion << '\n';
  out << "subcommand=" << manifest.subcommand << '\n';
  out << "config=" << manifest.config_path << '\n';
  for (const auto& [name, seed] : manifest.seeds) out << "seed." << name << '=' << seed << '\n';
  for (const auto& [file, digest] : manifest.input_digests)
    out << "input=" << file << ' ' << digest << '\n';
  for (const auto& [key, value] : manifest.parameters) out << key << '=' << value << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// Creates the run's output directory; refuses to reuse a non-empty one
/// unless force is set.
inline void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("output path is not a directory: " + dir.string());
    if (!fs::is_empty(dir, ec) && !force)
      throw ConfigError("output directory not empty (use --force to overwrite): " + dir.string());
  } else {
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
  }
}

}  // namespace crawlsim
