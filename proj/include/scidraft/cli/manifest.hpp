#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace scidraft::cli {

std::string sha256_hex(std::string_view bytes);
// Throws DependencyError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_atomically(const std::filesystem::path& path, std::string_view content);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::uint64_t seed = 0;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  double wall_clock_seconds = 0.0;
};

FileDigest digest(const std::filesystem::path& path);
nlohmann::json to_json(const RunManifest& manifest);
// Manifest path for a primary output: "<output>.manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& primary_output);
void write_manifest(const std::filesystem::path& primary_output, const RunManifest& manifest);

}  // namespace scidraft::cli
