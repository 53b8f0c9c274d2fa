#include "scidraft/cli/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "scidraft/error.hpp"

namespace scidraft::cli {

namespace {

std::string to_hex(const unsigned char* bytes, unsigned int length) {
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(bytes[i]);
  return out.str();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), hash, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return to_hex(hash, length);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

FileDigest digest(const std::filesystem::path& path) { return FileDigest{path.string(), sha256_file(path)}; }

nlohmann::json to_json(const RunManifest& m) {
  auto files = [](const std::vector<FileDigest>& list) {
    auto out = nlohmann::json::array();
    for (const auto& f : list) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return out;
  };
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [k, v] : m.overrides) overrides[k] = v;
  return {{"command", m.command},
          {"arguments", m.arguments},
          {"config_hash", m.config_hash},
          {"overrides", overrides},
          {"seed", m.seed},
          {"inputs", files(m.inputs)},
          {"outputs", files(m.outputs)},
          {"wall_clock_seconds", m.wall_clock_seconds}};
}

std::filesystem::path manifest_path(const std::filesystem::path& primary_output) {
  std::filesystem::path p = primary_output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const std::filesystem::path& primary_output, const RunManifest& manifest) {
  write_atomically(manifest_path(primary_output), to_json(manifest).dump(2) + "\n");
}

}  // namespace scidraft::cli
