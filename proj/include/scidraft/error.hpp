#pragma once

#include <stdexcept>
#include <string>

namespace scidraft {

// Malformed or inconsistent input data (files, records, corpora).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required upstream artifact is missing.
class DependencyError : public std::runtime_error {
 public:
  explicit DependencyError(const std::string& path)
      : std::runtime_error("missing upstream artifact: " + path), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Bad configuration key or value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace scidraft
