#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace popaudit {

// Malformed input file. line() is 1-based; 0 when the error is not tied to a row.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& path, std::size_t line, const std::string& what);

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Data that parsed but cannot be used (empty after filtering, duplicates, ...).
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  explicit ConfigError(const std::string& violation);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the audit orchestrator; carries the pipeline stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace popaudit
