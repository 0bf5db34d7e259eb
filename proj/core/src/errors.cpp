#include "popaudit/errors.hpp"

namespace popaudit {

namespace {
std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "invalid configuration";
  for (const auto& v : violations) {
    out += "\n  - ";
    out += v;
  }
  return out;
}
}  // namespace

LoadError::LoadError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      path_(path),
      line_(line) {}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

ConfigError::ConfigError(const std::string& violation)
    : ConfigError(std::vector<std::string>{violation}) {}

StageError::StageError(std::string stage, const std::string& cause)
    : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

}  // namespace popaudit
