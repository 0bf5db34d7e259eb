#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "popaudit/corpus.hpp"

namespace popaudit::testing {

inline RatingTable make_table(std::initializer_list<RawRating> rows,
                              std::optional<RatingRange> range = RatingRange{1.0, 5.0}) {
  std::vector<RawRating> v(rows);
  return RatingTable::from_rows(v, range);
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("popaudit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace popaudit::testing
