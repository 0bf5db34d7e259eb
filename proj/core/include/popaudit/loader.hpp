#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popaudit/corpus.hpp"

namespace popaudit {

enum class DatasetSchema {
  Explicit,   // user,item,rating
  PlayCount,  // user,item,count      -> per-user min-max scaled
  Mixed       // user,item,rating,implicit_flag -> implicit rows filled
};

std::optional<DatasetSchema> parse_schema(std::string_view tag);
std::string_view schema_name(DatasetSchema schema);

struct LoadOptions {
  DatasetSchema schema = DatasetSchema::Explicit;
  char delimiter = ',';
  // Explicit/Mixed: declared rating range; observed range when unset.
  std::optional<RatingRange> rating_range;
  // PlayCount: target of the per-user min-max scaling.
  RatingRange playcount_range{1.0, 1000.0};
  // Mixed: rating assigned to implicit feedback.
  double implicit_fill = 5.0;
};

struct LoadedDataset {
  RatingTable table;
  GenreCatalog catalog;
  std::size_t dropped_ratings = 0;  // ratings on items without genres
  std::size_t dropped_items = 0;
};

// Reads a header-bearing ratings file and a header-bearing genres file
// (`item,genre1|genre2|...`). Items without genres are removed together with
// their ratings. Throws LoadError (with line number) on malformed rows and
// DatasetError when nothing remains.
LoadedDataset load_dataset(const std::filesystem::path& ratings_path, const std::filesystem::path& genres_path,
                           const LoadOptions& options);

std::vector<RawRating> read_rating_rows(const std::filesystem::path& path, DatasetSchema schema, char delimiter);
GenreCatalog::RawGenres read_genres(const std::filesystem::path& path, char delimiter);

void write_ratings(const std::filesystem::path& path, const RatingTable& table, char delimiter = ',');
void write_genres(const std::filesystem::path& path, const RatingTable& table, const GenreCatalog& catalog,
                  char delimiter = ',');

}  // namespace popaudit
