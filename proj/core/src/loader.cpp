#include "popaudit/loader.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "csv.hpp"
#include "popaudit/errors.hpp"

namespace popaudit {

namespace {

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = csv::trim(text);
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::optional<bool> parse_flag(std::string_view text) {
  text = csv::trim(text);
  if (text == "1" || text == "true" || text == "True" || text == "TRUE") {
    return true;
  }
  if (text == "0" || text == "false" || text == "False" || text == "FALSE" || text.empty()) {
    return false;
  }
  return std::nullopt;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError(path.string(), 0, "cannot open file");
  }
  return in;
}

}  // namespace

std::optional<DatasetSchema> parse_schema(std::string_view tag) {
  if (tag == "explicit") return DatasetSchema::Explicit;
  if (tag == "playcount") return DatasetSchema::PlayCount;
  if (tag == "mixed") return DatasetSchema::Mixed;
  return std::nullopt;
}

std::string_view schema_name(DatasetSchema schema) {
  switch (schema) {
    case DatasetSchema::Explicit:
      return "explicit";
    case DatasetSchema::PlayCount:
      return "playcount";
    case DatasetSchema::Mixed:
      return "mixed";
  }
  return "explicit";
}

std::vector<RawRating> read_rating_rows(const std::filesystem::path& path, DatasetSchema schema, char delimiter) {
  auto in = open_input(path);
  const std::string name = path.string();
  const std::size_t min_fields = schema == DatasetSchema::Mixed ? 4 : 3;

  std::vector<RawRating> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || csv::trim(line) == "\r") {
      continue;
    }
    if (header) {
      header = false;
      continue;
    }
    auto fields = csv::split(line, delimiter);
    if (!fields) {
      throw LoadError(name, line_no, "unterminated quoted field");
    }
    if (fields->size() < min_fields || fields->size() > 4) {
      throw LoadError(name, line_no,
                      "expected " + std::to_string(min_fields) + " fields, got " + std::to_string(fields->size()));
    }
    RawRating row;
    auto user = parse_number<RawId>((*fields)[0]);
    auto item = parse_number<RawId>((*fields)[1]);
    if (!user || !item) {
      throw LoadError(name, line_no, "user and item ids must be integers");
    }
    row.user = *user;
    row.item = *item;
    if (fields->size() == 4) {
      auto flag = parse_flag((*fields)[3]);
      if (!flag) {
        throw LoadError(name, line_no, "implicit flag must be 0/1/true/false");
      }
      row.implicit = *flag;
    }
    if (row.implicit && schema == DatasetSchema::Mixed && csv::trim((*fields)[2]).empty()) {
      row.value = 0.0;
    } else {
      auto value = parse_number<double>((*fields)[2]);
      if (!value || !std::isfinite(*value)) {
        throw LoadError(name, line_no, "rating value is not a number");
      }
      row.value = *value;
    }
    if (schema == DatasetSchema::PlayCount && row.value < 1.0) {
      throw LoadError(name, line_no, "play counts must be >= 1");
    }
    if (row.implicit && schema != DatasetSchema::Mixed) {
      throw LoadError(name, line_no, "implicit rows are only allowed in the mixed schema");
    }
    rows.push_back(row);
  }
  if (header) {
    throw LoadError(name, 0, "missing header line");
  }
  return rows;
}

GenreCatalog::RawGenres read_genres(const std::filesystem::path& path, char delimiter) {
  auto in = open_input(path);
  const std::string name = path.string();
  GenreCatalog::RawGenres genres;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || csv::trim(line) == "\r") {
      continue;
    }
    if (header) {
      header = false;
      continue;
    }
    auto fields = csv::split(line, delimiter);
    if (!fields) {
      throw LoadError(name, line_no, "unterminated quoted field");
    }
    if (fields->size() != 2) {
      throw LoadError(name, line_no, "expected 2 fields (item, genres), got " + std::to_string(fields->size()));
    }
    auto item = parse_number<RawId>((*fields)[0]);
    if (!item) {
      throw LoadError(name, line_no, "item id must be an integer");
    }
    if (genres.count(*item) != 0) {
      throw LoadError(name, line_no, "duplicate genre entry for item " + std::to_string(*item));
    }
    std::vector<std::string> labels;
    std::string_view rest = (*fields)[1];
    while (true) {
      const auto bar = rest.find('|');
      auto label = csv::trim(rest.substr(0, bar));
      if (!label.empty()) {
        labels.emplace_back(label);
      }
      if (bar == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(bar + 1);
    }
    genres.emplace(*item, std::move(labels));
  }
  if (header) {
    throw LoadError(name, 0, "missing header line");
  }
  return genres;
}

LoadedDataset load_dataset(const std::filesystem::path& ratings_path, const std::filesystem::path& genres_path,
                           const LoadOptions& options) {
  auto rows = read_rating_rows(ratings_path, options.schema, options.delimiter);
  const auto raw_genres = read_genres(genres_path, options.delimiter);

  std::set<std::pair<RawId, RawId>> seen;
  for (const auto& r : rows) {
    if (!seen.emplace(r.user, r.item).second) {
      throw DatasetError(ratings_path.string() + ": duplicate rating for (user " + std::to_string(r.user) + ", item " +
                         std::to_string(r.item) + ")");
    }
  }

  // Drop ratings on items without genre information.
  std::set<RawId> dropped_items;
  std::vector<RawRating> kept;
  kept.reserve(rows.size());
  for (const auto& r : rows) {
    auto it = raw_genres.find(r.item);
    if (it == raw_genres.end() || it->second.empty()) {
      dropped_items.insert(r.item);
    } else {
      kept.push_back(r);
    }
  }
  const std::size_t dropped_ratings = rows.size() - kept.size();
  if (kept.empty()) {
    throw DatasetError("no ratings left after removing items without genres");
  }

  std::optional<RatingTable> table;
  switch (options.schema) {
    case DatasetSchema::Explicit:
      table = RatingTable::from_rows(kept, options.rating_range);
      break;
    case DatasetSchema::PlayCount: {
      // Normalization runs after genre filtering so each remaining profile
      // still spans the full target range.
      auto scaled = normalize_playcounts(kept, options.playcount_range);
      table = RatingTable::from_rows(scaled, options.playcount_range);
      break;
    }
    case DatasetSchema::Mixed: {
      RatingRange range;
      if (options.rating_range) {
        range = *options.rating_range;
      } else {
        bool any = false;
        for (const auto& r : kept) {
          if (r.implicit) continue;
          range = any ? RatingRange{std::min(range.min, r.value), std::max(range.max, r.value)}
                      : RatingRange{r.value, r.value};
          any = true;
        }
        if (!any || !(range.min < range.max)) {
          throw ConfigError("mixed schema without explicit ratings spanning a range needs rating_min/rating_max");
        }
      }
      table = implicit_to_explicit(kept, options.implicit_fill, range);
      break;
    }
  }

  auto catalog = GenreCatalog::align(raw_genres, *table);
  return LoadedDataset{std::move(*table), std::move(catalog), dropped_ratings, dropped_items.size()};
}

void write_ratings(const std::filesystem::path& path, const RatingTable& table, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw LoadError(path.string(), 0, "cannot open for writing");
  }
  out << "user" << delimiter << "item" << delimiter << "rating\n";
  for (const auto& r : table.ratings()) {
    out << table.user_id(r.user) << delimiter << table.item_id(r.item) << delimiter << csv::format_double(r.value)
        << '\n';
  }
}

void write_genres(const std::filesystem::path& path, const RatingTable& table, const GenreCatalog& catalog,
                  char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw LoadError(path.string(), 0, "cannot open for writing");
  }
  out << "item" << delimiter << "genres\n";
  for (ItemIndex i = 0; i < table.item_count(); ++i) {
    std::string labels;
    for (auto g : catalog.genres_of(i)) {
      if (!labels.empty()) labels += '|';
      labels += catalog.genre_name(g);
    }
    out << table.item_id(i) << delimiter << csv::quote(labels, delimiter) << '\n';
  }
}

}  // namespace popaudit
