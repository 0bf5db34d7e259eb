#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "popaudit/corpus.hpp"
#include "popaudit/engines.hpp"

namespace popaudit {

// Per-group, per-genre rating and distinct-user counts, with genres ordered
// by total rating count (descending, ties by genre id).
struct GenrePopularityProfile {
  std::size_t group_count = 0;
  std::size_t genre_count = 0;
  std::vector<std::size_t> rating_count;  // group-major: [g * genre_count + c]
  std::vector<std::size_t> user_count;
  std::vector<std::size_t> total_rating_count;  // by genre, over all groups
  std::vector<GenreId> order;                   // most popular first

  std::size_t ratings(std::size_t group, GenreId c) const { return rating_count[group * genre_count + c]; }
  std::size_t users(std::size_t group, GenreId c) const { return user_count[group * genre_count + c]; }
};

GenrePopularityProfile genre_popularity(const RatingTable& table, const GenreCatalog& catalog,
                                        const GroupAssignment& groups);

// One user's MC score together with the genres of the profile it was
// computed against.
struct UserMcRecord {
  UserIndex user = 0;
  double mc = 0.0;
  std::vector<GenreId> profile_genres;
};

// Distinct genres of u's profile in `table`, ascending.
std::vector<GenreId> profile_genres(const RatingTable& table, const GenreCatalog& catalog, UserIndex u);

// One (algorithm, dataset) panel of genre-level MC.
struct GenreAttribution {
  Algorithm algorithm = Algorithm::UserItemAvg;
  std::size_t group_count = 0;
  std::size_t genre_count = 0;
  std::vector<std::optional<double>> raw;         // group-major mean MC; nullopt: no user
  std::vector<std::optional<double>> normalized;  // min-max over the whole panel
  std::vector<std::size_t> contributors;          // records averaged into each cell
  std::vector<GenreId> order;                     // emission order

  std::optional<double> raw_at(std::size_t group, GenreId c) const { return raw[group * genre_count + c]; }
  std::optional<double> normalized_at(std::size_t group, GenreId c) const {
    return normalized[group * genre_count + c];
  }
};

// Assigns each record's MC to every genre of its profile, averages per
// (group, genre), then min-max normalises across the panel (a degenerate
// panel with min == max normalises to 0). `genre_order` fixes the emission
// order, normally GenrePopularityProfile::order.
GenreAttribution attribute_mc(Algorithm algorithm, std::span<const UserMcRecord> records,
                              const GroupAssignment& groups, std::size_t genre_count,
                              std::span<const GenreId> genre_order);

// Keeps the max_genres genres with the largest cross-group range of
// normalised MC (ties: more popular first), returned in emission order.
std::vector<GenreId> select_display_genres(const GenreAttribution& attribution, std::size_t max_genres);

}  // namespace popaudit
