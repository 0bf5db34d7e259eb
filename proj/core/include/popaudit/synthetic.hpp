#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "popaudit/corpus.hpp"

namespace popaudit {

// Three user archetypes with distinct appetites for popular items.
enum class UserArchetype { Niche, Diverse, Blockbuster };

struct SyntheticSpec {
  std::size_t users_per_archetype = 300;
  std::size_t items = 600;
  std::size_t min_profile = 20;
  std::size_t max_profile = 80;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  std::vector<RawRating> ratings;  // 1..5 integer ratings, sorted by (user, item)
  GenreCatalog::RawGenres genres;
  std::vector<UserArchetype> archetype;  // by raw user id - 1
};

// Deterministic ML-like corpus: items follow a long-tail popularity curve,
// head items lean towards mainstream genres and tail items towards niche
// ones. Niche users draw mostly from the tail.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec = {});

// Writes ratings.csv (user,item,rating) and genres.csv (item,genres).
void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace popaudit
