#include "popaudit/genreprobe.hpp"

#include <algorithm>
#include <numeric>

#include "popaudit/errors.hpp"

namespace popaudit {

GenrePopularityProfile genre_popularity(const RatingTable& table, const GenreCatalog& catalog,
                                        const GroupAssignment& groups) {
  GenrePopularityProfile profile;
  profile.group_count = groups.group_count;
  profile.genre_count = catalog.genre_count();
  const std::size_t cells = profile.group_count * profile.genre_count;
  profile.rating_count.assign(cells, 0);
  profile.user_count.assign(cells, 0);
  profile.total_rating_count.assign(profile.genre_count, 0);

  std::vector<bool> seen(profile.genre_count);
  for (UserIndex u = 0; u < table.user_count(); ++u) {
    const auto ratings = table.user_ratings(u);
    if (ratings.empty()) continue;
    const std::size_t g = groups.group.at(u);
    std::fill(seen.begin(), seen.end(), false);
    for (const auto& r : ratings) {
      for (auto c : catalog.genres_of(r.item)) {
        ++profile.rating_count[g * profile.genre_count + c];
        ++profile.total_rating_count[c];
        if (!seen[c]) {
          seen[c] = true;
          ++profile.user_count[g * profile.genre_count + c];
        }
      }
    }
  }

  profile.order.resize(profile.genre_count);
  std::iota(profile.order.begin(), profile.order.end(), GenreId{0});
  std::stable_sort(profile.order.begin(), profile.order.end(), [&](GenreId a, GenreId b) {
    return profile.total_rating_count[a] > profile.total_rating_count[b];
  });
  return profile;
}

std::vector<GenreId> profile_genres(const RatingTable& table, const GenreCatalog& catalog, UserIndex u) {
  std::vector<GenreId> out;
  for (const auto& r : table.user_ratings(u)) {
    const auto genres = catalog.genres_of(r.item);
    out.insert(out.end(), genres.begin(), genres.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GenreAttribution attribute_mc(Algorithm algorithm, std::span<const UserMcRecord> records,
                              const GroupAssignment& groups, std::size_t genre_count,
                              std::span<const GenreId> genre_order) {
  if (genre_order.size() != genre_count) {
    throw DatasetError("genre order must list every genre exactly once");
  }
  GenreAttribution a;
  a.algorithm = algorithm;
  a.group_count = groups.group_count;
  a.genre_count = genre_count;
  a.order.assign(genre_order.begin(), genre_order.end());

  const std::size_t cells = a.group_count * genre_count;
  std::vector<double> sum(cells, 0.0);
  a.contributors.assign(cells, 0);
  for (const auto& rec : records) {
    const std::size_t g = groups.group.at(rec.user);
    for (auto c : rec.profile_genres) {
      sum[g * genre_count + c] += rec.mc;
      ++a.contributors[g * genre_count + c];
    }
  }

  a.raw.assign(cells, std::nullopt);
  std::optional<double> lo, hi;
  for (std::size_t k = 0; k < cells; ++k) {
    if (a.contributors[k] == 0) continue;
    const double v = sum[k] / static_cast<double>(a.contributors[k]);
    a.raw[k] = v;
    lo = lo ? std::min(*lo, v) : v;
    hi = hi ? std::max(*hi, v) : v;
  }

  a.normalized.assign(cells, std::nullopt);
  for (std::size_t k = 0; k < cells; ++k) {
    if (!a.raw[k]) continue;
    a.normalized[k] = *hi > *lo ? (*a.raw[k] - *lo) / (*hi - *lo) : 0.0;
  }
  return a;
}

std::vector<GenreId> select_display_genres(const GenreAttribution& attribution, std::size_t max_genres) {
  const std::size_t n = attribution.genre_count;
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < attribution.order.size(); ++k) rank[attribution.order[k]] = k;

  std::vector<double> spread(n, 0.0);
  for (GenreId c = 0; c < n; ++c) {
    std::optional<double> lo, hi;
    for (std::size_t g = 0; g < attribution.group_count; ++g) {
      if (auto v = attribution.normalized_at(g, c)) {
        lo = lo ? std::min(*lo, *v) : *v;
        hi = hi ? std::max(*hi, *v) : *v;
      }
    }
    if (lo) spread[c] = *hi - *lo;
  }

  std::vector<GenreId> by_spread(attribution.order.begin(), attribution.order.end());
  std::stable_sort(by_spread.begin(), by_spread.end(), [&](GenreId a, GenreId b) {
    return spread[a] != spread[b] ? spread[a] > spread[b] : rank[a] < rank[b];
  });
  by_spread.resize(std::min(max_genres, by_spread.size()));
  std::sort(by_spread.begin(), by_spread.end(), [&](GenreId a, GenreId b) { return rank[a] < rank[b]; });
  return by_spread;
}

}  // namespace popaudit
