#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace popaudit {

using RawId = std::int64_t;
using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;
using GenreId = std::uint32_t;

struct RatingRange {
  double min = 1.0;
  double max = 5.0;

  bool contains(double v) const noexcept { return v >= min && v <= max; }
  double clip(double v) const noexcept { return v < min ? min : (v > max ? max : v); }
  friend bool operator==(const RatingRange&, const RatingRange&) = default;
};

// One input row before indexing. `implicit` marks feedback without a rating
// value (bookmarks, plays) that still needs converting.
struct RawRating {
  RawId user = 0;
  RawId item = 0;
  double value = 0.0;
  bool implicit = false;
};

struct Rating {
  UserIndex user;
  ItemIndex item;
  double value;
};

// Immutable user-item-rating store.
//
// Users and items are re-indexed densely in ascending raw-id order and the
// ratings are kept sorted by (user, item), so the table is canonical: the
// same set of rows in any order produces the same table. Tables produced by
// subset() share the parent's id space, which lets fold-level training sets
// and models address users and items with the full dataset's indices.
class RatingTable {
 public:
  // Throws DatasetError on duplicate (user, item) pairs, values outside the
  // range, or no rows. Without a range the observed [min, max] is used.
  static RatingTable from_rows(std::span<const RawRating> rows,
                               std::optional<RatingRange> range = std::nullopt);

  // Rebuilds a table from an explicit id space and index triples (model
  // files). Ratings need not be sorted.
  static RatingTable from_indexed(std::vector<RawId> user_ids, std::vector<RawId> item_ids,
                                  std::vector<Rating> ratings, RatingRange range);

  RatingTable subset(std::span<const std::size_t> positions) const;

  std::size_t size() const noexcept { return ratings_.size(); }
  bool empty() const noexcept { return ratings_.empty(); }
  std::size_t user_count() const noexcept { return ids_->user_ids.size(); }
  std::size_t item_count() const noexcept { return ids_->item_ids.size(); }
  RatingRange range() const noexcept { return range_; }

  std::span<const Rating> ratings() const noexcept { return ratings_; }
  const Rating& operator[](std::size_t pos) const noexcept { return ratings_[pos]; }

  // Ratings of user u, sorted by item index.
  std::span<const Rating> user_ratings(UserIndex u) const noexcept;
  // Positions (into ratings()) of the ratings of item i, sorted by user index.
  std::span<const std::size_t> item_positions(ItemIndex i) const noexcept;

  std::size_t user_degree(UserIndex u) const noexcept { return user_ratings(u).size(); }
  std::size_t item_degree(ItemIndex i) const noexcept { return item_positions(i).size(); }

  RawId user_id(UserIndex u) const noexcept { return ids_->user_ids[u]; }
  RawId item_id(ItemIndex i) const noexcept { return ids_->item_ids[i]; }
  std::optional<UserIndex> find_user(RawId id) const;
  std::optional<ItemIndex> find_item(RawId id) const;

  double mean() const noexcept { return mean_; }

  std::vector<RawRating> to_rows() const;

 private:
  struct IdSpace {
    std::vector<RawId> user_ids;
    std::vector<RawId> item_ids;
  };

  RatingTable(std::shared_ptr<const IdSpace> ids, std::vector<Rating> ratings, RatingRange range);
  void build_indexes();

  std::shared_ptr<const IdSpace> ids_;
  std::vector<Rating> ratings_;
  std::vector<std::size_t> user_offsets_;
  std::vector<std::size_t> item_offsets_;
  std::vector<std::size_t> item_positions_;
  RatingRange range_;
  double mean_ = 0.0;
};

// Item -> genre mapping aligned with one RatingTable's item indices.
class GenreCatalog {
 public:
  using RawGenres = std::map<RawId, std::vector<std::string>>;

  // Every item of `table` must have at least one genre in `raw`; genre ids
  // are assigned in ascending label order over the genres actually used.
  static GenreCatalog align(const RawGenres& raw, const RatingTable& table);

  std::span<const GenreId> genres_of(ItemIndex i) const noexcept { return item_genres_[i]; }
  std::size_t genre_count() const noexcept { return names_.size(); }
  std::size_t item_count() const noexcept { return item_genres_.size(); }
  const std::string& genre_name(GenreId g) const noexcept { return names_[g]; }
  std::span<const std::string> genre_names() const noexcept { return names_; }
  std::optional<GenreId> find_genre(std::string_view name) const;

 private:
  std::vector<std::vector<GenreId>> item_genres_;
  std::vector<std::string> names_;
};

enum class PopularityBasis {
  DistinctItems,  // share of distinct profile items that are popular
  RatingWeighted  // share of rating mass on popular items
};

struct PopularityIndex {
  // Fraction of all users in the id space who rated the item.
  std::vector<double> popularity;
  std::vector<std::size_t> user_counts;
  // Top 20% of items, in rank order (popularity desc, item index asc).
  std::vector<ItemIndex> popular_items;
  std::vector<bool> popular;

  bool is_popular(ItemIndex i) const noexcept { return popular[i]; }
};

// ceil(0.2 * n) without floating point.
constexpr std::size_t popular_set_size(std::size_t item_count) noexcept {
  return (item_count + 4) / 5;
}

PopularityIndex compute_popularity(const RatingTable& table);

// Fraction of u's profile that is popular under the given basis; 0 for an
// empty profile.
double popularity_fraction(const RatingTable& table, const PopularityIndex& index, UserIndex u,
                           PopularityBasis basis = PopularityBasis::DistinctItems);

struct GroupAssignment {
  std::size_t group_count = 3;
  std::vector<std::size_t> group;  // by user index
  std::vector<double> popularity_fraction;

  std::vector<UserIndex> members(std::size_t g) const;
  std::string group_name(std::size_t g) const;
};

// LowPop / MedPop / HighPop for three groups, G0..Gk otherwise.
std::string group_label(std::size_t g, std::size_t group_count);

// Users sorted ascending by popularity fraction (ties: ascending user id)
// and cut into group_count contiguous, equally sized (+-1) groups.
GroupAssignment split_user_groups(const RatingTable& table, const PopularityIndex& index,
                                  std::size_t group_count = 3,
                                  PopularityBasis basis = PopularityBasis::DistinctItems);

// Per-user min-max scaling of play counts into `target`. Constant profiles map
// to target.max.
std::vector<RawRating> normalize_playcounts(std::span<const RawRating> counts, RatingRange target);

// Replaces every implicit row's value with fill_value. Throws ConfigError when
// fill_value lies outside `range`.
RatingTable implicit_to_explicit(std::span<const RawRating> rows, double fill_value, RatingRange range);

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t ratings = 0;
  std::size_t genres = 0;
  double ratings_per_user = 0.0;
  double ratings_per_item = 0.0;
  double sparsity = 0.0;
  RatingRange range;
};

DatasetStats dataset_stats(const RatingTable& table, const GenreCatalog& catalog);

}  // namespace popaudit
