#include "popaudit/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "popaudit/errors.hpp"

namespace popaudit {

RatingTable::RatingTable(std::shared_ptr<const IdSpace> ids, std::vector<Rating> ratings, RatingRange range)
    : ids_(std::move(ids)), ratings_(std::move(ratings)), range_(range) {
  build_indexes();
}

RatingTable RatingTable::from_rows(std::span<const RawRating> rows, std::optional<RatingRange> range) {
  if (rows.empty()) {
    throw DatasetError("rating table has no rows");
  }

  RatingRange resolved;
  if (range) {
    if (!(range->min < range->max)) {
      throw DatasetError("rating range must satisfy min < max");
    }
    resolved = *range;
  } else {
    auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                        [](const RawRating& a, const RawRating& b) { return a.value < b.value; });
    resolved = {lo->value, hi->value};
  }

  auto ids = std::make_shared<IdSpace>();
  for (const auto& r : rows) {
    ids->user_ids.push_back(r.user);
    ids->item_ids.push_back(r.item);
  }
  for (auto* v : {&ids->user_ids, &ids->item_ids}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }

  auto index_of = [](const std::vector<RawId>& sorted, RawId id) {
    return static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), id) - sorted.begin());
  };

  std::vector<Rating> ratings;
  ratings.reserve(rows.size());
  for (const auto& r : rows) {
    if (!resolved.contains(r.value)) {
      throw DatasetError("rating " + std::to_string(r.value) + " for (user " + std::to_string(r.user) + ", item " +
                         std::to_string(r.item) + ") outside rating range [" + std::to_string(resolved.min) + ", " +
                         std::to_string(resolved.max) + "]");
    }
    ratings.push_back({index_of(ids->user_ids, r.user), index_of(ids->item_ids, r.item), r.value});
  }
  std::sort(ratings.begin(), ratings.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  for (std::size_t k = 1; k < ratings.size(); ++k) {
    if (ratings[k].user == ratings[k - 1].user && ratings[k].item == ratings[k - 1].item) {
      throw DatasetError("duplicate rating for (user " + std::to_string(ids->user_ids[ratings[k].user]) + ", item " +
                         std::to_string(ids->item_ids[ratings[k].item]) + ")");
    }
  }
  return RatingTable(std::move(ids), std::move(ratings), resolved);
}

RatingTable RatingTable::from_indexed(std::vector<RawId> user_ids, std::vector<RawId> item_ids,
                                      std::vector<Rating> ratings, RatingRange range) {
  if (!std::is_sorted(user_ids.begin(), user_ids.end()) || !std::is_sorted(item_ids.begin(), item_ids.end())) {
    throw DatasetError("id space must be sorted ascending");
  }
  for (const auto& r : ratings) {
    if (r.user >= user_ids.size() || r.item >= item_ids.size()) {
      throw DatasetError("rating references an index outside the id space");
    }
    if (!range.contains(r.value)) {
      throw DatasetError("rating outside rating range");
    }
  }
  std::sort(ratings.begin(), ratings.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  auto ids = std::make_shared<IdSpace>(IdSpace{std::move(user_ids), std::move(item_ids)});
  return RatingTable(std::move(ids), std::move(ratings), range);
}

RatingTable RatingTable::subset(std::span<const std::size_t> positions) const {
  std::vector<std::size_t> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Rating> picked;
  picked.reserve(sorted.size());
  for (auto pos : sorted) {
    picked.push_back(ratings_.at(pos));
  }
  return RatingTable(ids_, std::move(picked), range_);
}

void RatingTable::build_indexes() {
  const std::size_t n_users = user_count();
  const std::size_t n_items = item_count();

  user_offsets_.assign(n_users + 1, 0);
  item_offsets_.assign(n_items + 1, 0);
  double sum = 0.0;
  for (const auto& r : ratings_) {
    ++user_offsets_[r.user + 1];
    ++item_offsets_[r.item + 1];
    sum += r.value;
  }
  std::partial_sum(user_offsets_.begin(), user_offsets_.end(), user_offsets_.begin());
  std::partial_sum(item_offsets_.begin(), item_offsets_.end(), item_offsets_.begin());

  item_positions_.resize(ratings_.size());
  std::vector<std::size_t> cursor(item_offsets_.begin(), item_offsets_.end() - 1);
  for (std::size_t pos = 0; pos < ratings_.size(); ++pos) {
    item_positions_[cursor[ratings_[pos].item]++] = pos;
  }
  mean_ = ratings_.empty() ? 0.0 : sum / static_cast<double>(ratings_.size());
}

std::span<const Rating> RatingTable::user_ratings(UserIndex u) const noexcept {
  if (u >= user_count()) {
    return {};
  }
  return std::span<const Rating>(ratings_).subspan(user_offsets_[u], user_offsets_[u + 1] - user_offsets_[u]);
}

std::span<const std::size_t> RatingTable::item_positions(ItemIndex i) const noexcept {
  if (i >= item_count()) {
    return {};
  }
  return std::span<const std::size_t>(item_positions_).subspan(item_offsets_[i], item_offsets_[i + 1] - item_offsets_[i]);
}

std::optional<UserIndex> RatingTable::find_user(RawId id) const {
  auto it = std::lower_bound(ids_->user_ids.begin(), ids_->user_ids.end(), id);
  if (it == ids_->user_ids.end() || *it != id) {
    return std::nullopt;
  }
  return static_cast<UserIndex>(it - ids_->user_ids.begin());
}

std::optional<ItemIndex> RatingTable::find_item(RawId id) const {
  auto it = std::lower_bound(ids_->item_ids.begin(), ids_->item_ids.end(), id);
  if (it == ids_->item_ids.end() || *it != id) {
    return std::nullopt;
  }
  return static_cast<ItemIndex>(it - ids_->item_ids.begin());
}

std::vector<RawRating> RatingTable::to_rows() const {
  std::vector<RawRating> rows;
  rows.reserve(ratings_.size());
  for (const auto& r : ratings_) {
    rows.push_back({user_id(r.user), item_id(r.item), r.value, false});
  }
  return rows;
}

GenreCatalog GenreCatalog::align(const RawGenres& raw, const RatingTable& table) {
  std::set<std::string> used;
  for (ItemIndex i = 0; i < table.item_count(); ++i) {
    auto it = raw.find(table.item_id(i));
    if (it == raw.end() || it->second.empty()) {
      throw DatasetError("item " + std::to_string(table.item_id(i)) + " has no genre");
    }
    used.insert(it->second.begin(), it->second.end());
  }

  GenreCatalog catalog;
  catalog.names_.assign(used.begin(), used.end());
  catalog.item_genres_.resize(table.item_count());
  for (ItemIndex i = 0; i < table.item_count(); ++i) {
    auto& genres = catalog.item_genres_[i];
    for (const auto& label : raw.at(table.item_id(i))) {
      genres.push_back(*catalog.find_genre(label));
    }
    std::sort(genres.begin(), genres.end());
    genres.erase(std::unique(genres.begin(), genres.end()), genres.end());
  }
  return catalog;
}

std::optional<GenreId> GenreCatalog::find_genre(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) {
    return std::nullopt;
  }
  return static_cast<GenreId>(it - names_.begin());
}

PopularityIndex compute_popularity(const RatingTable& table) {
  const std::size_t n_items = table.item_count();
  const double n_users = static_cast<double>(table.user_count());

  PopularityIndex index;
  index.user_counts.resize(n_items);
  index.popularity.resize(n_items);
  for (ItemIndex i = 0; i < n_items; ++i) {
    index.user_counts[i] = table.item_degree(i);
    index.popularity[i] = static_cast<double>(index.user_counts[i]) / n_users;
  }

  std::vector<ItemIndex> order(n_items);
  std::iota(order.begin(), order.end(), ItemIndex{0});
  // Integer counts give an exact comparison; item index order equals raw id order.
  std::stable_sort(order.begin(), order.end(), [&](ItemIndex a, ItemIndex b) {
    return index.user_counts[a] > index.user_counts[b];
  });
  order.resize(popular_set_size(n_items));
  index.popular_items = std::move(order);
  index.popular.assign(n_items, false);
  for (auto i : index.popular_items) {
    index.popular[i] = true;
  }
  return index;
}

double popularity_fraction(const RatingTable& table, const PopularityIndex& index, UserIndex u,
                           PopularityBasis basis) {
  auto profile = table.user_ratings(u);
  if (profile.empty()) {
    return 0.0;
  }
  if (basis == PopularityBasis::DistinctItems) {
    std::size_t hits = 0;
    for (const auto& r : profile) {
      hits += index.is_popular(r.item) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(profile.size());
  }
  double popular_mass = 0.0;
  double total_mass = 0.0;
  for (const auto& r : profile) {
    total_mass += r.value;
    if (index.is_popular(r.item)) {
      popular_mass += r.value;
    }
  }
  return total_mass > 0.0 ? popular_mass / total_mass : 0.0;
}

std::string group_label(std::size_t g, std::size_t group_count) {
  if (group_count == 3) {
    static const char* const kNames[] = {"LowPop", "MedPop", "HighPop"};
    return kNames[g];
  }
  return "G" + std::to_string(g);
}

std::vector<UserIndex> GroupAssignment::members(std::size_t g) const {
  std::vector<UserIndex> out;
  for (UserIndex u = 0; u < group.size(); ++u) {
    if (group[u] == g) {
      out.push_back(u);
    }
  }
  return out;
}

std::string GroupAssignment::group_name(std::size_t g) const { return group_label(g, group_count); }

GroupAssignment split_user_groups(const RatingTable& table, const PopularityIndex& index, std::size_t group_count,
                                  PopularityBasis basis) {
  const std::size_t n_users = table.user_count();
  if (group_count == 0 || n_users < group_count) {
    throw DatasetError("cannot split " + std::to_string(n_users) + " users into " + std::to_string(group_count) +
                       " groups");
  }

  GroupAssignment assignment;
  assignment.group_count = group_count;
  assignment.popularity_fraction.resize(n_users);
  for (UserIndex u = 0; u < n_users; ++u) {
    assignment.popularity_fraction[u] = popularity_fraction(table, index, u, basis);
  }

  std::vector<UserIndex> order(n_users);
  std::iota(order.begin(), order.end(), UserIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) {
    return assignment.popularity_fraction[a] < assignment.popularity_fraction[b];
  });

  assignment.group.resize(n_users);
  for (std::size_t rank = 0; rank < n_users; ++rank) {
    // Group k holds ranks [k*n/g, (k+1)*n/g).
    assignment.group[order[rank]] = (rank * group_count) / n_users;
  }
  return assignment;
}

std::vector<RawRating> normalize_playcounts(std::span<const RawRating> counts, RatingRange target) {
  if (!(target.min < target.max)) {
    throw ConfigError("play-count target range must satisfy lo < hi");
  }
  std::unordered_map<RawId, std::pair<double, double>> bounds;
  for (const auto& r : counts) {
    auto [it, inserted] = bounds.try_emplace(r.user, r.value, r.value);
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.value);
      it->second.second = std::max(it->second.second, r.value);
    }
  }

  std::vector<RawRating> out;
  out.reserve(counts.size());
  const double span = target.max - target.min;
  for (const auto& r : counts) {
    const auto [lo, hi] = bounds.at(r.user);
    double scaled = target.max;
    if (hi > lo) {
      scaled = target.min + (r.value - lo) / (hi - lo) * span;
      scaled = target.clip(scaled);
    }
    out.push_back({r.user, r.item, scaled, false});
  }
  return out;
}

RatingTable implicit_to_explicit(std::span<const RawRating> rows, double fill_value, RatingRange range) {
  if (!range.contains(fill_value)) {
    throw ConfigError("implicit fill value " + std::to_string(fill_value) + " outside rating range [" +
                      std::to_string(range.min) + ", " + std::to_string(range.max) + "]");
  }
  std::vector<RawRating> out(rows.begin(), rows.end());
  for (auto& r : out) {
    if (r.implicit) {
      r.value = fill_value;
      r.implicit = false;
    }
  }
  return RatingTable::from_rows(out, range);
}

DatasetStats dataset_stats(const RatingTable& table, const GenreCatalog& catalog) {
  DatasetStats s;
  s.users = table.user_count();
  s.items = table.item_count();
  s.ratings = table.size();
  s.genres = catalog.genre_count();
  s.range = table.range();
  if (s.users > 0) {
    s.ratings_per_user = static_cast<double>(s.ratings) / static_cast<double>(s.users);
  }
  if (s.items > 0) {
    s.ratings_per_item = static_cast<double>(s.ratings) / static_cast<double>(s.items);
  }
  if (s.users > 0 && s.items > 0) {
    s.sparsity = 1.0 - static_cast<double>(s.ratings) / (static_cast<double>(s.users) * static_cast<double>(s.items));
  }
  return s;
}

}  // namespace popaudit
