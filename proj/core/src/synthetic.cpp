#include "popaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "popaudit/random.hpp"

namespace popaudit {

namespace {

constexpr const char* kMainstream[] = {"Action", "Adventure", "Comedy", "Drama", "Romance", "Thriller"};
constexpr const char* kNiche[] = {"Animation", "Children's", "Crime",   "Documentary", "Fantasy", "Film-Noir",
                                  "Horror",    "Musical",    "Mystery", "Sci-Fi",      "War",     "Western"};

double normal(Rng& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Weighted sampling without replacement by rejection over a cumulative table.
std::vector<std::size_t> draw_distinct(Rng& rng, const std::vector<double>& weights, std::size_t count) {
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  const double total = cumulative.back();
  std::vector<bool> taken(weights.size(), false);
  std::vector<std::size_t> out;
  while (out.size() < count) {
    const double x = rng.uniform_open() * total;
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
    idx = std::min(idx, weights.size() - 1);
    if (taken[idx]) continue;
    taken[idx] = true;
    out.push_back(idx);
  }
  return out;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.items < 10 || spec.min_profile == 0 || spec.max_profile < spec.min_profile ||
      spec.max_profile > spec.items / 2) {
    throw std::invalid_argument("synthetic spec: inconsistent sizes");
  }
  Rng rng(spec.seed);
  SyntheticDataset data;

  // Item rank r (0 = most popular by construction). Head items mostly carry
  // mainstream genres, tail items mostly niche ones.
  const std::size_t n_items = spec.items;
  const std::size_t head = (n_items + 4) / 5;
  std::vector<bool> niche_item(n_items, false);
  std::vector<double> quality(n_items);
  for (std::size_t r = 0; r < n_items; ++r) {
    const double p_niche = r < head ? 0.15 : 0.75;
    niche_item[r] = rng.uniform_open() < p_niche;
    const std::size_t extra = static_cast<std::size_t>(rng.below(3));
    std::vector<std::string> genres;
    auto add = [&](const char* g) {
      if (std::find(genres.begin(), genres.end(), g) == genres.end()) genres.emplace_back(g);
    };
    for (std::size_t k = 0; k <= extra; ++k) {
      const bool niche = k == 0 ? niche_item[r] : rng.uniform_open() < p_niche;
      if (niche) add(kNiche[rng.below(std::size(kNiche))]);
      else add(kMainstream[rng.below(std::size(kMainstream))]);
    }
    std::sort(genres.begin(), genres.end());
    data.genres[static_cast<RawId>(r + 1)] = std::move(genres);
    quality[r] = 0.4 - 0.6 * static_cast<double>(r) / static_cast<double>(n_items) + 0.3 * normal(rng);
  }

  const UserArchetype order[] = {UserArchetype::Niche, UserArchetype::Diverse, UserArchetype::Blockbuster};
  std::vector<double> weights(n_items);
  RawId user_id = 0;
  for (auto type : order) {
    for (std::size_t k = 0; k < spec.users_per_archetype; ++k) {
      ++user_id;
      data.archetype.push_back(type);
      for (std::size_t r = 0; r < n_items; ++r) {
        const double rank = static_cast<double>(r + 1);
        switch (type) {
          case UserArchetype::Blockbuster:
            weights[r] = std::pow(rank, -1.1);
            break;
          case UserArchetype::Diverse:
            weights[r] = std::pow(rank, -0.6);
            break;
          case UserArchetype::Niche:
            weights[r] = (r < head ? 0.15 : 1.0) * (niche_item[r] ? 3.0 : 1.0) / std::sqrt(rank);
            break;
        }
      }
      const std::size_t span = spec.max_profile - spec.min_profile + 1;
      const std::size_t size = spec.min_profile + static_cast<std::size_t>(rng.below(span));
      auto items = draw_distinct(rng, weights, size);
      std::sort(items.begin(), items.end());

      const double bias = 0.4 * normal(rng);
      for (auto r : items) {
        double value = 3.4 + bias + quality[r] + 0.8 * normal(rng);
        if (type == UserArchetype::Niche && niche_item[r]) value += 0.3;
        value = std::clamp(std::round(value), 1.0, 5.0);
        data.ratings.push_back({user_id, static_cast<RawId>(r + 1), value, false});
      }
    }
  }
  return data;
}

void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream ratings(dir / "ratings.csv", std::ios::binary | std::ios::trunc);
  ratings << "user,item,rating\n";
  for (const auto& r : data.ratings) ratings << r.user << ',' << r.item << ',' << static_cast<int>(r.value) << '\n';
  std::ofstream genres(dir / "genres.csv", std::ios::binary | std::ios::trunc);
  genres << "item,genres\n";
  for (const auto& [item, names] : data.genres) {
    genres << item << ',';
    for (std::size_t k = 0; k < names.size(); ++k) genres << (k ? "|" : "") << names[k];
    genres << '\n';
  }
  if (!ratings || !genres) {
    throw std::runtime_error("cannot write synthetic dataset to " + dir.string());
  }
}

}  // namespace popaudit
