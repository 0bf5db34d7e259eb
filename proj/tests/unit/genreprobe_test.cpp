#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "popaudit/genreprobe.hpp"
#include "popaudit/random.hpp"

namespace popaudit {
namespace {

using testing::make_table;

GroupAssignment groups_for(std::vector<std::size_t> group, std::size_t count) {
  GroupAssignment g;
  g.group_count = count;
  g.group = std::move(group);
  g.popularity_fraction.assign(g.group.size(), 0.0);
  return g;
}

TEST(GenrePopularity, SingleRatingTwoGenres) {
  auto t = make_table({{1, 1, 4}});
  auto c = GenreCatalog::align({{1, {"pop", "rock"}}}, t);
  auto p = genre_popularity(t, c, groups_for({0}, 1));
  EXPECT_EQ(p.ratings(0, 0), 1u);
  EXPECT_EQ(p.ratings(0, 1), 1u);
  EXPECT_EQ(p.users(0, 0), 1u);
  EXPECT_EQ(p.users(0, 1), 1u);
}

TEST(GenrePopularity, EmptyGroupCellsAreZeroAndOrderIsByTotal) {
  auto t = make_table({{1, 1, 4}, {1, 2, 4}, {2, 2, 3}, {2, 3, 3}, {3, 3, 1}, {3, 4, 2}});
  auto c = GenreCatalog::align({{1, {"a"}}, {2, {"b"}}, {3, {"b", "c"}}, {4, {"c"}}}, t);
  auto p = genre_popularity(t, c, groups_for({0, 1, 1}, 3));
  const auto a = *c.find_genre("a"), b = *c.find_genre("b"), cc = *c.find_genre("c");
  EXPECT_EQ(p.ratings(0, cc), 0u);
  EXPECT_EQ(p.users(2, a), 0u);
  EXPECT_EQ(p.ratings(2, b), 0u);
  EXPECT_EQ(p.total_rating_count[b], 4u);
  EXPECT_EQ(p.total_rating_count[cc], 3u);
  EXPECT_EQ(p.ratings(1, b), 3u);
  EXPECT_EQ(p.users(1, b), 2u);
  EXPECT_EQ(p.order, (std::vector<GenreId>{b, cc, a}));
}

TEST(GenrePopularity, TiesOrderedByGenreId) {
  auto t = make_table({{1, 1, 4}, {1, 2, 4}});
  auto c = GenreCatalog::align({{1, {"z"}}, {2, {"y"}}}, t);
  auto p = genre_popularity(t, c, groups_for({0}, 1));
  EXPECT_EQ(p.order, (std::vector<GenreId>{0, 1}));
}

TEST(ProfileGenres, DistinctAndSorted) {
  auto t = make_table({{1, 1, 4}, {1, 2, 4}});
  auto c = GenreCatalog::align({{1, {"b", "a"}}, {2, {"b"}}}, t);
  EXPECT_EQ(profile_genres(t, c, 0), (std::vector<GenreId>{0, 1}));
}

TEST(Attribution, SingleSharedGenre) {
  auto g = groups_for({0, 0, 1}, 2);
  std::vector<UserMcRecord> records{{0, 0.2, {0}}, {1, 0.4, {0}}, {2, 0.9, {0}}};
  std::vector<GenreId> order{0};
  auto a = attribute_mc(Algorithm::NMF, records, g, 1, order);
  EXPECT_NEAR(*a.raw_at(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(*a.raw_at(1, 0), 0.9, 1e-15);
  EXPECT_EQ(a.contributors[0], 2u);
}

TEST(Attribution, DegeneratePanelNormalisesToZero) {
  auto g = groups_for({0, 0}, 1);
  std::vector<UserMcRecord> records{{0, 0.5, {0}}, {1, 0.5, {0}}};
  std::vector<GenreId> order{0};
  auto a = attribute_mc(Algorithm::NMF, records, g, 1, order);
  EXPECT_EQ(*a.normalized_at(0, 0), 0.0);
}

TEST(Attribution, MinMaxEndpoints) {
  auto g = groups_for({0, 0}, 1);
  std::vector<UserMcRecord> records{{0, 0.4, {0}}, {1, 0.8, {1}}};
  std::vector<GenreId> order{0, 1};
  auto a = attribute_mc(Algorithm::NMF, records, g, 2, order);
  EXPECT_EQ(*a.normalized_at(0, 0), 0.0);
  EXPECT_EQ(*a.normalized_at(0, 1), 1.0);
}

TEST(Attribution, ExclusiveHighMcGenreDominatesPanel) {
  auto g = groups_for({0, 1, 2, 0}, 3);
  std::vector<UserMcRecord> records{{0, 0.3, {0}}, {1, 0.25, {0}}, {2, 0.2, {0}}, {3, 2.5, {0, 1}}};
  std::vector<GenreId> order{0, 1};
  auto a = attribute_mc(Algorithm::UserKNN, records, g, 2, order);
  EXPECT_EQ(*a.normalized_at(0, 1), 1.0);
  EXPECT_FALSE(a.raw_at(1, 1));
  EXPECT_FALSE(a.normalized_at(2, 1));
}

TEST(Attribution, UserContributesOnlyToProfileGenres) {
  auto g = groups_for({0, 0}, 1);
  std::vector<UserMcRecord> records{{0, 1.0, {0}}, {1, 3.0, {1, 2}}};
  std::vector<GenreId> order{0, 1, 2};
  auto a = attribute_mc(Algorithm::NMF, records, g, 3, order);
  EXPECT_EQ(a.contributors[0], 1u);
  EXPECT_EQ(a.contributors[1], 1u);
  EXPECT_EQ(*a.raw_at(0, 0), 1.0);
  EXPECT_EQ(*a.raw_at(0, 2), 3.0);
}

TEST(Attribution, ShiftCovariance) {
  Rng rng(4);
  auto g = groups_for({0, 1, 2, 0, 1, 2, 0, 1}, 3);
  std::vector<UserMcRecord> records, shifted;
  for (UserIndex u = 0; u < 8; ++u) {
    std::vector<GenreId> gs;
    for (GenreId c = 0; c < 5; ++c) {
      if (rng.below(2) || c == u % 5) gs.push_back(c);
    }
    const double mc = rng.uniform_open();
    records.push_back({u, mc, gs});
    shifted.push_back({u, mc + 0.75, gs});
  }
  std::vector<GenreId> order{0, 1, 2, 3, 4};
  auto a = attribute_mc(Algorithm::NMF, records, g, 5, order);
  auto b = attribute_mc(Algorithm::NMF, shifted, g, 5, order);
  for (std::size_t k = 0; k < a.raw.size(); ++k) {
    ASSERT_EQ(a.raw[k].has_value(), b.raw[k].has_value());
    if (!a.raw[k]) continue;
    EXPECT_NEAR(*b.raw[k], *a.raw[k] + 0.75, 1e-12);
    EXPECT_NEAR(*b.normalized[k], *a.normalized[k], 1e-12);
  }
}

TEST(DisplayGenres, KeepsLargestRangesInEmissionOrder) {
  GenreAttribution a;
  a.group_count = 2;
  a.genre_count = 4;
  a.order = {2, 0, 3, 1};
  // ranges: g0 0.1, g1 0.9, g2 0.5, g3 0.5
  a.normalized = {0.0, 0.0, 0.0, 0.5, 0.1, 0.9, 0.5, 0.0};
  a.raw = a.normalized;
  EXPECT_EQ(select_display_genres(a, 2), (std::vector<GenreId>{2, 1}));
  EXPECT_EQ(select_display_genres(a, 10), a.order);
  EXPECT_EQ(select_display_genres(a, 3), (std::vector<GenreId>{2, 3, 1}));
}

TEST(DisplayGenres, TwentyOfFortyFour) {
  GenreAttribution a;
  a.group_count = 3;
  a.genre_count = 44;
  for (GenreId c = 0; c < 44; ++c) a.order.push_back(c);
  Rng rng(1);
  for (std::size_t k = 0; k < 3 * 44; ++k) a.normalized.push_back(rng.uniform_open());
  a.raw = a.normalized;
  const auto kept = select_display_genres(a, 20);
  EXPECT_EQ(kept.size(), 20u);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
}

TEST(DisplayGenres, EqualRangesPreferMorePopular) {
  GenreAttribution a;
  a.group_count = 2;
  a.genre_count = 3;
  a.order = {1, 2, 0};
  a.normalized = {0.0, 0.0, 0.0, 0.3, 0.3, 0.3};
  a.raw = a.normalized;
  EXPECT_EQ(select_display_genres(a, 1), (std::vector<GenreId>{1}));
  EXPECT_EQ(select_display_genres(a, 2), (std::vector<GenreId>{1, 2}));
}

}  // namespace
}  // namespace popaudit
