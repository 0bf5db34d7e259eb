#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "oracle/brute_force.hpp"
#include "popaudit/evaluation.hpp"
#include "popaudit/random.hpp"

namespace popaudit {
namespace {

using testing::make_table;

// Predicts a fixed score per item, regardless of the user.
class ItemScoreModel final : public TrainedModel {
 public:
  explicit ItemScoreModel(std::vector<double> scores)
      : TrainedModel(3.0, {1, 5}, {}), scores_(std::move(scores)) {}
  Algorithm algorithm() const noexcept override { return Algorithm::UserItemAvg; }
  Prediction predict_detailed(UserIndex, ItemIndex i) const override { return {scores_[i], false}; }

 private:
  std::vector<double> scores_;
};

RatingTable hundred_ratings() {
  std::vector<RawRating> rows;
  for (RawId u = 0; u < 10; ++u) {
    for (RawId i = 0; i < 10; ++i) rows.push_back({u, i, static_cast<double>(1 + (u + i) % 5)});
  }
  return RatingTable::from_rows(rows, RatingRange{1, 5});
}

// --- folds --------------------------------------------------------------------

TEST(Folds, FiveEqualDisjointCoveringFolds) {
  const auto t = hundred_ratings();
  const auto plan = make_folds(t, 123, 5);
  std::set<std::size_t> seen;
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = plan.test_positions(f);
    EXPECT_EQ(test.size(), 20u);
    EXPECT_EQ(plan.train_positions(f).size(), 80u);
    for (auto p : test) EXPECT_TRUE(seen.insert(p).second);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Folds, SameSeedSamePlan) {
  const auto t = hundred_ratings();
  EXPECT_EQ(make_folds(t, 5).fold_of, make_folds(t, 5).fold_of);
  EXPECT_NE(make_folds(t, 5).fold_of, make_folds(t, 6).fold_of);
}

TEST(Folds, SizesDifferByAtMostOne) {
  const auto t = make_table({{1, 1, 1}, {1, 2, 2}, {1, 3, 3}, {2, 1, 4}, {2, 2, 5}, {2, 3, 1}, {3, 1, 2}});
  const auto plan = make_folds(t, 1, 3);
  std::vector<std::size_t> sizes;
  for (std::size_t f = 0; f < 3; ++f) sizes.push_back(plan.test_positions(f).size());
  EXPECT_EQ(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
}

TEST(Folds, RejectsTooFewRatingsOrFolds) {
  const auto t = make_table({{1, 1, 1}, {1, 2, 2}});
  EXPECT_ANY_THROW(make_folds(t, 1, 3));
  EXPECT_ANY_THROW(make_folds(t, 1, 1));
}

// --- MAE ------------------------------------------------------------------------

TEST(Mae, Definition) {
  ItemScoreModel exact({4.0, 2.0});
  std::vector<Rating> test{{0, 0, 4.0}, {0, 1, 2.0}};
  EXPECT_DOUBLE_EQ(*mae_user(exact, test), 0.0);

  ItemScoreModel three({3.0, 3.0});
  std::vector<Rating> single{{0, 0, 4.0}};
  EXPECT_DOUBLE_EQ(*mae_user(three, single), 1.0);
  std::vector<Rating> pair{{0, 0, 2.0}, {0, 1, 4.0}};
  EXPECT_DOUBLE_EQ(*mae_user(three, pair), 1.0);
  EXPECT_FALSE(mae_user(three, {}));
}

// --- top-n ----------------------------------------------------------------------

TEST(TopN, HighestScoredUnownedItemFirst) {
  const auto t = make_table({{1, 1, 3}, {1, 2, 3}, {2, 3, 3}, {3, 4, 3}});
  const auto pop = compute_popularity(t);
  ItemScoreModel m({1.0, 5.0, 2.0, 3.0});
  for (UserIndex u = 0; u < t.user_count(); ++u) {
    const auto list = top_n(m, u, t, pop, 2);
    const bool holds = u == 0;
    EXPECT_EQ(list.items.front(), holds ? 3u : 1u);
  }
}

TEST(TopN, TiesByPopularityThenItemIndex) {
  // item 2 is the most popular; items 0, 1, 3 tie on popularity.
  const auto t = make_table({{1, 3, 3}, {2, 3, 3}, {3, 1, 3}, {3, 2, 3}, {3, 4, 3}, {4, 5, 3}});
  const auto pop = compute_popularity(t);
  ItemScoreModel m({4.0, 4.0, 4.0, 4.0, 1.0});
  const auto list = top_n(m, *t.find_user(4), t, pop, 4);
  ASSERT_EQ(list.items.size(), 4u);
  EXPECT_EQ(list.items[0], 2u);
  EXPECT_EQ(list.items[1], 0u);
  EXPECT_EQ(list.items[2], 1u);
  EXPECT_EQ(list.items[3], 3u);
}

TEST(TopN, FullCandidateSetWhenNEqualsCandidates) {
  const auto t = make_table({{1, 1, 3}, {2, 2, 3}, {2, 3, 3}, {2, 4, 3}});
  const auto pop = compute_popularity(t);
  ItemScoreModel m({2.0, 1.0, 3.0, 4.0});
  const auto list = top_n(m, 0, t, pop, 3);
  EXPECT_EQ(list.items, (std::vector<ItemIndex>{3, 2, 1}));
  EXPECT_FALSE(list.truncated);
  EXPECT_TRUE(top_n(m, 0, t, pop, 4).truncated);
}

// --- precision / recall -----------------------------------------------------------------

RecommendationList list_of(std::vector<ItemIndex> items) {
  RecommendationList l;
  l.items = std::move(items);
  l.scores.assign(l.items.size(), 0.0);
  return l;
}

TEST(PrecisionRecall, AllRelevant) {
  std::vector<Rating> test;
  std::vector<ItemIndex> items;
  for (ItemIndex i = 0; i < 10; ++i) {
    test.push_back({0, i, 5});
    items.push_back(i);
  }
  auto pr = precision_recall(list_of(items), test, 3.0, 10);
  EXPECT_DOUBLE_EQ(pr->precision, 1.0);
  EXPECT_DOUBLE_EQ(pr->recall, 1.0);
}

TEST(PrecisionRecall, ZeroOverlap) {
  std::vector<Rating> test{{0, 20, 5}};
  auto pr = precision_recall(list_of({1, 2, 3}), test, 3.0, 10);
  EXPECT_DOUBLE_EQ(pr->precision, 0.0);
  EXPECT_DOUBLE_EQ(pr->recall, 0.0);
}

TEST(PrecisionRecall, TwoHitsOfFourRelevant) {
  std::vector<Rating> test{{0, 1, 5}, {0, 2, 5}, {0, 30, 5}, {0, 31, 4}, {0, 40, 1}};
  auto pr = precision_recall(list_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 40}), test, 3.0, 10);
  EXPECT_DOUBLE_EQ(pr->precision, 0.2);
  EXPECT_DOUBLE_EQ(pr->recall, 0.5);
}

TEST(PrecisionRecall, UndefinedWithoutRelevantItems) {
  std::vector<Rating> test{{0, 1, 2}};
  EXPECT_FALSE(precision_recall(list_of({1}), test, 3.0, 10));
}

// --- genre distributions and MC ---------------------------------------------------------

struct CatalogFixture {
  RatingTable table;
  GenreCatalog catalog;
};

CatalogFixture catalog_of(const GenreCatalog::RawGenres& raw) {
  std::vector<RawRating> rows;
  for (const auto& [item, genres] : raw) rows.push_back({1, item, 3});
  auto t = RatingTable::from_rows(rows, RatingRange{1, 5});
  auto c = GenreCatalog::align(raw, t);
  return {std::move(t), std::move(c)};
}

TEST(GenreDistribution, SingleGenre) {
  auto f = catalog_of({{1, {"rock"}}});
  std::vector<WeightedItem> xs{{0}};
  EXPECT_EQ(genre_distribution(xs, f.catalog)->mass, (std::vector<double>{1.0}));
}

TEST(GenreDistribution, EqualSplitAcrossItemGenres) {
  auto f = catalog_of({{1, {"rock", "pop"}}});
  std::vector<WeightedItem> xs{{0}};
  const auto d = genre_distribution(xs, f.catalog)->mass;
  EXPECT_DOUBLE_EQ(d[*f.catalog.find_genre("rock")], 0.5);
  EXPECT_DOUBLE_EQ(d[*f.catalog.find_genre("pop")], 0.5);
}

TEST(GenreDistribution, FortyFivePopThirtyFiveRockTwentyRap) {
  GenreCatalog::RawGenres raw;
  for (RawId i = 0; i < 20; ++i) raw[i] = {i < 9 ? "pop" : i < 16 ? "rock" : "rap"};
  auto f = catalog_of(raw);
  std::vector<WeightedItem> xs;
  for (ItemIndex i = 0; i < 20; ++i) xs.push_back({i});
  const auto d = genre_distribution(xs, f.catalog)->mass;
  EXPECT_DOUBLE_EQ(d[*f.catalog.find_genre("pop")], 0.45);
  EXPECT_DOUBLE_EQ(d[*f.catalog.find_genre("rock")], 0.35);
  EXPECT_DOUBLE_EQ(d[*f.catalog.find_genre("rap")], 0.20);
}

TEST(GenreDistribution, RatingWeights) {
  auto f = catalog_of({{1, {"a"}}, {2, {"b"}}});
  std::vector<WeightedItem> xs{{0, 3.0}, {1, 1.0}};
  const auto d = genre_distribution(xs, f.catalog)->mass;
  EXPECT_DOUBLE_EQ(d[0], 0.75);
  EXPECT_FALSE(genre_distribution(std::vector<WeightedItem>{}, f.catalog));
}

TEST(Miscalibration, HandValues) {
  GenreDistribution p{{0.5, 0.5}}, q{{0.9, 0.1}};
  EXPECT_NEAR(miscalibration(p, p, 0.01), 0.0, 0.0);
  EXPECT_NEAR(miscalibration(p, q, 0.01), 0.5 * std::log(0.5 / 0.896) + 0.5 * std::log(0.5 / 0.104), 1e-12);
  EXPECT_NEAR(miscalibration(p, q, 0.01), 0.4934, 5e-5);
  GenreDistribution a{{1.0, 0.0}}, b{{0.0, 1.0}};
  EXPECT_NEAR(miscalibration(a, b, 0.01), std::log(100.0), 1e-12);
}

TEST(Miscalibration, PropertiesOverRandomPairs) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng.below(10);
    GenreDistribution p, q;
    double sp = 0, sq = 0;
    for (std::size_t c = 0; c < k; ++c) {
      p.mass.push_back(rng.below(4) == 0 ? 0.0 : rng.uniform_open());
      q.mass.push_back(rng.below(4) == 0 ? 0.0 : rng.uniform_open());
      sp += p.mass.back();
      sq += q.mass.back();
    }
    if (sp == 0) p.mass[0] = sp = 1;
    if (sq == 0) q.mass[0] = sq = 1;
    for (auto& x : p.mass) x /= sp;
    for (auto& x : q.mass) x /= sq;
    EXPECT_EQ(miscalibration(p, p), 0.0);
    double previous = miscalibration(p, q);
    EXPECT_GE(previous, 0.0);
    for (int step = 1; step <= 10; ++step) {
      const double t = step / 10.0;
      GenreDistribution mix;
      for (std::size_t c = 0; c < k; ++c) mix.mass.push_back((1 - t) * q.mass[c] + t * p.mass[c]);
      const double v = miscalibration(p, mix);
      EXPECT_LE(v, previous + 1e-12);
      EXPECT_GE(v, -1e-15);
      previous = v;
    }
  }
}

// --- popularity lift ---------------------------------------------------------------

TEST(Lift, Arithmetic) {
  EXPECT_EQ(*lift(0.2, 0.5), 1.5);
  EXPECT_NEAR(*lift(0.4, 0.1), -0.75, 1e-15);
  EXPECT_EQ(*lift(0.3, 0.3), 0.0);
  EXPECT_FALSE(lift(0.0, 0.4));
}

TEST(Lift, HalfPopularityRecommendations) {
  const std::vector<double> pop{0.8, 0.4, 0.2, 0.1};
  std::vector<std::vector<ItemIndex>> profiles{{0, 1}, {0}};  // means 0.6 and 0.8 -> GAP_p 0.7
  std::vector<std::vector<ItemIndex>> recs{{2, 3}, {1}};      // 0.15 and 0.4 -> 0.275
  auto r = popularity_lift(profiles, recs, pop);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->gap_profile, 0.7, 1e-15);
  EXPECT_NEAR(r->gap_recommendations, 0.275, 1e-15);

  std::vector<std::vector<ItemIndex>> half{{1}, {1}};  // 0.4 vs profiles {0},{0} at 0.8
  std::vector<std::vector<ItemIndex>> full{{0}, {0}};
  EXPECT_NEAR(popularity_lift(full, half, pop)->lift, -0.5, 1e-15);
}

// --- evaluate_fold against the brute-force oracle ----------------------------------------

TEST(EvaluateFold, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    std::vector<RawRating> rows;
    GenreCatalog::RawGenres raw;
    const char* names[] = {"a", "b", "c", "d"};
    for (RawId i = 0; i < 8; ++i) {
      raw[i] = {names[rng.below(4)]};
      if (rng.below(2)) raw[i].push_back(names[rng.below(4)]);
      std::sort(raw[i].begin(), raw[i].end());
      raw[i].erase(std::unique(raw[i].begin(), raw[i].end()), raw[i].end());
    }
    for (RawId u = 0; u < 5; ++u) {
      for (RawId i = 0; i < 8; ++i) {
        if (rng.below(10) < 6 || i == u) rows.push_back({u, i, static_cast<double>(1 + rng.below(5))});
      }
    }
    const auto table = RatingTable::from_rows(rows, RatingRange{1, 5});
    const auto catalog = GenreCatalog::align(raw, table);
    const auto plan = make_folds(table, seed, 5);
    const auto popularity = compute_popularity(table);
    std::vector<std::vector<GenreId>> genres(table.item_count());
    for (ItemIndex i = 0; i < table.item_count(); ++i) {
      genres[i].assign(catalog.genres_of(i).begin(), catalog.genres_of(i).end());
    }
    const auto pop = oracle::item_popularity(oracle::triples(table), table.user_count(), table.item_count());

    for (auto alg : kAllAlgorithms) {
      const auto train = table.subset(plan.train_positions(0));
      const auto test = table.subset(plan.test_positions(0));
      HyperParams hp;
      hp.seed = seed;
      hp.nmf_factors = 2;
      auto model = fit(alg, train, hp);
      const auto eval = evaluate_fold(*model, 0, train, test, catalog, popularity, popularity, {3, 0.01});
      for (const auto& um : eval.users) {
        const auto o = oracle::evaluate_group(*model, train, test, genres, pop, pop, {um.user}, 3, 0.01);
        ASSERT_EQ(o.mae.has_value(), um.mae.has_value());
        if (o.mae) {
          EXPECT_NEAR(*um.mae, *o.mae, 1e-9);
        }
        ASSERT_EQ(o.mc.has_value(), um.mc.has_value());
        if (o.mc) {
          EXPECT_NEAR(*um.mc, *o.mc, 1e-9);
        }
        ASSERT_EQ(o.pl.has_value(), um.lift.has_value());
        if (o.pl) {
          EXPECT_NEAR(*um.lift, *o.pl, 1e-9);
        }
      }
    }
  }
}

// --- aggregate -------------------------------------------------------------------

GroupAssignment three_groups_of(std::size_t per_group) {
  GroupAssignment g;
  g.group_count = 3;
  for (std::size_t k = 0; k < 3 * per_group; ++k) {
    g.group.push_back(k / per_group);
    g.popularity_fraction.push_back(static_cast<double>(k));
  }
  return g;
}

TEST(Aggregate, ShapeForOneAlgorithm) {
  const auto groups = three_groups_of(2);
  std::vector<FoldEvaluation> evals;
  for (std::size_t f = 0; f < 5; ++f) {
    FoldEvaluation e;
    e.fold = f;
    for (UserIndex u = 0; u < 6; ++u) {
      UserMetrics m;
      m.user = u;
      m.mae = 1.0;
      evals.push_back(e);
      evals.back().users.push_back(m);
    }
  }
  const auto out = aggregate(evals, groups, 5);
  for (std::size_t f = 0; f < 5; ++f) {
    std::size_t rows = 0;
    for (const auto& r : out.rows) rows += (r.metric == Metric::MAE && r.fold == f) ? 1 : 0;
    EXPECT_EQ(rows, 3u);
  }
  // Identical values everywhere: group mean equals the value, no test possible.
  EXPECT_DOUBLE_EQ(*out.mean(Algorithm::UserItemAvg, 1, Metric::MAE), 1.0);
  const auto* s = out.find_significance(Algorithm::UserItemAvg, Metric::MAE, 1);
  ASSERT_NE(s, nullptr);
  EXPECT_FALSE(s->significant);
  EXPECT_FALSE(out.mean(Algorithm::UserItemAvg, 0, Metric::MC));
}

TEST(Aggregate, FoldMeansOfGroupMeans) {
  const auto groups = three_groups_of(2);
  std::vector<FoldEvaluation> evals(2);
  for (std::size_t f = 0; f < 2; ++f) {
    evals[f].fold = f;
    for (UserIndex u = 0; u < 6; ++u) {
      UserMetrics m;
      m.user = u;
      m.mc = static_cast<double>(u + 10 * f);
      m.profile_popularity = 0.2;
      m.recommendation_popularity = u % 2 ? 0.5 : 0.3;
      evals[f].users.push_back(m);
    }
  }
  const auto out = aggregate(evals, groups, 2);
  EXPECT_DOUBLE_EQ(*out.at(Algorithm::UserItemAvg, 0, 0, Metric::MC), 0.5);
  EXPECT_DOUBLE_EQ(*out.at(Algorithm::UserItemAvg, 0, 1, Metric::MC), 10.5);
  EXPECT_DOUBLE_EQ(*out.mean(Algorithm::UserItemAvg, 0, Metric::MC), 5.5);
  // GAP_p 0.2, GAP_q 0.4 -> PL 1.0
  EXPECT_NEAR(*out.mean(Algorithm::UserItemAvg, 2, Metric::PL), 1.0, 1e-12);
}

}  // namespace
}  // namespace popaudit
