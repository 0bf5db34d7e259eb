#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "popaudit/corpus.hpp"
#include "popaudit/engines.hpp"

namespace popaudit {

// ---------------------------------------------------------------------------
// Cross-validation folds
// ---------------------------------------------------------------------------

struct FoldPlan {
  std::size_t fold_count = 5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // by rating position

  std::vector<std::size_t> test_positions(std::size_t fold) const;
  std::vector<std::size_t> train_positions(std::size_t fold) const;
};

// Uniform random partition of the table's ratings into `fold_count` folds
// whose sizes differ by at most one.
FoldPlan make_folds(const RatingTable& table, std::uint64_t seed, std::size_t fold_count = 5);

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

// Mean absolute error of the model over one user's test ratings; nullopt for
// an empty test profile.
std::optional<double> mae_user(const TrainedModel& model, std::span<const Rating> test_ratings);

struct RecommendationList {
  UserIndex user = 0;
  std::vector<ItemIndex> items;  // best first
  std::vector<double> scores;
  bool truncated = false;  // fewer than N candidates were available
};

// The n highest-scored items outside the user's profile in `train`. Equal
// scores are ordered by higher `tie_popularity` user count, then lower item
// index.
RecommendationList top_n(const TrainedModel& model, UserIndex user, const RatingTable& train,
                         const PopularityIndex& tie_popularity, std::size_t n = 10);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Relevant = test rating strictly above `relevance_threshold`. Precision
// divides by n; nullopt when the user has no relevant test item.
std::optional<PrecisionRecall> precision_recall(const RecommendationList& list, std::span<const Rating> test_ratings,
                                                double relevance_threshold, std::size_t n = 10);

// ---------------------------------------------------------------------------
// Miscalibration
// ---------------------------------------------------------------------------

struct GenreDistribution {
  std::vector<double> mass;  // by genre id, sums to 1
};

struct WeightedItem {
  ItemIndex item = 0;
  double weight = 1.0;
};

// Each interaction spreads its weight equally over the item's genres; the
// result is normalised. nullopt when no positive mass was collected.
std::optional<GenreDistribution> genre_distribution(std::span<const WeightedItem> interactions,
                                                    const GenreCatalog& catalog);

// KL(p || q~) with q~ = (1 - alpha) q + alpha p, natural log, terms with p = 0
// skipped. q~ is formed as q + alpha (p - q) so that q == p yields exactly 0.
double miscalibration(const GenreDistribution& p, const GenreDistribution& q, double alpha = 0.01);

// ---------------------------------------------------------------------------
// Popularity lift
// ---------------------------------------------------------------------------

// Mean popularity of a list of items; nullopt when empty.
std::optional<double> mean_popularity(std::span<const ItemIndex> items, std::span<const double> popularity);

struct LiftResult {
  double gap_profile = 0.0;          // GAP_p(g)
  double gap_recommendations = 0.0;  // GAP_q(g)
  double lift = 0.0;                 // PL(g)
};

// GAP_p: mean over users of their profile's mean item popularity; GAP_q the
// same over recommendation lists. Users with an empty list are skipped on that
// side. nullopt when GAP_p is 0 or either side has no users.
std::optional<LiftResult> popularity_lift(std::span<const std::vector<ItemIndex>> profiles,
                                          std::span<const std::vector<ItemIndex>> recommendations,
                                          std::span<const double> popularity);

// (gap_q - gap_p) / gap_p, evaluated as gap_q / gap_p - 1; nullopt when gap_p == 0.
std::optional<double> lift(double gap_profile, double gap_recommendations);

// ---------------------------------------------------------------------------
// Significance
// ---------------------------------------------------------------------------

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Two-sided Welch (unequal variance) t-test. nullopt when a sample has fewer
// than two values or both variances are zero.
std::optional<TTestResult> welch_t_test(std::span<const double> a, std::span<const double> b);

// True only when every fold ran a test and every p-value is below alpha.
bool fold_consistent_significance(std::span<const std::optional<TTestResult>> per_fold, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Per-fold evaluation and aggregation
// ---------------------------------------------------------------------------

enum class Metric { MAE, Precision, Recall, MC, PL };

inline constexpr Metric kAllMetrics[] = {Metric::MAE, Metric::Precision, Metric::Recall, Metric::MC, Metric::PL};

std::string_view metric_name(Metric m);

enum class McWeighting {
  Uniform,  // each training interaction counts once
  Rating    // interactions weighted by their rating value
};

struct EvaluationSettings {
  std::size_t top_n = 10;
  double alpha = 0.01;
  McWeighting mc_weighting = McWeighting::Uniform;
};

struct UserMetrics {
  UserIndex user = 0;
  std::optional<double> mae;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> mc;
  std::optional<double> profile_popularity;         // mean popularity of training profile
  std::optional<double> recommendation_popularity;  // mean popularity of the top-n list
  std::optional<double> lift;                       // per-user lift, for significance tests
};

struct FoldEvaluation {
  Algorithm algorithm = Algorithm::UserItemAvg;
  std::size_t fold = 0;
  double relevance_threshold = 0.0;
  std::size_t fallback_predictions = 0;  // test predictions served by a fallback tier
  std::size_t truncated_lists = 0;
  std::vector<UserMetrics> users;        // users with a training profile, ascending
  std::vector<RecommendationList> recommendations;  // parallel to users
};

// Evaluates one fitted model on one fold. `gap_popularity` drives GAP/PL,
// `tie_popularity` orders equal scores in the top-n lists.
FoldEvaluation evaluate_fold(const TrainedModel& model, std::size_t fold, const RatingTable& train,
                             const RatingTable& test, const GenreCatalog& catalog,
                             const PopularityIndex& gap_popularity, const PopularityIndex& tie_popularity,
                             const EvaluationSettings& settings);

struct GroupMetricRow {
  Algorithm algorithm = Algorithm::UserItemAvg;
  std::size_t group = 0;
  std::optional<std::size_t> fold;  // nullopt: mean over folds
  Metric metric = Metric::MAE;
  std::optional<double> value;      // nullopt: undefined
};

struct SignificanceCell {
  Algorithm algorithm = Algorithm::UserItemAvg;
  Metric metric = Metric::MAE;
  std::size_t reference_group = 0;
  std::size_t group = 1;
  std::vector<std::optional<TTestResult>> per_fold;
  bool significant = false;
};

struct GapRow {
  Algorithm algorithm = Algorithm::UserItemAvg;
  std::size_t group = 0;
  std::size_t fold = 0;
  std::optional<double> gap_profile;
  std::optional<double> gap_recommendations;
};

struct GroupMetrics {
  std::vector<GroupMetricRow> rows;  // per fold, then fold means; deterministic order
  std::vector<SignificanceCell> significance;
  std::vector<GapRow> gaps;

  std::optional<double> mean(Algorithm a, std::size_t group, Metric m) const;
  std::optional<double> at(Algorithm a, std::size_t group, std::size_t fold, Metric m) const;
  const SignificanceCell* find_significance(Algorithm a, Metric m, std::size_t group) const;
};

// Group value per fold = mean over the group's users with a defined value
// (PL: lift computed from the group GAPs); reported value = mean over folds. The
// significance flag compares group 0 against every other group with a Welch
// test per fold and is set only when all folds are significant.
GroupMetrics aggregate(std::span<const FoldEvaluation> evaluations, const GroupAssignment& groups,
                       std::size_t fold_count, double significance_level = 0.05);

}  // namespace popaudit
