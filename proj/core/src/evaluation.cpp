#include "popaudit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "popaudit/errors.hpp"
#include "popaudit/random.hpp"

namespace popaudit {

std::vector<std::size_t> FoldPlan::test_positions(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t pos = 0; pos < fold_of.size(); ++pos) {
    if (fold_of[pos] == fold) out.push_back(pos);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_positions(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t pos = 0; pos < fold_of.size(); ++pos) {
    if (fold_of[pos] != fold) out.push_back(pos);
  }
  return out;
}

FoldPlan make_folds(const RatingTable& table, std::uint64_t seed, std::size_t fold_count) {
  if (fold_count < 2) {
    throw ConfigError("fold count must be >= 2");
  }
  if (table.size() < fold_count) {
    throw DatasetError("need at least " + std::to_string(fold_count) + " ratings for " + std::to_string(fold_count) +
                       " folds, have " + std::to_string(table.size()));
  }
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = order.size() - 1; k > 0; --k) {
    const auto j = static_cast<std::size_t>(rng.below(k + 1));
    std::swap(order[k], order[j]);
  }
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  plan.fold_of.resize(table.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    plan.fold_of[order[k]] = k % fold_count;
  }
  return plan;
}

std::optional<double> mae_user(const TrainedModel& model, std::span<const Rating> test_ratings) {
  if (test_ratings.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const auto& r : test_ratings) {
    sum += std::fabs(r.value - model.predict(r.user, r.item));
  }
  return sum / static_cast<double>(test_ratings.size());
}

RecommendationList top_n(const TrainedModel& model, UserIndex user, const RatingTable& train,
                         const PopularityIndex& tie_popularity, std::size_t n) {
  const std::size_t n_items = train.item_count();
  std::vector<bool> owned(n_items, false);
  for (const auto& r : train.user_ratings(user)) {
    owned[r.item] = true;
  }

  struct Candidate {
    double score;
    std::size_t users;
    ItemIndex item;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(n_items);
  for (ItemIndex i = 0; i < n_items; ++i) {
    if (owned[i]) continue;
    const std::size_t users = i < tie_popularity.user_counts.size() ? tie_popularity.user_counts[i] : 0;
    candidates.push_back({model.predict(user, i), users, i});
  }

  const std::size_t keep = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    [](const Candidate& a, const Candidate& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.users != b.users) return a.users > b.users;
                      return a.item < b.item;
                    });

  RecommendationList list;
  list.user = user;
  list.truncated = keep < n;
  for (std::size_t k = 0; k < keep; ++k) {
    list.items.push_back(candidates[k].item);
    list.scores.push_back(candidates[k].score);
  }
  return list;
}

std::optional<PrecisionRecall> precision_recall(const RecommendationList& list, std::span<const Rating> test_ratings,
                                                double relevance_threshold, std::size_t n) {
  std::vector<ItemIndex> relevant;
  for (const auto& r : test_ratings) {
    if (r.value > relevance_threshold) relevant.push_back(r.item);
  }
  if (relevant.empty() || n == 0) {
    return std::nullopt;
  }
  std::sort(relevant.begin(), relevant.end());
  std::size_t hits = 0;
  for (auto item : list.items) {
    hits += std::binary_search(relevant.begin(), relevant.end(), item) ? 1 : 0;
  }
  return PrecisionRecall{static_cast<double>(hits) / static_cast<double>(n),
                         static_cast<double>(hits) / static_cast<double>(relevant.size())};
}

std::optional<GenreDistribution> genre_distribution(std::span<const WeightedItem> interactions,
                                                    const GenreCatalog& catalog) {
  GenreDistribution d;
  d.mass.assign(catalog.genre_count(), 0.0);
  double total = 0.0;
  for (const auto& x : interactions) {
    const auto genres = catalog.genres_of(x.item);
    if (genres.empty() || !(x.weight > 0.0)) continue;
    const double share = x.weight / static_cast<double>(genres.size());
    for (auto g : genres) d.mass[g] += share;
    total += x.weight;
  }
  if (!(total > 0.0)) {
    return std::nullopt;
  }
  for (auto& m : d.mass) m /= total;
  return d;
}

double miscalibration(const GenreDistribution& p, const GenreDistribution& q, double alpha) {
  if (p.mass.size() != q.mass.size()) {
    throw DatasetError("genre distributions over different genre sets");
  }
  double kl = 0.0;
  for (std::size_t c = 0; c < p.mass.size(); ++c) {
    const double pc = p.mass[c];
    if (pc <= 0.0) continue;
    const double qc = q.mass[c] + alpha * (pc - q.mass[c]);
    kl += pc * std::log(pc / qc);
  }
  return kl;
}

std::optional<double> mean_popularity(std::span<const ItemIndex> items, std::span<const double> popularity) {
  if (items.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (auto i : items) sum += popularity[i];
  return sum / static_cast<double>(items.size());
}

std::optional<double> lift(double gap_profile, double gap_recommendations) {
  if (!(gap_profile > 0.0)) {
    return std::nullopt;
  }
  // Ratio form: equal GAPs give exactly 0 and 0.2 -> 0.5 gives exactly 1.5.
  return gap_recommendations / gap_profile - 1.0;
}

std::optional<LiftResult> popularity_lift(std::span<const std::vector<ItemIndex>> profiles,
                                          std::span<const std::vector<ItemIndex>> recommendations,
                                          std::span<const double> popularity) {
  auto group_average = [&](std::span<const std::vector<ItemIndex>> lists) -> std::optional<double> {
    double sum = 0.0;
    std::size_t users = 0;
    for (const auto& list : lists) {
      if (auto m = mean_popularity(list, popularity)) {
        sum += *m;
        ++users;
      }
    }
    if (users == 0) return std::nullopt;
    return sum / static_cast<double>(users);
  };
  const auto gap_p = group_average(profiles);
  const auto gap_q = group_average(recommendations);
  if (!gap_p || !gap_q) {
    return std::nullopt;
  }
  const auto pl = lift(*gap_p, *gap_q);
  if (!pl) {
    return std::nullopt;
  }
  return LiftResult{*gap_p, *gap_q, *pl};
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::MAE:
      return "MAE";
    case Metric::Precision:
      return "Precision";
    case Metric::Recall:
      return "Recall";
    case Metric::MC:
      return "MC";
    case Metric::PL:
      return "PL";
  }
  return "MAE";
}

FoldEvaluation evaluate_fold(const TrainedModel& model, std::size_t fold, const RatingTable& train,
                             const RatingTable& test, const GenreCatalog& catalog,
                             const PopularityIndex& gap_popularity, const PopularityIndex& tie_popularity,
                             const EvaluationSettings& settings) {
  FoldEvaluation eval;
  eval.algorithm = model.algorithm();
  eval.fold = fold;
  eval.relevance_threshold = train.mean();

  std::vector<WeightedItem> interactions;
  for (UserIndex u = 0; u < train.user_count(); ++u) {
    const auto profile = train.user_ratings(u);
    const auto held_out = test.user_ratings(u);
    if (profile.empty() && held_out.empty()) continue;

    UserMetrics m;
    m.user = u;

    if (!held_out.empty()) {
      double abs_err = 0.0;
      for (const auto& r : held_out) {
        const auto pred = model.predict_detailed(r.user, r.item);
        abs_err += std::fabs(r.value - pred.value);
        eval.fallback_predictions += pred.fallback ? 1 : 0;
      }
      m.mae = abs_err / static_cast<double>(held_out.size());
    }

    auto list = top_n(model, u, train, tie_popularity, settings.top_n);
    eval.truncated_lists += list.truncated ? 1 : 0;

    if (auto pr = precision_recall(list, held_out, eval.relevance_threshold, settings.top_n)) {
      m.precision = pr->precision;
      m.recall = pr->recall;
    }

    interactions.clear();
    for (const auto& r : profile) {
      interactions.push_back({r.item, settings.mc_weighting == McWeighting::Rating ? r.value : 1.0});
    }
    const auto p = genre_distribution(interactions, catalog);
    interactions.clear();
    for (auto item : list.items) interactions.push_back({item, 1.0});
    const auto q = genre_distribution(interactions, catalog);
    if (p && q) {
      m.mc = miscalibration(*p, *q, settings.alpha);
    }

    std::vector<ItemIndex> profile_items;
    profile_items.reserve(profile.size());
    for (const auto& r : profile) profile_items.push_back(r.item);
    m.profile_popularity = mean_popularity(profile_items, gap_popularity.popularity);
    m.recommendation_popularity = mean_popularity(list.items, gap_popularity.popularity);
    if (m.profile_popularity && m.recommendation_popularity) {
      m.lift = lift(*m.profile_popularity, *m.recommendation_popularity);
    }

    eval.users.push_back(m);
    eval.recommendations.push_back(std::move(list));
  }
  return eval;
}

std::optional<double> GroupMetrics::mean(Algorithm a, std::size_t group, Metric m) const {
  for (const auto& row : rows) {
    if (row.algorithm == a && row.group == group && row.metric == m && !row.fold) return row.value;
  }
  return std::nullopt;
}

std::optional<double> GroupMetrics::at(Algorithm a, std::size_t group, std::size_t fold, Metric m) const {
  for (const auto& row : rows) {
    if (row.algorithm == a && row.group == group && row.metric == m && row.fold == fold) return row.value;
  }
  return std::nullopt;
}

const SignificanceCell* GroupMetrics::find_significance(Algorithm a, Metric m, std::size_t group) const {
  for (const auto& cell : significance) {
    if (cell.algorithm == a && cell.metric == m && cell.group == group) return &cell;
  }
  return nullptr;
}

namespace {

std::optional<double> user_value(const UserMetrics& u, Metric m) {
  switch (m) {
    case Metric::MAE:
      return u.mae;
    case Metric::Precision:
      return u.precision;
    case Metric::Recall:
      return u.recall;
    case Metric::MC:
      return u.mc;
    case Metric::PL:
      return u.lift;
  }
  return std::nullopt;
}

std::optional<double> average(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

GroupMetrics aggregate(std::span<const FoldEvaluation> evaluations, const GroupAssignment& groups,
                       std::size_t fold_count, double significance_level) {
  const std::size_t n_groups = groups.group_count;
  std::vector<Algorithm> algorithms;
  for (auto a : kAllAlgorithms) {
    if (std::any_of(evaluations.begin(), evaluations.end(), [a](const auto& e) { return e.algorithm == a; })) {
      algorithms.push_back(a);
    }
  }

  // samples[(alg, fold)][group][metric] -> per-user values; gap sums likewise.
  struct Cell {
    std::vector<std::vector<double>> by_metric = std::vector<std::vector<double>>(std::size(kAllMetrics));
    std::vector<double> profile_pop;
    std::vector<double> rec_pop;
  };
  std::map<std::pair<Algorithm, std::size_t>, std::vector<Cell>> cells;
  for (const auto& e : evaluations) {
    if (e.fold >= fold_count) {
      throw DatasetError("fold index out of range in aggregate()");
    }
    auto& per_group = cells[{e.algorithm, e.fold}];
    per_group.resize(n_groups);
    for (const auto& u : e.users) {
      auto& cell = per_group[groups.group.at(u.user)];
      for (std::size_t k = 0; k < std::size(kAllMetrics); ++k) {
        if (auto v = user_value(u, kAllMetrics[k])) cell.by_metric[k].push_back(*v);
      }
      if (u.profile_popularity) cell.profile_pop.push_back(*u.profile_popularity);
      if (u.recommendation_popularity) cell.rec_pop.push_back(*u.recommendation_popularity);
    }
  }

  auto find_cell = [&](Algorithm a, std::size_t fold, std::size_t g) -> const Cell* {
    auto it = cells.find({a, fold});
    return it == cells.end() ? nullptr : &it->second[g];
  };

  GroupMetrics out;
  for (auto a : algorithms) {
    for (std::size_t g = 0; g < n_groups; ++g) {
      for (std::size_t f = 0; f < fold_count; ++f) {
        GapRow gap{a, g, f, std::nullopt, std::nullopt};
        if (const Cell* c = find_cell(a, f, g)) {
          gap.gap_profile = average(c->profile_pop);
          gap.gap_recommendations = average(c->rec_pop);
        }
        out.gaps.push_back(gap);
      }
      for (std::size_t k = 0; k < std::size(kAllMetrics); ++k) {
        const Metric m = kAllMetrics[k];
        std::vector<double> fold_values;
        for (std::size_t f = 0; f < fold_count; ++f) {
          std::optional<double> value;
          if (const Cell* c = find_cell(a, f, g)) {
            if (m == Metric::PL) {
              const auto gp = average(c->profile_pop);
              const auto gq = average(c->rec_pop);
              if (gp && gq) value = lift(*gp, *gq);
            } else {
              value = average(c->by_metric[k]);
            }
          }
          if (value) fold_values.push_back(*value);
          out.rows.push_back({a, g, f, m, value});
        }
        out.rows.push_back({a, g, std::nullopt, m, average(fold_values)});
      }
    }

    for (auto m : kAllMetrics) {
      const auto k = static_cast<std::size_t>(m);
      for (std::size_t g = 1; g < n_groups; ++g) {
        SignificanceCell cell{a, m, 0, g, {}, false};
        for (std::size_t f = 0; f < fold_count; ++f) {
          const Cell* ref = find_cell(a, f, 0);
          const Cell* other = find_cell(a, f, g);
          if (ref && other) {
            cell.per_fold.push_back(welch_t_test(ref->by_metric[k], other->by_metric[k]));
          } else {
            cell.per_fold.push_back(std::nullopt);
          }
        }
        cell.significant = fold_consistent_significance(cell.per_fold, significance_level);
        out.significance.push_back(std::move(cell));
      }
    }
  }
  return out;
}

}  // namespace popaudit
