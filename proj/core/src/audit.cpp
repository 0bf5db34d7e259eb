#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <thread>

#include "popaudit/audit.hpp"
#include "popaudit/errors.hpp"

namespace popaudit {

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

LoadedDataset load(const AuditConfig& config) {
  LoadOptions opts;
  opts.schema = config.dataset.schema;
  opts.delimiter = config.dataset.delimiter;
  opts.rating_range = config.dataset.rating_range;
  opts.playcount_range = config.dataset.playcount_range;
  opts.implicit_fill = config.dataset.implicit_fill;
  return load_dataset(config.dataset.ratings, config.dataset.genres, opts);
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<GroupSummary> summarize_groups(const GroupAssignment& groups) {
  std::vector<GroupSummary> out;
  for (std::size_t g = 0; g < groups.group_count; ++g) {
    std::vector<double> fractions;
    for (auto u : groups.members(g)) fractions.push_back(groups.popularity_fraction[u]);
    std::sort(fractions.begin(), fractions.end());
    GroupSummary s;
    s.name = groups.group_name(g);
    s.users = fractions.size();
    if (!fractions.empty()) {
      s.min = fractions.front();
      s.q1 = quantile(fractions, 0.25);
      s.median = quantile(fractions, 0.5);
      s.q3 = quantile(fractions, 0.75);
      s.max = fractions.back();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct FoldData {
  RatingTable train;
  RatingTable test;
  PopularityIndex train_popularity;
};

struct TaskResult {
  FoldEvaluation evaluation;
  FitRecord fit;
  std::vector<UserMcRecord> mc_records;
  std::exception_ptr error;
  const char* failed_stage = "fit";
};

// Runs task(i) for i in [0, count) on up to `workers` threads. Each task writes
// only its own slot, so the result is independent of scheduling.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

StatsResult run_stats(const AuditConfig& config) {
  return stage("load", [&] {
    auto data = load(config);
    return StatsResult{dataset_stats(data.table, data.catalog), data.dropped_ratings, data.dropped_items};
  });
}

AuditReport run_audit(const AuditConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  AuditReport report;
  report.config = config;
  report.config_hash = fnv1a_hex(config_echo(config));

  auto data = stage("load", [&] { return load(config); });
  const RatingTable& table = data.table;
  const GenreCatalog& catalog = data.catalog;
  report.stats = dataset_stats(table, catalog);
  report.dropped_ratings = data.dropped_ratings;
  report.dropped_items = data.dropped_items;
  report.genre_names.assign(catalog.genre_names().begin(), catalog.genre_names().end());

  const auto popularity = compute_popularity(table);
  const auto groups = stage("group", [&] {
    if (table.user_count() < config.groups) {
      throw DatasetError("fewer users (" + std::to_string(table.user_count()) + ") than groups (" +
                         std::to_string(config.groups) + ")");
    }
    return split_user_groups(table, popularity, config.groups, config.popularity_basis);
  });
  report.groups = summarize_groups(groups);
  report.genre_profile = genre_popularity(table, catalog, groups);

  const auto plan = stage("folds", [&] { return make_folds(table, fold_plan_seed(config.seed), config.folds); });
  std::vector<FoldData> folds;
  stage("folds", [&] {
    for (std::size_t f = 0; f < config.folds; ++f) {
      const auto train_pos = plan.train_positions(f);
      const auto test_pos = plan.test_positions(f);
      FoldData fd{table.subset(train_pos), table.subset(test_pos), {}};
      fd.train_popularity = compute_popularity(fd.train);
      folds.push_back(std::move(fd));
    }
  });

  EvaluationSettings settings;
  settings.top_n = config.top_n;
  settings.alpha = config.alpha;
  settings.mc_weighting = config.mc_weighting;

  const std::size_t n_alg = config.algorithms.size();
  std::vector<TaskResult> results(config.folds * n_alg);
  parallel_for(results.size(), config.workers, [&](std::size_t task) {
    const std::size_t f = task / n_alg;
    const Algorithm alg = config.algorithms[task % n_alg];
    auto& slot = results[task];
    try {
      const auto& fd = folds[f];
      HyperParams hp = config.hyperparams;
      hp.seed = model_seed(config.seed, alg, f);
      slot.failed_stage = "fit";
      auto model = fit(alg, fd.train, hp);

      slot.failed_stage = "evaluate";
      const auto& gap_pop = config.per_fold_popularity ? fd.train_popularity : popularity;
      slot.evaluation = evaluate_fold(*model, f, fd.train, fd.test, catalog, gap_pop, popularity, settings);
      slot.fit = FitRecord{alg,
                           f,
                           hp.seed,
                           slot.evaluation.fallback_predictions,
                           slot.evaluation.truncated_lists,
                           model->diagnostics().reseeded_clusters};
      for (const auto& um : slot.evaluation.users) {
        if (um.mc) slot.mc_records.push_back({um.user, *um.mc, profile_genres(fd.train, catalog, um.user)});
      }
    } catch (...) {
      slot.error = std::current_exception();
    }
  });

  for (std::size_t task = 0; task < results.size(); ++task) {
    auto& slot = results[task];
    if (!slot.error) continue;
    const std::string where = std::string(algorithm_name(config.algorithms[task % n_alg])) + ", fold " +
                              std::to_string(task / n_alg) + ": ";
    try {
      std::rethrow_exception(slot.error);
    } catch (const std::exception& e) {
      throw StageError(slot.failed_stage, where + e.what());
    }
  }

  std::vector<FoldEvaluation> evaluations;
  evaluations.reserve(results.size());
  for (auto& slot : results) {
    report.fits.push_back(slot.fit);
    evaluations.push_back(std::move(slot.evaluation));
  }
  report.metrics = stage("aggregate", [&] {
    return aggregate(evaluations, groups, config.folds, config.significance_level);
  });

  stage("attribute", [&] {
    for (std::size_t a = 0; a < n_alg; ++a) {
      std::vector<UserMcRecord> records;
      for (std::size_t f = 0; f < config.folds; ++f) {
        auto& slot = results[f * n_alg + a];
        std::move(slot.mc_records.begin(), slot.mc_records.end(), std::back_inserter(records));
      }
      auto attribution =
          attribute_mc(config.algorithms[a], records, groups, catalog.genre_count(), report.genre_profile.order);
      report.displayed_genres.push_back(select_display_genres(attribution, config.display_genres));
      report.attributions.push_back(std::move(attribution));
    }
  });

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace popaudit
