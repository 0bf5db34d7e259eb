#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "popaudit/corpus.hpp"
#include "popaudit/engines.hpp"
#include "popaudit/evaluation.hpp"
#include "popaudit/genreprobe.hpp"
#include "popaudit/loader.hpp"

namespace popaudit {

struct DatasetConfig {
  std::string name = "dataset";
  std::filesystem::path ratings;
  std::filesystem::path genres;
  DatasetSchema schema = DatasetSchema::Explicit;
  char delimiter = ',';
  std::optional<RatingRange> rating_range;
  RatingRange playcount_range{1.0, 1000.0};
  double implicit_fill = 5.0;
};

struct AuditConfig {
  DatasetConfig dataset;
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  HyperParams hyperparams;  // seed is derived per fold/algorithm from `seed`
  std::size_t folds = 5;
  std::size_t top_n = 10;
  std::size_t groups = 3;
  double alpha = 0.01;
  double significance_level = 0.05;
  std::size_t display_genres = 20;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "audit_out";
  PopularityBasis popularity_basis = PopularityBasis::DistinctItems;
  McWeighting mc_weighting = McWeighting::Uniform;
  bool per_fold_popularity = false;
  std::size_t workers = 1;
};

// Parses a JSON config. Relative paths resolve against `base_dir`. Every
// violation (missing key, unknown key, bad type, out-of-range value, missing
// file) is collected into one ConfigError.
AuditConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
AuditConfig validate_config(const std::filesystem::path& path);

// Canonical JSON echo of a resolved config; feeding it back through
// parse_config reproduces the same config.
std::string config_echo(const AuditConfig& config);

// Seeds used by the run, all derived from config.seed.
std::uint64_t fold_plan_seed(std::uint64_t root);
std::uint64_t model_seed(std::uint64_t root, Algorithm algorithm, std::size_t fold);

struct GroupSummary {
  std::string name;
  std::size_t users = 0;
  // Five-number summary of the members' popularity fractions.
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct FitRecord {
  Algorithm algorithm = Algorithm::UserItemAvg;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::size_t fallback_predictions = 0;
  std::size_t truncated_lists = 0;
  std::size_t reseeded_clusters = 0;
};

struct AuditReport {
  AuditConfig config;
  DatasetStats stats;
  std::size_t dropped_ratings = 0;
  std::size_t dropped_items = 0;
  std::vector<std::string> genre_names;
  std::vector<GroupSummary> groups;
  GroupMetrics metrics;
  GenrePopularityProfile genre_profile;
  std::vector<GenreAttribution> attributions;              // one per algorithm
  std::vector<std::vector<GenreId>> displayed_genres;      // parallel to attributions
  std::vector<FitRecord> fits;
  std::string config_hash;
  double wall_seconds = 0.0;
};

// load -> normalize -> group -> CV (fit, predict, metrics) -> aggregate ->
// attribute. Throws StageError naming the failing stage.
AuditReport run_audit(const AuditConfig& config);

// Dataset statistics only (load stage).
struct StatsResult {
  DatasetStats stats;
  std::size_t dropped_ratings = 0;
  std::size_t dropped_items = 0;
};
StatsResult run_stats(const AuditConfig& config);

// Report bodies. Everything except report.json's run metadata is a pure
// function of the config.
std::string stats_json(const DatasetStats& stats, std::size_t dropped_ratings, std::size_t dropped_items);
std::string report_json(const AuditReport& report);
std::string metrics_csv(const AuditReport& report);
std::string genre_mc_csv(const AuditReport& report);
std::string genre_popularity_csv(const AuditReport& report);

// Writes report.json, metrics.csv, genre_mc.csv, genre_popularity.csv and
// stats.json into `out_dir`. The files are staged in a sibling directory and
// moved into place at the end, so out_dir is either complete or absent.
void write_report(const AuditReport& report, const std::filesystem::path& out_dir);

}  // namespace popaudit
