#include <fstream>
#include <sstream>
#include <system_error>

#include "csv.hpp"
#include "json_io.hpp"
#include "popaudit/audit.hpp"
#include "popaudit/errors.hpp"

#include <unistd.h>

namespace popaudit {

namespace {

using json_io::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }

json stats_object(const DatasetStats& s, std::size_t dropped_ratings, std::size_t dropped_items) {
  return json{
      {"users", s.users},
      {"items", s.items},
      {"ratings", s.ratings},
      {"genres", s.genres},
      {"ratings_per_user", s.ratings_per_user},
      {"ratings_per_item", s.ratings_per_item},
      {"sparsity", s.sparsity},
      {"rating_min", s.range.min},
      {"rating_max", s.range.max},
      {"dropped_ratings", dropped_ratings},
      {"dropped_items", dropped_items},
  };
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  out.close();
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace

std::string stats_json(const DatasetStats& stats, std::size_t dropped_ratings, std::size_t dropped_items) {
  return stats_object(stats, dropped_ratings, dropped_items).dump(2) + "\n";
}

std::string report_json(const AuditReport& r) {
  const auto& cfg = r.config;

  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"name", g.name},
                      {"users", g.users},
                      {"popularity_fraction",
                       {{"min", g.min}, {"q1", g.q1}, {"median", g.median}, {"q3", g.q3}, {"max", g.max}}}});
  }

  json results = json::array();
  for (auto alg : cfg.algorithms) {
    json per_group = json::array();
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
      json metrics = json::object();
      for (auto m : kAllMetrics) metrics[std::string(metric_name(m))] = optional_number(r.metrics.mean(alg, g, m));
      json entry{{"group", r.groups[g].name}, {"metrics", std::move(metrics)}};
      json sig = json::object();
      for (auto m : kAllMetrics) {
        if (const auto* s = r.metrics.find_significance(alg, m, g)) {
          json folds = json::array();
          for (const auto& t : s->per_fold) {
            folds.push_back(t ? json{{"t", t->t}, {"df", t->df}, {"p", t->p_value}} : json(nullptr));
          }
          sig[std::string(metric_name(m))] = {{"significant", s->significant}, {"per_fold", std::move(folds)}};
        }
      }
      if (!sig.empty()) {
        entry["significance_vs"] = r.groups.empty() ? "" : r.groups[0].name;
        entry["significance"] = std::move(sig);
      }
      per_group.push_back(std::move(entry));
    }
    results.push_back({{"algorithm", std::string(algorithm_name(alg))}, {"groups", std::move(per_group)}});
  }

  json fits = json::array();
  for (const auto& f : r.fits) {
    fits.push_back({{"algorithm", std::string(algorithm_name(f.algorithm))},
                    {"fold", f.fold},
                    {"seed", f.seed},
                    {"fallback_predictions", f.fallback_predictions},
                    {"truncated_lists", f.truncated_lists},
                    {"reseeded_clusters", f.reseeded_clusters}});
  }

  json displayed = json::object();
  for (std::size_t a = 0; a < r.attributions.size(); ++a) {
    json names = json::array();
    for (auto c : r.displayed_genres[a]) names.push_back(r.genre_names[c]);
    displayed[std::string(algorithm_name(r.attributions[a].algorithm))] = std::move(names);
  }

  json doc{
      {"dataset", cfg.dataset.name},
      {"stats", stats_object(r.stats, r.dropped_ratings, r.dropped_items)},
      {"groups", std::move(groups)},
      {"results", std::move(results)},
      {"fits", std::move(fits)},
      {"genre_display",
       {{"rule", "top-k genres by cross-group range of normalized MC, ties by popularity"},
        {"k", cfg.display_genres},
        {"genres", std::move(displayed)}}},
      {"config", json::parse(config_echo(cfg))},
      {"run",
       {{"seed", cfg.seed}, {"config_hash", r.config_hash}, {"wall_seconds", r.wall_seconds}}},
  };
  return doc.dump(2) + "\n";
}

std::string metrics_csv(const AuditReport& r) {
  std::ostringstream out;
  out << "algorithm,dataset,group,fold,metric,value\n";
  const std::string dataset = csv::quote(r.config.dataset.name);
  auto group_name = [&](std::size_t g) { return csv::quote(r.groups.at(g).name); };
  for (const auto& row : r.metrics.rows) {
    out << algorithm_name(row.algorithm) << ',' << dataset << ',' << group_name(row.group) << ','
        << (row.fold ? std::to_string(*row.fold) : std::string("mean")) << ',' << metric_name(row.metric) << ','
        << cell(row.value) << '\n';
  }
  for (const auto& gap : r.metrics.gaps) {
    const auto prefix = std::string(algorithm_name(gap.algorithm)) + ',' + dataset + ',' + group_name(gap.group) +
                        ',' + std::to_string(gap.fold) + ',';
    out << prefix << "GAP_profile," << cell(gap.gap_profile) << '\n';
    out << prefix << "GAP_recommendations," << cell(gap.gap_recommendations) << '\n';
  }
  return out.str();
}

std::string genre_mc_csv(const AuditReport& r) {
  std::ostringstream out;
  out << "algorithm,group,genre,raw_mc,normalized_mc,rating_count,user_count\n";
  const auto& profile = r.genre_profile;
  for (const auto& att : r.attributions) {
    for (std::size_t g = 0; g < att.group_count; ++g) {
      for (auto c : att.order) {
        out << algorithm_name(att.algorithm) << ',' << csv::quote(r.groups.at(g).name) << ','
            << csv::quote(r.genre_names[c]) << ',' << cell(att.raw_at(g, c)) << ',' << cell(att.normalized_at(g, c))
            << ',' << profile.ratings(g, c) << ',' << profile.users(g, c) << '\n';
      }
    }
  }
  return out.str();
}

std::string genre_popularity_csv(const AuditReport& r) {
  std::ostringstream out;
  out << "group,genre,rating_count,user_count,total_rating_count\n";
  const auto& profile = r.genre_profile;
  for (std::size_t g = 0; g < profile.group_count; ++g) {
    for (auto c : profile.order) {
      out << csv::quote(r.groups.at(g).name) << ',' << csv::quote(r.genre_names[c]) << ','
          << profile.ratings(g, c) << ',' << profile.users(g, c) << ',' << profile.total_rating_count[c] << '\n';
    }
  }
  return out.str();
}

void write_report(const AuditReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(out_dir).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const fs::path staging = parent / ("." + target.filename().string() + ".staging-" + std::to_string(::getpid()));
  const fs::path retired = parent / ("." + target.filename().string() + ".old-" + std::to_string(::getpid()));

  std::error_code ec;
  fs::remove_all(staging, ec);
  try {
    fs::create_directory(staging);
    write_file(staging / "report.json", report_json(report));
    write_file(staging / "metrics.csv", metrics_csv(report));
    write_file(staging / "genre_mc.csv", genre_mc_csv(report));
    write_file(staging / "genre_popularity.csv", genre_popularity_csv(report));
    write_file(staging / "stats.json", stats_json(report.stats, report.dropped_ratings, report.dropped_items));

    if (fs::exists(target)) {
      fs::remove_all(retired, ec);
      fs::rename(target, retired);
    }
    fs::rename(staging, target);
    fs::remove_all(retired, ec);
  } catch (const std::exception& e) {
    fs::remove_all(staging, ec);
    throw StageError("emit", e.what());
  }
}

}  // namespace popaudit
