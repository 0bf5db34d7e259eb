#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "popaudit/audit.hpp"
#include "popaudit/errors.hpp"
#include "popaudit/random.hpp"

namespace popaudit {

namespace {

using json_io::json;

std::string_view basis_name(PopularityBasis b) {
  return b == PopularityBasis::DistinctItems ? "distinct" : "rating_weighted";
}

std::string_view weighting_name(McWeighting w) { return w == McWeighting::Uniform ? "uniform" : "rating"; }

class Reader {
 public:
  explicit Reader(std::vector<std::string>& violations) : violations_(violations) {}

  void count(const json& v, const std::string& key, std::size_t& out, std::size_t minimum) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum)) {
      violations_.push_back(key + ": expected an integer >= " + std::to_string(minimum));
      return;
    }
    out = v.get<std::size_t>();
  }

  void real(const json& v, const std::string& key, double& out) {
    if (!v.is_number()) {
      violations_.push_back(key + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  void text(const json& v, const std::string& key, std::string& out) {
    if (!v.is_string()) {
      violations_.push_back(key + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  void flag(const json& v, const std::string& key, bool& out) {
    if (!v.is_boolean()) {
      violations_.push_back(key + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void fail(const std::string& message) { violations_.push_back(message); }

 private:
  std::vector<std::string>& violations_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

void read_dataset(const json& j, const std::filesystem::path& base, DatasetConfig& ds, Reader& rd) {
  if (!j.is_object()) {
    rd.fail("dataset: expected an object");
    return;
  }
  bool have_ratings = false, have_genres = false;
  std::optional<double> rmin, rmax;
  for (const auto& [key, v] : j.items()) {
    const std::string name = "dataset." + key;
    if (key == "name") {
      rd.text(v, name, ds.name);
    } else if (key == "ratings" || key == "genres") {
      std::string p;
      rd.text(v, name, p);
      if (p.empty()) continue;
      auto path = resolve(base, p);
      if (!std::filesystem::exists(path)) {
        rd.fail(name + ": file not found: " + path.string());
      }
      (key == "ratings" ? ds.ratings : ds.genres) = path;
      (key == "ratings" ? have_ratings : have_genres) = true;
    } else if (key == "schema") {
      std::string tag;
      rd.text(v, name, tag);
      if (auto s = parse_schema(tag)) {
        ds.schema = *s;
      } else if (!tag.empty()) {
        rd.fail(name + ": expected one of explicit, playcount, mixed");
      }
    } else if (key == "delimiter") {
      std::string d;
      rd.text(v, name, d);
      if (d.size() != 1) {
        rd.fail(name + ": expected a single character");
      } else {
        ds.delimiter = d[0];
      }
    } else if (key == "rating_min") {
      double x = 0;
      rd.real(v, name, x);
      rmin = x;
    } else if (key == "rating_max") {
      double x = 0;
      rd.real(v, name, x);
      rmax = x;
    } else if (key == "playcount_range") {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        rd.fail(name + ": expected [lo, hi]");
      } else if (!(v[0].get<double>() < v[1].get<double>())) {
        rd.fail(name + ": expected lo < hi");
      } else {
        ds.playcount_range = {v[0].get<double>(), v[1].get<double>()};
      }
    } else if (key == "implicit_fill") {
      rd.real(v, name, ds.implicit_fill);
    } else {
      rd.fail(name + ": unknown key");
    }
  }
  if (!have_ratings && !j.contains("ratings")) rd.fail("dataset.ratings: missing required key");
  if (!have_genres && !j.contains("genres")) rd.fail("dataset.genres: missing required key");
  if (rmin.has_value() != rmax.has_value()) {
    rd.fail("dataset.rating_min/rating_max: give both or neither");
  } else if (rmin) {
    if (!(*rmin < *rmax)) {
      rd.fail("dataset.rating_min must be < dataset.rating_max");
    } else {
      ds.rating_range = RatingRange{*rmin, *rmax};
    }
  }
  if (ds.schema == DatasetSchema::Mixed && ds.rating_range && !ds.rating_range->contains(ds.implicit_fill)) {
    rd.fail("dataset.implicit_fill: outside [rating_min, rating_max]");
  }
}

}  // namespace

AuditConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config root must be an object");
  }

  AuditConfig cfg;
  std::vector<std::string> violations;
  Reader rd(violations);

  if (!doc.contains("dataset")) {
    violations.push_back("dataset: missing required key");
  }
  for (const auto& [key, v] : doc.items()) {
    if (key == "dataset") {
      read_dataset(v, base_dir, cfg.dataset, rd);
    } else if (key == "algorithms") {
      if (!v.is_array() || v.empty()) {
        rd.fail("algorithms: expected a non-empty array");
        continue;
      }
      cfg.algorithms.clear();
      for (const auto& a : v) {
        auto parsed = a.is_string() ? parse_algorithm(a.get<std::string>()) : std::nullopt;
        if (!parsed) {
          rd.fail("algorithms: unknown algorithm " + a.dump());
        } else if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), *parsed) != cfg.algorithms.end()) {
          rd.fail("algorithms: duplicate " + a.dump());
        } else {
          cfg.algorithms.push_back(*parsed);
        }
      }
    } else if (key == "hyperparams") {
      if (v.is_object() && v.contains("seed")) {
        rd.fail("hyperparams.seed: model seeds are derived from the root seed; set `seed` instead");
        json copy = v;
        copy.erase("seed");
        json_io::merge_hyper_params(copy, cfg.hyperparams, violations, "hyperparams.");
      } else {
        json_io::merge_hyper_params(v, cfg.hyperparams, violations, "hyperparams.");
      }
    } else if (key == "folds") {
      rd.count(v, key, cfg.folds, 2);
    } else if (key == "top_n") {
      rd.count(v, key, cfg.top_n, 1);
    } else if (key == "groups") {
      rd.count(v, key, cfg.groups, 1);
    } else if (key == "display_genres") {
      rd.count(v, key, cfg.display_genres, 1);
    } else if (key == "workers") {
      rd.count(v, key, cfg.workers, 1);
    } else if (key == "alpha") {
      rd.real(v, key, cfg.alpha);
      if (v.is_number() && !(cfg.alpha >= 0.0 && cfg.alpha < 1.0)) rd.fail("alpha: expected 0 <= alpha < 1");
    } else if (key == "significance_level") {
      rd.real(v, key, cfg.significance_level);
      if (v.is_number() && !(cfg.significance_level > 0.0 && cfg.significance_level < 1.0)) {
        rd.fail("significance_level: expected a value in (0, 1)");
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) {
        rd.fail("seed: expected a non-negative integer");
      } else {
        cfg.seed = v.get<std::uint64_t>();
      }
    } else if (key == "output_dir") {
      std::string p;
      rd.text(v, key, p);
      if (!p.empty()) cfg.output_dir = resolve(base_dir, p);
    } else if (key == "popularity_basis") {
      std::string s;
      rd.text(v, key, s);
      if (s == "distinct") cfg.popularity_basis = PopularityBasis::DistinctItems;
      else if (s == "rating_weighted") cfg.popularity_basis = PopularityBasis::RatingWeighted;
      else rd.fail("popularity_basis: expected distinct or rating_weighted");
    } else if (key == "mc_weighting") {
      std::string s;
      rd.text(v, key, s);
      if (s == "uniform") cfg.mc_weighting = McWeighting::Uniform;
      else if (s == "rating") cfg.mc_weighting = McWeighting::Rating;
      else rd.fail("mc_weighting: expected uniform or rating");
    } else if (key == "per_fold_popularity") {
      rd.flag(v, key, cfg.per_fold_popularity);
    } else if (key == "similarity") {
      std::string s;
      rd.text(v, key, s);
      if (auto sim = parse_similarity(s)) cfg.hyperparams.similarity = *sim;
      else rd.fail("similarity: expected one of msd, cosine, pearson");
    } else {
      rd.fail(key + ": unknown key");
    }
  }
  if (!doc.contains("output_dir")) {
    cfg.output_dir = resolve(base_dir, cfg.output_dir.string());
  }

  try {
    cfg.hyperparams.validate();
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) violations.push_back("hyperparams." + v);
  }

  if (!violations.empty()) {
    throw ConfigError(std::move(violations));
  }
  return cfg;
}

AuditConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(buf.str(), base);
}

std::string config_echo(const AuditConfig& c) {
  json ds{
      {"name", c.dataset.name},
      {"ratings", std::filesystem::absolute(c.dataset.ratings).lexically_normal().string()},
      {"genres", std::filesystem::absolute(c.dataset.genres).lexically_normal().string()},
      {"schema", std::string(schema_name(c.dataset.schema))},
      {"delimiter", std::string(1, c.dataset.delimiter)},
      {"playcount_range", {c.dataset.playcount_range.min, c.dataset.playcount_range.max}},
      {"implicit_fill", c.dataset.implicit_fill},
  };
  if (c.dataset.rating_range) {
    ds["rating_min"] = c.dataset.rating_range->min;
    ds["rating_max"] = c.dataset.rating_range->max;
  }
  json algorithms = json::array();
  for (auto a : c.algorithms) algorithms.push_back(std::string(algorithm_name(a)));
  json hp = json_io::to_json(c.hyperparams);
  hp.erase("seed");

  json doc{
      {"dataset", std::move(ds)},
      {"algorithms", std::move(algorithms)},
      {"hyperparams", std::move(hp)},
      {"folds", c.folds},
      {"top_n", c.top_n},
      {"groups", c.groups},
      {"alpha", c.alpha},
      {"significance_level", c.significance_level},
      {"display_genres", c.display_genres},
      {"seed", c.seed},
      {"output_dir", std::filesystem::absolute(c.output_dir).lexically_normal().string()},
      {"popularity_basis", std::string(basis_name(c.popularity_basis))},
      {"mc_weighting", std::string(weighting_name(c.mc_weighting))},
      {"per_fold_popularity", c.per_fold_popularity},
      {"workers", c.workers},
  };
  return doc.dump(2);
}

std::uint64_t fold_plan_seed(std::uint64_t root) { return derive_seed(root, 0, 0); }

std::uint64_t model_seed(std::uint64_t root, Algorithm algorithm, std::size_t fold) {
  return derive_seed(root, 1 + static_cast<std::uint64_t>(algorithm), fold);
}

}  // namespace popaudit
