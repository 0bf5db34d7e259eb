#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "popaudit/audit.hpp"
#include "popaudit/errors.hpp"
#include "popaudit/synthetic.hpp"

namespace fs = std::filesystem;
using namespace popaudit;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Overrides& o, bool run_flags) {
  cmd->add_option("config,--config", o.config, "Path to the JSON audit config")->required();
  if (run_flags) {
    cmd->add_option("--out", o.out, "Output directory (overrides output_dir)");
    cmd->add_option("--workers", o.workers, "Parallel (fold x algorithm) tasks")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--seed", o.seed, "Root seed (overrides seed)");
}

AuditConfig load_config(const Overrides& o) {
  if (o.config.empty()) {
    throw ConfigError("no config given; pass <config> or --config <path>");
  }
  auto cfg = validate_config(o.config);
  if (!o.out.empty()) cfg.output_dir = fs::absolute(o.out).lexically_normal();
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

void print_summary(const AuditReport& r) {
  std::printf("%-14s %-8s %8s %8s %8s\n", "algorithm", "group", "MAE", "MC", "PL");
  for (auto alg : r.config.algorithms) {
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
      auto mark = [&](Metric m) {
        const auto* s = r.metrics.find_significance(alg, m, g);
        return std::string(s && s->significant ? "*" : " ");
      };
      std::printf("%-14s %-8s %7s%s %7s%s %7s%s\n", std::string(algorithm_name(alg)).c_str(),
                  r.groups[g].name.c_str(), fmt(r.metrics.mean(alg, g, Metric::MAE)).c_str(),
                  mark(Metric::MAE).c_str(), fmt(r.metrics.mean(alg, g, Metric::MC)).c_str(),
                  mark(Metric::MC).c_str(), fmt(r.metrics.mean(alg, g, Metric::PL)).c_str(),
                  mark(Metric::PL).c_str());
    }
  }
  std::printf("* significant against %s in every fold\n", r.groups.empty() ? "-" : r.groups[0].name.c_str());
}

std::vector<std::string> split_dat(const std::string& line) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (true) {
    const auto next = line.find("::", at);
    out.push_back(line.substr(at, next == std::string::npos ? std::string::npos : next - at));
    if (next == std::string::npos) break;
    at = next + 2;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

// MovieLens-1M ships ratings.dat (user::item::rating::ts) and movies.dat
// (item::title::A|B). Rewrites both into the loader's CSV layout.
void import_ml1m(const fs::path& src, const fs::path& dst) {
  fs::create_directories(dst);
  auto open = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return in;
  };
  auto ratings_in = open(src / "ratings.dat");
  std::ofstream ratings_out(dst / "ratings.csv", std::ios::binary | std::ios::trunc);
  ratings_out << "user,item,rating\n";
  std::string line;
  std::size_t n = 0;
  while (std::getline(ratings_in, line)) {
    const auto f = split_dat(line);
    if (f.size() < 3) continue;
    ratings_out << f[0] << ',' << f[1] << ',' << f[2] << '\n';
    ++n;
  }
  auto movies_in = open(src / "movies.dat");
  std::ofstream genres_out(dst / "genres.csv", std::ios::binary | std::ios::trunc);
  genres_out << "item,genres\n";
  while (std::getline(movies_in, line)) {
    const auto f = split_dat(line);
    if (f.size() < 3) continue;
    genres_out << f[0] << ',' << f.back() << '\n';
  }
  std::ofstream cfg(dst / "audit.json", std::ios::binary | std::ios::trunc);
  cfg << "{\n"
         "  \"dataset\": {\n"
         "    \"name\": \"ML-1M\",\n"
         "    \"ratings\": \"ratings.csv\",\n"
         "    \"genres\": \"genres.csv\",\n"
         "    \"rating_min\": 1,\n"
         "    \"rating_max\": 5\n"
         "  },\n"
         "  \"output_dir\": \"audit_out\"\n"
         "}\n";
  if (!ratings_out || !genres_out || !cfg) throw std::runtime_error("cannot write into " + dst.string());
  std::printf("%zu ratings converted into %s\n", n, dst.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Popularity-bias audit for collaborative-filtering recommenders"};
  app.require_subcommand(1);

  Overrides run_o, stats_o, validate_o;
  auto* run = app.add_subcommand("run", "Run the full audit and write the report directory");
  add_common(run, run_o, true);
  auto* stats = app.add_subcommand("stats", "Load the dataset and print its statistics");
  add_common(stats, stats_o, false);
  auto* validate = app.add_subcommand("validate", "Validate a config and print it with defaults resolved");
  add_common(validate, validate_o, false);

  std::string synth_out = "data/synthetic";
  std::uint64_t synth_seed = SyntheticSpec{}.seed;
  auto* synth = app.add_subcommand("synth", "Write the synthetic dataset and a matching config");
  synth->add_option("--out", synth_out, "Target directory");
  synth->add_option("--seed", synth_seed, "Generator seed");

  std::string ml_src, ml_out = "data/ml-1m";
  auto* import = app.add_subcommand("import-ml1m", "Convert a MovieLens-1M download into CSV plus a config");
  import->add_option("source", ml_src, "Directory holding ratings.dat and movies.dat")->required();
  import->add_option("--out", ml_out, "Target directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      std::cout << config_echo(load_config(validate_o)) << '\n';
    } else if (*stats) {
      const auto result = run_stats(load_config(stats_o));
      std::cout << stats_json(result.stats, result.dropped_ratings, result.dropped_items);
    } else if (*run) {
      const auto cfg = load_config(run_o);
      const auto report = run_audit(cfg);
      write_report(report, cfg.output_dir);
      print_summary(report);
      std::printf("report written to %s (%.2f s)\n", cfg.output_dir.string().c_str(), report.wall_seconds);
    } else if (*synth) {
      SyntheticSpec spec;
      spec.seed = synth_seed;
      write_synthetic(generate_synthetic(spec), synth_out);
      std::ofstream cfg(fs::path(synth_out) / "audit.json", std::ios::binary | std::ios::trunc);
      cfg << "{\n"
             "  \"dataset\": {\n"
             "    \"name\": \"synthetic\",\n"
             "    \"ratings\": \"ratings.csv\",\n"
             "    \"genres\": \"genres.csv\",\n"
             "    \"rating_min\": 1,\n"
             "    \"rating_max\": 5\n"
             "  },\n"
             "  \"output_dir\": \"audit_out\"\n"
             "}\n";
      std::printf("synthetic dataset written to %s\n", synth_out.c_str());
    } else if (*import) {
      import_ml1m(ml_src, ml_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "audit: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "audit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
