#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "popaudit/audit.hpp"
#include "popaudit/errors.hpp"

namespace popaudit {
namespace {

using testing::scratch_dir;
using testing::write_text;

class ConfigTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir("config");
    write_text(dir_ / "r.csv", "user,item,rating\n1,1,4\n");
    write_text(dir_ / "g.csv", "item,genres\n1,rock\n");
  }

  AuditConfig parse(const std::string& extra) {
    return parse_config(R"({"dataset": {"ratings": "r.csv", "genres": "g.csv"})" + extra + "}", dir_);
  }

  std::vector<std::string> violations(const std::string& text) {
    try {
      parse_config(text, dir_);
    } catch (const ConfigError& e) {
      return e.violations();
    }
    return {};
  }

  std::filesystem::path dir_;
};

TEST_F(ConfigTest, MinimalConfigResolvesDefaults) {
  const auto c = parse("");
  EXPECT_EQ(c.folds, 5u);
  EXPECT_EQ(c.top_n, 10u);
  EXPECT_DOUBLE_EQ(c.alpha, 0.01);
  EXPECT_EQ(c.groups, 3u);
  EXPECT_EQ(c.algorithms.size(), 5u);
  EXPECT_EQ(c.dataset.ratings, (dir_ / "r.csv").lexically_normal());
  EXPECT_EQ(c.output_dir, (dir_ / "audit_out").lexically_normal());
  EXPECT_EQ(c.popularity_basis, PopularityBasis::DistinctItems);
  EXPECT_EQ(c.hyperparams.similarity, Similarity::MSD);
}

TEST_F(ConfigTest, SingleFoldRejected) {
  auto v = violations(R"({"dataset": {"ratings": "r.csv", "genres": "g.csv"}, "folds": 1})");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("folds"), std::string::npos);
}

TEST_F(ConfigTest, UnknownKeyNamed) {
  auto v = violations(R"({"dataset": {"ratings": "r.csv", "genres": "g.csv", "colour": 1}, "fold": 3})");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NE(v[0].find("colour"), std::string::npos);
  EXPECT_NE(v[1].find("fold"), std::string::npos);
}

TEST_F(ConfigTest, EveryViolationListed) {
  auto v = violations(
      R"({"dataset": {"ratings": "missing.csv"}, "top_n": 0, "alpha": 2, "algorithms": ["SVD"],
          "hyperparams": {"knn_k": 0, "seed": 3}})");
  EXPECT_GE(v.size(), 6u);
  std::string all;
  for (const auto& s : v) all += s + "\n";
  for (const char* key : {"missing.csv", "dataset.genres", "top_n", "alpha", "SVD", "knn_k", "hyperparams.seed"}) {
    EXPECT_NE(all.find(key), std::string::npos) << key << " not in\n" << all;
  }
}

TEST_F(ConfigTest, NotJsonRejected) {
  EXPECT_THROW(parse_config("{", dir_), ConfigError);
  EXPECT_THROW(parse_config("[]", dir_), ConfigError);
}

TEST_F(ConfigTest, SwitchesParsed) {
  const auto c = parse(
      R"(, "popularity_basis": "rating_weighted", "mc_weighting": "rating", "per_fold_popularity": true,
         "similarity": "pearson", "algorithms": ["NMF", "Co-Clustering"], "seed": 9, "workers": 2)");
  EXPECT_EQ(c.popularity_basis, PopularityBasis::RatingWeighted);
  EXPECT_EQ(c.mc_weighting, McWeighting::Rating);
  EXPECT_TRUE(c.per_fold_popularity);
  EXPECT_EQ(c.hyperparams.similarity, Similarity::Pearson);
  ASSERT_EQ(c.algorithms.size(), 2u);
  EXPECT_EQ(c.algorithms[1], Algorithm::CoClustering);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.workers, 2u);
}

TEST_F(ConfigTest, EchoReproducesConfig) {
  const auto c = parse(R"(, "alpha": 0.1, "hyperparams": {"nmf_factors": 4, "bias_reg_user": 0.3}, "groups": 4)");
  const auto echo = config_echo(c);
  const auto again = parse_config(echo, "/nonexistent-base");
  EXPECT_EQ(config_echo(again), echo);
  EXPECT_EQ(again.hyperparams.nmf_factors, 4u);
  EXPECT_DOUBLE_EQ(again.hyperparams.bias_reg_user, 0.3);
  EXPECT_EQ(again.dataset.ratings, c.dataset.ratings);
}

TEST_F(ConfigTest, ValidateReadsFileRelativeToItsDirectory) {
  write_text(dir_ / "audit.json", R"({"dataset": {"ratings": "r.csv", "genres": "g.csv"}, "top_n": 5})");
  const auto c = validate_config(dir_ / "audit.json");
  EXPECT_EQ(c.top_n, 5u);
  EXPECT_THROW(validate_config(dir_ / "absent.json"), ConfigError);
}

TEST(Seeds, DerivedPerAlgorithmAndFold) {
  EXPECT_NE(model_seed(42, Algorithm::NMF, 0), model_seed(42, Algorithm::NMF, 1));
  EXPECT_NE(model_seed(42, Algorithm::NMF, 0), model_seed(42, Algorithm::CoClustering, 0));
  EXPECT_NE(model_seed(42, Algorithm::NMF, 0), model_seed(43, Algorithm::NMF, 0));
  EXPECT_EQ(model_seed(42, Algorithm::NMF, 3), model_seed(42, Algorithm::NMF, 3));
  EXPECT_NE(fold_plan_seed(1), fold_plan_seed(2));
}

}  // namespace
}  // namespace popaudit
