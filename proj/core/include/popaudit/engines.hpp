#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "popaudit/corpus.hpp"

namespace popaudit {

enum class Algorithm { UserItemAvg, UserKNN, UserKNNAvg, NMF, CoClustering };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::UserItemAvg, Algorithm::UserKNN, Algorithm::UserKNNAvg,
                                               Algorithm::NMF, Algorithm::CoClustering};

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

enum class Similarity { MSD, Cosine, Pearson };

std::string_view similarity_name(Similarity s);
std::optional<Similarity> parse_similarity(std::string_view name);

// Defaults are the reference framework's out-of-the-box settings; the audit
// deliberately runs untuned models.
struct HyperParams {
  // UserKNN / UserKNNAvg
  std::size_t knn_k = 40;
  std::size_t knn_min_k = 1;
  std::size_t knn_min_support = 1;
  Similarity similarity = Similarity::MSD;

  // NMF
  std::size_t nmf_factors = 15;
  std::size_t nmf_epochs = 50;
  double nmf_reg_user = 0.06;
  double nmf_reg_item = 0.06;

  // Co-Clustering
  std::size_t user_clusters = 3;
  std::size_t item_clusters = 3;
  std::size_t cocluster_epochs = 20;

  // UserItemAvg baseline (alternating least squares)
  std::size_t bias_epochs = 10;
  double bias_reg_item = 10.0;
  double bias_reg_user = 15.0;

  std::uint64_t seed = 0;

  // Throws ConfigError listing every violated bound.
  void validate() const;
};

struct Prediction {
  double value = 0.0;
  // True when the full formula could not be applied and a fallback tier
  // (user/item mean or global mean) produced the value.
  bool fallback = false;
};

struct FitDiagnostics {
  // NMF: training RMSE after each epoch. Co-Clustering: sum of squared
  // training residuals after each round, entry 0 being the random start.
  std::vector<double> epoch_objective;
  // NMF: smallest factor entry after each epoch.
  std::vector<double> epoch_min_factor;
  // Co-Clustering: clusters re-seeded because they went empty.
  std::size_t reseeded_clusters = 0;
};

// Fitted predictor. predict() always returns a value inside clip_range() and
// is safe to call concurrently.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual Algorithm algorithm() const noexcept = 0;
  virtual Prediction predict_detailed(UserIndex u, ItemIndex i) const = 0;

  double predict(UserIndex u, ItemIndex i) const { return predict_detailed(u, i).value; }

  double global_mean() const noexcept { return global_mean_; }
  RatingRange clip_range() const noexcept { return range_; }
  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  const HyperParams& hyper_params() const noexcept { return params_; }

 protected:
  TrainedModel(double global_mean, RatingRange range, HyperParams params)
      : global_mean_(global_mean), range_(range), params_(params) {}

  Prediction clipped(double value, bool fallback) const noexcept { return {range_.clip(value), fallback}; }

  double global_mean_;
  RatingRange range_;
  HyperParams params_;
  FitDiagnostics diagnostics_;
};

// mu + b_u + b_i
class BaselineModel final : public TrainedModel {
 public:
  BaselineModel(double global_mean, std::vector<double> user_bias, std::vector<double> item_bias,
                std::vector<bool> known_users, std::vector<bool> known_items, RatingRange range,
                HyperParams params = {});

  Algorithm algorithm() const noexcept override { return Algorithm::UserItemAvg; }
  Prediction predict_detailed(UserIndex u, ItemIndex i) const override;

  const std::vector<double>& user_bias() const noexcept { return user_bias_; }
  const std::vector<double>& item_bias() const noexcept { return item_bias_; }
  const std::vector<bool>& known_users() const noexcept { return known_users_; }
  const std::vector<bool>& known_items() const noexcept { return known_items_; }

 private:
  std::vector<double> user_bias_;
  std::vector<double> item_bias_;
  std::vector<bool> known_users_;
  std::vector<bool> known_items_;
};

// User-based neighbourhood model. With `centered`, neighbours contribute
// mean-centred ratings added to the target user's mean (UserKNNAvg).
class KnnModel final : public TrainedModel {
 public:
  KnnModel(RatingTable train, std::vector<double> similarity, bool centered, HyperParams params);

  Algorithm algorithm() const noexcept override {
    return centered_ ? Algorithm::UserKNNAvg : Algorithm::UserKNN;
  }
  Prediction predict_detailed(UserIndex u, ItemIndex i) const override;

  double similarity(UserIndex a, UserIndex b) const noexcept { return similarity_[a * n_users_ + b]; }
  const std::vector<double>& similarity_matrix() const noexcept { return similarity_; }
  const RatingTable& train() const noexcept { return train_; }
  double user_mean(UserIndex u) const noexcept { return user_mean_[u]; }
  bool centered() const noexcept { return centered_; }

 private:
  RatingTable train_;
  std::vector<double> similarity_;  // dense, row-major n_users x n_users
  std::vector<double> user_mean_;
  std::size_t n_users_;
  bool centered_;
};

// Non-negative factorisation, prediction dot(P_u, Q_i).
class NmfModel final : public TrainedModel {
 public:
  NmfModel(double global_mean, std::size_t factors, std::vector<double> user_factors,
           std::vector<double> item_factors, std::vector<bool> known_users, std::vector<bool> known_items,
           RatingRange range, HyperParams params);

  Algorithm algorithm() const noexcept override { return Algorithm::NMF; }
  Prediction predict_detailed(UserIndex u, ItemIndex i) const override;

  std::size_t factors() const noexcept { return factors_; }
  // Row-major, one row of `factors()` entries per user / item.
  const std::vector<double>& user_factors() const noexcept { return user_factors_; }
  const std::vector<double>& item_factors() const noexcept { return item_factors_; }
  const std::vector<bool>& known_users() const noexcept { return known_users_; }
  const std::vector<bool>& known_items() const noexcept { return known_items_; }

  double raw_score(UserIndex u, ItemIndex i) const noexcept;

 private:
  friend std::unique_ptr<TrainedModel> fit_nmf(const RatingTable&, const HyperParams&);

  std::size_t factors_;
  std::vector<double> user_factors_;
  std::vector<double> item_factors_;
  std::vector<bool> known_users_;
  std::vector<bool> known_items_;
};

struct CoClusterState {
  std::vector<std::size_t> user_cluster;  // by user index
  std::vector<std::size_t> item_cluster;  // by item index
  std::vector<double> user_mean;          // 0 for users without ratings
  std::vector<double> item_mean;
  std::vector<bool> known_users;
  std::vector<bool> known_items;
  std::vector<double> user_cluster_mean;  // size user_clusters
  std::vector<double> item_cluster_mean;  // size item_clusters
  std::vector<double> cocluster_mean;     // row-major user_clusters x item_clusters
  std::size_t user_clusters = 1;
  std::size_t item_clusters = 1;
};

// predict(u,i) = A_co(g(u),h(i)) + (mean_u - A_u(g(u))) + (mean_i - A_i(h(i)))
class CoClusteringModel final : public TrainedModel {
 public:
  CoClusteringModel(double global_mean, CoClusterState state, RatingRange range, HyperParams params);

  Algorithm algorithm() const noexcept override { return Algorithm::CoClustering; }
  Prediction predict_detailed(UserIndex u, ItemIndex i) const override;

  const CoClusterState& state() const noexcept { return state_; }

 private:
  friend std::unique_ptr<TrainedModel> fit_coclustering(const RatingTable&, const HyperParams&);

  CoClusterState state_;
};

std::unique_ptr<TrainedModel> fit_user_item_avg(const RatingTable& train, const HyperParams& hp);
std::unique_ptr<TrainedModel> fit_user_knn(const RatingTable& train, const HyperParams& hp);
std::unique_ptr<TrainedModel> fit_user_knn_avg(const RatingTable& train, const HyperParams& hp);
// Throws FitError when a training rating is not strictly positive.
std::unique_ptr<TrainedModel> fit_nmf(const RatingTable& train, const HyperParams& hp);
std::unique_ptr<TrainedModel> fit_coclustering(const RatingTable& train, const HyperParams& hp);

std::unique_ptr<TrainedModel> fit(Algorithm algorithm, const RatingTable& train, const HyperParams& hp);

// Dense user-user similarity over co-rated items of `train`. Pairs with fewer
// than min_support co-rated items get 0; the diagonal is 1.
std::vector<double> user_similarity(const RatingTable& train, Similarity kind, std::size_t min_support = 1);

// Structured-text model dump (algorithm tag, hyperparameters, parameters).
std::string dump_model(const TrainedModel& model);
std::unique_ptr<TrainedModel> load_model(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
std::unique_ptr<TrainedModel> load_model_file(const std::filesystem::path& path);

}  // namespace popaudit
