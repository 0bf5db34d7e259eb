#include "popaudit/engines.hpp"

#include "popaudit/errors.hpp"

namespace popaudit {

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::UserItemAvg:
      return "UserItemAvg";
    case Algorithm::UserKNN:
      return "UserKNN";
    case Algorithm::UserKNNAvg:
      return "UserKNNAvg";
    case Algorithm::NMF:
      return "NMF";
    case Algorithm::CoClustering:
      return "CoClustering";
  }
  return "UserItemAvg";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms) {
    if (algorithm_name(a) == name) {
      return a;
    }
  }
  if (name == "Co-Clustering") {
    return Algorithm::CoClustering;
  }
  return std::nullopt;
}

std::string_view similarity_name(Similarity s) {
  switch (s) {
    case Similarity::MSD:
      return "msd";
    case Similarity::Cosine:
      return "cosine";
    case Similarity::Pearson:
      return "pearson";
  }
  return "msd";
}

std::optional<Similarity> parse_similarity(std::string_view name) {
  for (auto s : {Similarity::MSD, Similarity::Cosine, Similarity::Pearson}) {
    if (similarity_name(s) == name) {
      return s;
    }
  }
  return std::nullopt;
}

void HyperParams::validate() const {
  std::vector<std::string> errors;
  auto at_least_one = [&](std::size_t v, const char* name) {
    if (v < 1) errors.push_back(std::string(name) + " must be >= 1");
  };
  auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0.0)) errors.push_back(std::string(name) + " must be >= 0");
  };
  at_least_one(knn_k, "knn_k");
  at_least_one(knn_min_k, "knn_min_k");
  at_least_one(knn_min_support, "knn_min_support");
  at_least_one(nmf_factors, "nmf_factors");
  at_least_one(nmf_epochs, "nmf_epochs");
  at_least_one(user_clusters, "user_clusters");
  at_least_one(item_clusters, "item_clusters");
  at_least_one(cocluster_epochs, "cocluster_epochs");
  at_least_one(bias_epochs, "bias_epochs");
  non_negative(nmf_reg_user, "nmf_reg_user");
  non_negative(nmf_reg_item, "nmf_reg_item");
  non_negative(bias_reg_user, "bias_reg_user");
  non_negative(bias_reg_item, "bias_reg_item");
  if (knn_min_k > knn_k) {
    errors.push_back("knn_min_k must not exceed knn_k");
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
}

std::unique_ptr<TrainedModel> fit(Algorithm algorithm, const RatingTable& train, const HyperParams& hp) {
  switch (algorithm) {
    case Algorithm::UserItemAvg:
      return fit_user_item_avg(train, hp);
    case Algorithm::UserKNN:
      return fit_user_knn(train, hp);
    case Algorithm::UserKNNAvg:
      return fit_user_knn_avg(train, hp);
    case Algorithm::NMF:
      return fit_nmf(train, hp);
    case Algorithm::CoClustering:
      return fit_coclustering(train, hp);
  }
  throw FitError("unknown algorithm");
}

}  // namespace popaudit
