#include <algorithm>
#include <cmath>

#include "popaudit/engines.hpp"
#include "popaudit/errors.hpp"

namespace popaudit {

namespace {

struct PairSums {
  std::size_t count = 0;
  double sum_a = 0.0;
  double sum_b = 0.0;
  double sum_aa = 0.0;
  double sum_bb = 0.0;
  double sum_ab = 0.0;
  double sum_sq_diff = 0.0;
};

double finish(const PairSums& s, Similarity kind, std::size_t min_support) {
  if (s.count < min_support || s.count == 0) {
    return 0.0;
  }
  switch (kind) {
    case Similarity::MSD:
      return 1.0 / (s.sum_sq_diff / static_cast<double>(s.count) + 1.0);
    case Similarity::Cosine: {
      const double denom = std::sqrt(s.sum_aa * s.sum_bb);
      return denom > 0.0 ? s.sum_ab / denom : 0.0;
    }
    case Similarity::Pearson: {
      const double n = static_cast<double>(s.count);
      const double num = n * s.sum_ab - s.sum_a * s.sum_b;
      const double var_a = n * s.sum_aa - s.sum_a * s.sum_a;
      const double var_b = n * s.sum_bb - s.sum_b * s.sum_b;
      const double denom = std::sqrt(std::max(0.0, var_a) * std::max(0.0, var_b));
      return denom > 0.0 ? num / denom : 0.0;
    }
  }
  return 0.0;
}

struct Neighbor {
  double sim;
  UserIndex user;
  double contribution;
};

}  // namespace

std::vector<double> user_similarity(const RatingTable& train, Similarity kind, std::size_t min_support) {
  const std::size_t n = train.user_count();
  std::vector<double> sim(n * n, 0.0);
  std::vector<PairSums> acc(n);
  std::vector<UserIndex> touched;

  for (UserIndex a = 0; a < n; ++a) {
    sim[a * n + a] = 1.0;
    touched.clear();
    for (const auto& ra : train.user_ratings(a)) {
      for (auto pos : train.item_positions(ra.item)) {
        const auto& rb = train[pos];
        if (rb.user <= a) continue;
        auto& s = acc[rb.user];
        if (s.count == 0) touched.push_back(rb.user);
        ++s.count;
        s.sum_a += ra.value;
        s.sum_b += rb.value;
        s.sum_aa += ra.value * ra.value;
        s.sum_bb += rb.value * rb.value;
        s.sum_ab += ra.value * rb.value;
        const double d = ra.value - rb.value;
        s.sum_sq_diff += d * d;
      }
    }
    for (auto b : touched) {
      const double value = finish(acc[b], kind, min_support);
      sim[a * n + b] = value;
      sim[b * n + a] = value;
      acc[b] = PairSums{};
    }
  }
  return sim;
}

KnnModel::KnnModel(RatingTable train, std::vector<double> similarity, bool centered, HyperParams params)
    : TrainedModel(train.mean(), train.range(), params),
      train_(std::move(train)),
      similarity_(std::move(similarity)),
      n_users_(train_.user_count()),
      centered_(centered) {
  if (similarity_.size() != n_users_ * n_users_) {
    throw FitError("similarity matrix does not match the user count");
  }
  user_mean_.assign(n_users_, 0.0);
  for (UserIndex u = 0; u < n_users_; ++u) {
    const auto profile = train_.user_ratings(u);
    if (profile.empty()) continue;
    double sum = 0.0;
    for (const auto& r : profile) sum += r.value;
    user_mean_[u] = sum / static_cast<double>(profile.size());
  }
}

Prediction KnnModel::predict_detailed(UserIndex u, ItemIndex i) const {
  if (u >= n_users_ || train_.user_degree(u) == 0) {
    return clipped(global_mean_, true);
  }
  const double own_mean = user_mean_[u];

  thread_local std::vector<Neighbor> candidates;
  candidates.clear();
  for (auto pos : train_.item_positions(i)) {
    const auto& r = train_[pos];
    if (r.user == u) continue;
    const double s = similarity(u, r.user);
    if (s > 0.0) {
      candidates.push_back({s, r.user, centered_ ? r.value - user_mean_[r.user] : r.value});
    }
  }

  const std::size_t k = std::min(params_.knn_k, candidates.size());
  auto by_similarity = [](const Neighbor& a, const Neighbor& b) {
    return a.sim != b.sim ? a.sim > b.sim : a.user < b.user;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                    by_similarity);

  double weight = 0.0;
  double weighted = 0.0;
  for (std::size_t n = 0; n < k; ++n) {
    weight += candidates[n].sim;
    weighted += candidates[n].sim * candidates[n].contribution;
  }
  if (k < params_.knn_min_k || weight <= 0.0) {
    return clipped(own_mean, true);
  }
  const double estimate = centered_ ? own_mean + weighted / weight : weighted / weight;
  return clipped(estimate, false);
}

namespace {
std::unique_ptr<TrainedModel> fit_knn(const RatingTable& train, const HyperParams& hp, bool centered) {
  hp.validate();
  if (train.empty()) {
    throw FitError(std::string(centered ? "UserKNNAvg" : "UserKNN") + ": empty training set");
  }
  auto sim = user_similarity(train, hp.similarity, hp.knn_min_support);
  return std::make_unique<KnnModel>(train, std::move(sim), centered, hp);
}
}  // namespace

std::unique_ptr<TrainedModel> fit_user_knn(const RatingTable& train, const HyperParams& hp) {
  return fit_knn(train, hp, false);
}

std::unique_ptr<TrainedModel> fit_user_knn_avg(const RatingTable& train, const HyperParams& hp) {
  return fit_knn(train, hp, true);
}

}  // namespace popaudit
