#include <algorithm>
#include <limits>

#include "popaudit/engines.hpp"
#include "popaudit/errors.hpp"
#include "popaudit/random.hpp"

namespace popaudit {

CoClusteringModel::CoClusteringModel(double global_mean, CoClusterState state, RatingRange range,
                                     HyperParams params)
    : TrainedModel(global_mean, range, params), state_(std::move(state)) {
  if (state_.cocluster_mean.size() != state_.user_clusters * state_.item_clusters ||
      state_.user_cluster_mean.size() != state_.user_clusters ||
      state_.item_cluster_mean.size() != state_.item_clusters) {
    throw FitError("co-clustering state has inconsistent cluster counts");
  }
}

Prediction CoClusteringModel::predict_detailed(UserIndex u, ItemIndex i) const {
  const auto& s = state_;
  const bool user_known = u < s.known_users.size() && s.known_users[u];
  const bool item_known = i < s.known_items.size() && s.known_items[i];
  if (user_known && item_known) {
    const std::size_t g = s.user_cluster[u];
    const std::size_t h = s.item_cluster[i];
    const double estimate = s.cocluster_mean[g * s.item_clusters + h] + (s.user_mean[u] - s.user_cluster_mean[g]) +
                            (s.item_mean[i] - s.item_cluster_mean[h]);
    return clipped(estimate, false);
  }
  if (user_known) return clipped(s.user_mean[u], true);
  if (item_known) return clipped(s.item_mean[i], true);
  return clipped(global_mean_, true);
}

namespace {

void compute_cluster_means(const RatingTable& train, CoClusterState& s, double mu) {
  const std::size_t gu = s.user_clusters;
  const std::size_t gi = s.item_clusters;
  std::vector<double> su(gu, 0.0), si(gi, 0.0), sc(gu * gi, 0.0);
  std::vector<std::size_t> nu(gu, 0), ni(gi, 0), nc(gu * gi, 0);
  for (const auto& r : train.ratings()) {
    const std::size_t g = s.user_cluster[r.user];
    const std::size_t h = s.item_cluster[r.item];
    su[g] += r.value;
    ++nu[g];
    si[h] += r.value;
    ++ni[h];
    sc[g * gi + h] += r.value;
    ++nc[g * gi + h];
  }
  auto mean_or = [mu](double sum, std::size_t n) { return n > 0 ? sum / static_cast<double>(n) : mu; };
  for (std::size_t g = 0; g < gu; ++g) s.user_cluster_mean[g] = mean_or(su[g], nu[g]);
  for (std::size_t h = 0; h < gi; ++h) s.item_cluster_mean[h] = mean_or(si[h], ni[h]);
  for (std::size_t c = 0; c < gu * gi; ++c) s.cocluster_mean[c] = mean_or(sc[c], nc[c]);
}

double estimate(const CoClusterState& s, const Rating& r, std::size_t g, std::size_t h) {
  return s.cocluster_mean[g * s.item_clusters + h] + s.user_mean[r.user] - s.user_cluster_mean[g] +
         s.item_mean[r.item] - s.item_cluster_mean[h];
}

double objective(const RatingTable& train, const CoClusterState& s) {
  double sse = 0.0;
  for (const auto& r : train.ratings()) {
    const double e = r.value - estimate(s, r, s.user_cluster[r.user], s.item_cluster[r.item]);
    sse += e * e;
  }
  return sse;
}

// Moves the worst-fitting member of the largest cluster into every empty
// cluster. Returns the number of clusters re-seeded.
std::size_t reseed_empty(std::vector<std::size_t>& assignment, const std::vector<bool>& known,
                         const std::vector<double>& error, std::size_t clusters) {
  std::size_t reseeded = 0;
  while (true) {
    std::vector<std::size_t> size(clusters, 0);
    for (std::size_t x = 0; x < assignment.size(); ++x) {
      if (known[x]) ++size[assignment[x]];
    }
    auto empty = std::find(size.begin(), size.end(), std::size_t{0});
    if (empty == size.end()) break;
    const auto largest = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
    if (size[largest] < 2) break;
    std::size_t pick = assignment.size();
    for (std::size_t x = 0; x < assignment.size(); ++x) {
      if (!known[x] || assignment[x] != largest) continue;
      if (pick == assignment.size() || error[x] > error[pick]) pick = x;
    }
    assignment[pick] = static_cast<std::size_t>(empty - size.begin());
    ++reseeded;
  }
  return reseeded;
}

}  // namespace

// Alternating optimisation (George & Merugu): each round recomputes the
// cluster averages, then moves every user and then every item to the cluster
// minimising its squared training error under the prediction rule.
std::unique_ptr<TrainedModel> fit_coclustering(const RatingTable& train, const HyperParams& hp) {
  hp.validate();
  if (train.empty()) {
    throw FitError("CoClustering: empty training set");
  }
  const std::size_t n_users = train.user_count();
  const std::size_t n_items = train.item_count();
  const double mu = train.mean();

  CoClusterState s;
  s.user_clusters = hp.user_clusters;
  s.item_clusters = hp.item_clusters;
  s.user_cluster.resize(n_users);
  s.item_cluster.resize(n_items);
  s.user_mean.assign(n_users, 0.0);
  s.item_mean.assign(n_items, 0.0);
  s.known_users.assign(n_users, false);
  s.known_items.assign(n_items, false);
  s.user_cluster_mean.assign(s.user_clusters, mu);
  s.item_cluster_mean.assign(s.item_clusters, mu);
  s.cocluster_mean.assign(s.user_clusters * s.item_clusters, mu);

  Rng rng(hp.seed);
  for (auto& c : s.user_cluster) c = static_cast<std::size_t>(rng.below(s.user_clusters));
  for (auto& c : s.item_cluster) c = static_cast<std::size_t>(rng.below(s.item_clusters));

  for (UserIndex u = 0; u < n_users; ++u) {
    const auto profile = train.user_ratings(u);
    if (profile.empty()) continue;
    double sum = 0.0;
    for (const auto& r : profile) sum += r.value;
    s.user_mean[u] = sum / static_cast<double>(profile.size());
    s.known_users[u] = true;
  }
  for (ItemIndex i = 0; i < n_items; ++i) {
    const auto positions = train.item_positions(i);
    if (positions.empty()) continue;
    double sum = 0.0;
    for (auto pos : positions) sum += train[pos].value;
    s.item_mean[i] = sum / static_cast<double>(positions.size());
    s.known_items[i] = true;
  }

  FitDiagnostics diagnostics;
  compute_cluster_means(train, s, mu);
  diagnostics.epoch_objective.push_back(objective(train, s));

  std::vector<double> user_error(n_users, 0.0);
  std::vector<double> item_error(n_items, 0.0);
  std::vector<double> err;
  for (std::size_t epoch = 0; epoch < hp.cocluster_epochs; ++epoch) {
    compute_cluster_means(train, s, mu);

    err.assign(s.user_clusters, 0.0);
    for (UserIndex u = 0; u < n_users; ++u) {
      if (!s.known_users[u]) continue;
      std::fill(err.begin(), err.end(), 0.0);
      for (const auto& r : train.user_ratings(u)) {
        const std::size_t h = s.item_cluster[r.item];
        for (std::size_t g = 0; g < s.user_clusters; ++g) {
          const double e = r.value - estimate(s, r, g, h);
          err[g] += e * e;
        }
      }
      // Keep the current cluster unless another one is strictly better.
      std::size_t best = s.user_cluster[u];
      for (std::size_t g = 0; g < s.user_clusters; ++g) {
        if (err[g] < err[best]) best = g;
      }
      s.user_cluster[u] = best;
      user_error[u] = err[best];
    }
    diagnostics.reseeded_clusters += reseed_empty(s.user_cluster, s.known_users, user_error, s.user_clusters);

    err.assign(s.item_clusters, 0.0);
    for (ItemIndex i = 0; i < n_items; ++i) {
      if (!s.known_items[i]) continue;
      std::fill(err.begin(), err.end(), 0.0);
      for (auto pos : train.item_positions(i)) {
        const auto& r = train[pos];
        const std::size_t g = s.user_cluster[r.user];
        for (std::size_t h = 0; h < s.item_clusters; ++h) {
          const double e = r.value - estimate(s, r, g, h);
          err[h] += e * e;
        }
      }
      std::size_t best = s.item_cluster[i];
      for (std::size_t h = 0; h < s.item_clusters; ++h) {
        if (err[h] < err[best]) best = h;
      }
      s.item_cluster[i] = best;
      item_error[i] = err[best];
    }
    diagnostics.reseeded_clusters += reseed_empty(s.item_cluster, s.known_items, item_error, s.item_clusters);

    compute_cluster_means(train, s, mu);
    diagnostics.epoch_objective.push_back(objective(train, s));
  }

  auto model = std::make_unique<CoClusteringModel>(mu, std::move(s), train.range(), hp);
  model->diagnostics_ = std::move(diagnostics);
  return model;
}

}  // namespace popaudit
