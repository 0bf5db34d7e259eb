#include <algorithm>
#include <cmath>
#include <limits>

#include "popaudit/engines.hpp"
#include "popaudit/errors.hpp"
#include "popaudit/random.hpp"

namespace popaudit {

NmfModel::NmfModel(double global_mean, std::size_t factors, std::vector<double> user_factors,
                   std::vector<double> item_factors, std::vector<bool> known_users, std::vector<bool> known_items,
                   RatingRange range, HyperParams params)
    : TrainedModel(global_mean, range, params),
      factors_(factors),
      user_factors_(std::move(user_factors)),
      item_factors_(std::move(item_factors)),
      known_users_(std::move(known_users)),
      known_items_(std::move(known_items)) {
  if (user_factors_.size() != known_users_.size() * factors_ || item_factors_.size() != known_items_.size() * factors_) {
    throw FitError("NMF factor matrices do not match the id space");
  }
}

double NmfModel::raw_score(UserIndex u, ItemIndex i) const noexcept {
  const double* p = &user_factors_[u * factors_];
  const double* q = &item_factors_[i * factors_];
  double dot = 0.0;
  for (std::size_t f = 0; f < factors_; ++f) {
    dot += p[f] * q[f];
  }
  return dot;
}

Prediction NmfModel::predict_detailed(UserIndex u, ItemIndex i) const {
  const bool user_known = u < known_users_.size() && known_users_[u];
  const bool item_known = i < known_items_.size() && known_items_[i];
  if (!user_known || !item_known) {
    return clipped(global_mean_, true);
  }
  return clipped(raw_score(u, i), false);
}

// Regularised multiplicative updates, unbiased variant:
//   p_uf <- p_uf * sum_i q_if r_ui / (sum_i q_if r^_ui + |I_u| lambda_p p_uf)
//   q_if <- q_if * sum_u p_uf r_ui / (sum_u p_uf r^_ui + |U_i| lambda_q q_if)
std::unique_ptr<TrainedModel> fit_nmf(const RatingTable& train, const HyperParams& hp) {
  hp.validate();
  if (train.empty()) {
    throw FitError("NMF: empty training set");
  }
  for (const auto& r : train.ratings()) {
    if (!(r.value > 0.0)) {
      throw FitError("NMF requires strictly positive ratings; shift the rating range so that its minimum is > 0");
    }
  }

  const std::size_t n_users = train.user_count();
  const std::size_t n_items = train.item_count();
  const std::size_t k = hp.nmf_factors;

  Rng rng(hp.seed);
  std::vector<double> p(n_users * k);
  std::vector<double> q(n_items * k);
  for (auto& v : p) v = rng.uniform_open();
  for (auto& v : q) v = rng.uniform_open();

  std::vector<double> user_num(n_users * k), user_den(n_users * k);
  std::vector<double> item_num(n_items * k), item_den(n_items * k);
  FitDiagnostics diagnostics;

  auto estimate_of = [&](const Rating& r) {
    double e = 0.0;
    for (std::size_t f = 0; f < k; ++f) e += p[r.user * k + f] * q[r.item * k + f];
    return e;
  };

  for (std::size_t epoch = 0; epoch < hp.nmf_epochs; ++epoch) {
    // User factors first, then item factors against the refreshed estimates.
    // Updating both from the same residuals scales each estimate twice and
    // can oscillate instead of converging.
    std::fill(user_num.begin(), user_num.end(), 0.0);
    std::fill(user_den.begin(), user_den.end(), 0.0);
    for (const auto& r : train.ratings()) {
      const double estimate = estimate_of(r);
      for (std::size_t f = 0; f < k; ++f) {
        user_num[r.user * k + f] += q[r.item * k + f] * r.value;
        user_den[r.user * k + f] += q[r.item * k + f] * estimate;
      }
    }
    for (UserIndex u = 0; u < n_users; ++u) {
      const double n_ratings = static_cast<double>(train.user_degree(u));
      if (n_ratings == 0.0) continue;
      for (std::size_t f = 0; f < k; ++f) {
        const std::size_t at = u * k + f;
        const double den = user_den[at] + n_ratings * hp.nmf_reg_user * p[at];
        if (den > 0.0) p[at] *= user_num[at] / den;
      }
    }

    std::fill(item_num.begin(), item_num.end(), 0.0);
    std::fill(item_den.begin(), item_den.end(), 0.0);
    for (const auto& r : train.ratings()) {
      const double estimate = estimate_of(r);
      for (std::size_t f = 0; f < k; ++f) {
        item_num[r.item * k + f] += p[r.user * k + f] * r.value;
        item_den[r.item * k + f] += p[r.user * k + f] * estimate;
      }
    }
    for (ItemIndex i = 0; i < n_items; ++i) {
      const double n_ratings = static_cast<double>(train.item_degree(i));
      if (n_ratings == 0.0) continue;
      for (std::size_t f = 0; f < k; ++f) {
        const std::size_t at = i * k + f;
        const double den = item_den[at] + n_ratings * hp.nmf_reg_item * q[at];
        if (den > 0.0) q[at] *= item_num[at] / den;
      }
    }

    double sq = 0.0;
    for (const auto& r : train.ratings()) {
      const double e = r.value - estimate_of(r);
      sq += e * e;
    }
    diagnostics.epoch_objective.push_back(std::sqrt(sq / static_cast<double>(train.size())));
    double min_factor = std::numeric_limits<double>::infinity();
    for (double v : p) min_factor = std::min(min_factor, v);
    for (double v : q) min_factor = std::min(min_factor, v);
    diagnostics.epoch_min_factor.push_back(min_factor);
  }

  std::vector<bool> known_users(n_users), known_items(n_items);
  for (UserIndex u = 0; u < n_users; ++u) known_users[u] = train.user_degree(u) > 0;
  for (ItemIndex i = 0; i < n_items; ++i) known_items[i] = train.item_degree(i) > 0;

  auto model = std::make_unique<NmfModel>(train.mean(), k, std::move(p), std::move(q), std::move(known_users),
                                          std::move(known_items), train.range(), hp);
  model->diagnostics_ = std::move(diagnostics);
  return model;
}

}  // namespace popaudit
