#include "popaudit/engines.hpp"

#include "popaudit/errors.hpp"

namespace popaudit {

BaselineModel::BaselineModel(double global_mean, std::vector<double> user_bias, std::vector<double> item_bias,
                             std::vector<bool> known_users, std::vector<bool> known_items, RatingRange range,
                             HyperParams params)
    : TrainedModel(global_mean, range, params),
      user_bias_(std::move(user_bias)),
      item_bias_(std::move(item_bias)),
      known_users_(std::move(known_users)),
      known_items_(std::move(known_items)) {}

Prediction BaselineModel::predict_detailed(UserIndex u, ItemIndex i) const {
  const bool user_known = u < known_users_.size() && known_users_[u];
  const bool item_known = i < known_items_.size() && known_items_[i];
  double estimate = global_mean_;
  if (user_known) estimate += user_bias_[u];
  if (item_known) estimate += item_bias_[i];
  return clipped(estimate, !(user_known && item_known));
}

std::unique_ptr<TrainedModel> fit_user_item_avg(const RatingTable& train, const HyperParams& hp) {
  hp.validate();
  if (train.empty()) {
    throw FitError("UserItemAvg: empty training set");
  }
  const std::size_t n_users = train.user_count();
  const std::size_t n_items = train.item_count();
  const double mu = train.mean();

  std::vector<double> bu(n_users, 0.0);
  std::vector<double> bi(n_items, 0.0);
  for (std::size_t epoch = 0; epoch < hp.bias_epochs; ++epoch) {
    for (ItemIndex i = 0; i < n_items; ++i) {
      const auto positions = train.item_positions(i);
      if (positions.empty()) continue;
      double dev = 0.0;
      for (auto pos : positions) {
        const auto& r = train[pos];
        dev += r.value - mu - bu[r.user];
      }
      bi[i] = dev / (hp.bias_reg_item + static_cast<double>(positions.size()));
    }
    for (UserIndex u = 0; u < n_users; ++u) {
      const auto profile = train.user_ratings(u);
      if (profile.empty()) continue;
      double dev = 0.0;
      for (const auto& r : profile) {
        dev += r.value - mu - bi[r.item];
      }
      bu[u] = dev / (hp.bias_reg_user + static_cast<double>(profile.size()));
    }
  }

  std::vector<bool> known_users(n_users), known_items(n_items);
  for (UserIndex u = 0; u < n_users; ++u) known_users[u] = train.user_degree(u) > 0;
  for (ItemIndex i = 0; i < n_items; ++i) known_items[i] = train.item_degree(i) > 0;
  return std::make_unique<BaselineModel>(mu, std::move(bu), std::move(bi), std::move(known_users),
                                         std::move(known_items), train.range(), hp);
}

}  // namespace popaudit
