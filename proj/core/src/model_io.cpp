#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "popaudit/engines.hpp"
#include "popaudit/errors.hpp"

namespace popaudit {

namespace json_io {

json to_json(const HyperParams& hp) {
  return json{
      {"knn_k", hp.knn_k},
      {"knn_min_k", hp.knn_min_k},
      {"knn_min_support", hp.knn_min_support},
      {"similarity", std::string(similarity_name(hp.similarity))},
      {"nmf_factors", hp.nmf_factors},
      {"nmf_epochs", hp.nmf_epochs},
      {"nmf_reg_user", hp.nmf_reg_user},
      {"nmf_reg_item", hp.nmf_reg_item},
      {"user_clusters", hp.user_clusters},
      {"item_clusters", hp.item_clusters},
      {"cocluster_epochs", hp.cocluster_epochs},
      {"bias_epochs", hp.bias_epochs},
      {"bias_reg_item", hp.bias_reg_item},
      {"bias_reg_user", hp.bias_reg_user},
      {"seed", hp.seed},
  };
}

void merge_hyper_params(const json& j, HyperParams& hp, std::vector<std::string>& violations,
                        const std::string& prefix) {
  if (!j.is_object()) {
    violations.push_back(prefix + ": expected an object");
    return;
  }
  auto count = [&](const std::string& key, const json& v, std::size_t& out) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      violations.push_back(prefix + key + ": expected a non-negative integer");
      return;
    }
    out = v.get<std::size_t>();
  };
  auto real = [&](const std::string& key, const json& v, double& out) {
    if (!v.is_number()) {
      violations.push_back(prefix + key + ": expected a number");
      return;
    }
    out = v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "knn_k") count(key, v, hp.knn_k);
    else if (key == "knn_min_k") count(key, v, hp.knn_min_k);
    else if (key == "knn_min_support") count(key, v, hp.knn_min_support);
    else if (key == "nmf_factors") count(key, v, hp.nmf_factors);
    else if (key == "nmf_epochs") count(key, v, hp.nmf_epochs);
    else if (key == "user_clusters") count(key, v, hp.user_clusters);
    else if (key == "item_clusters") count(key, v, hp.item_clusters);
    else if (key == "cocluster_epochs") count(key, v, hp.cocluster_epochs);
    else if (key == "bias_epochs") count(key, v, hp.bias_epochs);
    else if (key == "nmf_reg_user") real(key, v, hp.nmf_reg_user);
    else if (key == "nmf_reg_item") real(key, v, hp.nmf_reg_item);
    else if (key == "bias_reg_item") real(key, v, hp.bias_reg_item);
    else if (key == "bias_reg_user") real(key, v, hp.bias_reg_user);
    else if (key == "seed") {
      if (!v.is_number_unsigned()) {
        violations.push_back(prefix + key + ": expected a non-negative integer");
      } else {
        hp.seed = v.get<std::uint64_t>();
      }
    } else if (key == "similarity") {
      auto s = v.is_string() ? parse_similarity(v.get<std::string>()) : std::nullopt;
      if (!s) {
        violations.push_back(prefix + key + ": expected one of msd, cosine, pearson");
      } else {
        hp.similarity = *s;
      }
    } else {
      violations.push_back(prefix + key + ": unknown key");
    }
  }
}

}  // namespace json_io

namespace {

using json_io::json;

constexpr const char* kFormat = "popaudit-model";
constexpr int kVersion = 1;

json bools(const std::vector<bool>& v) {
  json out = json::array();
  for (bool b : v) out.push_back(b);
  return out;
}

std::vector<bool> read_bools(const json& j) {
  std::vector<bool> out;
  for (const auto& b : j) out.push_back(b.get<bool>());
  return out;
}

HyperParams read_hp(const json& j) {
  HyperParams hp;
  std::vector<std::string> violations;
  json_io::merge_hyper_params(j, hp, violations, "hyperparams.");
  if (!violations.empty()) {
    throw ConfigError(std::move(violations));
  }
  return hp;
}

}  // namespace

std::string dump_model(const TrainedModel& model) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["algorithm"] = std::string(algorithm_name(model.algorithm()));
  doc["hyperparams"] = json_io::to_json(model.hyper_params());
  doc["clip_range"] = {model.clip_range().min, model.clip_range().max};
  doc["global_mean"] = model.global_mean();

  json params;
  if (const auto* m = dynamic_cast<const BaselineModel*>(&model)) {
    params["user_bias"] = m->user_bias();
    params["item_bias"] = m->item_bias();
    params["known_users"] = bools(m->known_users());
    params["known_items"] = bools(m->known_items());
  } else if (const auto* m = dynamic_cast<const KnnModel*>(&model)) {
    const auto& train = m->train();
    json users = json::array(), items = json::array(), ratings = json::array();
    for (UserIndex u = 0; u < train.user_count(); ++u) users.push_back(train.user_id(u));
    for (ItemIndex i = 0; i < train.item_count(); ++i) items.push_back(train.item_id(i));
    for (const auto& r : train.ratings()) ratings.push_back({r.user, r.item, r.value});
    params["user_ids"] = std::move(users);
    params["item_ids"] = std::move(items);
    params["ratings"] = std::move(ratings);
    params["similarity"] = m->similarity_matrix();
  } else if (const auto* m = dynamic_cast<const NmfModel*>(&model)) {
    params["factors"] = m->factors();
    params["user_factors"] = m->user_factors();
    params["item_factors"] = m->item_factors();
    params["known_users"] = bools(m->known_users());
    params["known_items"] = bools(m->known_items());
  } else if (const auto* m = dynamic_cast<const CoClusteringModel*>(&model)) {
    const auto& s = m->state();
    params["user_clusters"] = s.user_clusters;
    params["item_clusters"] = s.item_clusters;
    params["user_cluster"] = s.user_cluster;
    params["item_cluster"] = s.item_cluster;
    params["user_mean"] = s.user_mean;
    params["item_mean"] = s.item_mean;
    params["known_users"] = bools(s.known_users);
    params["known_items"] = bools(s.known_items);
    params["user_cluster_mean"] = s.user_cluster_mean;
    params["item_cluster_mean"] = s.item_cluster_mean;
    params["cocluster_mean"] = s.cocluster_mean;
  } else {
    throw FitError("dump_model: unsupported model type");
  }
  doc["parameters"] = std::move(params);
  return doc.dump(1);
}

std::unique_ptr<TrainedModel> load_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FitError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kFormat || doc.at("version") != kVersion) {
      throw FitError("unsupported model format");
    }
    const auto algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    if (!algorithm) {
      throw FitError("unknown algorithm tag in model file");
    }
    const HyperParams hp = read_hp(doc.at("hyperparams"));
    const RatingRange range{doc.at("clip_range").at(0).get<double>(), doc.at("clip_range").at(1).get<double>()};
    const double mu = doc.at("global_mean").get<double>();
    const json& p = doc.at("parameters");

    switch (*algorithm) {
      case Algorithm::UserItemAvg:
        return std::make_unique<BaselineModel>(mu, p.at("user_bias").get<std::vector<double>>(),
                                               p.at("item_bias").get<std::vector<double>>(),
                                               read_bools(p.at("known_users")), read_bools(p.at("known_items")), range,
                                               hp);
      case Algorithm::UserKNN:
      case Algorithm::UserKNNAvg: {
        std::vector<Rating> ratings;
        for (const auto& r : p.at("ratings")) {
          ratings.push_back({r.at(0).get<UserIndex>(), r.at(1).get<ItemIndex>(), r.at(2).get<double>()});
        }
        auto train = RatingTable::from_indexed(p.at("user_ids").get<std::vector<RawId>>(),
                                               p.at("item_ids").get<std::vector<RawId>>(), std::move(ratings), range);
        return std::make_unique<KnnModel>(std::move(train), p.at("similarity").get<std::vector<double>>(),
                                          *algorithm == Algorithm::UserKNNAvg, hp);
      }
      case Algorithm::NMF:
        return std::make_unique<NmfModel>(mu, p.at("factors").get<std::size_t>(),
                                          p.at("user_factors").get<std::vector<double>>(),
                                          p.at("item_factors").get<std::vector<double>>(),
                                          read_bools(p.at("known_users")), read_bools(p.at("known_items")), range, hp);
      case Algorithm::CoClustering: {
        CoClusterState s;
        s.user_clusters = p.at("user_clusters").get<std::size_t>();
        s.item_clusters = p.at("item_clusters").get<std::size_t>();
        s.user_cluster = p.at("user_cluster").get<std::vector<std::size_t>>();
        s.item_cluster = p.at("item_cluster").get<std::vector<std::size_t>>();
        s.user_mean = p.at("user_mean").get<std::vector<double>>();
        s.item_mean = p.at("item_mean").get<std::vector<double>>();
        s.known_users = read_bools(p.at("known_users"));
        s.known_items = read_bools(p.at("known_items"));
        s.user_cluster_mean = p.at("user_cluster_mean").get<std::vector<double>>();
        s.item_cluster_mean = p.at("item_cluster_mean").get<std::vector<double>>();
        s.cocluster_mean = p.at("cocluster_mean").get<std::vector<double>>();
        return std::make_unique<CoClusteringModel>(mu, std::move(s), range, hp);
      }
    }
  } catch (const json::exception& e) {
    throw FitError(std::string("malformed model file: ") + e.what());
  }
  throw FitError("unknown algorithm tag in model file");
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FitError("cannot write model file " + path.string());
  }
  out << dump_model(model) << '\n';
}

std::unique_ptr<TrainedModel> load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FitError("cannot read model file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

}  // namespace popaudit
