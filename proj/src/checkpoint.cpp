#include "ecodse/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "ecodse/errors.hpp"

namespace ecodse {

using nlohmann::json;

namespace {

json metrics_to_json(const std::map<std::string, TargetMetrics>& metrics) {
  json j = json::object();
  for (const auto& [target, m] : metrics) {
    json jm;
    jm["rmse"] = m.rmse;
    jm["mae"] = m.mae;
    if (m.mape) jm["mape"] = *m.mape;
    else jm["mape"] = nullptr;
    j[target] = std::move(jm);
  }
  return j;
}

std::map<std::string, TargetMetrics> metrics_from_json(const json& j) {
  std::map<std::string, TargetMetrics> metrics;
  for (const auto& [target, jm] : j.items()) {
    TargetMetrics m;
    m.rmse = jm.at("rmse").get<double>();
    m.mae = jm.at("mae").get<double>();
    if (!jm.at("mape").is_null()) m.mape = jm["mape"].get<double>();
    metrics[target] = m;
  }
  return metrics;
}

json config_to_json(const EcognnConfig& c) {
  json j;
  j["env_layers"] = c.env_layers;
  j["action_layers"] = c.action_layers;
  j["hidden_dim"] = c.hidden_dim;
  j["temp_hidden_dim"] = c.temp_hidden_dim;
  j["env_kind"] = layer_kind_name(c.env_kind);
  j["action_kind"] = layer_kind_name(c.action_kind);
  j["tau_min"] = c.tau_min;
  j["tau_max"] = c.tau_max;
  j["targets"] = c.targets;
  j["seed"] = c.seed;
  return j;
}

EcognnConfig config_from_json(const json& j) {
  EcognnConfig c;
  c.env_layers = j.at("env_layers").get<int>();
  c.action_layers = j.at("action_layers").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.temp_hidden_dim = j.at("temp_hidden_dim").get<int>();
  c.env_kind = layer_kind_from_name(j.at("env_kind").get<std::string>());
  c.action_kind = layer_kind_from_name(j.at("action_kind").get<std::string>());
  c.tau_min = j.at("tau_min").get<double>();
  c.tau_max = j.at("tau_max").get<double>();
  c.targets = j.at("targets").get<std::vector<std::string>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const CheckpointData& data, const std::string& path) {
  json j;
  j["format"] = "ecodse-checkpoint";
  j["version"] = 1;
  j["config"] = config_to_json(data.model.config());
  j["feature_dim"] = data.model.feature_dim();
  j["edge_feature_dim"] = data.model.edge_feature_dim();
  j["feature_norm"] = {{"scale", data.model.feature_scale()},
                       {"offset", data.model.feature_offset()}};
  json params = json::object();
  for (const auto& [name, m] : data.model.params()) {
    params[name] = {{"rows", m.rows()},
                    {"cols", m.cols()},
                    {"data", std::vector<double>(m.flat().begin(), m.flat().end())}};
  }
  j["params"] = std::move(params);
  json history = json::array();
  for (const auto& rec : data.history) {
    json jr;
    jr["epoch"] = rec.epoch;
    jr["train_loss"] = rec.train_loss;
    jr["train"] = metrics_to_json(rec.train);
    jr["validation"] = metrics_to_json(rec.validation);
    history.push_back(std::move(jr));
  }
  j["history"] = std::move(history);
  json norm = json::object();
  for (const auto& [target, n] : data.target_norm)
    norm[target] = {{"scale", n.scale}, {"offset", n.offset}};
  j["target_norm"] = std::move(norm);
  if (!data.run_config.empty()) j["run_config"] = json::parse(data.run_config);
  j["seed"] = data.seed;

  std::ofstream out(path);
  if (!out) throw Error("checkpoint: cannot write '" + path + "'");
  out << j.dump() << '\n';
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("checkpoint: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint '" + path + "': " + e.what());
  }
  try {
    if (j.value("format", std::string()) != "ecodse-checkpoint")
      throw SchemaError("checkpoint '" + path + "': unrecognized format tag");
    CheckpointData data;
    EcognnConfig config = config_from_json(j.at("config"));
    data.model = EcognnModel(config, j.at("feature_dim").get<int>(),
                             j.at("edge_feature_dim").get<int>());
    data.model.set_feature_normalization(
        j.at("feature_norm").at("scale").get<std::vector<double>>(),
        j.at("feature_norm").at("offset").get<std::vector<double>>());
    for (const auto& [name, jm] : j.at("params").items()) {
      Matrix& p = data.model.param(name);
      if (p.rows() != jm.at("rows").get<int>() || p.cols() != jm.at("cols").get<int>())
        throw SchemaError("checkpoint '" + path + "': shape mismatch for '" + name + "'");
      const auto values = jm.at("data").get<std::vector<double>>();
      if (values.size() != p.size())
        throw SchemaError("checkpoint '" + path + "': size mismatch for '" + name + "'");
      std::copy(values.begin(), values.end(), p.flat().begin());
    }
    for (const auto& jr : j.at("history")) {
      EpochRecord rec;
      rec.epoch = jr.at("epoch").get<int>();
      rec.train_loss = jr.at("train_loss").get<double>();
      rec.train = metrics_from_json(jr.at("train"));
      rec.validation = metrics_from_json(jr.at("validation"));
      data.history.push_back(std::move(rec));
    }
    for (const auto& [target, jn] : j.at("target_norm").items())
      data.target_norm[target] = {jn.at("scale").get<double>(), jn.at("offset").get<double>()};
    if (j.contains("run_config")) data.run_config = j["run_config"].dump();
    data.seed = j.at("seed").get<std::uint64_t>();
    return data;
  } catch (const json::exception& e) {
    throw SchemaError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace ecodse
