#include "ecodse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ecodse/errors.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

using nlohmann::json;

void DatasetManifest::validate() const {
  int block_total = 0;
  for (const auto& b : blocks) {
    if (b.size <= 0) throw SchemaError("manifest: block '" + b.name + "' has size " +
                                       std::to_string(b.size));
    block_total += b.size;
  }
  const int expected = block_total + static_cast<int>(numeric_fields.size());
  if (feature_dim != expected)
    throw SchemaError("manifest: feature_dim " + std::to_string(feature_dim) +
                      " does not match blocks+numeric total " + std::to_string(expected));
  if (edge_feature_dim < 0) throw SchemaError("manifest: negative edge_feature_dim");
  const double sum = train_fraction + test_fraction + validation_fraction;
  if (std::abs(sum - 1.0) > 1e-9)
    throw SchemaError("manifest: split fractions sum to " + std::to_string(sum) + ", not 1");
  if (!slot_field.empty() &&
      std::find(numeric_fields.begin(), numeric_fields.end(), slot_field) == numeric_fields.end())
    throw SchemaError("manifest: slot_field '" + slot_field + "' is not a numeric field");
}

int DatasetManifest::numeric_offset() const {
  int off = 0;
  for (const auto& b : blocks) off += b.size;
  return off;
}

int DatasetManifest::slot_feature_index() const {
  check(!slot_field.empty(), "manifest: no slot_field declared");
  const auto it = std::find(numeric_fields.begin(), numeric_fields.end(), slot_field);
  check(it != numeric_fields.end(), "manifest: slot_field not found");
  return numeric_offset() + static_cast<int>(it - numeric_fields.begin());
}

namespace {

void validate_features(const CdfgGraph& g, const DatasetManifest& m) {
  if (g.feature_dim() != m.feature_dim)
    throw SchemaError("graph '" + g.benchmark_id + "': node feature dimension " +
                      std::to_string(g.feature_dim()) + " does not match manifest feature_dim " +
                      std::to_string(m.feature_dim));
  if (!g.edges.empty() && g.edge_feature_dim() != m.edge_feature_dim)
    throw SchemaError("graph '" + g.benchmark_id + "': edge feature dimension " +
                      std::to_string(g.edge_feature_dim()) +
                      " does not match manifest edge_feature_dim " +
                      std::to_string(m.edge_feature_dim));
  for (const auto& n : g.nodes) {
    int col = 0;
    for (const auto& b : m.blocks) {
      int ones = 0;
      for (int i = 0; i < b.size; ++i) {
        const double v = n.feature[col + i];
        if (v != 0.0 && v != 1.0)
          throw SchemaError("graph '" + g.benchmark_id + "': node " + std::to_string(n.id) +
                            " block '" + b.name + "' entry is not 0/1");
        if (v == 1.0) ++ones;
      }
      if (ones > 1)
        throw SchemaError("graph '" + g.benchmark_id + "': node " + std::to_string(n.id) +
                          " block '" + b.name + "' has more than one active entry");
      col += b.size;
    }
    for (std::size_t i = col; i < n.feature.size(); ++i) {
      const double v = n.feature[i];
      if (!std::isfinite(v) || v < 0.0)
        throw SchemaError("graph '" + g.benchmark_id + "': node " + std::to_string(n.id) +
                          " numeric feature " + std::to_string(i - col) + " is negative or non-finite");
    }
  }
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.feature_dim = j.at("feature_dim").get<int>();
  m.edge_feature_dim = j.value("edge_feature_dim", 0);
  if (j.contains("blocks"))
    for (const auto& jb : j["blocks"])
      m.blocks.push_back({jb.at("name").get<std::string>(), jb.at("size").get<int>()});
  if (j.contains("numeric"))
    for (const auto& jn : j["numeric"]) m.numeric_fields.push_back(jn.get<std::string>());
  m.slot_field = j.value("slot_field", std::string());
  if (j.contains("normalization"))
    for (const auto& [target, jn] : j["normalization"].items())
      m.normalization[target] = {jn.value("scale", 1.0), jn.value("offset", 0.0)};
  m.split_seed = j.value("split_seed", std::uint64_t{0});
  if (j.contains("split_fractions")) {
    const auto& f = j["split_fractions"];
    if (!f.is_array() || f.size() != 3)
      throw SchemaError("manifest: split_fractions must be [train, test, validation]");
    m.train_fraction = f[0].get<double>();
    m.test_fraction = f[1].get<double>();
    m.validation_fraction = f[2].get<double>();
  }
  m.self_loops = j.value("self_loops", false);
  m.validate();
  return m;
}

json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["type"] = "manifest";
  j["feature_dim"] = m.feature_dim;
  j["edge_feature_dim"] = m.edge_feature_dim;
  j["blocks"] = json::array();
  for (const auto& b : m.blocks) j["blocks"].push_back({{"name", b.name}, {"size", b.size}});
  j["numeric"] = m.numeric_fields;
  if (!m.slot_field.empty()) j["slot_field"] = m.slot_field;
  json jn = json::object();
  for (const auto& [target, norm] : m.normalization)
    jn[target] = {{"scale", norm.scale}, {"offset", norm.offset}};
  j["normalization"] = std::move(jn);
  j["split_seed"] = m.split_seed;
  j["split_fractions"] = {m.train_fraction, m.test_fraction, m.validation_fraction};
  j["self_loops"] = m.self_loops;
  return j;
}

QorVector qor_from_json(const json& j) {
  QorVector q;
  q.latency = j.at("latency").get<double>();
  q.lut = j.at("lut").get<double>();
  q.ff = j.at("ff").get<double>();
  q.dsp = j.at("dsp").get<double>();
  q.bram = j.at("bram").get<double>();
  if (j.contains("cp")) q.cp = j["cp"].get<double>();
  if (j.contains("power")) q.power = j["power"].get<double>();
  return q;
}

json qor_to_json(const QorVector& q) {
  json j;
  j["latency"] = q.latency;
  j["lut"] = q.lut;
  j["ff"] = q.ff;
  j["dsp"] = q.dsp;
  j["bram"] = q.bram;
  if (q.cp) j["cp"] = *q.cp;
  if (q.power) j["power"] = *q.power;
  return j;
}

CdfgGraph graph_from_json(const json& j) {
  CdfgGraph g;
  const auto& jid = j.at("id");
  g.benchmark_id = jid.is_string() ? jid.get<std::string>() : jid.dump();
  for (const auto& jn : j.at("nodes")) {
    CdfgNode n;
    n.id = jn.at("id").get<int>();
    n.feature = jn.at("feat").get<std::vector<double>>();
    n.is_pragma_node = jn.value("pragma", false);
    g.nodes.push_back(std::move(n));
  }
  if (j.contains("edges"))
    for (const auto& je : j["edges"]) {
      CdfgEdge e;
      e.src = je.at("src").get<int>();
      e.dst = je.at("dst").get<int>();
      if (je.contains("feat")) e.feature = je["feat"].get<std::vector<double>>();
      g.edges.push_back(std::move(e));
    }
  if (j.contains("label") && !j["label"].is_null()) g.label = qor_from_json(j["label"]);
  if (j.contains("slots"))
    for (const auto& [name, node_id] : j["slots"].items())
      g.pragma_slots[name] = node_id.get<int>();
  return g;
}

json graph_to_json(const CdfgGraph& g) {
  json j;
  j["id"] = g.benchmark_id;
  j["nodes"] = json::array();
  for (const auto& n : g.nodes)
    j["nodes"].push_back({{"id", n.id}, {"feat", n.feature}, {"pragma", n.is_pragma_node}});
  j["edges"] = json::array();
  for (const auto& e : g.edges)
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"feat", e.feature}});
  if (g.label) j["label"] = qor_to_json(*g.label);
  json slots = json::object();
  for (const auto& [name, node_id] : g.pragma_slots) slots[name] = node_id;
  j["slots"] = std::move(slots);
  return j;
}

}  // namespace

std::string manifest_to_json_line(const DatasetManifest& manifest) {
  return manifest_to_json(manifest).dump();
}

std::string graph_to_json_line(const CdfgGraph& graph) { return graph_to_json(graph).dump(); }

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("dataset: cannot open '" + path + "'");
  Dataset ds;
  std::string line;
  int line_no = 0;
  bool have_manifest = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("dataset '" + path + "' line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    try {
      if (!have_manifest) {
        ds.manifest = manifest_from_json(j);
        have_manifest = true;
        continue;
      }
      CdfgGraph g = graph_from_json(j);
      g.canonicalize(ds.manifest.self_loops);
      validate_features(g, ds.manifest);
      ds.graphs.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw SchemaError("dataset '" + path + "' line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("dataset '" + path + "' line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_manifest) throw SchemaError("dataset '" + path + "': missing manifest record");
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("dataset: cannot write '" + path + "'");
  out << manifest_to_json_line(dataset.manifest) << '\n';
  for (const auto& g : dataset.graphs) out << graph_to_json_line(g) << '\n';
}

DatasetSplit split_dataset(const std::vector<CdfgGraph>& graphs, const DatasetManifest& manifest) {
  const std::size_t n = graphs.size();
  if (n < 3) throw Error("split_dataset: need at least 3 graphs, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed_for(manifest.split_seed, "dataset-split"));
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_test = static_cast<std::size_t>(std::floor(manifest.test_fraction * n));
  const auto n_val = static_cast<std::size_t>(std::floor(manifest.validation_fraction * n));
  auto n_train = static_cast<std::size_t>(std::floor(manifest.train_fraction * n));
  n_train += n - (n_train + n_test + n_val);  // remainder goes to train

  DatasetSplit split;
  std::size_t pos = 0;
  for (; pos < n_train; ++pos) split.train.push_back(graphs[order[pos]]);
  for (; pos < n_train + n_test; ++pos) split.test.push_back(graphs[order[pos]]);
  for (; pos < n; ++pos) split.validation.push_back(graphs[order[pos]]);
  return split;
}

}  // namespace ecodse
