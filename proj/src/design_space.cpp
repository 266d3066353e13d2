#include "ecodse/design_space.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ecodse/errors.hpp"

namespace ecodse {

using nlohmann::json;

std::string knob_value_to_string(const KnobValue& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  // Shortest round-trip representation keeps keys and CSV output stable.
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(v));
  (void)ec;
  return std::string(buf, ptr);
}

bool knob_value_is_numeric(const KnobValue& v) { return std::holds_alternative<double>(v); }

double knob_value_number(const KnobValue& v) {
  check(knob_value_is_numeric(v), "knob value is not numeric");
  return std::get<double>(v);
}

std::string Configuration::key() const {
  std::string k;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) k += '|';
    k += knob_value_to_string(values[i]);
  }
  return k;
}

DesignSpace::DesignSpace(std::vector<Knob> knobs) : knobs_(std::move(knobs)) {
  size_ = knobs_.empty() ? 0 : 1;
  for (const auto& knob : knobs_) {
    if (knob.domain.empty())
      throw SchemaError("design space: knob '" + knob.name + "' has an empty domain");
    const std::uint64_t d = knob.domain.size();
    if (size_ > std::numeric_limits<std::uint64_t>::max() / d)
      throw SchemaError("design space: size overflows 64 bits");
    size_ *= d;
  }
}

static KnobValue knob_value_from_json(const json& j) {
  if (j.is_number()) return KnobValue(j.get<double>());
  if (j.is_string()) return KnobValue(j.get<std::string>());
  throw SchemaError("design space: domain values must be numbers or strings");
}

DesignSpace DesignSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("design space: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("design space '" + path + "': " + e.what());
  }
  if (!j.is_object() || !j.contains("knobs") || !j["knobs"].is_array())
    throw SchemaError("design space '" + path + "': expected {\"knobs\": [...]}");
  std::vector<Knob> knobs;
  for (const auto& jk : j["knobs"]) {
    Knob knob;
    if (!jk.contains("name") || !jk.contains("domain"))
      throw SchemaError("design space '" + path + "': knob needs name and domain");
    knob.name = jk["name"].get<std::string>();
    for (const auto& jv : jk["domain"]) knob.domain.push_back(knob_value_from_json(jv));
    knobs.push_back(std::move(knob));
  }
  return DesignSpace(std::move(knobs));
}

std::string DesignSpace::to_json() const {
  json j;
  j["knobs"] = json::array();
  for (const auto& knob : knobs_) {
    json jk;
    jk["name"] = knob.name;
    jk["domain"] = json::array();
    for (const auto& v : knob.domain) {
      if (knob_value_is_numeric(v)) jk["domain"].push_back(std::get<double>(v));
      else jk["domain"].push_back(std::get<std::string>(v));
    }
    j["knobs"].push_back(std::move(jk));
  }
  return j.dump();
}

int DesignSpace::domain_index(std::size_t knob, const KnobValue& v) const {
  const auto& domain = knobs_[knob].domain;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == v) return static_cast<int>(i);
  return -1;
}

bool DesignSpace::contains(const Configuration& config) const {
  if (config.values.size() != knobs_.size()) return false;
  for (std::size_t i = 0; i < knobs_.size(); ++i)
    if (domain_index(i, config.values[i]) < 0) return false;
  return true;
}

void DesignSpace::require_valid(const Configuration& config) const {
  if (config.values.size() != knobs_.size())
    throw SchemaError("configuration has " + std::to_string(config.values.size()) +
                      " values for " + std::to_string(knobs_.size()) + " knobs");
  for (std::size_t i = 0; i < knobs_.size(); ++i)
    if (domain_index(i, config.values[i]) < 0)
      throw SchemaError("value " + knob_value_to_string(config.values[i]) +
                        " is not in the domain of knob '" + knobs_[i].name + "'");
}

Configuration DesignSpace::config_from_indices(const std::vector<int>& idx) const {
  check(idx.size() == knobs_.size(), "config_from_indices: wrong arity");
  Configuration c;
  c.values.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    check(idx[i] >= 0 && idx[i] < static_cast<int>(knobs_[i].domain.size()),
          "config_from_indices: index out of range");
    c.values.push_back(knobs_[i].domain[idx[i]]);
  }
  return c;
}

std::vector<int> DesignSpace::indices_of(const Configuration& config) const {
  require_valid(config);
  std::vector<int> idx(knobs_.size());
  for (std::size_t i = 0; i < knobs_.size(); ++i) idx[i] = domain_index(i, config.values[i]);
  return idx;
}

std::uint64_t DesignSpace::rank_of(const Configuration& config) const {
  const auto idx = indices_of(config);
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    rank = rank * knobs_[i].domain.size() + static_cast<std::uint64_t>(idx[i]);
  return rank;
}

Configuration DesignSpace::config_at_rank(std::uint64_t rank) const {
  check(rank < size_, "config_at_rank: rank out of range");
  std::vector<int> idx(knobs_.size());
  for (std::size_t i = knobs_.size(); i-- > 0;) {
    const std::uint64_t d = knobs_[i].domain.size();
    idx[i] = static_cast<int>(rank % d);
    rank /= d;
  }
  return config_from_indices(idx);
}

Configuration DesignSpace::random_config(Rng& rng) const {
  std::vector<int> idx(knobs_.size());
  for (std::size_t i = 0; i < knobs_.size(); ++i) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(knobs_[i].domain.size()) - 1);
    idx[i] = pick(rng);
  }
  return config_from_indices(idx);
}

void for_each_configuration(const DesignSpace& space,
                            const std::function<void(const Configuration&)>& fn,
                            std::uint64_t cap) {
  if (space.size() > cap)
    throw Error("enumeration refused: design space has " + std::to_string(space.size()) +
                " configurations, cap is " + std::to_string(cap));
  std::vector<int> idx(space.knobs().size(), 0);
  if (space.size() == 0) return;
  while (true) {
    fn(space.config_from_indices(idx));
    // odometer increment, last knob fastest
    std::size_t k = idx.size();
    while (k-- > 0) {
      if (++idx[k] < static_cast<int>(space.knobs()[k].domain.size())) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

std::vector<Configuration> enumerate_space(const DesignSpace& space, std::uint64_t cap) {
  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>(space.size()));
  for_each_configuration(space, [&](const Configuration& c) { out.push_back(c); }, cap);
  return out;
}

CdfgGraph apply_configuration(const CdfgGraph& graph, const DesignSpace& space,
                              const Configuration& config, int slot_feature_index) {
  space.require_valid(config);
  for (const auto& [slot, node_id] : graph.pragma_slots) {
    (void)node_id;
    bool known = false;
    for (const auto& knob : space.knobs())
      if (knob.name == slot) known = true;
    if (!known)
      throw SchemaError("graph '" + graph.benchmark_id + "': pragma slot '" + slot +
                        "' matches no knob in the design space");
  }
  CdfgGraph out = graph;
  for (std::size_t i = 0; i < space.knobs().size(); ++i) {
    const auto& knob = space.knobs()[i];
    auto it = out.pragma_slots.find(knob.name);
    if (it == out.pragma_slots.end())
      throw SchemaError("no slot for " + knob.name);
    const int row = out.node_row(it->second);
    auto& feat = out.nodes[row].feature;
    check(slot_feature_index >= 0 && slot_feature_index < static_cast<int>(feat.size()),
          "slot feature index out of range");
    const KnobValue& v = config.values[i];
    feat[slot_feature_index] =
        knob_value_is_numeric(v) ? knob_value_number(v) : static_cast<double>(space.domain_index(i, v));
  }
  return out;
}

}  // namespace ecodse
