#include "ecodse/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecodse/errors.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

namespace {

// Stable pseudo-random coefficient in [0,1) keyed by (seed, knob, tag).
double coeff(std::uint64_t seed, std::size_t knob, std::uint64_t tag) {
  const std::uint64_t h = splitmix64(mix_seed(seed, knob * 0x9e3779b97f4a7c15ULL + tag));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double knob_position(const DesignSpace& space, std::size_t knob, const KnobValue& value) {
  const int idx = space.domain_index(knob, value);
  check(idx >= 0, "synthetic evaluator: value outside knob domain");
  const auto n = space.knobs()[knob].domain.size();
  return n <= 1 ? 0.0 : static_cast<double>(idx) / static_cast<double>(n - 1);
}

}  // namespace

QorVector SyntheticEvaluator::evaluate(const DesignSpace& space, const Configuration& config) {
  space.require_valid(config);
  const std::size_t k = space.knobs().size();

  double speedup = 1.0;
  double load = 0.0;
  double weight_total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = knob_position(space, i, config.values[i]);
    const double w_lat = 0.3 + 0.7 * coeff(seed_, i, 1);
    speedup *= 1.0 + 3.0 * w_lat * x;
    const double w_area = 0.2 + 0.8 * coeff(seed_, i, 2);
    load += w_area * x;
    weight_total += w_area;
  }
  const double usage = weight_total > 0.0 ? load / weight_total : 0.0;

  QorVector q;
  q.latency = 1.0e5 / speedup;
  auto util = [&](std::uint64_t tag, double spread) {
    const double base = 0.02 + 0.08 * coeff(seed_, 9001, tag);
    return std::clamp(base + spread * usage, 0.0, 1.3);
  };
  q.lut = util(11, 0.85);
  q.ff = util(12, 0.75);
  q.dsp = util(13, 0.95);
  q.bram = util(14, 0.60);
  return q;
}

TableEvaluator TableEvaluator::from_csv(const std::string& path, const DesignSpace& space) {
  std::ifstream in(path);
  if (!in) throw ParseError("table evaluator: cannot open '" + path + "'");
  TableEvaluator table;
  std::string line;
  std::vector<std::string> header;
  const std::size_t k = space.knobs().size();
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      if (header.size() < k + 2)
        throw SchemaError("table evaluator '" + path + "': header needs knob columns and QoR");
      continue;
    }
    if (cells.size() != header.size())
      throw SchemaError("table evaluator '" + path + "' line " + std::to_string(line_no) +
                        ": column count mismatch");
    Configuration config;
    for (std::size_t i = 0; i < k; ++i) {
      // Match numeric cells against numeric domains, else keep the string.
      try {
        std::size_t used = 0;
        const double num = std::stod(cells[i], &used);
        if (used == cells[i].size() && space.domain_index(i, KnobValue(num)) >= 0) {
          config.values.emplace_back(num);
          continue;
        }
      } catch (...) {
      }
      config.values.emplace_back(cells[i]);
    }
    space.require_valid(config);
    QorVector q;
    for (std::size_t i = k; i < header.size(); ++i) q.set(header[i], std::stod(cells[i]));
    if (q.latency <= 0.0)
      throw SchemaError("table evaluator '" + path + "' line " + std::to_string(line_no) +
                        ": latency must be positive");
    table.rows_[config.key()] = q;
  }
  if (table.rows_.empty()) throw SchemaError("table evaluator '" + path + "': no data rows");
  return table;
}

QorVector TableEvaluator::evaluate(const DesignSpace& space, const Configuration& config) {
  space.require_valid(config);
  const auto it = rows_.find(config.key());
  if (it == rows_.end())
    throw Error("table evaluator: no row for configuration " + config.key());
  return it->second;
}

SurrogateEvaluator::SurrogateEvaluator(EcognnModel model,
                                       std::map<std::string, AffineNorm> target_norm,
                                       CdfgGraph base_graph, int slot_feature_index,
                                       std::uint64_t seed)
    : model_(std::move(model)),
      target_norm_(std::move(target_norm)),
      base_graph_(std::move(base_graph)),
      slot_feature_index_(slot_feature_index),
      seed_(seed) {}

QorVector SurrogateEvaluator::evaluate(const DesignSpace& space, const Configuration& config) {
  const CdfgGraph templated =
      apply_configuration(base_graph_, space, config, slot_feature_index_);
  ForwardOptions opts;
  opts.noise_seed = mix_seed(seed_, space.rank_of(config));
  QorVector pred = model_.predict(templated, opts);
  for (const auto& target : model_.config().targets) {
    const auto it = target_norm_.find(target);
    if (it != target_norm_.end()) pred.set(target, it->second.denormalize(pred.get(target)));
  }
  // The search needs positive cycles and utilizations; clip stray predictions.
  pred.latency = std::max(pred.latency, 1.0);
  for (auto field : {"lut", "ff", "dsp", "bram"})
    pred.set(field, std::clamp(pred.get(field), 0.0, 1.5));
  return pred;
}

}  // namespace ecodse
